"""Command-line interface: ``proofsched VERB ARGS``.

Exit codes: 0 success, 1 negative answer, 2 usage or input error,
3 a cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from .formula import FormulaError, format_formula
from .net import (
    MalformedStructure, NetError, SwitchingCapExceeded, check_structure, dr_check, from_json, normalize,
    strategy, to_dot, to_json,
)
from .process import (
    CapExceeded, ProcessError, congruent, enumerate_pairings, execute,
    format_pairing, format_term, is_consistent, make_pairing, maximal_consistent_subpairings,
    parse_term, reachable_terms,
)
from .schedule import (
    DEFAULT_CAP_ATOMS, induced_pairing, pairing_to_schedule, run_schedule,
    schedule_from_json, schedule_to_json, synthesize,
)
from .translate import ASYNC, SYNC, EnumerationCapExceeded, proof_assign, ttype

OK, NEGATIVE, USAGE, CAP = 0, 1, 2, 3


class _Usage(Exception):
    pass


def _pairs(text: str):
    found = re.findall(r"(\d+)\s*[,-]\s*(\d+)", text)
    if not found and text.strip() not in ("", "[]"):
        raise _Usage(f"cannot read pairs from {text!r}")
    return [(int(a), int(b)) for a, b in found]


def _load(path: str) -> dict:
    if path == "-":
        return json.load(sys.stdin)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _cycle_pairs(c, cycle) -> list[list[int]]:
    on = set(cycle)
    return [list(x) for x in sorted(c) if x[0] in on and x[1] in on]


def _pairing_text(c) -> str:
    return json.dumps(format_pairing(c))


class _Report:
    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.lines: list[str] = []
        self.data: dict = {}

    def line(self, text: str) -> None:
        self.lines.append(text)

    def emit(self) -> None:
        if self.as_json:
            print(json.dumps(self.data, indent=2, sort_keys=True))
        else:
            for text in self.lines:
                print(text)


def _write_dot(path: str | None, net) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(to_dot(net))


def _schedule_for(args, p):
    if args.schedule:
        return schedule_from_json(_load(args.schedule))
    q = parse_term(args.to or "1")
    s = synthesize(p, q, args.variant, args.cap_atoms)
    if s is None:
        raise LookupError("no schedule")
    return s


# -- verbs ---------------------------------------------------------------------------

def cmd_parse(args, out: _Report) -> int:
    p = parse_term(args.term)
    out.line(format_term(p))
    out.data = {"term": format_term(p)}
    return OK


def cmd_congruent(args, out: _Report) -> int:
    p, q = parse_term(args.term), parse_term(args.other)
    yes = congruent(p, q)
    out.line("congruent" if yes else "not congruent")
    out.data = {"congruent": yes}
    return OK if yes else NEGATIVE


def cmd_execute(args, out: _Report) -> int:
    p = parse_term(args.term)
    trace = execute(p, _pairs(args.steps or ""))
    out.line(f"final: {format_term(trace.final)}")
    out.line(f"steps: {_pairing_text(trace.steps)}")
    out.data = {"final": format_term(trace.final), "steps": [list(s) for s in trace.steps]}
    return OK


def cmd_reachable(args, out: _Report) -> int:
    p = parse_term(args.term)
    found = reachable_terms(p)
    rows = sorted((sorted(c), format_term(q)) for c, q in found.items())
    for c, q in rows:
        out.line(f"{json.dumps([list(x) for x in c])}  {q}")
    out.data = {"reachable": [{"pairing": [list(x) for x in c], "term": q} for c, q in rows]}
    return OK


def cmd_pairings(args, out: _Report) -> int:
    p = parse_term(args.term)
    rows = []
    for c in sorted(enumerate_pairings(p, args.total), key=lambda c: format_pairing(c)):
        result = is_consistent(p, c)
        row = {"pairing": format_pairing(c), "consistent": result.ok}
        text = f"{_pairing_text(c)}  {'consistent' if result.ok else 'inconsistent'}"
        if result.cycle is not None:
            on = _cycle_pairs(c, result.cycle)
            row["cycle"] = on
            text += f" (cycle through {' '.join(f'({a},{b})' for a, b in on)})"
        elif result.unclosed is not None:
            row["unclosed"] = result.unclosed
            text += f" (location {result.unclosed} is guarded by an unpaired prefix)"
        rows.append(row)
        out.line(text)
    out.data = {"pairings": rows}
    return OK


def cmd_consistent(args, out: _Report) -> int:
    p = parse_term(args.term)
    c = make_pairing(_pairs(args.pairing or ""))
    result = is_consistent(p, c)
    maximal = sorted(format_pairing(m) for m in maximal_consistent_subpairings(p, c))
    out.line("consistent" if result.ok else "inconsistent")
    if result.cycle is not None:
        out.line(f"cycle through: {' '.join(f'({a},{b})' for a, b in _cycle_pairs(c, result.cycle))}")
    if result.unclosed is not None:
        out.line(f"not downward closed at {result.unclosed}")
    for m in maximal:
        out.line(f"maximal consistent sub-pairing: {json.dumps(m)}")
    cycle = _cycle_pairs(c, result.cycle) if result.cycle is not None else []
    out.data = {"consistent": result.ok, "cycle": cycle, "maximal": maximal}
    return OK if result.ok else NEGATIVE


def cmd_type(args, out: _Report) -> int:
    f = ttype(parse_term(args.term), args.variant)
    out.line(format_formula(f))
    out.data = {"type": format_formula(f)}
    return OK


def cmd_proof(args, out: _Report) -> int:
    typed = proof_assign(parse_term(args.term), args.variant)
    out.data = to_json(typed.proof)
    out.lines = [json.dumps(out.data, indent=2)]
    _write_dot(args.dot, typed.proof)
    return OK


def cmd_check_net(args, out: _Report) -> int:
    net = from_json(_load(args.file))
    try:
        check_structure(net)
    except MalformedStructure as exc:
        out.line(f"not a proof net: {exc}")
        out.data = {"ok": False, "reason": str(exc)}
        return NEGATIVE
    if args.cap_switchings is not None:
        result = dr_check(net, "switchings", args.cap_switchings)
    else:
        result = dr_check(net)
    out.line("proof net" if result else f"not a proof net: {result.reason}")
    out.data = {"ok": result.ok, "reason": result.reason}
    _write_dot(args.dot, net)
    return OK if result else NEGATIVE


def cmd_normalize(args, out: _Report) -> int:
    net = from_json(_load(args.file))
    result = normalize(net, strategy(args.order, args.seed))
    out.data = {"pairs": [list(x) for x in result.pairs], "steps": result.steps, "net": to_json(result.net)}
    out.line(f"pairs: {json.dumps([list(x) for x in result.pairs])}")
    out.line(f"steps: {result.steps}")
    out.line(json.dumps(to_json(result.net), indent=2))
    _write_dot(args.dot, result.net)
    return OK


def cmd_synthesize(args, out: _Report) -> int:
    p, q = parse_term(args.term), parse_term(args.to or "1")
    s = synthesize(p, q, args.variant, args.cap_atoms)
    if s is None:
        out.line("no schedule")
        out.data = {"schedule": None}
        return NEGATIVE
    out.data = {"schedule": schedule_to_json(s)}
    out.line(f"schedule {format_term(p)} -o {format_term(q)} ({args.variant})")
    for k, f in sorted(s.instantiation.items(), key=lambda kv: (len(kv[0]), kv[0])):
        out.line(f"  {k} := {format_formula(f)}")
    kinds = [l.kind for l in s.proof.links.values()]
    out.line(f"  {kinds.count('ax')} axiom links, {len(kinds)} links in all (--json prints the net)")
    _write_dot(args.dot, s.proof)
    return OK


def cmd_replay(args, out: _Report) -> int:
    p = parse_term(args.term)
    s = _schedule_for(args, p)
    r = run_schedule(p, s, strategy(args.order, args.seed))
    out.line(f"steps: {json.dumps([list(x) for x in r.trace.steps])}")
    out.line(f"final: {format_term(r.trace.final)}")
    out.data = {"steps": [list(x) for x in r.trace.steps], "final": format_term(r.trace.final)}
    return OK


def cmd_induced_pairing(args, out: _Report) -> int:
    p = parse_term(args.term)
    c = induced_pairing(p, _schedule_for(args, p))
    out.line(_pairing_text(c))
    out.data = {"pairing": format_pairing(c)}
    return OK


def cmd_roundtrip(args, out: _Report) -> int:
    p = parse_term(args.term)
    rows, status = [], OK
    for c in sorted(enumerate_pairings(p), key=lambda c: format_pairing(c)):
        try:
            s = pairing_to_schedule(p, c)
        except ProcessError:
            continue  # not maximal consistent
        back = induced_pairing(p, s)
        same = back == c
        status = status if same else NEGATIVE
        rows.append({"pairing": format_pairing(c), "induced": format_pairing(back), "ok": same})
        out.line(f"{_pairing_text(c)} -> {_pairing_text(back)}  {'ok' if same else 'MISMATCH'}")
    out.data = {"roundtrip": rows}
    return status


VERBS = {
    "parse": cmd_parse,
    "congruent": cmd_congruent,
    "execute": cmd_execute,
    "reachable": cmd_reachable,
    "pairings": cmd_pairings,
    "consistent": cmd_consistent,
    "type": cmd_type,
    "proof": cmd_proof,
    "check-net": cmd_check_net,
    "normalize": cmd_normalize,
    "synthesize": cmd_synthesize,
    "replay": cmd_replay,
    "induced-pairing": cmd_induced_pairing,
    "roundtrip": cmd_roundtrip,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="proofsched", description="Processes, proof nets and schedules.")
    ap.add_argument("verb", choices=sorted(VERBS))
    ap.add_argument("term", nargs="?", help="process term, or a JSON file for check-net/normalize")
    ap.add_argument("other", nargs="?", help="second term for congruent")
    ap.add_argument("--variant", choices=(SYNC, ASYNC), default=SYNC)
    ap.add_argument("--to", help="target term (default 1)")
    ap.add_argument("--total", action="store_true", help="only total pairings")
    ap.add_argument("--json", action="store_true", help="machine-readable report")
    ap.add_argument("--dot", metavar="FILE", help="write the net as Graphviz DOT")
    ap.add_argument("--cap-atoms", type=int, default=DEFAULT_CAP_ATOMS)
    ap.add_argument("--cap-switchings", type=int, default=None,
                    help="check nets by enumerating at most N switchings")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--order", choices=("lowest", "highest", "random"), default="lowest",
                    help="cut elimination order")
    ap.add_argument("--steps", help="execution steps, e.g. '9,5 1,0'")
    ap.add_argument("--pairing", help="pairing, e.g. '9,5 1,0 2,6'")
    ap.add_argument("--schedule", metavar="FILE", help="schedule JSON for replay/induced-pairing")
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if args.verb in ("check-net", "normalize"):
        args.file = args.term
    if args.term is None:
        print(f"error: {args.verb} needs an argument", file=sys.stderr)
        return USAGE
    if args.verb == "congruent" and args.other is None:
        print("error: congruent needs two terms", file=sys.stderr)
        return USAGE
    out = _Report(args.json)
    try:
        code = VERBS[args.verb](args, out)
    except (CapExceeded, EnumerationCapExceeded, SwitchingCapExceeded) as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return CAP
    except LookupError as exc:
        print(str(exc).strip("'\""))
        return NEGATIVE
    except (ProcessError, FormulaError, NetError, _Usage, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    out.emit()
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
