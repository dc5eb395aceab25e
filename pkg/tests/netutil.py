"""Net mutations shared by the kernel tests and the acceptance suite."""

from __future__ import annotations

import random
from dataclasses import replace

from proofsched.net import AX, PAR, TENSOR, ProofStructure


def mutations(net: ProofStructure) -> list[tuple[str, int]]:
    """Every single-edit mutation: delete an axiom, or swap a tensor and a par."""
    out = [("delete", l.id) for l in net.links_of(AX)]
    out += [("swap", l.id) for l in net.links_of(TENSOR, PAR)]
    return out


def mutate(net: ProofStructure, edit: tuple[str, int]) -> ProofStructure:
    kind, lid = edit
    links = dict(net.links)
    if kind == "delete":
        del links[lid]
    else:
        l = links[lid]
        links[lid] = replace(l, kind=PAR if l.kind == TENSOR else TENSOR)
    return ProofStructure(links, dict(net.wires), tuple(net.conclusions))


def random_mutation(net: ProofStructure, rng: random.Random) -> tuple[tuple[str, int], ProofStructure]:
    edit = rng.choice(mutations(net))
    return edit, mutate(net, edit)
