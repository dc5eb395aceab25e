import pytest

from proofsched.process import make_pairing, parse_term

P_EX_TEXT = "a^1.c^2 | b^3.~a^4 | ~b^5.~c^6 | a^7.~b^8 | b^9 | ~a^0"

# the four total pairings of the worked example, as printed there
C1 = make_pairing([(9, 5), (1, 0), (2, 6), (3, 8), (4, 7)])
C2 = make_pairing([(3, 5), (1, 4), (2, 6), (7, 0), (9, 8)])
C3 = make_pairing([(1, 4), (3, 8), (7, 0), (9, 5), (2, 6)])
C4 = make_pairing([(1, 0), (3, 5), (7, 4), (9, 8), (2, 6)])


@pytest.fixture
def p_ex():
    return parse_term(P_EX_TEXT)
