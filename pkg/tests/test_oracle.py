import itertools

import pytest

from finchar.field import GF
from finchar.oracle import OracleLimitError, OracleLimits, brute_count, brute_zero_set
from finchar.poly import Poly, parse_poly
from finchar.problems import matmul_equations

F2, F3 = GF(2), GF(3)


def naive_zeros(polys, n, spec):
    return [pt for pt in itertools.product(range(spec.q), repeat=n) if all(p.eval(pt) == 0 for p in polys)]


def test_examples():
    cube = [parse_poly("x1*x2*x3^2 - 1", F3, 3)]
    assert len(brute_zero_set(cube, 3, F3)) == 4
    assert brute_zero_set([Poly.const(F3, 2, 1)], 2, F3) == []
    assert len(brute_zero_set([], 3, F2)) == 8
    assert brute_count(matmul_equations(2).polys, 8, F2) == 6
    assert brute_count([parse_poly("x1 + 1", F2, 3)], 3, F2) == 4
    assert brute_count([parse_poly("x1^2 + 1", F3, 1)], 1, F3) == 0


@pytest.mark.parametrize("q,text", [(3, "x1*x2 + 2*x2^2"), (4, "g2*x1^3 + x2*x1 + g3"),
                                    (5, "x1^4 + x2^3 + 3"), (9, "g5*x1*x2 + x2^8 + g2")])
def test_vectorized_matches_pointwise(q, text):
    F = GF(q)
    p = parse_poly(text, F, 2)
    assert brute_zero_set([p], 2, F) == naive_zeros([p], 2, F)


def test_points_in_lexicographic_order():
    pts = brute_zero_set([], 2, F3)
    assert pts == sorted(pts) and len(pts) == 9


def test_limit():
    with pytest.raises(OracleLimitError):
        brute_count([], 30, F2, OracleLimits(max_points=1 << 20))
