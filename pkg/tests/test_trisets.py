import random

import pytest

from finchar.field import GF
from finchar.oracle import brute_count, brute_zero_set
from finchar.poly import Poly, parse_poly
from finchar.trisets import (LimitExceeded, TriangularSet, TriangularSetError, ts_count, ts_degree, ts_dim,
                             ts_enumerate, ts_is_monic, ts_is_proper, ts_is_regular, ts_lower,
                             ts_regular_witness, ts_saturation_generators)

from conftest import random_monic_triset

F2, F3 = GF(2), GF(3)


def T(texts, q=3, n=3):
    F = GF(q)
    return TriangularSet([parse_poly(t, F, n) for t in texts], n=n, spec=F)


CUBE_EXAMPLE = ["x1^2 - 1", "x2 - x1", "x3^2 - x1*x2"]


def test_construction_rejects_bad_orders():
    with pytest.raises(TriangularSetError):
        T(["x2 + 1", "x1"])
    with pytest.raises(TriangularSetError):
        T(["x1", "x1^2 + 1"])
    with pytest.raises(TriangularSetError):
        TriangularSet([])


def test_monic_examples():
    assert ts_is_monic(T(CUBE_EXAMPLE))
    assert not ts_is_monic(T(["x1*x2"]))
    assert not ts_is_monic(T(["2*x1 + 1"]))


def test_proper_examples():
    assert not ts_is_proper(T(["x1^2 + 1"]))
    assert ts_is_proper(T(CUBE_EXAMPLE))
    assert ts_is_proper(T(["x1 + 1", "x2 + x1", "x3 + x1*x2"], q=2))


def test_degree_dim_count_examples():
    a = T(CUBE_EXAMPLE)
    assert (ts_degree(a), ts_dim(a), ts_count(a)) == (4, 0, 4)
    b = T(["x1 + 1"], q=2, n=2)
    assert (ts_degree(b), ts_dim(b), ts_count(b)) == (1, 1, 2)
    c = T(["x1 + 1", "x2"], q=2, n=2)
    assert (ts_degree(c), ts_dim(c)) == (1, 0)
    d = T(["x1^2 - 1", "x2 - x1"])
    assert ts_count(d) == 6 == brute_count(d.polys, 3, F3)
    with pytest.raises(TriangularSetError):
        ts_count(T(["x1^2 + 1"]))


def test_enumerate_examples():
    assert ts_enumerate(T(CUBE_EXAMPLE)) == [(1, 1, 1), (1, 1, 2), (2, 2, 1), (2, 2, 2)]
    assert ts_enumerate(T(["x1 + 1"], q=2, n=1)) == [(1,)]
    assert ts_enumerate(T(["x1", "x2 + x1"], q=2, n=2)) == [(0, 0)]
    empty = TriangularSet([], n=2, spec=F2)
    assert len(ts_enumerate(empty)) == 4
    with pytest.raises(LimitExceeded):
        ts_enumerate(TriangularSet([], n=10, spec=F2), limit=100)


def test_enumeration_matches_brute_force_on_cube_example():
    a = T(CUBE_EXAMPLE)
    assert set(ts_enumerate(a)) == set(brute_zero_set(a.polys, 3, F3))


def test_regular_examples():
    # regular in the polynomial-ring sense, but the initial product x1(x1^2-1) is 0 in R_3
    a = T(["x1*x2", "x1^2*x3 + 2*x3"])
    assert ts_is_regular(a, usual=True)
    assert not ts_is_regular(a)
    assert ts_is_regular(T(CUBE_EXAMPLE))
    assert not ts_is_regular(T(["x1", "x1*x2"]))


def test_regular_witness_examples():
    monic = T(["x1 + 1", "x2^2 + x1"], n=3)
    assert ts_regular_witness(monic) == {3: 0}
    assert ts_regular_witness(T(["x1*x2"], n=2)) == {1: 1}
    assert ts_regular_witness(T(CUBE_EXAMPLE)) == {}


def test_witness_specialization_has_degree_many_roots():
    a = T(["x1*x2"], n=2)
    wit = ts_regular_witness(a)
    roots = [v for v in range(3) if a[0].eval((wit[1], v)) == 0]
    assert len(roots) == a[0].deg(2)


def test_saturation_generators_examples():
    a = T(["x1*x2 + 2*x2", "x1*x3 + x3"])  # (x1-1)x2, (x1+1)x3
    gens = ts_saturation_generators(a)
    assert len(gens) == 3
    assert set(brute_zero_set(gens, 3, F3)) == {(0, 0, 0)}
    monic = T(CUBE_EXAMPLE)
    assert ts_saturation_generators(monic) == monic.polys


@pytest.mark.parametrize("q", [2, 3])
def test_saturation_zero_set_is_zeros_off_initials(q):
    F = GF(q)
    rng = random.Random(q)
    for _ in range(40):
        polys = random_monic_triset(rng, F, 3)
        # make some initials nontrivial by scaling leaders with a lower-variable factor
        scaled = []
        for a in polys:
            c = a.cls
            f = Poly.var(F, 3, c - 1) + Poly.const(F, 3, rng.randrange(q)) if c > 1 else Poly.const(F, 3, 1)
            scaled.append(f * a if not (f * a).is_zero() and (f * a).cls == c else a)
        try:
            ts = TriangularSet(scaled)
        except TriangularSetError:
            continue
        gens = ts_saturation_generators(ts)
        init = ts.initial_product()
        expect = {p for p in brute_zero_set(ts.polys, 3, F) if init.eval(p) != 0}
        assert set(brute_zero_set(gens, 3, F)) == expect


@pytest.mark.parametrize("q,n", [(2, 4), (3, 3), (3, 4)])
def test_proper_iff_count_formula(q, n):
    """A monic set is proper exactly when its zero count is deg * q^dim."""
    F = GF(q)
    rng = random.Random(17 * q + n)
    seen = {True: 0, False: 0}
    for _ in range(80):
        ts = TriangularSet(random_monic_triset(rng, F, n))
        brute = brute_count(ts.polys, n, F)
        proper = ts_is_proper(ts)
        seen[proper] += 1
        assert proper == (brute == ts_count(ts, check=False))
        if proper:
            assert set(ts_enumerate(ts)) == set(brute_zero_set(ts.polys, n, F))
    if q > 2:
        assert seen[True] and seen[False]


def test_monic_sets_over_f2_are_proper():
    rng = random.Random(3)
    for _ in range(50):
        assert ts_is_proper(TriangularSet(random_monic_triset(rng, F2, 5)))


def test_ordering():
    a = T(["x1", "x2"])
    b = T(["x1", "x3"])
    c = T(["x1"])
    assert ts_lower(a, b) and not ts_lower(b, a)
    assert ts_lower(a, c) and not ts_lower(c, a)
    assert not ts_lower(a, a)
    assert ts_lower(T(["x1"]), T(["x1^2"]))
