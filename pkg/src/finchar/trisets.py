"""Triangular sets in R_q: monic/proper/regular predicates, solution counts
and back-substitution enumeration."""
from __future__ import annotations

import itertools
from typing import Iterator, Sequence

from .poly import Poly, PolyError, prem_set, res_set


class TriangularSetError(ValueError):
    pass


class LimitExceeded(RuntimeError):
    pass


class TriangularSet:
    """Polynomials A_1..A_r with strictly increasing classes.

    ``n`` is the ambient variable count; an empty set means no constraint.
    """

    __slots__ = ("polys", "n", "spec")

    def __init__(self, polys: Sequence[Poly], n: int | None = None, spec=None):
        polys = list(polys)
        if polys:
            spec = polys[0].spec
            n = polys[0].n if n is None else n
        if n is None or spec is None:
            raise TriangularSetError("empty triangular set needs n and spec")
        for a in polys:
            if a.is_zero():
                raise TriangularSetError("zero polynomial in a triangular set")
        classes = [a.cls for a in polys]
        if len(polys) > 1 and not (0 < classes[0] and all(x < y for x, y in zip(classes, classes[1:]))):
            raise TriangularSetError(f"classes {classes} are not strictly increasing")
        self.polys = polys
        self.n = n
        self.spec = spec

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def __eq__(self, other):
        return isinstance(other, TriangularSet) and self.polys == other.polys and self.n == other.n

    def __hash__(self):
        return hash((self.n, tuple(self.polys)))

    def __repr__(self):
        return "TriangularSet([" + ", ".join(str(a) for a in self.polys) + "])"

    @property
    def classes(self) -> list[int]:
        return [a.cls for a in self.polys]

    @property
    def degrees(self) -> list[int]:
        return [a.deg(a.cls) for a in self.polys]

    @property
    def parameters(self) -> list[int]:
        lead = set(self.classes)
        return [i for i in range(1, self.n + 1) if i not in lead]

    def initials(self) -> list[Poly]:
        return [a.initial() for a in self.polys]

    def initial_product(self) -> Poly:
        out = Poly.const(self.spec, self.n, 1)
        for i in self.initials():
            out = out * i
        return out

    def sort_key(self):
        return (self.classes, self.degrees, [a.to_text() for a in self.polys])

    def to_json(self) -> dict:
        return {
            "polys": [a.to_text() for a in self.polys],
            "degree": ts_degree(self),
            "dim": ts_dim(self),
            "count": str(ts_count(self, check=False)),
        }


def ts_lower(a: TriangularSet, b: TriangularSet) -> bool:
    """Strict triangular-set ordering: compare ranks from A_1 up; on a common
    prefix the longer set is the lower one."""
    for x, y in zip(a.polys, b.polys):
        rx, ry = x.rank(), y.rank()
        if rx != ry:
            return rx < ry
    return len(a.polys) > len(b.polys)


def ts_is_monic(ts: TriangularSet) -> bool:
    return all(a.cls > 0 and a.initial().is_one() for a in ts.polys)


def ts_is_proper(ts: TriangularSet) -> bool:
    """prem(x_c^(q-d) A_i, A) == 0 for every A_i of class c, degree d."""
    q = ts.spec.q
    for a in ts.polys:
        c = a.cls
        if c == 0:
            return False
        if not prem_set(a.shift(c, q - a.deg(c)), ts.polys).is_zero():
            return False
    return True


def properness_remainders(ts: TriangularSet) -> list[Poly]:
    """Nonzero prem(x_c^(q-d) A_i, A), in chain order."""
    q = ts.spec.q
    out = []
    for a in ts.polys:
        c = a.cls
        r = prem_set(a.shift(c, q - a.deg(c)), ts.polys)
        if not r.is_zero():
            out.append(r)
    return out


def ts_degree(ts: TriangularSet) -> int:
    d = 1
    for x in ts.degrees:
        d *= x
    return d


def ts_dim(ts: TriangularSet) -> int:
    return ts.n - len(ts.polys)


def ts_count(ts: TriangularSet, check: bool = True) -> int:
    """deg(A) * q^dim(A) for a monic proper set."""
    if check and not (ts_is_monic(ts) and ts_is_proper(ts)):
        raise TriangularSetError("solution count formula needs a monic proper set")
    return ts_degree(ts) * ts.spec.q ** ts_dim(ts)


def _roots(a: Poly, point: list[int], c: int) -> list[int]:
    out = []
    for v in range(a.spec.q):
        point[c - 1] = v
        if a.eval(point) == 0:
            out.append(v)
    point[c - 1] = 0
    return out


def iter_zeros(ts: TriangularSet, check: bool = True) -> Iterator[tuple[int, ...]]:
    """Cascade through x_1..x_n: sweep parameters, root-search leading variables.

    Points come out in lexicographic order (x_1 most significant).  With
    ``check`` each specialization must have exactly deg(A_i) roots.
    """
    n = ts.n
    q = ts.spec.q
    by_class = {a.cls: a for a in ts.polys}
    point = [0] * n
    # fast path for linear monic leaders: x_c = -U(point)
    linear = {}
    for c, a in by_class.items():
        if a.deg(c) == 1 and a.initial().is_one():
            linear[c] = a.initial_split()[1]
    neg = ts.spec.neg

    def rec(i: int) -> Iterator[tuple[int, ...]]:
        if i > n:
            yield tuple(point)
            return
        a = by_class.get(i)
        if a is None:
            for v in range(q):
                point[i - 1] = v
                yield from rec(i + 1)
            point[i - 1] = 0
            return
        if i in linear:
            point[i - 1] = 0
            roots = [neg(linear[i].eval(point))]
        else:
            roots = _roots(a, point, i)
            if check and len(roots) != a.deg(i):
                raise TriangularSetError(
                    f"specialization of {a} has {len(roots)} roots, expected {a.deg(i)}")
        for v in roots:
            point[i - 1] = v
            yield from rec(i + 1)
        point[i - 1] = 0

    return rec(1)


def ts_enumerate(ts: TriangularSet, limit: int = 1 << 20, check: bool = True) -> list[tuple[int, ...]]:
    if check and not ts_is_monic(ts):
        raise TriangularSetError("enumeration needs a monic set")
    expected = ts_count(ts, check=False)
    if expected > limit:
        raise LimitExceeded(f"{expected} solutions exceed the limit {limit}")
    pts = list(iter_zeros(ts, check=check))
    if check and len(pts) != expected:
        raise TriangularSetError(f"enumerated {len(pts)} points, expected {expected}")
    return pts


def _resultant_factors(ts: TriangularSet) -> list[Poly]:
    return [res_set(a.initial(), ts.polys[:i]) for i, a in enumerate(ts.polys)]


def ts_is_regular(ts: TriangularSet, usual: bool = False) -> bool:
    """Product of res(I(A_i); A_1..A_{i-1}) is nonzero in R_q.

    ``usual=True`` only asks that each factor be nonzero, the definition over a
    polynomial ring without the field equations.
    """
    factors = _resultant_factors(ts)
    if usual:
        return all(not f.is_zero() for f in factors)
    prod = Poly.const(ts.spec, ts.n, 1)
    for f in factors:
        prod = prod * f
    return not prod.is_zero()


def ts_regular_witness(ts: TriangularSet, max_points: int = 1 << 20) -> dict[int, int] | None:
    """First parameter value (lexicographic) where the resultant product is nonzero."""
    params = ts.parameters
    q = ts.spec.q
    if q ** len(params) > max_points:
        raise LimitExceeded(f"{q}^{len(params)} parameter values exceed {max_points}")
    prod = Poly.const(ts.spec, ts.n, 1)
    for f in _resultant_factors(ts):
        prod = prod * f
    if prod.is_zero():
        return None
    extra = prod.variables() - set(params)
    if extra:
        raise PolyError(f"resultant product involves non-parameters {sorted(extra)}")
    point = [0] * ts.n
    for vals in itertools.product(range(q), repeat=len(params)):
        for i, v in zip(params, vals):
            point[i - 1] = v
        if prod.eval(point):
            return dict(zip(params, vals))
    return None


def ts_saturation_generators(ts: TriangularSet) -> list[Poly]:
    """A_1..A_r followed by I_A^(q-1) - 1 (omitted when it is zero)."""
    q = ts.spec.q
    last = ts.initial_product() ** (q - 1) - 1
    return list(ts.polys) + ([] if last.is_zero() else [last])
