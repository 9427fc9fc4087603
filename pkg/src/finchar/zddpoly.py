"""Boolean polynomials (q = 2) in ANF stored as a zero-suppressed decision diagram.

A node denotes a set of monomials; the polynomial is their XOR.  Node ``0``
is the empty set (the zero polynomial) and node ``1`` is ``{1}`` (the constant
one).  An internal node ``(v, lo, hi)`` stands for ``lo + x_v * hi`` where
neither child mentions ``x_v`` or any variable above it, so the root variable
of a polynomial is its class and ``hi``/``lo`` are its initial and tail.

Node ids are plain ints and only mean something inside their own store.
"""
from __future__ import annotations

import sys
from typing import Iterable, Iterator, Sequence

from .field import FieldSpec
from .instrument import note_mul
from .poly import Poly, PolyError

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

ZERO = 0
ONE = 1


class StoreMismatch(ValueError):
    pass


class ZddStore:
    """Hash-consed node table plus operation caches.

    Per node we also keep the total degree, the number of monomials, the sum of
    monomial degrees, whether the constant monomial is present and a bitmask of
    the variables that occur, so degree, ``term``, length and support queries
    are O(1).
    """

    def __init__(self) -> None:
        # terminals have var 0, below every real variable
        self.var = [0, 0]
        self.lo = [0, 0]
        self.hi = [0, 0]
        self.deg = [-1, 0]
        self.nterms = [0, 1]
        self.degsum = [0, 0]
        self.hasconst = [False, True]
        self.support = [0, 0]  # bit v set iff x_v occurs
        self.unique: dict = {}
        self._add_cache: dict = {}
        self._mul_cache: dict = {}
        self._union_cache: dict = {}
        self._restrict_cache: dict = {}

    def __len__(self):
        return len(self.var)

    def clear_caches(self) -> None:
        self._add_cache.clear()
        self._mul_cache.clear()
        self._union_cache.clear()
        self._restrict_cache.clear()

    # -- node construction -----------------------------------------------

    def mk(self, v: int, lo: int, hi: int) -> int:
        if hi == 0:
            return lo
        key = (v, lo, hi)
        node = self.unique.get(key)
        if node is None:
            node = len(self.var)
            self.var.append(v)
            self.lo.append(lo)
            self.hi.append(hi)
            dh = self.deg[hi] + 1
            dl = self.deg[lo]
            self.deg.append(dh if dh > dl else dl)
            th = self.nterms[hi]
            self.nterms.append(self.nterms[lo] + th)
            self.degsum.append(self.degsum[lo] + self.degsum[hi] + th)
            self.hasconst.append(self.hasconst[lo])
            self.support.append(self.support[lo] | self.support[hi] | (1 << v))
            self.unique[key] = node
        return node

    def variable(self, i: int) -> int:
        return self.mk(i, 0, 1)

    def monomial(self, vars_: Iterable[int]) -> int:
        node = 1
        for v in sorted(set(vars_)):
            node = self.mk(v, 0, node)
        return node

    def from_monomials(self, monomials: Iterable[Iterable[int]]) -> int:
        """Build the XOR of the given monomials (each an iterable of var indices)."""
        terms: set = set()
        for m in monomials:
            t = tuple(sorted(set(m), reverse=True))
            if t in terms:
                terms.remove(t)
            else:
                terms.add(t)
        return self._build(sorted(terms), 0)

    def _build(self, terms: list, depth: int) -> int:
        # terms: sorted tuples of descending var indices, all sharing a prefix of length depth
        if not terms:
            return 0
        top = max(t[depth] if len(t) > depth else 0 for t in terms)
        if top == 0:
            return 1
        hi = [t for t in terms if len(t) > depth and t[depth] == top]
        lo = [t for t in terms if not (len(t) > depth and t[depth] == top)]
        hi_node = self._build(hi, depth + 1)
        lo_node = self._build(lo, depth)
        return self.mk(top, lo_node, hi_node)

    # -- arithmetic -------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if a == 0:
            return b
        if b == 0:
            return a
        if a == b:
            return 0
        if a > b:
            a, b = b, a
        key = (a, b)
        r = self._add_cache.get(key)
        if r is not None:
            return r
        var = self.var
        va, vb = var[a], var[b]
        if va > vb:
            r = self.mk(va, self.add(self.lo[a], b), self.hi[a])
        elif vb > va:
            r = self.mk(vb, self.add(a, self.lo[b]), self.hi[b])
        elif va == 0:
            r = 0  # both are the terminal 1
        else:
            r = self.mk(va, self.add(self.lo[a], self.lo[b]), self.add(self.hi[a], self.hi[b]))
        self._add_cache[key] = r
        return r

    def mul(self, a: int, b: int) -> int:
        """Product with x^2 = x.  Does not touch the multiplication counter."""
        if a == 0 or b == 0:
            return 0
        if a == 1:
            return b
        if b == 1 or a == b:
            return a
        if a > b:
            a, b = b, a
        key = (a, b)
        r = self._mul_cache.get(key)
        if r is not None:
            return r
        var = self.var
        va, vb = var[a], var[b]
        v = va if va > vb else vb
        if va == v:
            a1, a0 = self.hi[a], self.lo[a]
        else:
            a1, a0 = 0, a
        if vb == v:
            b1, b0 = self.hi[b], self.lo[b]
        else:
            b1, b0 = 0, b
        lo = self.mul(a0, b0)
        # x(a1 b1 + a1 b0 + a0 b1) = x(a1 (b1 + b0) + a0 b1)
        hi = self.add(self.mul(a1, self.add(b1, b0)), self.mul(a0, b1))
        r = self.mk(v, lo, hi)
        self._mul_cache[key] = r
        return r

    def union(self, a: int, b: int) -> int:
        """Set union of monomial supports (not a ring operation)."""
        if a == 0 or a == b:
            return b
        if b == 0:
            return a
        if a > b:
            a, b = b, a
        key = (a, b)
        r = self._union_cache.get(key)
        if r is not None:
            return r
        va, vb = self.var[a], self.var[b]
        if va > vb:
            r = self.mk(va, self.union(self.lo[a], b), self.hi[a])
        elif vb > va:
            r = self.mk(vb, self.union(a, self.lo[b]), self.hi[b])
        else:
            r = self.mk(va, self.union(self.lo[a], self.lo[b]), self.union(self.hi[a], self.hi[b]))
        self._union_cache[key] = r
        return r

    def restrict(self, a: int, k: int, value: int) -> int:
        """Substitute the constant ``value`` for x_k (a cofactor; no products)."""
        if not (self.support[a] >> k) & 1:
            return a
        key = (a, k, value)
        r = self._restrict_cache.get(key)
        if r is not None:
            return r
        v = self.var[a]
        if v == k:
            r = self.add(self.lo[a], self.hi[a]) if value else self.lo[a]
        else:
            r = self.mk(v, self.restrict(self.lo[a], k, value), self.restrict(self.hi[a], k, value))
        self._restrict_cache[key] = r
        return r

    def length(self, a: int) -> int:
        return self.degsum[a] + (1 if self.hasconst[a] else 0)

    def evaluate(self, a: int, point: Sequence[int]) -> int:
        """Value at ``point`` where ``point[i-1]`` is the value of x_i."""
        memo = {0: 0, 1: 1}
        var, lo, hi = self.var, self.lo, self.hi

        def ev(u):
            r = memo.get(u)
            if r is None:
                r = ev(lo[u])
                if point[var[u] - 1]:
                    r ^= ev(hi[u])
                memo[u] = r
            return r

        return ev(a)

    def monomials(self, a: int) -> Iterator[tuple[int, ...]]:
        """Yield monomials as ascending tuples of variable indices."""
        stack = [(a, ())]
        while stack:
            u, acc = stack.pop()
            if u == 0:
                continue
            if u == 1:
                yield tuple(reversed(acc))
                continue
            stack.append((self.lo[u], acc))
            stack.append((self.hi[u], acc + (self.var[u],)))

    def audit(self) -> None:
        """Assert zero-suppression, ordering and uniqueness for every node."""
        seen = set()
        for u in range(2, len(self.var)):
            v, lo, hi = self.var[u], self.lo[u], self.hi[u]
            assert hi != 0, f"node {u} violates zero-suppression"
            assert v > self.var[lo] and v > self.var[hi], f"node {u} violates ordering"
            key = (v, lo, hi)
            assert key not in seen, f"node {u} duplicates {key}"
            assert self.unique[key] == u
            seen.add(key)


class BoolPoly:
    """A Boolean polynomial: a node id tied to its store.

    Equality is node identity, which is structural equality of the ANF.
    """

    __slots__ = ("store", "node")

    def __init__(self, store: ZddStore, node: int):
        self.store = store
        self.node = node

    def _same(self, other: "BoolPoly") -> None:
        if not isinstance(other, BoolPoly):
            raise TypeError(f"expected BoolPoly, got {type(other).__name__}")
        if other.store is not self.store:
            raise StoreMismatch("BoolPoly operands live in different stores")

    def __add__(self, other):
        if isinstance(other, int):
            other = BoolPoly(self.store, other & 1)
        self._same(other)
        return BoolPoly(self.store, self.store.add(self.node, other.node))

    __radd__ = __add__
    __sub__ = __add__

    def __mul__(self, other):
        if isinstance(other, int):
            return self if other & 1 else BoolPoly(self.store, 0)
        self._same(other)
        if self.node > 1 and other.node > 1:
            note_mul()
        return BoolPoly(self.store, self.store.mul(self.node, other.node))

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            return self.node == (other & 1)
        if not isinstance(other, BoolPoly):
            return NotImplemented
        return self.store is other.store and self.node == other.node

    def __hash__(self):
        return hash(self.node)

    def is_zero(self) -> bool:
        return self.node == 0

    @property
    def cls(self) -> int:
        return self.store.var[self.node]

    def degree(self) -> int:
        return self.store.deg[self.node]

    def length(self) -> int:
        return self.store.length(self.node)

    def nterms(self) -> int:
        return self.store.nterms[self.node]

    def monomials(self) -> list[tuple[int, ...]]:
        return list(self.store.monomials(self.node))

    def eval(self, point: Sequence[int]) -> int:
        return self.store.evaluate(self.node, point)

    def __repr__(self):
        return f"BoolPoly({format_bool(self)!r})"

    def __str__(self):
        return format_bool(self)


def _bool_sort_key(m: tuple[int, ...]):
    # graded lex, x_n > ... > x_1
    return (len(m), tuple(sorted(m, reverse=True)))


def format_bool(p: BoolPoly) -> str:
    mons = sorted(p.monomials(), key=_bool_sort_key, reverse=True)
    if not mons:
        return "0"
    return " + ".join("*".join(f"x{i}" for i in m) if m else "1" for m in mons)


def bp_add(a: BoolPoly, b: BoolPoly) -> BoolPoly:
    return a + b


def bp_mul(a: BoolPoly, b: BoolPoly) -> BoolPoly:
    return a * b


def bp_split(p: BoolPoly) -> tuple[int, BoolPoly, BoolPoly]:
    """(class, initial, tail) with p = initial * x_class + tail."""
    s = p.store
    if p.node <= 1:
        raise PolyError("split of a constant Boolean polynomial")
    return s.var[p.node], BoolPoly(s, s.hi[p.node]), BoolPoly(s, s.lo[p.node])


def bp_length(p: BoolPoly) -> int:
    return p.length()


def bp_terms(p: BoolPoly) -> int:
    return p.nterms()


def bp_eval(p: BoolPoly, point: Sequence[int]) -> int:
    return p.eval(point)


def bp_from_poly(p: Poly, store: ZddStore) -> BoolPoly:
    if p.spec.q != 2:
        raise PolyError("Boolean conversion needs q = 2")
    mons = [tuple(i + 1 for i, x in enumerate(e) if x) for e in p.terms]
    return BoolPoly(store, store.from_monomials(mons))


def node_to_poly(store: ZddStore, node: int, spec: FieldSpec, n: int) -> Poly:
    terms = {}
    for m in store.monomials(node):
        e = [0] * n
        for i in m:
            e[i - 1] = 1
        terms[tuple(e)] = 1
    return Poly(spec, n, terms)


def bp_to_poly(p: BoolPoly, spec: FieldSpec, n: int) -> Poly:
    if spec.q != 2:
        raise PolyError("Boolean conversion needs q = 2")
    return node_to_poly(p.store, p.node, spec, n)
