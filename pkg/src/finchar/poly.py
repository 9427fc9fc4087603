"""Polynomials of R_q = F_q[x_1..x_n] / (x_i^q - x_i) in canonical form.

A :class:`Poly` maps exponent tuples (every entry in ``[0, q-1]``) to nonzero
field codes.  Variables are 1-based: ``x1`` is exponent slot 0.
"""
from __future__ import annotations

import operator
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .field import FieldSpec
from .instrument import note_mul

Exps = tuple


class PolyError(ValueError):
    pass


def _exp_reducer(q: int) -> list[int]:
    # x^e == x^(((e-1) mod (q-1)) + 1) for e >= 1
    return [0] + [((e - 1) % (q - 1)) + 1 for e in range(1, 2 * q)]


_REDUCERS: dict[int, list[int]] = {}


def reducer(q: int) -> list[int]:
    r = _REDUCERS.get(q)
    if r is None:
        r = _REDUCERS[q] = _exp_reducer(q)
    return r


def reduce_exponent(e: int, q: int) -> int:
    return 0 if e == 0 else ((e - 1) % (q - 1)) + 1


@dataclass(frozen=True, order=True)
class Rank:
    cls: int
    degree: int


class Poly:
    """Immutable canonical element of R_q."""

    __slots__ = ("spec", "n", "terms", "_cls", "_hash")

    def __init__(self, spec: FieldSpec, n: int, terms: Mapping[Exps, int] | None = None):
        self.spec = spec
        self.n = n
        self.terms: dict = dict(terms) if terms else {}
        self._cls = None
        self._hash = None

    @classmethod
    def _raw(cls, spec, n, terms):
        p = cls.__new__(cls)
        p.spec, p.n, p.terms, p._cls, p._hash = spec, n, terms, None, None
        return p

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, spec: FieldSpec, n: int) -> "Poly":
        return cls._raw(spec, n, {})

    @classmethod
    def const(cls, spec: FieldSpec, n: int, c: int) -> "Poly":
        return cls._raw(spec, n, {(0,) * n: c} if c else {})

    @classmethod
    def var(cls, spec: FieldSpec, n: int, i: int, e: int = 1) -> "Poly":
        if not 1 <= i <= n:
            raise PolyError(f"variable x{i} outside 1..{n}")
        e = reduce_exponent(e, spec.q)
        exps = [0] * n
        exps[i - 1] = e
        return cls._raw(spec, n, {tuple(exps): 1})

    # -- predicates and accessors -----------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        if not self.terms:
            return True
        return len(self.terms) == 1 and not any(next(iter(self.terms)))

    def is_one(self) -> bool:
        return self.is_const() and self.constant_term() == 1

    def constant_term(self) -> int:
        return self.terms.get((0,) * self.n, 0)

    @property
    def cls(self) -> int:
        if self._cls is None:
            c = 0
            for e in self.terms:
                for i in range(self.n - 1, c - 1, -1):
                    if e[i]:
                        c = i + 1
                        break
            self._cls = c
        return self._cls

    def deg(self, i: int) -> int:
        if not self.terms:
            return 0
        return max(e[i - 1] for e in self.terms)

    def rank(self) -> Rank:
        c = self.cls
        return Rank(c, self.deg(c) if c else 0)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def nterms(self) -> int:
        return len(self.terms)

    def length(self) -> int:
        """Sum over monomials of their degree, a constant monomial counting 1."""
        return sum(sum(e) or 1 for e in self.terms)

    def variables(self) -> set[int]:
        out = set()
        for e in self.terms:
            out.update(i + 1 for i, x in enumerate(e) if x)
        return out

    # -- ring operations ----------------------------------------------------

    def _check(self, other: "Poly"):
        if self.spec is not other.spec and self.spec != other.spec:
            raise PolyError("polynomials over different fields")
        if self.n != other.n:
            raise PolyError("polynomials over different variable counts")

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, int):
            return Poly.const(self.spec, self.n, self.spec.from_int(other))
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        add = self.spec.add
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                s = add(v, c)
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly._raw(self.spec, self.n, out)

    __radd__ = __add__

    def __neg__(self):
        neg = self.spec.neg
        return Poly._raw(self.spec, self.n, {e: neg(c) for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: int) -> "Poly":
        if c == 0:
            return Poly.zero(self.spec, self.n)
        if c == 1:
            return self
        mul = self.spec.mul
        return Poly._raw(self.spec, self.n, {e: mul(v, c) for e, v in self.terms.items()})

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.is_const():
            return other.scale(self.constant_term())
        if other.is_const():
            return self.scale(other.constant_term())
        note_mul()
        return _mul_terms(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        if e < 0:
            raise PolyError("negative power")
        result = Poly.const(self.spec, self.n, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def shift(self, i: int, k: int) -> "Poly":
        """Multiply by the monomial x_i^k (normalized, not counted as a product)."""
        if k == 0:
            return self
        red = reducer(self.spec.q)
        j = i - 1
        out: dict = {}
        add = self.spec.add
        for e, c in self.terms.items():
            ne = e[:j] + (red[e[j] + k] if e[j] + k < len(red) else reduce_exponent(e[j] + k, self.spec.q),) + e[j + 1:]
            v = out.get(ne)
            if v is None:
                out[ne] = c
            else:
                s = add(v, c)
                if s:
                    out[ne] = s
                else:
                    del out[ne]
        return Poly._raw(self.spec, self.n, out)

    def coeff_in(self, i: int, d: int) -> "Poly":
        """Coefficient of x_i^d, as a polynomial free of x_i."""
        j = i - 1
        out = {e[:j] + (0,) + e[j + 1:]: c for e, c in self.terms.items() if e[j] == d}
        return Poly._raw(self.spec, self.n, out)

    def initial_split(self) -> tuple["Poly", "Poly"]:
        """Return (I, U) with self = I * x_c^d + U and deg(U, x_c) < d."""
        c = self.cls
        if c == 0:
            raise PolyError("initial of a constant polynomial")
        j = c - 1
        d = self.deg(c)
        init: dict = {}
        tail: dict = {}
        for e, v in self.terms.items():
            if e[j] == d:
                init[e[:j] + (0,) + e[j + 1:]] = v
            else:
                tail[e] = v
        return Poly._raw(self.spec, self.n, init), Poly._raw(self.spec, self.n, tail)

    def initial(self) -> "Poly":
        return self.initial_split()[0]

    def is_monic(self) -> bool:
        return self.cls > 0 and self.initial().is_one()

    def eval(self, point: Sequence[int]) -> int:
        if len(point) != self.n:
            raise PolyError(f"point has {len(point)} coordinates, expected {self.n}")
        spec = self.spec
        add, mul, fpow = spec.add, spec.mul, spec.pow
        total = 0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = mul(v, fpow(x, k))
                    if not v:
                        break
            total = add(total, v)
        return total

    def substitute(self, values: Mapping[int, int]) -> "Poly":
        """Specialize variables {index: code}; result keeps the ambient n."""
        spec = self.spec
        add, mul, fpow = spec.add, spec.mul, spec.pow
        out: dict = {}
        for e, c in self.terms.items():
            v = c
            ne = list(e)
            for i, a in values.items():
                k = e[i - 1]
                if k:
                    v = mul(v, fpow(a, k))
                    ne[i - 1] = 0
            if not v:
                continue
            ne = tuple(ne)
            s = add(out.get(ne, 0), v)
            if s:
                out[ne] = s
            else:
                out.pop(ne, None)
        return Poly._raw(spec, self.n, out)

    # -- identity -----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = Poly.const(self.spec, self.n, self.spec.from_int(other))
        if not isinstance(other, Poly):
            return NotImplemented
        return self.n == other.n and self.spec == other.spec and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def sorted_terms(self) -> list[tuple[Exps, int]]:
        """Terms in graded-lex order with x_n > ... > x_1, leading term first."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0][::-1]), reverse=True)

    def to_text(self) -> str:
        return format_poly(self)

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r}, q={self.spec.q}, n={self.n})"


def _mul_terms(a: Poly, b: Poly) -> Poly:
    spec = a.spec
    add, mul = spec.add, spec.mul
    out: dict = {}
    if spec.q == 2:
        combine = operator.or_
        for ea, ca in a.terms.items():
            for eb, cb in b.terms.items():
                e = tuple(map(combine, ea, eb))
                if e in out:
                    del out[e]
                else:
                    out[e] = 1
        return Poly._raw(spec, a.n, out)
    red = reducer(spec.q).__getitem__
    plus = operator.add
    for ea, ca in a.terms.items():
        for eb, cb in b.terms.items():
            e = tuple(map(red, map(plus, ea, eb)))
            c = mul(ca, cb)
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                s = add(v, c)
                if s:
                    out[e] = s
                else:
                    del out[e]
    return Poly._raw(spec, a.n, out)


def poly_normalize(raw: Iterable[tuple[Sequence[int], int]], spec: FieldSpec, n: int) -> Poly:
    """Build the canonical form of a raw term list (exponents may exceed q-1)."""
    q = spec.q
    add = spec.add
    out: dict = {}
    for exps, c in raw:
        if len(exps) != n:
            raise PolyError(f"monomial {tuple(exps)} has wrong arity for n={n}")
        if any(x < 0 for x in exps):
            raise PolyError("negative exponent")
        c = c % spec.q if spec.k == 1 else spec.check(c)
        if not c:
            continue
        e = tuple(reduce_exponent(x, q) for x in exps)
        s = add(out.get(e, 0), c)
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return Poly._raw(spec, n, out)


def poly_add(a: Poly, b: Poly) -> Poly:
    return a + b


def poly_mul(a: Poly, b: Poly) -> Poly:
    return a * b


def poly_rank(p: Poly) -> Rank:
    return p.rank()


def poly_initial_split(p: Poly) -> tuple[Poly, Poly]:
    return p.initial_split()


def poly_eval(p: Poly, point: Sequence[int]) -> int:
    return p.eval(point)


def rank_compare(a: Poly, b: Poly) -> int:
    """-1 if a is lower than b, 0 if same rank, 1 if higher."""
    ra, rb = a.rank(), b.rank()
    return (ra > rb) - (ra < rb)


def is_reduced(qp: Poly, p: Poly) -> bool:
    c = p.cls
    return c > 0 and qp.deg(c) < p.deg(c)


# -- pseudo-division ---------------------------------------------------------

def prem(qp: Poly, p: Poly, cofactor: bool = False):
    """Pseudo-remainder of ``qp`` by ``p`` in the class variable of ``p``.

    Each step replaces Q by ``I*Q - J*x_c^(e-d)*P`` (J the leading coefficient
    of Q) and stays canonical.  With ``cofactor=True`` returns ``(s, S, R)``
    satisfying ``I^s * Q == S * P + R``.
    """
    c = p.cls
    if c == 0:
        raise PolyError("pseudo-division by a constant-class polynomial")
    d = p.deg(c)
    init = p.coeff_in(c, d)
    monic = init.is_one()
    r = qp
    s = 0
    cof = Poly.zero(qp.spec, qp.n)
    while True:
        e = r.deg(c)
        if e < d or r.is_zero():
            break
        lead = r.coeff_in(c, e)
        m = lead.shift(c, e - d)
        if monic:
            r = r - m * p
        else:
            r = init * r - m * p
            if cofactor:
                cof = init * cof
            s += 1
        if cofactor:
            cof = cof + m
    if cofactor:
        return s, cof, r
    return r


def prem_set(qp: Poly, chain: Sequence[Poly], cofactor: bool = False):
    """prem(Q, A) = prem(prem(Q, A_r), A_1..A_{r-1}); prem(Q, []) = Q.

    With ``cofactor=True`` returns ``(exponents, cofactors, R)`` such that
    ``prod(I_i^s_i) * Q == sum(Q_i * A_i) + R``.
    """
    if not cofactor:
        r = qp
        for a in reversed(chain):
            if r.is_zero():
                break
            r = prem(r, a)
        return r
    r = len(chain)
    if r == 0:
        return [], [], qp
    s_r, cof_r, rem = prem(qp, chain[-1], cofactor=True)
    exps, cofs, final = prem_set(rem, chain[:-1], cofactor=True)
    scale = Poly.const(qp.spec, qp.n, 1)
    for a, s in zip(chain[:-1], exps):
        if s:
            scale = scale * (a.initial() ** s)
    return exps + [s_r], cofs + [scale * cof_r], final


# -- resultants ---------------------------------------------------------------

def _det(matrix: list[list[Poly]], one: Poly) -> Poly:
    """Division-free determinant (Berkowitz) over the commutative ring R_q."""
    n = len(matrix)
    if n == 0:
        return one
    zero = one - one
    charpoly = [one, -matrix[0][0]]
    for k in range(1, n):
        a = matrix[k][k]
        row = matrix[k][:k]
        col = [matrix[i][k] for i in range(k)]
        sub = [r[:k] for r in matrix[:k]]
        vec = [one, -a]
        w = col
        for _ in range(k):
            dot = zero
            for x, y in zip(row, w):
                if not x.is_zero() and not y.is_zero():
                    dot = dot + x * y
            vec.append(-dot)
            w = [sum((sub[i][j] * w[j] for j in range(k) if not w[j].is_zero()), zero)
                 for i in range(k)]
        new = []
        for i in range(k + 2):
            acc = zero
            for j in range(min(i, k) + 1):
                if i - j < len(vec) and j < len(charpoly):
                    t = vec[i - j]
                    if not t.is_zero() and not charpoly[j].is_zero():
                        acc = acc + t * charpoly[j]
            new.append(acc)
        charpoly = new
    det = charpoly[n]
    return det if n % 2 == 0 else -det


def resultant(p: Poly, qp: Poly, i: int) -> Poly:
    """Sylvester resultant of p and qp in x_i, evaluated in R_q."""
    one = Poly.const(p.spec, p.n, 1)
    if p.is_zero() or qp.is_zero():
        return one - one
    m, k = p.deg(i), qp.deg(i)
    if m == 0 and k == 0:
        return one
    pc = [p.coeff_in(i, m - t) for t in range(m + 1)]
    qc = [qp.coeff_in(i, k - t) for t in range(k + 1)]
    size = m + k
    zero = one - one
    mat = []
    for r in range(k):
        row = [zero] * size
        for t, c in enumerate(pc):
            row[r + t] = c
        mat.append(row)
    for r in range(m):
        row = [zero] * size
        for t, c in enumerate(qc):
            row[r + t] = c
        mat.append(row)
    return _det(mat, one)


def res_set(p: Poly, chain: Sequence[Poly]) -> Poly:
    """res(P, A) = res(res(P, A_r, x_{c_r}), A_1..A_{r-1}); res(P, []) = P."""
    r = p
    for a in reversed(chain):
        r = resultant(r, a, a.cls)
    return r


# -- text format --------------------------------------------------------------

def format_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    spec = p.spec
    parts = []
    for e, c in p.sorted_terms():
        factors = []
        for i, k in enumerate(e):
            if k == 1:
                factors.append(f"x{i + 1}")
            elif k > 1:
                factors.append(f"x{i + 1}^{k}")
        cs = spec.format_element(c)
        if not factors:
            parts.append(cs)
        elif c == 1:
            parts.append("*".join(factors))
        else:
            parts.append(cs + "*" + "*".join(factors))
    return " + ".join(parts)


_TOKEN = re.compile(r"\s*([+-])?\s*([^+-]+)")
_VAR = re.compile(r"^x(\d+)$")


def parse_poly(text: str, spec: FieldSpec, n: int, names: Mapping[str, int] | None = None) -> Poly:
    """Parse the text grammar ``[coef*]factor(*factor)*`` joined by ``+``.

    Factors are ``x<i>[^e]`` (or a name from ``names``), integers, or ``g<code>``
    field elements.  A leading ``-`` on a term negates it.
    """
    s = text.strip()
    if not s:
        raise PolyError("empty polynomial")
    raw: list[tuple[list[int], int]] = []
    pos = 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise PolyError(f"cannot parse polynomial near {s[pos:]!r}")
        sign, body = m.group(1), m.group(2).strip()
        if not body:
            raise PolyError(f"dangling operator in {text!r}")
        if pos > 0 and sign is None:
            raise PolyError(f"missing operator in {text!r}")
        pos = m.end()
        exps = [0] * n
        coef = 1
        for factor in body.split("*"):
            factor = factor.strip()
            if not factor:
                raise PolyError(f"empty factor in {body!r}")
            base, _, power = factor.partition("^")
            base = base.strip()
            k = 1
            if power:
                if not power.strip().isdigit():
                    raise PolyError(f"bad exponent in {factor!r}")
                k = int(power)
            vm = _VAR.match(base)
            if vm or (names and base in names):
                idx = int(vm.group(1)) if vm else names[base]
                if not 1 <= idx <= n:
                    raise PolyError(f"variable {base} outside x1..x{n}")
                exps[idx - 1] += k
            elif base.isdigit():
                coef = spec.mul(coef, spec.pow(spec.from_int(int(base)), k))
            elif base.startswith("g") and base[1:].isdigit():
                g = int(base[1:])
                if g >= spec.q:
                    raise PolyError(f"field element {base} out of range")
                coef = spec.mul(coef, spec.pow(g, k))
            else:
                raise PolyError(f"unknown factor {factor!r}")
        if sign == "-":
            coef = spec.neg(coef)
        raw.append((exps, coef))
    return poly_normalize(raw, spec, n)
