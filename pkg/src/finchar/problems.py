"""Equation generators for filter generators, Bivium-A and Boolean matrix
inverses, plus the pseudo-reduction check used to confirm conclusions."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .decompose import Decomposition
from .field import GF, FieldSpec
from .poly import Poly, prem_set
from .zddpoly import ZddStore, node_to_poly

F2 = GF(2)

# Boolean filters in ANF, variables x1..xm
CANFIL = {
    "canfil1": "x1*x2*x3 + x1*x4 + x2*x5 + x3",
    "canfil2": "x1*x2*x3 + x1*x2*x4 + x1*x2*x5 + x1*x4 + x2*x5 + x3 + x4 + x5",
    "canfil3": "x2*x3*x4*x5 + x1*x2*x3 + x2*x4 + x3*x5 + x4 + x5",
    "canfil4": "x1*x2*x3 + x1*x4*x5 + x2*x3 + x1",
    "canfil5": "x2*x3*x4*x5 + x2*x3 + x1",
    "canfil6": "x1*x2*x3*x5 + x2*x3 + x4",
    "canfil7": "x1*x2*x3 + x2*x3*x4 + x2*x3*x5 + x1 + x2 + x3",
    "canfil8": "x1*x2*x3 + x2*x3*x6 + x1*x2 + x3*x4 + x5*x6 + x4 + x5",
    "canfil9": (
        "x2*x4*x5*x7 + x2*x5*x6*x7 + x3*x4*x6*x7"
        " + x1*x2*x4*x7 + x1*x3*x4*x7 + x1*x3*x6*x7 + x1*x4*x5*x7 + x1*x2*x5*x7"
        " + x1*x2*x6*x7 + x1*x4*x6*x7 + x3*x4*x5*x7 + x2*x4*x6*x7 + x3*x5*x6*x7"
        " + x1*x3*x5*x7 + x1*x2*x3*x7"
        " + x3*x4*x5 + x3*x4*x7 + x3*x6*x7 + x5*x6*x7 + x2*x6*x7 + x1*x4*x6 + x1*x5*x7"
        " + x2*x4*x5 + x2*x3*x7 + x1*x2*x7 + x1*x4*x5"
        " + x6*x7 + x4*x6 + x4*x7 + x5*x7 + x2*x5 + x3*x4 + x3*x5 + x1*x4 + x2*x7"
        " + x6 + x5 + x2 + x1"
    ),
    "canfil10": "x1*x2*x3 + x2*x3*x4 + x2*x3*x5 + x6*x7 + x3 + x2 + x1",
}


class ProblemError(ValueError):
    pass


def filter_monomials(text: str) -> list[tuple[int, ...]]:
    """ANF string -> list of monomials (ascending variable tuples); '1' is ()."""
    out = []
    for term in text.split("+"):
        term = term.strip()
        if term == "1":
            out.append(())
            continue
        out.append(tuple(sorted(int(f.strip()[1:]) for f in term.split("*"))))
    return out


def filter_arity(monomials: Sequence[tuple[int, ...]]) -> int:
    return max((max(m) for m in monomials if m), default=0)


def _eval_monomials(monomials, values: Sequence[int]) -> int:
    z = 0
    for m in monomials:
        if all(values[i - 1] for i in m):
            z ^= 1
    return z


# -- LFSR ---------------------------------------------------------------------

@dataclass(frozen=True)
class LfsrSpec:
    """Register of length L with s_i = c_1 s_{i-1} + ... + c_L s_{i-L}."""
    L: int
    taps: tuple[int, ...]  # (c_1, ..., c_L)

    def __post_init__(self):
        if len(self.taps) != self.L or self.L < 1:
            raise ProblemError("need exactly L feedback coefficients")
        if self.taps[-1] != 1 or any(c not in (0, 1) for c in self.taps):
            raise ProblemError("feedback coefficients must be bits with c_L = 1")

    @classmethod
    def from_exponents(cls, exponents: Sequence[int]) -> "LfsrSpec":
        """From the exponents of the feedback polynomial, e.g. (40, 21, 19, 2, 0)."""
        L = max(exponents)
        taps = [0] * L
        for e in exponents:
            if e > 0:
                taps[e - 1] = 1
        return cls(L, tuple(taps))

    @property
    def exponents(self) -> list[int]:
        return sorted((j + 1 for j, c in enumerate(self.taps) if c), reverse=True) + [0]

    @property
    def weight(self) -> int:
        """Number of nonzero coefficients of the feedback polynomial."""
        return sum(self.taps) + 1

    def sequence(self, state: Sequence[int], length: int) -> list[int]:
        s = list(state[: self.L])
        taps = [j + 1 for j, c in enumerate(self.taps) if c]
        while len(s) < length:
            i = len(s)
            s.append(sum(s[i - j] for j in taps) & 1)
        return s[:length]


def lfsr_state_exprs(spec: LfsrSpec, t_max: int) -> list[frozenset]:
    """s_0..s_{t_max} as sets of state-variable indices (x_{i+1} = s_i)."""
    taps = [j + 1 for j, c in enumerate(spec.taps) if c]
    exprs: list[frozenset] = []
    for i in range(t_max + 1):
        if i < spec.L:
            exprs.append(frozenset({i + 1}))
            continue
        acc: set = set()
        for j in taps:
            acc ^= exprs[i - j]
        exprs.append(frozenset(acc))
    return exprs


def linear_poly(expr: frozenset, n: int) -> Poly:
    terms = {}
    for i in expr:
        e = [0] * n
        e[i - 1] = 1
        terms[tuple(e)] = 1
    return Poly(F2, n, terms)


# -- filter generators ------------------------------------------------------------

@dataclass(frozen=True)
class NfgSpec:
    lfsr: LfsrSpec
    filter: str  # CANFIL name or an ANF string in x1..xm
    tapping: tuple[int, ...]
    keybits: int

    @property
    def filter_anf(self) -> str:
        return CANFIL.get(self.filter.lower(), self.filter)

    @property
    def monomials(self) -> list[tuple[int, ...]]:
        return filter_monomials(self.filter_anf)

    @property
    def taps_used(self) -> tuple[int, ...]:
        """The first m taps, m the filter's arity."""
        m = filter_arity(self.monomials)
        if m > len(self.tapping):
            raise ProblemError(f"filter needs {m} taps, got {len(self.tapping)}")
        return tuple(self.tapping[:m])

    def validate(self) -> None:
        if self.filter.lower().startswith("canfil") and self.filter.lower() not in CANFIL:
            raise ProblemError(f"unknown filter {self.filter!r}")
        taps = self.taps_used
        if len(set(self.tapping)) != len(self.tapping):
            raise ProblemError("tapping entries must be distinct")
        if any(not 0 <= k < self.lfsr.L for k in self.tapping):
            raise ProblemError(f"tapping entries must lie in [0, {self.lfsr.L})")
        if len(taps) > self.lfsr.L:
            raise ProblemError("filter arity exceeds register length")


@dataclass
class ProblemInstance:
    n: int
    polys: list[Poly]
    planted: tuple[int, ...] | None = None
    meta: dict = field(default_factory=dict)
    check: list[Poly] = field(default_factory=list)
    names: list[str] | None = None

    @property
    def spec(self) -> FieldSpec:
        return F2

    def assert_planted(self) -> None:
        if self.planted is None:
            return
        for p in self.polys:
            if p.eval(self.planted) != 0:
                raise ProblemError(f"planted point does not satisfy {p}")


def nfg_keystream(spec: NfgSpec, key: Sequence[int], k: int) -> list[int]:
    taps = spec.taps_used
    mons = spec.monomials
    s = spec.lfsr.sequence(key, k + max(taps, default=0))
    return [_eval_monomials(mons, [s[t + kj] for kj in taps]) for t in range(k)]


def nfg_equations(spec: NfgSpec, keystream: Sequence[int]) -> ProblemInstance:
    """f(s_{t+k_1}, ..., s_{t+k_m}) + z_t for t = 0..k-1, over x_i = s_{i-1}."""
    spec.validate()
    if len(keystream) != spec.keybits:
        raise ProblemError(f"keystream has {len(keystream)} bits, expected {spec.keybits}")
    taps = spec.taps_used
    mons = spec.monomials
    L = spec.lfsr.L
    exprs = lfsr_state_exprs(spec.lfsr, spec.keybits + max(taps, default=0))
    store = ZddStore()
    polys = []
    for t, z in enumerate(keystream):
        lin = [store.from_monomials((i,) for i in exprs[t + kj]) for kj in taps]
        acc = 1 if z else 0
        for m in mons:
            term = 1
            for i in m:
                term = store.mul(term, lin[i - 1])
            acc = store.add(acc, term)
        polys.append(node_to_poly(store, acc, F2, L))
    return ProblemInstance(L, polys, meta={"family": "nfg"})


def planted_nfg(spec: NfgSpec, seed: int) -> ProblemInstance:
    rng = random.Random(seed)
    key = tuple(rng.randrange(2) for _ in range(spec.lfsr.L))
    inst = nfg_equations(spec, nfg_keystream(spec, key, spec.keybits))
    inst.planted = key
    inst.assert_planted()
    return inst


# -- Bivium-A -------------------------------------------------------------------

def bivium_keystream(state: Sequence[int], N: int) -> tuple[list[int], list[int]]:
    """Run N clocks from s_1..s_177; returns (keystream, auxiliary values t1, t2 per clock)."""
    s = [0] + list(state)  # 1-based
    z, aux = [], []
    for _ in range(N):
        t1 = s[66] ^ s[93]
        t2 = s[162] ^ s[177]
        z.append(t2)
        t1 ^= (s[91] & s[92]) ^ s[171]
        t2 ^= (s[175] & s[176]) ^ s[69]
        aux.extend((t1, t2))
        s = [0, t2] + s[1:93] + [t1] + s[94:177]
    return z, aux


def bivium_a_equations(N: int, keystream: Sequence[int]) -> ProblemInstance:
    """3N equations in 2N + 177 variables: per clock the output bit and two
    register feedback bits, each feedback bit named by a fresh variable."""
    if N < 1:
        raise ProblemError("need at least one clock")
    if len(keystream) != N:
        raise ProblemError(f"keystream has {len(keystream)} bits, expected {N}")
    n = 2 * N + 177
    s = list(range(178))  # s[j] = variable currently holding register cell j
    rows: list[list[tuple[int, ...]]] = []
    for i in range(N):
        a, b = 178 + 2 * i, 179 + 2 * i
        out = [(s[162],), (s[177],)] + ([()] if keystream[i] else [])
        t1 = [(a,), (s[66],), (s[93],), tuple(sorted((s[91], s[92]))), (s[171],)]
        t2 = [(b,), (s[162],), (s[177],), tuple(sorted((s[175], s[176]))), (s[69],)]
        rows.extend((out, t1, t2))
        s = [0, b] + s[1:93] + [a] + s[94:177]
    store = ZddStore()
    polys = [node_to_poly(store, store.from_monomials(r), F2, n) for r in rows]
    names = [f"s{j}" for j in range(1, 178)] + [f"t{k}_{i + 1}" for i in range(N) for k in (1, 2)]
    return ProblemInstance(n, polys, meta={"family": "bivium", "clocks": N}, names=names)


def planted_bivium(N: int, seed: int) -> ProblemInstance:
    rng = random.Random(seed)
    state = tuple(rng.randrange(2) for _ in range(177))
    z, aux = bivium_keystream(state, N)
    inst = bivium_a_equations(N, z)
    inst.planted = state + tuple(aux)
    inst.assert_planted()
    return inst


# -- Boolean matrices -------------------------------------------------------------

MATMUL_ORDERS = ("rows", "k")


def matmul_equations(n: int, order: str = "rows") -> ProblemInstance:
    """AB = I as n^2 quadratics; BA = I as the check list.

    ``order="rows"`` numbers the entries of A then B, each row by row.
    ``order="k"`` numbers, for k = 1..n, column k of A then row k of B, so the
    two factors of every product a_ik b_kj sit in the same block.  The
    elimination then stays local and the decomposition is far smaller.
    """
    if n < 1:
        raise ProblemError("matrix size must be positive")
    if order not in MATMUL_ORDERS:
        raise ProblemError(f"unknown variable order {order!r}")
    nv = 2 * n * n
    if order == "rows":
        a = lambda i, j: i * n + j + 1  # noqa: E731
        b = lambda i, j: n * n + i * n + j + 1  # noqa: E731
    else:
        a = lambda i, j: 2 * n * j + i + 1  # noqa: E731
        b = lambda i, j: 2 * n * i + n + j + 1  # noqa: E731
    store = ZddStore()

    def product(x, y):
        polys = []
        for i in range(n):
            for j in range(n):
                mons = [tuple(sorted((x(i, k), y(k, j)))) for k in range(n)]
                if i == j:
                    mons.append(())
                polys.append(node_to_poly(store, store.from_monomials(mons), F2, nv))
        return polys

    sep = "" if n < 10 else "_"
    names = [""] * nv
    for i in range(n):
        for j in range(n):
            names[a(i, j) - 1] = f"a{i + 1}{sep}{j + 1}"
            names[b(i, j) - 1] = f"b{i + 1}{sep}{j + 1}"
    return ProblemInstance(nv, product(a, b), meta={"family": "matmul", "size": n, "order": order},
                           check=product(b, a), names=names)


# -- conclusion check ---------------------------------------------------------------

def _bool_prem_chain(store: ZddStore, node: int, chain: Sequence[int]) -> int:
    var, lo, hi = store.var, store.lo, store.hi
    r = node
    for a in reversed(chain):
        if r == 0:
            break
        c = var[a]
        # r's x_c-part sits below any higher variables, so split r in x_c
        r = _prem_linear(store, r, c, hi[a], lo[a])
    return r


def _prem_linear(store: ZddStore, r: int, c: int, init: int, tail: int) -> int:
    """prem(J x_c + V, I x_c + U) = I V + J U, for r = J x_c + V of any class."""
    j, v = _split_at(store, r, c)
    if j == 0:
        return r
    return store.add(store.mul(init, v), store.mul(j, tail))


def _split_at(store: ZddStore, r: int, c: int) -> tuple[int, int]:
    """(J, V) with r = J x_c + V and neither mentioning x_c."""
    memo: dict = {}
    var, lo, hi = store.var, store.lo, store.hi

    def rec(u):
        if var[u] < c:
            return 0, u
        got = memo.get(u)
        if got is not None:
            return got
        if var[u] == c:
            out = (hi[u], lo[u])
        else:
            j1, v1 = rec(hi[u])
            j0, v0 = rec(lo[u])
            out = (store.mk(var[u], j0, j1), store.mk(var[u], v0, v1))
        memo[u] = out
        return out

    return rec(r)


def first_failure(check: Sequence[Poly], decomposition: Decomposition) -> tuple[int, int] | None:
    """(component index, check index) of the first nonzero remainder, else None."""
    if decomposition.status != "complete":
        raise ProblemError("cannot verify against a partial decomposition")
    boolean = decomposition.spec.q == 2 and all(
        a.deg(a.cls) == 1 for comp in decomposition.components for a in comp.polys)
    if boolean:
        store = ZddStore()
        to_node = lambda p: store.from_monomials(  # noqa: E731
            tuple(i + 1 for i, x in enumerate(e) if x) for e in p.terms)
        chk = [to_node(p) for p in check]
        for ci, comp in enumerate(decomposition.components):
            chain = [to_node(a) for a in comp.polys]
            for pi, p in enumerate(chk):
                if _bool_prem_chain(store, p, chain) != 0:
                    return ci, pi
        return None
    for ci, comp in enumerate(decomposition.components):
        for pi, p in enumerate(check):
            if not prem_set(p, comp.polys).is_zero():
                return ci, pi
    return None


def verify_reduction(check: Sequence[Poly], decomposition: Decomposition) -> bool:
    """True iff every check polynomial pseudo-reduces to 0 against every component."""
    return first_failure(check, decomposition) is None
