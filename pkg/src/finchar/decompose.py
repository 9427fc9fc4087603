"""Zero decomposition into disjoint monic proper triangular sets.

Three drivers share one depth-first loop:

* :func:`tdcs` works over any R_q with :class:`Poly` systems (top-down
  well-ordering plus the properness re-check),
* :func:`tdcs2` and :func:`mfcs` work over R_2 on ZDD node ids; ``mfcs``
  uses additions only inside the well-ordering step.

Each well-ordering call returns a triangular set (or ``None`` when the system
is contradictory) and the list of split-off systems; the zero set of the input
is the disjoint union of the zero sets of all of these.
"""
from __future__ import annotations

import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .field import FieldSpec
from .instrument import count_multiplications, note_mul
from .poly import Poly, prem
from .trisets import TriangularSet, properness_remainders, ts_count, ts_lower
from .zddpoly import BoolPoly, ZddStore, node_to_poly

log = logging.getLogger(__name__)

DEFAULT_MAX_COMPONENTS = 1 << 24
ALGORITHMS = ("tdcs", "tdcs2", "mfcs")
CACHE_LIMIT = 1 << 21  # ZDD operation-cache entries kept before a flush
MEMORY_CHECK_EVERY = 64


def default_max_components() -> int:
    env = os.environ.get("FINCHAR_MAX_COMPONENTS")
    return int(env) if env else DEFAULT_MAX_COMPONENTS


def default_max_memory_mb() -> int | None:
    """FINCHAR_MAX_MEMORY_MB, else 70% of physical memory when it is known."""
    env = os.environ.get("FINCHAR_MAX_MEMORY_MB")
    if env:
        return int(env)
    try:
        return int(os.sysconf("SC_PHYS_PAGES") * os.sysconf("SC_PAGE_SIZE") * 0.7) >> 20
    except (ValueError, OSError, AttributeError):
        return None


def rss_mb() -> float:
    """Resident size of this process; falls back to the peak where /proc is missing."""
    try:
        with open("/proc/self/statm") as fh:
            return int(fh.read().split()[1]) * os.sysconf("SC_PAGE_SIZE") / 2 ** 20
    except OSError:
        import resource
        peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
        return peak / 2 ** 20 if sys.platform == "darwin" else peak / 1024


# -- statistics ---------------------------------------------------------------

@dataclass
class BoundTally:
    checked: int = 0
    violated: int = 0
    first_violation: dict | None = None

    def record(self, ok: bool, detail: Callable[[], dict]) -> None:
        self.checked += 1
        if not ok:
            self.violated += 1
            if self.first_violation is None:
                self.first_violation = detail()

    def merge(self, other: "BoundTally") -> None:
        self.checked += other.checked
        self.violated += other.violated
        if self.first_violation is None:
            self.first_violation = other.first_violation


BOUND_NAMES = ("mul_bound", "length_bound", "length_bound_n", "monomial_bound", "mul_free")


@dataclass
class SolveStats:
    """Counters for one solve.  All fields only ever grow during a run.

    ``N_C`` counts the polynomial systems split off by the well-ordering
    procedure, i.e. the number of sub-problems the run had to visit besides
    the input.
    """
    mul_count: int = 0
    max_len: int = 0
    max_terms: int = 0
    N_C: int = 0
    branch_count: int = 0
    triset_calls: int = 0
    reinjections: int = 0
    components: int = 0
    bounds: dict = field(default_factory=lambda: {k: BoundTally() for k in BOUND_NAMES})

    def see_len(self, length: int, terms: int) -> None:
        if length > self.max_len:
            self.max_len = length
        if terms > self.max_terms:
            self.max_terms = terms

    def merge(self, other: "SolveStats") -> None:
        self.mul_count += other.mul_count
        self.max_len = max(self.max_len, other.max_len)
        self.max_terms = max(self.max_terms, other.max_terms)
        self.N_C += other.N_C
        self.branch_count += other.branch_count
        self.triset_calls += other.triset_calls
        self.reinjections += other.reinjections
        self.components += other.components
        for k, t in other.bounds.items():
            self.bounds.setdefault(k, BoundTally()).merge(t)

    def to_json(self) -> dict:
        return {
            "mul_count": self.mul_count,
            "max_len": self.max_len,
            "max_terms": self.max_terms,
            "N_C": self.N_C,
            "branch_count": self.branch_count,
            "triset_calls": self.triset_calls,
            "reinjections": self.reinjections,
            "components": self.components,
            "bounds": {k: {"checked": t.checked, "violated": t.violated}
                       for k, t in sorted(self.bounds.items()) if t.checked},
        }

    @classmethod
    def from_json(cls, d: dict) -> "SolveStats":
        s = cls(**{k: d[k] for k in ("mul_count", "max_len", "max_terms", "N_C", "branch_count",
                                     "triset_calls", "reinjections", "components")})
        for k, t in d.get("bounds", {}).items():
            s.bounds[k] = BoundTally(t["checked"], t["violated"], t.get("first_violation"))
        return s


def tdtriset_mul_bound(n: int, q: int, l: int) -> int:
    """Explicit multiplication bound from the complexity argument for the
    top-down well-ordering step: 2n(q-1)(q-2) + n^2(q-2)(q-1) + nl(q-1)."""
    return 2 * n * (q - 1) * (q - 2) + n * n * (q - 2) * (q - 1) + n * l * (q - 1)


def stats_check(stats: SolveStats) -> dict:
    """Pass/fail per bound that the run actually exercised."""
    return {k: {"checked": t.checked, "violated": t.violated, "pass": t.violated == 0,
                "first_violation": t.first_violation}
            for k, t in stats.bounds.items() if t.checked}


# -- decomposition result -----------------------------------------------------

class ResourceLimitError(RuntimeError):
    """Raised when a component or time budget runs out; carries the partial work."""

    def __init__(self, message: str, partial: "Decomposition"):
        super().__init__(message)
        self.partial = partial


@dataclass
class Decomposition:
    components: list
    stats: SolveStats
    spec: FieldSpec
    n: int
    algorithm: str
    status: str = "complete"
    seconds: float = 0.0

    @property
    def total_count(self) -> int:
        return sum(ts_count(c, check=False) for c in self.components)

    @property
    def N_C(self) -> int:
        return self.stats.N_C

    def zeros(self, limit: int = 1 << 20, check: bool = True) -> list[tuple[int, ...]]:
        from .trisets import ts_enumerate
        out: list = []
        for c in self.components:
            out.extend(ts_enumerate(c, limit=limit - len(out), check=check))
        return out


# -- the general top-down well-ordering step -----------------------------------

def _clean(polys: Sequence) -> list:
    """Drop zeros and exact duplicates, keeping first occurrences."""
    return list(dict.fromkeys(p for p in polys if not p.is_zero()))


def _pick_key(c: int):
    def key(item):
        i, p = item
        return (p.deg(c), p.nterms(), p.length(), i)
    return key


def termination_index(polys: Sequence[Poly], n: int, q: int) -> tuple:
    """(c, c_{n,q-1}, ..., c_{1,1}) where c_{i,j} counts class-i degree-j members
    and every class above c holds at most one polynomial, which is monic."""
    counts = [[0] * q for _ in range(n + 1)]
    monic_top = [True] * (n + 1)
    for p in polys:
        k = p.cls
        if k:
            counts[k][p.deg(k)] += 1
            if not p.initial().is_one():
                monic_top[k] = False
    c = n
    while c >= 1 and sum(counts[c]) <= 1 and monic_top[c]:
        c -= 1
    flat = [counts[i][j] for i in range(n, 0, -1) for j in range(q - 1, 0, -1)]
    return (c, *flat)


def td_triset(ps: Sequence[Poly], stats: SolveStats | None = None, debug: bool = False):
    """Top-down well-ordering over R_q.

    Returns ``(A, branches)``: ``A`` is a monic triangular set (ascending
    classes) or ``None`` when the system has no zeros; each branch is a
    polynomial system whose zero set is disjoint from ``A``'s and the others'.
    """
    stats = stats if stats is not None else SolveStats()
    polys = _clean(ps)
    if not polys:
        return [], []
    spec, n = polys[0].spec, polys[0].n
    q = spec.q
    l_in = len(polys)
    chain: list[Poly] = []  # built from the top class down
    branches: list[list[Poly]] = []
    index = termination_index(polys, n, q) if debug else None
    combined = set(polys)
    start_index = index

    def update(new_ps):
        # moving a lone monic polynomial from PS into the chain leaves A + PS
        # as it was; every other update must lower the index
        nonlocal index, combined
        if debug:
            new_combined = set(new_ps) | set(chain)
            new_index = termination_index(list(new_combined), n, q)
            if new_combined == combined:
                assert new_index == index
            else:
                assert new_index < index, f"index did not decrease: {index} -> {new_index}"
            index, combined = new_index, new_combined
        return new_ps

    with count_multiplications() as mc:
        result: list[Poly] | None = None
        while True:
            for p in polys:
                stats.see_len(p.length(), p.nterms())
            if not polys:
                result = chain[::-1]
                break
            if any(p.is_const() for p in polys):
                break
            c = max(p.cls for p in polys)
            ps1 = [(i, p) for i, p in enumerate(polys) if p.cls == c]
            rest = [p for p in polys if p.cls != c]
            qi, qpoly = min(ps1, key=_pick_key(c))
            d = qpoly.deg(c)
            init, tail = qpoly.initial_split()
            others = [p for i, p in ps1 if i != qi]
            if init.is_one():
                rems = _clean(prem(p, qpoly) for p in others)
                if all(r.cls < c for r in rems):
                    chain.append(qpoly)
                    polys = update(_clean(rems + rest))
                else:
                    polys = update(_clean(rems + [qpoly] + rest))
                continue
            inv_like = init ** (q - 2)
            q1 = Poly.var(spec, n, c, d) + inv_like * tail
            nonzero_cond = inv_like * init - 1
            if not init.is_const():
                branch = [p for i, p in enumerate(polys) if i != qi] + chain[::-1] + [init, tail]
                if debug:
                    b_index = termination_index(branch, n, q)
                    assert b_index < start_index, f"branch index {b_index} !< {start_index}"
                branches.append(branch)
                stats.branch_count += 1
            rems = _clean(prem(p, q1) for p in others)
            new_ps = rems + [nonzero_cond] + rest
            if all(r.cls < c for r in rems):
                chain.append(q1)
                polys = update(_clean(new_ps))
            else:
                polys = update(_clean(new_ps + [q1]))
    stats.triset_calls += 1
    stats.mul_count += mc.count
    bound = tdtriset_mul_bound(n, q, l_in)
    stats.bounds["mul_bound"].record(
        mc.count <= bound, lambda: {"n": n, "q": q, "l": l_in, "muls": mc.count, "bound": bound})
    return result, branches


# -- Boolean well-ordering steps on raw ZDD nodes --------------------------------

def _clean_nodes(nodes) -> list[int]:
    return list(dict.fromkeys(u for u in nodes if u))


def _bool_mul(store: ZddStore, a: int, b: int) -> int:
    if a > 1 and b > 1:
        note_mul()
    return store.mul(a, b)


def _support_vars(mask: int) -> list[int]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


def propagate_units(store: ZddStore, nodes: Sequence[int]) -> list[int]:
    """Substitute every unit constraint x_k (+1) of the system into the others.

    A polynomial m + 1 with m a monomial is first replaced by the units
    x_k + 1 for the variables of m (m = 1 forces each of them to 1).  Repeats
    until no new unit appears; the units themselves stay in the system, so
    the zero set is unchanged.  A clash between x_k and x_k + 1, or any
    polynomial becoming 1, yields ``[1]``.  Only restrictions (cofactors) are
    used, no products.
    """
    var, lo, hi, support = store.var, store.lo, store.hi, store.support
    nterms, hasconst, deg = store.nterms, store.hasconst, store.deg
    polys = _clean_nodes(nodes)
    units: dict[int, int] = {}
    while True:
        if 1 in polys:
            return [1]
        if any(nterms[u] == 2 and hasconst[u] and deg[u] > 1 for u in polys):
            split = []
            for u in polys:
                if nterms[u] == 2 and hasconst[u] and deg[u] > 1:
                    split.extend(store.mk(k, 1, 1) for k in _support_vars(support[u]))
                else:
                    split.append(u)
            polys = _clean_nodes(split)
        fresh = {}
        for u in polys:
            if hi[u] == 1 and lo[u] <= 1:
                k = var[u]
                e = units.get(k, fresh.get(k))
                if e is None:
                    fresh[k] = lo[u]
                elif e != lo[u]:
                    return [1]
        units.update(fresh)
        mask = 0
        for k in units:
            mask |= 1 << k
        changed = False
        out = []
        for u in polys:
            if not support[u] & mask or (hi[u] == 1 and lo[u] <= 1):
                out.append(u)
                continue
            for k in sorted((k for k in units if (support[u] >> k) & 1), reverse=True):
                u = store.restrict(u, k, units[k])
                if u <= 1:
                    break
            changed = True
            out.append(u)
        polys = _clean_nodes(out)
        if not changed:
            return polys


def _bool_pick(store: ZddStore, nodes: list[int]) -> int:
    deg, nterms, length = store.deg, store.nterms, store.length
    best = min(range(len(nodes)), key=lambda j: (deg[nodes[j]], nterms[nodes[j]], length(nodes[j]), j))
    return best


def _bool_prem_monic(store: ZddStore, p: int, q: int) -> int:
    """prem(p, x_c + U) = V + J*U for p = J x_c + V of the same class."""
    var = store.var
    if var[p] != var[q]:
        return p
    return store.add(store.lo[p], _bool_mul(store, store.hi[p], store.lo[q]))


def td_triset2_nodes(store: ZddStore, ps: Sequence[int], stats: SolveStats, propagate: bool = False):
    """Top-down well-ordering over R_2; the I = 0 branch carries I*U + I + U.

    With ``propagate`` unit constraints are substituted before each class is
    processed (see :func:`propagate_units`).
    """
    var, lo, hi = store.var, store.lo, store.hi
    polys = _clean_nodes(ps)
    n_vars = max((var[u] for u in polys), default=0)
    l_in = len(polys)
    chain: list[int] = []
    branches: list[list[int]] = []
    with count_multiplications() as mc:
        result = None
        while True:
            if propagate:
                polys = propagate_units(store, polys)
            for u in polys:
                stats.see_len(store.length(u), store.nterms[u])
            if not polys:
                result = chain[::-1]
                break
            if 1 in polys:
                break
            c = max(var[u] for u in polys)
            ps1_idx = [i for i, u in enumerate(polys) if var[u] == c]
            ps1 = [polys[i] for i in ps1_idx]
            rest = [u for u in polys if var[u] != c]
            j = _bool_pick(store, ps1)
            qi = ps1_idx[j]
            qn = ps1[j]
            others = [u for k, u in enumerate(ps1) if k != j]
            init, tail = hi[qn], lo[qn]
            if init == 1:
                rems = [_bool_prem_monic(store, u, qn) for u in others]
                chain.append(qn)
                polys = _clean_nodes(rems + rest)
                continue
            q1 = store.mk(c, tail, 1)
            merged = store.add(store.add(_bool_mul(store, init, tail), init), tail)
            branches.append([u for k, u in enumerate(polys) if k != qi] + chain[::-1] + [merged])
            stats.branch_count += 1
            rems = [_bool_prem_monic(store, u, q1) for u in others]
            chain.append(q1)
            polys = _clean_nodes(rems + [store.add(init, 1)] + rest)
    stats.triset_calls += 1
    stats.mul_count += mc.count
    bound = tdtriset_mul_bound(n_vars, 2, l_in)
    stats.bounds["mul_bound"].record(
        mc.count <= bound, lambda: {"n": n_vars, "q": 2, "l": l_in, "muls": mc.count, "bound": bound})
    return result, branches


def mf_triset_nodes(store: ZddStore, ps: Sequence[int], stats: SolveStats, n: int | None = None,
                    check_bounds: bool = True, propagate: bool = False):
    """Multiplication-free well-ordering over R_2.

    Every class-c member ``I x_c + U`` is made monic by splitting off the
    system where ``I = U = 0``; the survivors ``x_c + U`` are then reduced
    against the one of least total degree by plain addition.  With
    ``propagate`` unit constraints are substituted before each class.
    """
    var, lo, hi = store.var, store.lo, store.hi
    add, mk, length, nterms = store.add, store.mk, store.length, store.nterms
    polys = _clean_nodes(ps)
    if n is None:
        n = max((var[u] for u in polys), default=0)
    chain: list[int] = []
    branches: list[list[int]] = []

    if check_bounds:
        lens = [length(u) for u in polys]
        len_bound = sum(lens)
        len_bound_n = sum(sorted(lens, reverse=True)[:n]) if len(polys) > n else len_bound
        mono_bound = sum(var[u] * length(u) for u in polys) + 1
        support = 0
        for u in polys:
            support = store.union(support, u)
    call_max = 0
    call_terms = 0

    def see(u: int) -> None:
        nonlocal call_max, call_terms, support
        ln = length(u)
        if ln > call_max:
            call_max = ln
        t = nterms[u]
        if t > call_terms:
            call_terms = t
        if check_bounds:
            support = store.union(support, u)

    for u in polys:
        see(u)

    with count_multiplications() as mc:
        result = None
        while True:
            if propagate:
                before = set(polys)
                polys = propagate_units(store, polys)
                for u in polys:
                    if u not in before:
                        see(u)
            if not polys:
                result = chain[::-1]
                break
            if 1 in polys:
                break
            c = max(var[u] for u in polys)
            ps1 = [u for u in polys if var[u] == c]
            qs1 = [u for u in polys if var[u] != c]
            ps2: list[int] = []
            for k, p in enumerate(ps1):
                init, tail = hi[p], lo[p]
                if init != 1:
                    see(init)
                    see(tail)
                    branches.append(ps1[k + 1:] + qs1 + ps2 + [init, tail] + chain[::-1])
                    cond = add(init, 1)
                    see(cond)
                    qs1.append(cond)
                monic = mk(c, tail, 1)
                see(monic)
                ps2.append(monic)
            j = _bool_pick(store, ps2)
            qn = ps2[j]
            chain.append(qn)
            rems = []
            for k, u in enumerate(ps2):
                if k != j:
                    r = add(u, qn)
                    see(r)
                    rems.append(r)
            polys = _clean_nodes(qs1 + rems)
    stats.triset_calls += 1
    stats.branch_count += len(branches)
    stats.mul_count += mc.count
    stats.see_len(call_max, call_terms)
    stats.bounds["mul_free"].record(mc.count == 0, lambda: {"muls": mc.count})
    if check_bounds:
        h = length(support)
        stats.bounds["length_bound"].record(
            call_max <= len_bound, lambda: {"max_len": call_max, "bound": len_bound})
        stats.bounds["length_bound_n"].record(
            call_max <= len_bound_n, lambda: {"max_len": call_max, "bound": len_bound_n})
        stats.bounds["monomial_bound"].record(
            h <= mono_bound, lambda: {"H": h, "bound": mono_bound})
    return result, branches


# -- public wrappers on BoolPoly -------------------------------------------------

def _nodes_of(ps: Sequence[BoolPoly]) -> tuple[ZddStore | None, list[int]]:
    store = None
    for p in ps:
        if store is None:
            store = p.store
        elif p.store is not store:
            raise ValueError("BoolPoly operands live in different stores")
    return store, [p.node for p in ps]


def td_triset2(ps: Sequence[BoolPoly], stats: SolveStats | None = None, propagate: bool = False):
    store, nodes = _nodes_of(ps)
    stats = stats if stats is not None else SolveStats()
    if store is None:
        return [], []
    a, br = td_triset2_nodes(store, nodes, stats, propagate=propagate)
    wrap = lambda us: [BoolPoly(store, u) for u in us]  # noqa: E731
    return (None if a is None else wrap(a)), [wrap(b) for b in br]


def mf_triset(ps: Sequence[BoolPoly], stats: SolveStats | None = None, n: int | None = None,
              propagate: bool = False):
    store, nodes = _nodes_of(ps)
    stats = stats if stats is not None else SolveStats()
    if store is None:
        return [], []
    a, br = mf_triset_nodes(store, nodes, stats, n=n, propagate=propagate)
    wrap = lambda us: [BoolPoly(store, u) for u in us]  # noqa: E731
    return (None if a is None else wrap(a)), [wrap(b) for b in br]


# -- the driver ----------------------------------------------------------------

@dataclass
class Limits:
    max_components: int = field(default_factory=default_max_components)
    time_budget: float | None = None
    deadline: float | None = None
    max_memory_mb: int | None = field(default_factory=default_max_memory_mb)

    def resolved_deadline(self, start: float) -> float | None:
        if self.deadline is not None:
            return self.deadline
        return None if self.time_budget is None else start + self.time_budget


class _Engine:
    """Algorithm-specific pieces plugged into the shared depth-first loop."""

    def __init__(self, algorithm: str, spec: FieldSpec, n: int, check_bounds: bool = True,
                 debug: bool = False, propagate: bool = True):
        if algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algorithm!r}")
        if algorithm != "tdcs" and spec.q != 2:
            raise ValueError(f"{algorithm} needs q = 2")
        self.algorithm = algorithm
        self.spec = spec
        self.n = n
        self.check_bounds = check_bounds
        self.debug = debug
        self.propagate = propagate
        self.parents: dict[int, TriangularSet] = {}  # debug: re-injected system -> its chain
        self.store = ZddStore() if algorithm != "tdcs" else None
        self.batches: list[list] = []  # equations still to add, one list per later stage

    # systems travel between processes as lists of (exponent tuple, code) pairs
    def encode(self, system) -> list:
        if self.store is None:
            return [sorted(p.terms.items()) for p in system]
        return [sorted(self.store.monomials(u)) for u in system]

    def decode(self, data) -> list:
        if self.store is None:
            return [Poly(self.spec, self.n, {tuple(e): c for e, c in t}) for t in data]
        return [self.store.from_monomials(m) for m in data]

    def from_polys(self, polys: Sequence[Poly]) -> list:
        if self.store is None:
            return list(polys)
        return [self.store.from_monomials(tuple(i + 1 for i, x in enumerate(e) if x) for e in p.terms)
                for p in polys]

    def step(self, system, stats: SolveStats):
        if self.algorithm == "tdcs":
            chain, branches = td_triset(system, stats, debug=self.debug)
            parent = self.parents.pop(id(system), None)
            if parent is not None and chain is not None:
                new = TriangularSet(chain, self.n, self.spec)
                assert ts_lower(new, parent), f"{new} is not lower than {parent}"
            return chain, branches
        if self.algorithm == "tdcs2":
            return td_triset2_nodes(self.store, system, stats, propagate=self.propagate)
        return mf_triset_nodes(self.store, system, stats, n=self.n, check_bounds=self.check_bounds,
                               propagate=self.propagate)

    def finish(self, chain, stage: int, stack: list, stats: SolveStats):
        """Return a finished chain, or push follow-up work and return None.

        Follow-up work is the re-injected system of an improper chain, or the
        chain together with the next batch of equations."""
        if self.algorithm == "tdcs":
            ts = TriangularSet(chain, self.n, self.spec)
            extra = properness_remainders(ts)
            if extra:
                stats.reinjections += 1
                system = list(chain) + extra
                if self.debug:
                    self.parents[id(system)] = ts
                stack.append((system, stage))
                return None
            chain = ts
        if stage < len(self.batches):
            polys = list(chain.polys) if isinstance(chain, TriangularSet) else list(chain)
            stack.append((polys + self.batches[stage], stage + 1))
            return None
        return chain

    def trim_caches(self) -> None:
        st = self.store
        if st is not None and (len(st._add_cache) + len(st._mul_cache) + len(st._union_cache)
                               + len(st._restrict_cache)) > CACHE_LIMIT:
            st.clear_caches()

    def to_triangular(self, chain) -> TriangularSet:
        if isinstance(chain, TriangularSet):
            return chain
        return TriangularSet([node_to_poly(self.store, u, self.spec, self.n) for u in chain],
                             self.n, self.spec)


def _loop(engine: _Engine, stack: list, stats: SolveStats, limits: Limits, deadline: float | None,
          done: list, stop_when: int | None = None) -> list:
    """Depth-first processing of ``(system, stage)`` pairs; finished raw
    chains are appended to ``done`` as they appear, so they survive a budget
    stop."""
    steps = 0
    while stack:
        if stop_when is not None and len(stack) >= stop_when:
            break
        if stats.N_C + 1 > limits.max_components:
            raise _Budget(f"component cap {limits.max_components} reached")
        if deadline is not None and time.monotonic() > deadline:
            raise _Budget("time budget exhausted")
        steps += 1
        if steps % MEMORY_CHECK_EVERY == 0:
            engine.trim_caches()
            if limits.max_memory_mb is not None and rss_mb() > limits.max_memory_mb:
                raise _Budget(f"memory limit {limits.max_memory_mb} MB reached")
        system, stage = stack.pop()
        chain, branches = engine.step(system, stats)
        stats.N_C += len(branches)
        stack.extend((b, stage) for b in reversed(branches))
        if chain is not None:
            out = engine.finish(chain, stage, stack, stats)
            if out is not None:
                done.append(out)
                stats.components += 1
    return done


class _Budget(Exception):
    pass


def _finalize(engine: _Engine, chains: list, stats: SolveStats, status: str, seconds: float) -> Decomposition:
    try:
        comps = [engine.to_triangular(c) for c in chains]
    except MemoryError:
        if status == "complete":
            raise
        log.warning("dropping %d finished components: too large to convert", len(chains))
        comps = []
    comps.sort(key=TriangularSet.sort_key)
    return Decomposition(comps, stats, engine.spec, engine.n, engine.algorithm, status, seconds)


def _worker(payload):
    (algorithm, spec_json, n, systems, batches, max_components, max_memory_mb, deadline, check_bounds,
     propagate) = payload
    spec = FieldSpec.from_json(spec_json)
    engine = _Engine(algorithm, spec, n, check_bounds, propagate=propagate)
    engine.batches = [engine.decode(b) for b in batches]
    stats = SolveStats()
    stack = [(engine.decode(s), stage) for s, stage in reversed(systems)]
    limits = Limits(max_components=max_components, max_memory_mb=max_memory_mb)
    status = "complete"
    chains: list = []
    try:
        _loop(engine, stack, stats, limits, deadline, chains)
    except _Budget:
        status = "partial"
    comps = [[sorted(p.terms.items()) for p in engine.to_triangular(c).polys] for c in chains]
    return comps, stats, status


def decompose(polys: Sequence[Poly], algorithm: str = "tdcs", *, spec: FieldSpec | None = None,
              n: int | None = None, limits: Limits | None = None, threads: int = 1,
              check_bounds: bool = True, debug: bool = False, propagate: bool = True,
              batch: int | None = None) -> Decomposition:
    """Decompose the zero set of ``polys`` with the named algorithm.

    ``spec``/``n`` are needed only when ``polys`` is empty.  With ``threads >
    1`` pending sub-systems are farmed out to worker processes; the result
    (components and counters) is the same as a sequential run.  ``propagate``
    switches unit substitution in the Boolean algorithms; ``False`` runs the
    well-ordering steps exactly as stated.

    With ``batch`` the equations are taken in input order, ``batch`` at a
    time: the first batch is decomposed, then every component is decomposed
    again together with the next batch, and so on.  The zero set is the same;
    on systems whose later equations are dense this keeps the tree small.
    """
    polys = list(polys)
    if polys:
        spec, n = polys[0].spec, polys[0].n
    if spec is None or n is None:
        raise ValueError("empty system needs spec and n")
    limits = limits or Limits()
    start = time.monotonic()
    deadline = limits.resolved_deadline(start)
    engine = _Engine(algorithm, spec, n, check_bounds, debug, propagate)
    stats = SolveStats()
    system = engine.from_polys(polys)
    if batch is not None:
        if batch < 1:
            raise ValueError("batch must be positive")
        engine.batches = [system[i:i + batch] for i in range(batch, len(system), batch)]
        system = system[:batch]
    stack = [(system, 0)]
    chains: list = []
    try:
        if threads > 1:
            _loop(engine, stack, stats, limits, deadline, chains, stop_when=4 * threads)
            if stack:
                _parallel(engine, stack, stats, limits, deadline, threads, chains)
        else:
            _loop(engine, stack, stats, limits, deadline, chains)
    except _Budget as exc:
        partial = _finalize(engine, chains, stats, "partial", time.monotonic() - start)
        raise ResourceLimitError(str(exc), partial) from None
    return _finalize(engine, chains, stats, "complete", time.monotonic() - start)


def _parallel(engine: _Engine, stack: list, stats: SolveStats, limits: Limits,
              deadline: float | None, threads: int, chains: list) -> None:
    # stack top is processed first; keep that order inside each worker's share
    pending = [(engine.encode(s), stage) for s, stage in reversed(stack)]
    stack.clear()
    shares = [pending[i::threads] for i in range(threads)]
    batches = [engine.encode(b) for b in engine.batches]
    payloads = [(engine.algorithm, engine.spec.to_json(), engine.n, share, batches, limits.max_components,
                 limits.max_memory_mb, deadline, engine.check_bounds, engine.propagate) for share in shares if share]
    partial = False
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for comps, sub, status in pool.map(_worker, payloads):
            stats.merge(sub)
            partial |= status != "complete"
            for comp in comps:
                ts = TriangularSet([Poly(engine.spec, engine.n, {tuple(e): c for e, c in t}) for t in comp],
                                   engine.n, engine.spec)
                chains.append(ts)
    if partial:
        raise _Budget("budget exhausted in a worker")


def tdcs(polys: Sequence[Poly], **kw) -> Decomposition:
    return decompose(polys, "tdcs", **kw)


def tdcs2(polys: Sequence, **kw) -> Decomposition:
    return _bool_entry(polys, "tdcs2", **kw)


def mfcs(polys: Sequence, **kw) -> Decomposition:
    return _bool_entry(polys, "mfcs", **kw)


def _bool_entry(polys, algorithm, **kw):
    polys = list(polys)
    if polys and isinstance(polys[0], BoolPoly):
        n = kw.pop("n", None) or max((p.cls for p in polys), default=0)
        spec = kw.pop("spec", None) or FieldSpec(2)
        converted = [node_to_poly(p.store, p.node, spec, n) for p in polys]
        return decompose(converted, algorithm, spec=spec, n=n, **kw)
    return decompose(polys, algorithm, **kw)
