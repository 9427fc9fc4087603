"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line (echoed again in the terminal
summary) and then asserts, so a failing criterion is visible both ways.
"""
import csv
import io
import random
import time
from contextlib import redirect_stdout
from fractions import Fraction

from finchar.cli import dump_json, main, report_json
from finchar.decompose import (Limits, ResourceLimitError, SolveStats, decompose, stats_check, td_triset,
                               tdtriset_mul_bound)
from finchar.field import GF
from finchar.oracle import brute_count, brute_zero_set
from finchar.poly import parse_poly
from finchar.problems import (LfsrSpec, NfgSpec, matmul_equations, planted_bivium, planted_nfg,
                              verify_reduction)
from finchar.trisets import TriangularSet, ts_degree, ts_dim, ts_enumerate, ts_is_monic, ts_is_proper

from conftest import ACCEPTANCE_LINES, random_monic_triset, random_system

F2, F3 = GF(2), GF(3)

# Boolean stats from every run in this module, for the bound criteria
MF_STATS = SolveStats()
TD_STATS = SolveStats()

NFG_SPEC = NfgSpec(LfsrSpec.from_exponents((40, 21, 19, 2, 0)), "canfil5", tuple(range(7)), 60)
NFG_BATCH = 10
BIVIUM_BATCH = 30


def record(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def note(num: int, detail: str) -> None:
    line = f"criterion {num:2d}: info  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def tally(d) -> None:
    (TD_STATS if d.algorithm == "tdcs" else MF_STATS).merge(d.stats)


def cube():
    return [parse_poly("x1*x2*x3^2 - 1", F3, 3)]


def random_corpus(q: int, count: int = 200, seed: int = 0):
    rng = random.Random(1000 * q + seed)
    for _ in range(count):
        n = rng.randint(1, 8)
        yield n, random_system(rng, GF(q), n, rng.randint(1, 6), max_deg=3)


def disjoint_cover(d, truth: set) -> bool:
    seen: set = set()
    for comp in d.components:
        pts = set(ts_enumerate(comp))
        if pts & seen or not ts_is_monic(comp):
            return False
        seen |= pts
    return seen == truth and d.total_count == len(truth)


# -- 1 -----------------------------------------------------------------------------

def test_criterion_01_cube_example():
    t0 = time.perf_counter()
    d = decompose(cube(), "tdcs")
    elapsed = time.perf_counter() - t0
    tally(d)
    expect = set(brute_zero_set([parse_poly(t, F3, 3) for t in ("x1^2 - 1", "x2 - x1", "x3^2 - x1*x2")], 3, F3))
    ok = (d.total_count == 4 and len(d.components) == 1 and ts_is_proper(d.components[0])
          and ts_is_monic(d.components[0]) and set(ts_enumerate(d.components[0])) == expect and elapsed < 1.0)
    record(1, ok, f"count {d.total_count}, {len(d.components)} component, {elapsed:.3f} s")
    assert ok


# -- 2 -----------------------------------------------------------------------------

CONFIGS = [(3, "tdcs", True), (2, "tdcs", True), (2, "tdcs2", True), (2, "mfcs", True), (2, "mfcs", False)]


def test_criterion_02_oracle_equivalence():
    t0 = time.perf_counter()
    failures = []
    for q, algorithm, propagate in CONFIGS:
        for i, (n, ps) in enumerate(random_corpus(q)):
            d = decompose(ps, algorithm, propagate=propagate)
            tally(d)
            if not disjoint_cover(d, set(brute_zero_set(ps, n, GF(q)))):
                failures.append((q, algorithm, propagate, i))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 300
    record(2, ok, f"{len(CONFIGS)} configurations x 200 systems, {len(failures)} mismatches, {elapsed:.1f} s")
    assert ok, failures[:5]


# -- 3 -----------------------------------------------------------------------------

def test_criterion_03_properness_biconditional():
    rng = random.Random(3)
    t0 = time.perf_counter()
    bad, proper = 0, 0
    for i in range(200):
        q = (2, 3)[i % 2]
        n = rng.randint(1, 5)
        ts = TriangularSet(random_monic_triset(rng, GF(q), n), n, GF(q))
        expected = ts_degree(ts) * q ** ts_dim(ts)
        is_proper = ts_is_proper(ts)
        proper += is_proper
        bad += is_proper != (brute_count(ts.polys, n, GF(q)) == expected)
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 120
    record(3, ok, f"200 monic sets ({proper} proper), {bad} disagreements, {elapsed:.1f} s")
    assert ok


# -- 6 -----------------------------------------------------------------------------

def test_criterion_06_matrix_inverse():
    parts, ok = [], True
    for n, expect in ((2, 6), (3, 168)):
        inst = matmul_equations(n)
        d = decompose(inst.polys, "mfcs")
        tally(d)
        good = (verify_reduction(inst.check, d) and d.total_count == expect
                and brute_count(inst.polys, inst.n, F2) == expect)
        ok &= good
        parts.append(f"n={n} count {d.total_count} verify {good}")
    for order, batch in (("rows", 1), ("k", None)):
        inst = matmul_equations(4, order=order)
        t0 = time.perf_counter()
        try:
            d = decompose(inst.polys, "mfcs", batch=batch, limits=Limits(time_budget=600))
            tally(d)
            good = verify_reduction(inst.check, d)
            parts.append(f"n=4 {order} order batch {batch}: count {d.total_count} verify {good} "
                         f"N_C {d.N_C} {time.perf_counter() - t0:.1f} s")
        except ResourceLimitError:
            good = False
            parts.append(f"n=4 {order} order batch {batch}: no result in 600 s")
        ok &= good
    record(6, ok, "; ".join(parts))
    note(6, "one-shot mfcs on n=4 in rows order was not finished after 3000 s (see README)")
    assert ok


# -- 7 -----------------------------------------------------------------------------

def test_criterion_07_nfg_key_recovery():
    worst, failures = 0.0, []
    for seed in range(20):
        inst = planted_nfg(NFG_SPEC, seed)
        t0 = time.perf_counter()
        try:
            d = decompose(inst.polys, "mfcs", batch=NFG_BATCH, limits=Limits(time_budget=120))
            tally(d)
            found = inst.planted in d.zeros(limit=1 << 16)
        except ResourceLimitError:
            found = False
        elapsed = time.perf_counter() - t0
        worst = max(worst, elapsed)
        if not found or elapsed >= 120:
            failures.append(seed)
    ok = not failures
    record(7, ok, f"20 seeds, mfcs batch {NFG_BATCH}, key recovered in {20 - len(failures)}/20, "
                  f"slowest {worst:.2f} s")
    inst = planted_nfg(NFG_SPEC, 0)
    t0 = time.perf_counter()
    try:
        d = decompose(inst.polys, "mfcs", limits=Limits(time_budget=120))
        tally(d)
        note(7, f"one-shot mfcs seed 0: finished in {time.perf_counter() - t0:.1f} s")
    except ResourceLimitError as exc:
        MF_STATS.merge(exc.partial.stats)
        note(7, f"one-shot mfcs seed 0: no result within 120 s (N_C {exc.partial.stats.N_C})")
    assert ok, failures


# -- 4 and 5 piggyback on everything above ---------------------------------------

def test_criterion_04_length_and_monomial_bounds():
    rng = random.Random(4)
    for _ in range(50):
        n = rng.randint(2, 10)
        d = decompose(random_system(rng, F2, n, rng.randint(1, 8), max_deg=3), "mfcs", propagate=False)
        tally(d)
    checks = stats_check(MF_STATS)
    names = ("length_bound", "length_bound_n", "monomial_bound")
    ok = all(k in checks and checks[k]["pass"] for k in names)
    counts = ", ".join(f"{k} {checks[k]['checked'] - checks[k]['violated']}/{checks[k]['checked']}"
                       for k in names if k in checks)
    record(4, ok, counts)
    assert ok, {k: checks.get(k) for k in names}


def test_criterion_05_multiplication_bound():
    rng = random.Random(5)
    for q in (2, 3, 5):
        for _ in range(50):
            n = rng.randint(1, 5)
            ps = random_system(rng, GF(q), n, rng.randint(1, 5))
            stats = SolveStats()
            td_triset(ps, stats)
            assert stats.mul_count <= tdtriset_mul_bound(n, q, len(ps))
            TD_STATS.merge(stats)
    tally(decompose(cube(), "tdcs"))
    check = stats_check(TD_STATS)["mul_bound"]
    ok = check["pass"]
    record(5, ok, f"{check['checked'] - check['violated']}/{check['checked']} well-ordering calls within bound")
    assert ok, check["first_violation"]


# -- 8 -----------------------------------------------------------------------------

def test_criterion_08_bivium_structure():
    ok = True
    for N in (1, 10, 100, 700):
        inst = planted_bivium(N, seed=N)
        ok &= inst.n == 2 * N + 177 and len(inst.polys) == 3 * N
        ok &= all(p.eval(inst.planted) == 0 for p in inst.polys)
    record(8, ok, "shapes 2N+177 / 3N and planted state for N in 1, 10, 100, 700")
    inst = planted_bivium(700, seed=0)
    t0 = time.perf_counter()
    try:
        d = decompose(inst.polys, "mfcs", batch=BIVIUM_BATCH, limits=Limits(time_budget=120),
                      check_bounds=False)
        zeros = d.zeros(limit=1 << 10)
        right = inst.planted in zeros and all(p.eval(z) == 0 for z in zeros for p in inst.polys)
        note(8, f"N=700 stretch: {len(zeros)} solution(s), planted recovered {right}, "
                f"{time.perf_counter() - t0:.1f} s")
        ok &= right
    except ResourceLimitError as exc:
        note(8, f"N=700 stretch: stopped by the resource limit ({exc})")
    assert ok


# -- 9 -----------------------------------------------------------------------------

def test_criterion_09_bench_columns(tmp_path):
    path = tmp_path / "bench.csv"
    with redirect_stdout(io.StringIO()):
        assert main(["bench", "matmul", "--sizes", "2,3", "--csv", str(path)]) == 0
        assert main(["bench", "nfg-weighty", "--filters", "canfil5", "--batch", str(NFG_BATCH),
                     "--csv", str(tmp_path / "nfg.csv")]) == 0
    rows = list(csv.DictReader(open(path))) + list(csv.DictReader(open(tmp_path / "nfg.csv")))
    sizes = [8, 18, 40]
    ok = len(rows) == 3 and all({"N_C", "R"} <= set(r) for r in rows)
    ok &= all(Fraction(float(r["R"])) == Fraction(int(r["N_C"]), 2 ** n) for r, n in zip(rows, sizes))
    record(9, ok, f"{len(rows)} rows, R = N_C/2^n exact on each")
    assert ok


# -- 10 ----------------------------------------------------------------------------

def _reports(threads: int) -> list[str]:
    out = []
    runs = [(cube(), "tdcs", None, None)]
    for q, algorithm, propagate in CONFIGS:
        for _, ps in random_corpus(q, count=20):
            runs.append((ps, algorithm, None, propagate))
    for n in (2, 3):
        runs.append((matmul_equations(n).polys, "mfcs", None, None))
    runs.append((matmul_equations(4).polys, "mfcs", 1, None))
    for seed in range(20):
        runs.append((planted_nfg(NFG_SPEC, seed).polys, "mfcs", NFG_BATCH, None))
    for ps, algorithm, batch, propagate in runs:
        kw = {} if propagate is None else {"propagate": propagate}
        d = decompose(ps, algorithm, batch=batch, threads=threads, **kw)
        out.append(dump_json(report_json(d, d.zeros(limit=1 << 16))))
    return out


def test_criterion_10_determinism():
    first, threaded, again = _reports(1), _reports(4), _reports(1)
    same = sum(a == b == c for a, b, c in zip(first, threaded, again))
    ok = same == len(first)
    record(10, ok, f"{same}/{len(first)} reports byte-identical across 1/4/1 threads")
    assert ok
