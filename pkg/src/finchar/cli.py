"""Command-line front end: solve, generate, verify, bench, oracle.

Exit codes: 0 ok, 1 verification failed, 2 parse error, 3 algorithm does not
fit the field, 4 resource cap hit (partial JSON still printed).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import statistics
import sys
import time

from .decompose import ALGORITHMS, Decomposition, Limits, ResourceLimitError, decompose, default_max_components
from .field import FieldSpec
from .oracle import OracleLimitError, OracleLimits, brute_count, brute_zero_set
from .poly import PolyError, parse_poly
from .problems import (CANFIL, MATMUL_ORDERS, LfsrSpec, NfgSpec, ProblemError, ProblemInstance, first_failure,
                       matmul_equations, nfg_equations, nfg_keystream, planted_bivium, planted_nfg,
                       bivium_a_equations)
from .system import System, SystemParseError, format_system, parse_system, read_system
from .trisets import LimitExceeded, TriangularSet

log = logging.getLogger("finchar")

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_ALGO, EXIT_CAP = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- reports --------------------------------------------------------------------

def report_json(d: Decomposition, zeros=None, names=None) -> dict:
    """The solve report; carries no timing so equal runs give equal bytes."""
    if d.status == "complete" and not d.components:
        status = "inconsistent"
    else:
        status = d.status
    out = {
        "status": status,
        "algorithm": d.algorithm,
        "field": d.spec.to_json(),
        "n": d.n,
    }
    if names:
        out["vars"] = list(names)
    if status != "partial":
        out["total_count"] = str(d.total_count)
    out["components"] = [c.to_json() for c in d.components]
    out["stats"] = d.stats.to_json()
    if zeros is not None:
        out["zeros"] = [list(z) for z in zeros]
    return out


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def load_report(text: str) -> tuple[Decomposition, str]:
    """Rebuild the components of a solve report (stats are not restored)."""
    from .decompose import SolveStats
    data = json.loads(text)
    spec = FieldSpec.from_json(data["field"])
    n = data["n"]
    comps = [TriangularSet([parse_poly(t, spec, n) for t in c["polys"]], n, spec) for c in data["components"]]
    status = "complete" if data["status"] in ("complete", "inconsistent") else "partial"
    return Decomposition(comps, SolveStats(), spec, n, data.get("algorithm", "?"), status), data["status"]


# -- solve ----------------------------------------------------------------------

def solve_system(system: System, algorithm: str, threads: int = 1, max_components: int | None = None,
                 time_budget: float | None = None, batch: int | None = None,
                 max_memory_mb: int | None = None) -> Decomposition:
    if algorithm != "tdcs" and system.spec.q != 2:
        raise CliError(f"{algorithm} needs q = 2, got q = {system.spec.q}", EXIT_ALGO)
    limits = Limits(max_components=max_components or default_max_components(), time_budget=time_budget)
    if max_memory_mb is not None:
        limits.max_memory_mb = max_memory_mb
    return decompose(system.polys, algorithm, spec=system.spec, n=system.n, limits=limits, threads=threads,
                     batch=batch)


def _read(path: str) -> System:
    try:
        if path == "-":
            return parse_system(sys.stdin.read())
        return read_system(path)
    except SystemParseError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None
    except OSError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    system = _read(args.input)
    code = EXIT_OK
    try:
        d = solve_system(system, args.algorithm, args.threads, args.max_components, args.time_budget,
                        args.batch, args.max_memory)
    except ResourceLimitError as exc:
        log.warning("stopped early: %s", exc)
        d = exc.partial
        code = EXIT_CAP
    zeros = None
    if args.enumerate and d.status == "complete":
        try:
            zeros = d.zeros(limit=args.limit)
        except LimitExceeded as exc:
            log.warning("not enumerating: %s", exc)
    report = report_json(d, zeros, system.names)
    if args.json or args.output:
        _emit(dump_json(report), args.output)
    if not args.json:
        _print_summary(report, d)
    return code


def _print_summary(report: dict, d: Decomposition) -> None:
    out = sys.stdout
    print(f"status: {report['status']}", file=out)
    if "total_count" in report:
        print(f"solutions: {report['total_count']}", file=out)
    print(f"components: {len(d.components)}   N_C: {d.stats.N_C}   "
          f"multiplications: {d.stats.mul_count}   time: {d.seconds:.3f}s", file=out)
    for i, c in enumerate(report["components"]):
        print(f"[{i}] count {c['count']}", file=out)
        for p in c["polys"]:
            print(f"    {p}", file=out)
    for z in report.get("zeros", []):
        print(" ".join(map(str, z)), file=out)


# -- generate -------------------------------------------------------------------

def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CliError(f"expected a comma-separated integer list, got {text!r}", EXIT_PARSE) from None


def _bits(text: str) -> list[int]:
    bits = [int(ch) for ch in text if ch in "01"]
    if len(bits) != len(text.strip()):
        raise CliError("keystream must be a string of 0/1", EXIT_PARSE)
    return bits


def build_instance(args) -> ProblemInstance:
    family = args.family
    if family == "nfg":
        name = args.filter.lower()
        if name not in CANFIL:
            raise CliError(f"unknown filter {args.filter!r}; choose from {', '.join(CANFIL)}", EXIT_PARSE)
        lfsr = LfsrSpec.from_exponents(_ints(args.feedback))
        spec = NfgSpec(lfsr, name, tuple(_ints(args.taps)), args.keybits)
        try:
            spec.validate()
            if args.keystream:
                inst = nfg_equations(spec, _bits(args.keystream))
            else:
                inst = planted_nfg(spec, args.seed)
        except ProblemError as exc:
            raise CliError(str(exc), EXIT_PARSE) from None
        inst.meta.update(filter=name, L=lfsr.L, feedback=lfsr.exponents, weight=lfsr.weight,
                         taps=list(spec.tapping), keybits=args.keybits)
        return inst
    if family == "bivium":
        if args.keystream:
            bits = _bits(args.keystream)
            return bivium_a_equations(len(bits), bits)
        try:
            return planted_bivium(args.clocks, args.seed)
        except ProblemError as exc:
            raise CliError(str(exc), EXIT_PARSE) from None
    if args.n < 1:
        raise CliError("matrix size must be positive", EXIT_PARSE)
    return matmul_equations(args.n, args.order)


def cmd_generate(args) -> int:
    inst = build_instance(args)
    system = System(inst.spec, inst.n, inst.polys, inst.names)
    text = format_system(system, [f"{inst.meta.get('family')} instance: {inst.n} variables, "
                                  f"{len(inst.polys)} equations"])
    _emit(text, args.output)
    if args.output:
        side = {"generator": {k: v for k, v in vars(args).items() if k not in ("func", "output", "verbose")},
                "meta": inst.meta, "n": inst.n, "equations": len(inst.polys)}
        if args.plant and inst.planted is not None:
            side["planted"] = "".join(map(str, inst.planted))
        with open(args.output + ".json", "w") as fh:
            fh.write(dump_json(side))
        if inst.check:
            chk = System(inst.spec, inst.n, inst.check, inst.names)
            with open(args.output + ".check", "w") as fh:
                fh.write(format_system(chk, ["check polynomials (BA = I)"]))
    return EXIT_OK


# -- verify ---------------------------------------------------------------------

def cmd_verify(args) -> int:
    try:
        with open(args.decomposition) as fh:
            d, status = load_report(fh.read())
    except (OSError, ValueError, KeyError, PolyError) as exc:
        raise CliError(f"{args.decomposition}: {exc}", EXIT_PARSE) from None
    if d.status != "complete":
        raise CliError("decomposition is partial; nothing to verify against", EXIT_CAP)
    chk = _read(args.check)
    if chk.spec != d.spec or chk.n != d.n:
        raise CliError("check file and decomposition disagree on field or n", EXIT_PARSE)
    bad = first_failure(chk.polys, d)
    if bad is None:
        print(f"ok: {len(chk.polys)} polynomials reduce to 0 against {len(d.components)} components")
        return EXIT_OK
    ci, pi = bad
    print(f"fail: check polynomial {pi} ({chk.polys[pi]}) does not reduce to 0 against component {ci}")
    return EXIT_VERIFY


# -- oracle ---------------------------------------------------------------------

def cmd_oracle(args) -> int:
    system = _read(args.input)
    limits = OracleLimits(max_points=args.max_points)
    try:
        if args.enumerate:
            pts = brute_zero_set(system.polys, system.n, system.spec, limits)
            out = {"count": str(len(pts)), "zeros": [list(p) for p in pts]}
        else:
            out = {"count": str(brute_count(system.polys, system.n, system.spec, limits))}
    except OracleLimitError as exc:
        raise CliError(str(exc), EXIT_CAP) from None
    sys.stdout.write(dump_json(out))
    return EXIT_OK


# -- bench ----------------------------------------------------------------------

NFG_SIMPLE_K = {"canfil1": 52, "canfil2": 44, "canfil3": 64, "canfil4": 60, "canfil5": 40,
                "canfil6": 52, "canfil7": 40, "canfil8": 44, "canfil9": 48, "canfil10": 44}
NFG_SIMPLE_FEEDBACK = (40, 21, 19, 2, 0)
NFG_WEIGHTY_FEEDBACK = (40, 35, 32, 27, 24, 19, 15, 12, 7, 1, 0)
BENCH_COLUMNS = ("instance", "algorithm", "seconds", "N_C", "R", "max_len", "mul_count")


def bench_instances(args):
    suite = args.suite
    if suite == "matmul":
        for n in _ints(args.sizes):
            suffix = "" if args.order == "rows" else f"-{args.order}"
            yield f"matmul-{n}{suffix}", matmul_equations(n, args.order)
    elif suite in ("nfg-simple", "nfg-weighty"):
        names = [f.strip().lower() for f in args.filters.split(",")] if args.filters else list(CANFIL)
        feedback = NFG_SIMPLE_FEEDBACK if suite == "nfg-simple" else NFG_WEIGHTY_FEEDBACK
        lfsr = LfsrSpec.from_exponents(feedback)
        for name in names:
            k = NFG_SIMPLE_K[name] if suite == "nfg-simple" else 60
            spec = NfgSpec(lfsr, name, tuple(range(7)), k)
            yield f"{suite}-{name}-k{k}", planted_nfg(spec, args.seed)
    elif suite == "bivium":
        yield f"bivium-{args.clocks}", planted_bivium(args.clocks, args.seed)
    else:
        raise CliError(f"unknown suite {suite!r}", EXIT_PARSE)


def bench_rows(args):
    algorithms = [a.strip() for a in args.algorithms.split(",")]
    for name, inst in bench_instances(args):
        for alg in algorithms:
            times = []
            d = None
            for _ in range(max(1, args.repeat)):
                t0 = time.perf_counter()
                try:
                    d = decompose(inst.polys, alg, spec=inst.spec, n=inst.n,
                                  limits=Limits(time_budget=args.time_budget), threads=args.threads,
                                  batch=args.batch)
                except ResourceLimitError as exc:
                    d = exc.partial
                times.append(time.perf_counter() - t0)
            stats = d.stats
            label = name if d.status == "complete" else f"{name} (partial)"
            yield {
                "instance": label,
                "algorithm": alg,
                "seconds": f"{statistics.median(times):.4f}",
                "N_C": stats.N_C,
                "R": repr(stats.N_C / 2 ** inst.n),
                "max_len": stats.max_len,
                "mul_count": stats.mul_count,
            }


def cmd_bench(args) -> int:
    fh = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        for row in bench_rows(args):
            writer.writerow(row)
            fh.flush()
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="finchar", description="Zero decomposition over finite fields.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decompose a system file ('-' reads stdin)")
    s.add_argument("input")
    s.add_argument("--algorithm", "-a", choices=ALGORITHMS, default="tdcs")
    s.add_argument("--enumerate", action="store_true", help="list all solutions")
    s.add_argument("--limit", type=int, default=1 << 20, help="max solutions to enumerate")
    s.add_argument("--json", action="store_true", help="print the JSON report")
    s.add_argument("--output", "-o", help="write the JSON report here")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--max-components", type=int, default=None)
    s.add_argument("--time-budget", type=float, default=None, help="seconds")
    s.add_argument("--max-memory", type=int, default=None, metavar="MB",
                   help="stop with a partial result above this resident size")
    s.add_argument("--batch", type=int, default=None,
                   help="add equations this many at a time, refining each component")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("generate", help="write a benchmark system")
    gs = g.add_subparsers(dest="family", required=True)
    for fam in ("nfg", "bivium", "matmul"):
        p = gs.add_parser(fam)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--plant", action="store_true", help="record the planted key in the sidecar")
        p.add_argument("--output", "-o")
        if fam == "nfg":
            p.add_argument("--filter", default="canfil1")
            p.add_argument("--L", type=int, default=None, help="register length (must match --feedback)")
            p.add_argument("--feedback", default="40,21,19,2,0", help="feedback exponents")
            p.add_argument("--taps", default="0,1,2,3,4,5,6")
            p.add_argument("--keybits", type=int, default=40)
            p.add_argument("--keystream", default=None, help="bits instead of a seeded key")
        elif fam == "bivium":
            p.add_argument("--clocks", type=int, default=10)
            p.add_argument("--keystream", default=None)
        else:
            p.add_argument("--n", type=int, default=2)
            p.add_argument("--order", choices=MATMUL_ORDERS, default="rows",
                           help="variable numbering: A then B row by row, or blocks by k")
        p.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="check that polynomials reduce to 0 on every component")
    v.add_argument("--decomposition", "-d", required=True)
    v.add_argument("--check", "-c", required=True)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="timing table as CSV")
    b.add_argument("suite", choices=("matmul", "nfg-simple", "nfg-weighty", "bivium"))
    b.add_argument("--repeat", type=int, default=1)
    b.add_argument("--csv", default=None)
    b.add_argument("--algorithms", default="mfcs")
    b.add_argument("--sizes", default="2,3,4")
    b.add_argument("--order", choices=MATMUL_ORDERS, default="rows", help="matmul variable numbering")
    b.add_argument("--filters", default=None)
    b.add_argument("--clocks", type=int, default=700)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--time-budget", type=float, default=None)
    b.add_argument("--batch", type=int, default=None,
                   help="add equations this many at a time, refining each component")
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle", help="brute-force solution count")
    o.add_argument("input")
    o.add_argument("--enumerate", action="store_true")
    o.add_argument("--max-points", type=int, default=1 << 24)
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "family", None) == "nfg" and args.L is not None:
        if args.L != max(_ints(args.feedback)):
            print(f"error: --L {args.L} does not match feedback degree", file=sys.stderr)
            return EXIT_PARSE
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
