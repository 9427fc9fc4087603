"""Text format for polynomial systems.

    # comment
    q 3            (or: q 3^2, then optionally: modulus 1 0 2 ...)
    n 3
    vars a b c     (optional aliases for x1..xn)
    x1*x2*x3^2 + 2
    ...
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .field import FieldError, FieldSpec, parse_q
from .poly import Poly, PolyError, parse_poly


class SystemParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass
class System:
    spec: FieldSpec
    n: int
    polys: list[Poly] = field(default_factory=list)
    names: list[str] | None = None

    def __eq__(self, other):
        return (isinstance(other, System) and self.spec == other.spec and self.n == other.n
                and self.polys == other.polys and self.names == other.names)


def format_system(system: System, comments: list[str] | None = None) -> str:
    lines = [f"# {c}" for c in comments or []]
    lines += system.spec.header_lines()
    lines.append(f"n {system.n}")
    if system.names:
        lines.append("vars " + " ".join(system.names))
    lines += [p.to_text() for p in system.polys]
    return "\n".join(lines) + "\n"


def parse_system(text: str) -> System:
    q_text = None
    modulus = None
    n = None
    names = None
    body: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if n is None and head in ("q", "modulus", "n"):
            if head == "q":
                q_text = rest.strip()
            elif head == "modulus":
                try:
                    modulus = [int(t) for t in rest.split()]
                except ValueError:
                    raise SystemParseError("modulus coefficients must be integers", lineno) from None
            else:
                try:
                    n = int(rest)
                except ValueError:
                    raise SystemParseError(f"bad variable count {rest!r}", lineno) from None
                if n < 0:
                    raise SystemParseError("variable count must be >= 0", lineno)
            continue
        if head == "vars" and not body:
            names = rest.split()
            continue
        body.append((lineno, line))
    if q_text is None:
        raise SystemParseError("missing 'q' header")
    if n is None:
        raise SystemParseError("missing 'n' header")
    try:
        p, k = parse_q(q_text)
        spec = FieldSpec(p, k, modulus)
    except (FieldError, ValueError) as exc:
        raise SystemParseError(f"bad field: {exc}") from None
    if names is not None and len(names) != n:
        raise SystemParseError(f"{len(names)} variable names for n = {n}")
    alias = {nm: i + 1 for i, nm in enumerate(names)} if names else None
    polys = []
    for lineno, line in body:
        try:
            polys.append(parse_poly(line, spec, n, alias))
        except (PolyError, FieldError, ValueError) as exc:
            raise SystemParseError(str(exc), lineno) from None
    return System(spec, n, polys, names)


def read_system(path: str) -> System:
    with open(path) as fh:
        return parse_system(fh.read())
