"""Brute-force ground truth: enumerate F_q^n and keep the common zeros."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .field import FieldSpec
from .poly import Poly

CHUNK = 1 << 16


@dataclass(frozen=True)
class OracleLimits:
    max_points: int = 1 << 24


class OracleLimitError(RuntimeError):
    pass


def _tables(spec: FieldSpec):
    q = spec.q
    mul = np.array([[spec.mul(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)
    add = np.array([[spec.add(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)
    pw = np.array([[spec.pow(a, e) for e in range(q)] for a in range(q)], dtype=np.int64)
    return mul, add, pw


def _zero_mask(polys: Sequence[Poly], n: int, spec: FieldSpec, start: int, stop: int, tabs) -> np.ndarray:
    mul, add, pw = tabs
    q = spec.q
    idx = np.arange(start, stop, dtype=np.int64)
    cols = []
    for i in range(n):
        cols.append((idx // q ** (n - 1 - i)) % q)
    mask = np.ones(stop - start, dtype=bool)
    for p in polys:
        val = np.zeros(stop - start, dtype=np.int64)
        for exps, c in p.terms.items():
            term = np.full(stop - start, c, dtype=np.int64)
            for i, e in enumerate(exps):
                if e:
                    term = mul[term, pw[cols[i], e]]
            val = add[val, term]
        mask &= val == 0
    return mask, cols


def _check(n: int, spec: FieldSpec, limits: OracleLimits) -> int:
    total = spec.q ** n
    if total > limits.max_points:
        raise OracleLimitError(f"q^n = {total} exceeds max_points = {limits.max_points}")
    return total


def brute_zero_set(polys: Sequence[Poly], n: int, spec: FieldSpec,
                   limits: OracleLimits = OracleLimits()) -> list[tuple[int, ...]]:
    """All common zeros in lexicographic order (x_1 most significant)."""
    total = _check(n, spec, limits)
    tabs = _tables(spec)
    out: list[tuple[int, ...]] = []
    for start in range(0, total, CHUNK):
        stop = min(total, start + CHUNK)
        mask, cols = _zero_mask(polys, n, spec, start, stop, tabs)
        if n == 0:
            if mask.any():
                out.append(())
            continue
        sel = np.stack([c[mask] for c in cols], axis=1)
        out.extend(tuple(int(v) for v in row) for row in sel)
    return out


def brute_count(polys: Sequence[Poly], n: int, spec: FieldSpec,
                limits: OracleLimits = OracleLimits()) -> int:
    total = _check(n, spec, limits)
    tabs = _tables(spec)
    count = 0
    for start in range(0, total, CHUNK):
        stop = min(total, start + CHUNK)
        mask, _ = _zero_mask(polys, n, spec, start, stop, tabs)
        count += int(mask.sum())
    return count
