"""Characteristic-set zero decomposition of polynomial systems over finite fields."""
from .decompose import (Decomposition, Limits, ResourceLimitError, SolveStats, mf_triset, mfcs,
                        stats_check, td_triset, td_triset2, tdcs, tdcs2)
from .decompose import decompose as solve
from .field import GF, FieldSpec
from .oracle import OracleLimits, brute_count, brute_zero_set
from .poly import Poly, format_poly, parse_poly, prem, prem_set, resultant
from .system import System, format_system, parse_system
from .trisets import (TriangularSet, ts_count, ts_enumerate, ts_is_monic, ts_is_proper,
                      ts_is_regular)
from .zddpoly import BoolPoly, ZddStore

__all__ = [
    "BoolPoly", "Decomposition", "FieldSpec", "GF", "Limits", "OracleLimits", "Poly",
    "ResourceLimitError", "SolveStats", "System", "TriangularSet", "ZddStore", "brute_count",
    "brute_zero_set", "format_poly", "format_system", "mf_triset", "mfcs",
    "parse_poly", "parse_system", "prem", "prem_set", "resultant", "solve", "stats_check", "td_triset",
    "td_triset2", "tdcs", "tdcs2", "ts_count", "ts_enumerate", "ts_is_monic", "ts_is_proper",
    "ts_is_regular",
]
