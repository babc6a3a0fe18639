"""Exact Top-K selection over score rows, with per-pass memory accounting."""

from ._core import (
    ExactnessError,
    FormatError,
    PhaseStats,
    SelectionResult,
    g_table,
    generate_score_row,
    gvr_select,
    oracle_topk,
    prior_overlap,
    radix_select,
    speedup_proxy,
    static_prior_offsets,
    static_prior_positions,
    verify_exact,
)

__all__ = [
    "ExactnessError",
    "FormatError",
    "PhaseStats",
    "SelectionResult",
    "g_table",
    "generate_score_row",
    "gvr_select",
    "oracle_topk",
    "prior_overlap",
    "radix_select",
    "speedup_proxy",
    "static_prior_offsets",
    "static_prior_positions",
    "verify_exact",
]
