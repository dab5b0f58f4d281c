"""Numerically safe MIR cuts: directed-rounding aggregation, rounding and post-processing."""

from .contfrac import AT_LEAST, AT_MOST, TWO_SIDED, best_approx, convergents, partial_quotients
from .mir import exact_slack_corrections, safe_mir, substitute_slacks
from .postprocess import ScaleResult, limit_denominators, safe_scale, scale_cut
from .representable import (
    bound_correction,
    choose_bound_sides,
    clean_small_coefficients,
    combine_rows,
    make_representable,
    safe_aggregate,
)
from .rows import LOWER, UPPER, AggregationRecord, AssumptionViolated, Cut, CutAbandoned, FRow, MirData, NoCut
from .separator import SeparatorConfig, efficacy, gmi_from_row, select_cuts, separate_gmi

__all__ = [
    "AT_LEAST",
    "AT_MOST",
    "TWO_SIDED",
    "LOWER",
    "UPPER",
    "AggregationRecord",
    "AssumptionViolated",
    "Cut",
    "CutAbandoned",
    "FRow",
    "MirData",
    "NoCut",
    "ScaleResult",
    "SeparatorConfig",
    "best_approx",
    "bound_correction",
    "choose_bound_sides",
    "clean_small_coefficients",
    "combine_rows",
    "convergents",
    "efficacy",
    "exact_slack_corrections",
    "gmi_from_row",
    "limit_denominators",
    "make_representable",
    "partial_quotients",
    "safe_aggregate",
    "safe_mir",
    "safe_scale",
    "scale_cut",
    "select_cuts",
    "separate_gmi",
    "substitute_slacks",
]
