"""Generalized circular projected Cauchy distribution: density, summaries, inference, regression."""

__version__ = "0.1.0"

from .core import (
    GcpcParams,
    WcParams,
    canonical_angle,
    classify_unimodality,
    interval_probability,
    logpdf_polar,
    pdf_polar,
    sample,
)
from .errors import ConvergenceError, DegenerateError, GcpcError, ParameterError
from .inference import (
    FitOptions,
    FitResult,
    fit_cipc,
    fit_gcpc,
    location_ci,
    lrt_gcpc_vs_cipc,
    lrt_one_location,
    lrt_two_locations,
)
from .regression import build_design, compare_regressions, fit_regression, parse_predictor
from .summaries import circular_summary, entropy, kl_gcpc_from_cipc, mean_resultant_length

__all__ = [
    "ConvergenceError",
    "DegenerateError",
    "FitOptions",
    "FitResult",
    "GcpcError",
    "GcpcParams",
    "ParameterError",
    "WcParams",
    "build_design",
    "canonical_angle",
    "circular_summary",
    "classify_unimodality",
    "compare_regressions",
    "entropy",
    "fit_cipc",
    "fit_gcpc",
    "fit_regression",
    "interval_probability",
    "kl_gcpc_from_cipc",
    "location_ci",
    "logpdf_polar",
    "lrt_gcpc_vs_cipc",
    "lrt_one_location",
    "lrt_two_locations",
    "mean_resultant_length",
    "parse_predictor",
    "pdf_polar",
    "sample",
]
