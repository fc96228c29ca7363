"""Variable selection with L0 criteria, SLOPE, LASSO and knockoffs."""

from ._fdrsel import (
    DataError,
    FdrselError,
    FitError,
    bayes_risk,
    builtin_scenarios,
    cv_select,
    fit_lasso,
    fit_slope,
    knockoff_filter,
    knockoff_threshold,
    make_lambda,
    prox_sorted_l1,
    select,
    simulate,
    sorted_l1_norm,
)

__all__ = [
    "DataError",
    "FdrselError",
    "FitError",
    "bayes_risk",
    "builtin_scenarios",
    "cv_select",
    "fit_lasso",
    "fit_slope",
    "knockoff_filter",
    "knockoff_threshold",
    "make_lambda",
    "prox_sorted_l1",
    "select",
    "simulate",
    "sorted_l1_norm",
]
__version__ = "0.1.0"
