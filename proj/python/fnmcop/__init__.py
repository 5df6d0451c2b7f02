"""Finite normal mixture copulas: evaluation, sampling, fitting and KL comparisons."""

from ._core import (
    Copula,
    CopulaFamily,
    DomainError,
    FamilyCopula,
    FnmCopula,
    FnmParams,
    InputError,
    NumericError,
    OptimizationError,
    fit,
    kendall_tau,
    kendall_tau_empirical,
    kl_minimize,
    loglik,
    pseudo_obs,
    run_cli,
)

__all__ = [
    "Copula",
    "CopulaFamily",
    "DomainError",
    "FamilyCopula",
    "FnmCopula",
    "FnmParams",
    "InputError",
    "NumericError",
    "OptimizationError",
    "fit",
    "kendall_tau",
    "kendall_tau_empirical",
    "kl_minimize",
    "loglik",
    "pseudo_obs",
    "run_cli",
]
