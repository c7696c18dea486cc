"""Explicit solutions of div U = f on annuli in R^2 and R^3, with U = 0 on the boundary."""

from .assembly import (
    CORRECTION_SIGN,
    AnnulusDomain,
    Resolution,
    SolutionField,
    assemble_solution,
    cutoff_chi,
    cutoff_chi_prime,
)
from .config import RunConfig, load_config
from .estimator import AnnulusDivergenceSolver
from .exceptions import (
    AnnulusDivError,
    ConfigurationError,
    DomainError,
    ResolutionError,
    ShapeError,
    SolvabilityError,
    StencilError,
)
from .sources import CATALOG, SourceSpec, make_source
from .verify import VerificationReport, VerifyConfig, run_suite

__all__ = [
    "CORRECTION_SIGN",
    "CATALOG",
    "AnnulusDomain",
    "AnnulusDivergenceSolver",
    "AnnulusDivError",
    "ConfigurationError",
    "DomainError",
    "Resolution",
    "ResolutionError",
    "RunConfig",
    "ShapeError",
    "SolutionField",
    "SolvabilityError",
    "SourceSpec",
    "StencilError",
    "VerificationReport",
    "VerifyConfig",
    "assemble_solution",
    "cutoff_chi",
    "cutoff_chi_prime",
    "load_config",
    "make_source",
    "run_suite",
]
