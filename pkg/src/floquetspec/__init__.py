"""Floquet spectra of periodic linear functional differential equations.

The characteristic operator ``Delta(z)`` on T-periodic functions is
discretised by Fourier collocation; its characteristic values in a region
are the Floquet exponents.  Independent oracles (a monodromy-matrix
time-stepper and closed-form characteristic functions) cross-check results.
"""

__version__ = "0.1.0"

from .charop import assemble_delta, delta_apply, equivalence_check, resolvent_A_apply, sigma_min
from .errors import (
    AmbiguousRankError,
    ContourError,
    ConvergenceError,
    DomainError,
    FloquetError,
    NotCharacteristicError,
    SingularError,
)
from .floquet import eigenfunction, elementary_solution, residual_fde
from .model import FdeModel, Kind, ModelError, load_model, parse_model, validate
from .oracle import closed_form_roots, exponents_from_monodromy, monodromy_matrix
from .periodic_fn import PeriodicFunction
from .spectrum import Region, find_exponents, jordan_chains, spectrum, strip_reduce

__all__ = [
    "__version__",
    "AmbiguousRankError",
    "ContourError",
    "ConvergenceError",
    "DomainError",
    "FdeModel",
    "FloquetError",
    "Kind",
    "ModelError",
    "NotCharacteristicError",
    "PeriodicFunction",
    "Region",
    "SingularError",
    "assemble_delta",
    "closed_form_roots",
    "delta_apply",
    "eigenfunction",
    "elementary_solution",
    "equivalence_check",
    "exponents_from_monodromy",
    "find_exponents",
    "jordan_chains",
    "load_model",
    "monodromy_matrix",
    "parse_model",
    "residual_fde",
    "resolvent_A_apply",
    "sigma_min",
    "spectrum",
    "strip_reduce",
    "validate",
]
