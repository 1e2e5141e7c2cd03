"""Exception types shared by the numerical modules."""

from __future__ import annotations

__all__ = [
    "FloquetError",
    "DomainError",
    "SingularError",
    "ConvergenceError",
    "AmbiguousRankError",
    "ContourError",
    "NotCharacteristicError",
]


class FloquetError(Exception):
    """Base class for numerical failures (CLI exit code 2)."""


class DomainError(FloquetError, ValueError):
    """A parameter lies outside the admissible set, e.g. ``Re z <= -rho``."""


class SingularError(FloquetError, ArithmeticError):
    """``Delta_N(z)`` is numerically singular, so ``z`` is in the spectrum."""

    def __init__(self, z: complex, sigma_min: float, threshold: float):
        self.z = complex(z)
        self.sigma_min = float(sigma_min)
        self.threshold = float(threshold)
        super().__init__(
            f"z is in the spectrum: z={self.z:.12g}, smallest singular value "
            f"{self.sigma_min:.3e} <= {self.threshold:.3e}"
        )


class ConvergenceError(FloquetError):
    pass


class AmbiguousRankError(FloquetError):
    """Singular values straddle the rank tolerance; both readings are attached."""

    def __init__(self, message: str, candidates):
        self.candidates = candidates
        super().__init__(message)


class ContourError(FloquetError):
    pass


class NotCharacteristicError(FloquetError):
    def __init__(self, z: complex, residual: float):
        self.z = complex(z)
        self.residual = float(residual)
        super().__init__(f"not a characteristic value (residual={self.residual:.3e})")
