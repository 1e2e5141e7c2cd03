"""Trigonometric collocation for T-periodic, vector-valued functions.

A :class:`PeriodicFunction` stores samples on the uniform grid
``t_j = j T / N`` and is interpreted as the trigonometric interpolant with
modes ``k = -floor(N/2), ..., ceil(N/2) - 1``.  Derivatives and shifts are
diagonal in that basis and therefore exact for resolved modes.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "PeriodicFunction",
    "mode_numbers",
    "angular_frequencies",
    "time_grid",
    "diff_matrix",
    "shift_matrix",
]


def mode_numbers(N: int) -> np.ndarray:
    """Integer mode numbers in FFT order (``np.fft.fftfreq`` convention)."""
    return np.rint(np.fft.fftfreq(N, d=1.0 / N)).astype(int)


def angular_frequencies(N: int, period: float) -> np.ndarray:
    return 2.0 * np.pi * mode_numbers(N) / period


def time_grid(N: int, period: float) -> np.ndarray:
    return np.arange(N) * (period / N)


def diff_matrix(N: int, period: float) -> np.ndarray:
    """Spectral differentiation matrix acting on grid values."""
    w = angular_frequencies(N, period)
    return np.fft.ifft(1j * w[:, None] * np.fft.fft(np.eye(N), axis=0), axis=0)


def shift_matrix(N: int, period: float, tau: float) -> np.ndarray:
    """Matrix ``S`` with ``(S q)(t_j) = q(t_j - tau)`` for the interpolant of ``q``."""
    w = angular_frequencies(N, period)
    phase = np.exp(-1j * w * tau)
    return np.fft.ifft(phase[:, None] * np.fft.fft(np.eye(N), axis=0), axis=0)


class PeriodicFunction:
    """Samples of a T-periodic function ``q: R -> C^n`` on a uniform grid.

    Parameters
    ----------
    values : array_like, shape (N,) or (N, n)
        Values at ``t_j = j * period / N``.  1-D input is read as ``n = 1``.
    period : float
        The period ``T > 0``.
    """

    __slots__ = ("_values", "period")

    def __init__(self, values, period: float):
        v = np.array(values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("values must have shape (N,) or (N, n)")
        if not period > 0:
            raise ValueError("period must be positive")
        v.setflags(write=False)
        self._values = v
        self.period = float(period)

    # construction -------------------------------------------------------
    @classmethod
    def from_function(cls, f, period: float, N: int) -> "PeriodicFunction":
        """Sample ``f(t)`` (vectorised over ``t``) on the uniform grid."""
        t = time_grid(N, period)
        return cls(np.asarray(f(t), dtype=complex).reshape(N, -1), period)

    @classmethod
    def from_coeffs(cls, coeffs, period: float) -> "PeriodicFunction":
        """Build from coefficients ordered by ascending mode number.

        ``coeffs[j]`` multiplies ``exp(2 pi i k t / T)`` with
        ``k = -floor(N/2) + j``.
        """
        c = np.array(coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[:, None]
        N = c.shape[0]
        c_fft = np.fft.ifftshift(c, axes=0)
        return cls(np.fft.ifft(c_fft, axis=0) * N, period)

    @classmethod
    def zeros(cls, N: int, dim: int, period: float) -> "PeriodicFunction":
        return cls(np.zeros((N, dim), dtype=complex), period)

    # basic properties ---------------------------------------------------
    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def N(self) -> int:
        return self._values.shape[0]

    @property
    def dim(self) -> int:
        return self._values.shape[1]

    @property
    def grid(self) -> np.ndarray:
        return time_grid(self.N, self.period)

    def fft_coeffs(self) -> np.ndarray:
        """Coefficients in FFT order, shape (N, n)."""
        return np.fft.fft(self._values, axis=0) / self.N

    @property
    def coeffs(self) -> np.ndarray:
        """Coefficients ordered by ascending mode number, shape (N, n)."""
        return np.fft.fftshift(self.fft_coeffs(), axes=0)

    @property
    def modes(self) -> np.ndarray:
        return np.fft.fftshift(mode_numbers(self.N))

    def vec(self) -> np.ndarray:
        """Flattened values, time-major (index ``j * n + a``)."""
        return self._values.reshape(-1).copy()

    @classmethod
    def from_vec(cls, v, dim: int, period: float) -> "PeriodicFunction":
        v = np.asarray(v, dtype=complex)
        return cls(v.reshape(-1, dim), period)

    # calculus -----------------------------------------------------------
    def _with_modal_factor(self, factor: np.ndarray) -> "PeriodicFunction":
        c = np.fft.fft(self._values, axis=0)
        return PeriodicFunction(np.fft.ifft(factor[:, None] * c, axis=0), self.period)

    def differentiate(self, order: int = 1) -> "PeriodicFunction":
        w = angular_frequencies(self.N, self.period)
        return self._with_modal_factor((1j * w) ** order)

    def shift(self, tau: float) -> "PeriodicFunction":
        """Return ``t -> q(t - tau)``."""
        w = angular_frequencies(self.N, self.period)
        return self._with_modal_factor(np.exp(-1j * w * tau))

    def eval(self, t):
        """Evaluate the interpolant at ``t`` (scalar or array), reduced mod T.

        Returns shape ``(n,)`` for scalar ``t`` and ``(len(t), n)`` otherwise.
        """
        scalar = np.ndim(t) == 0
        tt = np.mod(np.atleast_1d(np.asarray(t, dtype=float)), self.period)
        w = angular_frequencies(self.N, self.period)
        out = np.exp(1j * np.outer(tt, w)) @ self.fft_coeffs()
        return out[0] if scalar else out

    def resample(self, N_new: int) -> "PeriodicFunction":
        """Zero-pad or truncate the mode table to ``N_new`` points."""
        c = self.coeffs
        k_old = self.modes
        k_new = np.fft.fftshift(mode_numbers(N_new))
        out = np.zeros((N_new, self.dim), dtype=complex)
        lookup = {int(k): i for i, k in enumerate(k_old)}
        for j, k in enumerate(k_new):
            i = lookup.get(int(k))
            if i is not None:
                out[j] = c[i]
        return PeriodicFunction.from_coeffs(out, self.period)

    def multiply_exp(self, k: int) -> "PeriodicFunction":
        """Pointwise product with ``exp(2 pi i k t / T)`` on the grid."""
        t = self.grid
        return PeriodicFunction(
            self._values * np.exp(2j * np.pi * k * t / self.period)[:, None], self.period
        )

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self._values))) if self._values.size else 0.0

    # arithmetic ---------------------------------------------------------
    def _check(self, other: "PeriodicFunction") -> None:
        if other.period != self.period or other._values.shape != self._values.shape:
            raise ValueError("incompatible periodic functions")

    def __add__(self, other):
        if isinstance(other, PeriodicFunction):
            self._check(other)
            return PeriodicFunction(self._values + other._values, self.period)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, PeriodicFunction):
            self._check(other)
            return PeriodicFunction(self._values - other._values, self.period)
        return NotImplemented

    def __neg__(self):
        return PeriodicFunction(-self._values, self.period)

    def __mul__(self, alpha):
        if np.ndim(alpha) == 0:
            return PeriodicFunction(alpha * self._values, self.period)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"PeriodicFunction(N={self.N}, dim={self.dim}, period={self.period})"
