"""Eigenfunctions of the generator, elementary solutions and their residuals."""

from __future__ import annotations

import math

import numpy as np

from .charop import a_apply, delta_apply
from .errors import DomainError
from .history import HistoryField, HistoryGrid
from .model import FdeModel, apply_L
from .periodic_fn import PeriodicFunction, angular_frequencies

__all__ = [
    "ElementarySolution",
    "eigenfunction",
    "elementary_solution",
    "eigenfunction_defect",
    "residual_fde",
    "verify_floquet_pair",
]


def _shifted_values(q: PeriodicFunction, theta: np.ndarray) -> np.ndarray:
    """``q(t_i + theta_m)`` for all grid times, shape (N, len(theta), n)."""
    w = angular_frequencies(q.N, q.period)
    qh = np.fft.fft(q.values, axis=0)
    phase = np.exp(1j * np.outer(w, theta))
    return np.fft.ifft(phase[:, :, None] * qh[:, None, :], axis=0)


def eigenfunction(sigma: complex, chain, k: int, grid: HistoryGrid) -> HistoryField:
    """``phi_k(t)(theta) = exp(sigma theta) sum_{l <= k} theta^l / l! q_{k-l}(t + theta)``."""
    if not 0 <= k < len(chain):
        raise ValueError(f"k = {k} is not below the chain length {len(chain)}")
    th = grid.theta
    vals = 0
    for l in range(k + 1):
        vals = vals + (th**l / math.factorial(l))[None, :, None] * _shifted_values(chain[k - l], th)
    vals = vals * np.exp(complex(sigma) * th)[None, :, None]
    return HistoryField(vals, grid, chain[0].period)


def eigenfunction_defect(model: FdeModel, sigma: complex, chain, grid: HistoryGrid) -> float:
    """``max_k ||(A - sigma) phi_k - phi_{k-1}||`` on the tensor grid (``phi_{-1} = 0``)."""
    out = 0.0
    prev = None
    for k in range(len(chain)):
        phi = eigenfunction(sigma, chain, k, grid)
        r = a_apply(model, phi) - complex(sigma) * phi
        if prev is not None:
            r = r - prev
        out = max(out, r.norm())
        prev = phi
    return out


class ElementarySolution:
    """``x(t) = exp(sigma (t - s)) sum_{l < k} (t - s)^l / l! q_{k-l-1}(t)``.

    Calling returns shape ``(len(t), n)``; :meth:`derivative` is the exact
    time derivative of the same expression.
    """

    domain = (-math.inf, math.inf)

    def __init__(self, sigma: complex, chain, s: float = 0.0):
        if not chain:
            raise ValueError("empty chain")
        self.sigma = complex(sigma)
        self.chain = list(chain)
        self.s = float(s)
        self._dchain = [q.differentiate() for q in self.chain]

    @property
    def k(self) -> int:
        return len(self.chain)

    def _parts(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        tau = t - self.s
        qs = [q.eval(t) for q in self.chain]
        return t, tau, qs

    def __call__(self, t) -> np.ndarray:
        t, tau, qs = self._parts(t)
        k = self.k
        poly = sum((tau**l / math.factorial(l))[:, None] * qs[k - l - 1] for l in range(k))
        return np.exp(self.sigma * tau)[:, None] * poly

    def derivative(self, t) -> np.ndarray:
        t, tau, qs = self._parts(t)
        k = self.k
        dqs = [dq.eval(t) for dq in self._dchain]
        poly = sum((tau**l / math.factorial(l))[:, None] * qs[k - l - 1] for l in range(k))
        dpoly = sum((tau**l / math.factorial(l))[:, None] * dqs[k - l - 1] for l in range(k))
        if k > 1:
            dpoly = dpoly + sum(
                (tau ** (l - 1) / math.factorial(l - 1))[:, None] * qs[k - l - 1] for l in range(1, k)
            )
        return np.exp(self.sigma * tau)[:, None] * (self.sigma * poly + dpoly)

    def truncated(self, j: int) -> "ElementarySolution":
        return ElementarySolution(self.sigma, self.chain[:j], self.s)


def elementary_solution(sigma: complex, chain, s: float = 0.0) -> ElementarySolution:
    return ElementarySolution(sigma, chain, s)


def residual_fde(model: FdeModel, x, window=None, *, samples_per_period: int = 64,
                 panel: float | None = None) -> float:
    """``max |x'(t) - L(t) x_t|`` over a uniform sample of ``window``.

    ``x`` maps an array of times to ``(len, n)`` values; its derivative is
    taken from ``x.derivative``.  Kernel integrals use Gauss panels of width
    ``panel`` (default ``T / 16``).
    """
    t0, t1 = window if window is not None else (0.0, 3.0 * model.T)
    lo_dom, hi_dom = getattr(x, "domain", (-math.inf, math.inf))
    if t0 + model.r_minus < lo_dom or t1 + model.r_plus > hi_dom:
        raise DomainError("residual window extends beyond the evaluable history of x")
    if not hasattr(x, "derivative"):
        raise ValueError("x must provide an analytic derivative")
    count = max(2, int(round(samples_per_period * (t1 - t0) / model.T)) + 1)
    ts = np.linspace(t0, t1, count)
    dx = np.asarray(x.derivative(ts))
    panel = panel or model.T / 16.0
    out = 0.0
    for i, t in enumerate(ts):
        Lx = apply_L(model, t, lambda th, t=t: x(t + th), panel=panel)
        out = max(out, float(np.max(np.abs(dx[i] - Lx))))
    return out


def verify_floquet_pair(model: FdeModel, sigma: complex, q: PeriodicFunction) -> float:
    """``|| q' + sigma q - L(t)[theta -> exp(sigma theta) q(t + theta)] ||_inf`` on the grid."""
    return delta_apply(model, sigma, q).norm_inf()
