"""Tensor grids for two-variable fields ``phi(t)(theta)``.

The time variable is periodic and handled by FFT collocation on ``N``
uniform points.  The history/anticipation variable ``theta`` lives on an
interval that is split into panels, each carrying ``M`` Chebyshev-Lobatto
nodes; panel breakpoints always include ``theta = 0`` and any point shift of
the model, so point evaluations never interpolate.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .periodic_fn import PeriodicFunction, angular_frequencies, time_grid

__all__ = ["HistoryGrid", "HistoryField", "cheb_lobatto"]


def cheb_lobatto(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Ascending Lobatto nodes on [-1, 1] and their differentiation matrix."""
    if M < 2:
        raise ValueError("need at least two nodes per panel")
    j = np.arange(M)
    x = -np.cos(np.pi * j / (M - 1))
    c = np.ones(M)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** j
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(M))
    D -= np.diag(D.sum(axis=1))
    return x, D


def _bary_weights(M: int) -> np.ndarray:
    w = (-1.0) ** np.arange(M)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


class HistoryGrid:
    """Piecewise Chebyshev grid on ``[breaks[0], breaks[-1]]``.

    Parameters
    ----------
    breaks : sequence of float
        Strictly increasing panel boundaries; must contain 0.
    M : int
        Lobatto nodes per panel.
    rho : float, optional
        Exponential weight ``exp(rho * theta)`` used by :meth:`HistoryField.norm`
        (infinite-delay state space).
    """

    def __init__(self, breaks, M: int, rho: float | None = None):
        b = np.array(sorted(set(float(x) for x in breaks)))
        if b.size < 2:
            raise ValueError("a history grid needs at least one panel")
        keep = np.concatenate([[True], np.diff(b) > 1e-12 * max(1.0, np.ptp(b))])
        b = b[keep]
        if not np.any(np.abs(b) < 1e-14):
            raise ValueError("theta = 0 must be a panel boundary")
        b[np.argmin(np.abs(b))] = 0.0
        self.breaks = b
        self.M = int(M)
        self.rho = rho
        x, D = cheb_lobatto(self.M)
        self._x, self._D = x, D
        nodes = []
        for a, c in zip(b[:-1], b[1:]):
            th = 0.5 * (a + c) + 0.5 * (c - a) * x
            th[0], th[-1] = a, c
            nodes.append(th if not nodes else th[1:])
        self.theta = np.concatenate(nodes)
        self.zero_index = int(np.flatnonzero(self.theta == 0.0)[0])

    @classmethod
    def for_interval(cls, lo: float, hi: float, M: int, *, extra=(), max_panel: float | None = None,
                     rho: float | None = None) -> "HistoryGrid":
        pts = {lo, hi, 0.0, *[p for p in extra if lo <= p <= hi]}
        pts = sorted(pts)
        if max_panel is not None:
            refined = [pts[0]]
            for a, c in zip(pts[:-1], pts[1:]):
                m = max(1, int(np.ceil((c - a) / max_panel - 1e-9)))
                refined.extend(a + (c - a) * np.arange(1, m + 1) / m)
            pts = refined
        return cls(pts, M, rho=rho)

    @property
    def lo(self) -> float:
        return float(self.breaks[0])

    @property
    def hi(self) -> float:
        return float(self.breaks[-1])

    @property
    def size(self) -> int:
        return self.theta.size

    @property
    def n_panels(self) -> int:
        return self.breaks.size - 1

    def panel_slice(self, p: int) -> slice:
        start = p * (self.M - 1)
        return slice(start, start + self.M)

    def panel_derivative(self, p: int) -> np.ndarray:
        a, c = self.breaks[p], self.breaks[p + 1]
        return self._D * (2.0 / (c - a))

    @cached_property
    def diff_matrix(self) -> np.ndarray:
        """Global d/dtheta; shared panel endpoints take the mean of both sides."""
        n = self.size
        D = np.zeros((n, n))
        count = np.zeros(n)
        for p in range(self.n_panels):
            sl = self.panel_slice(p)
            D[sl, sl] += self.panel_derivative(p)
            count[sl] += 1
        return D / count[:, None]

    def same_as(self, other: "HistoryGrid") -> bool:
        return (
            self.M == other.M
            and self.breaks.shape == other.breaks.shape
            and np.allclose(self.breaks, other.breaks, rtol=0, atol=1e-14)
        )

    def interp_matrix(self, points) -> np.ndarray:
        """Barycentric interpolation from grid nodes to ``points``."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        if pts.size and (pts.min() < self.lo - 1e-12 or pts.max() > self.hi + 1e-12):
            raise ValueError(
                f"theta grid [{self.lo}, {self.hi}] does not cover requested shifts"
            )
        w = _bary_weights(self.M)
        P = np.zeros((pts.size, self.size))
        if not pts.size:
            return P
        p = np.clip(np.searchsorted(self.breaks, pts, side="right") - 1, 0, self.n_panels - 1)
        cols = p[:, None] * (self.M - 1) + np.arange(self.M)[None, :]
        d = pts[:, None] - self.theta[cols]
        hit = np.abs(d) <= 1e-14 * np.maximum(1.0, np.abs(pts))[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = w[None, :] / d
            r = r / r.sum(axis=1, keepdims=True)
        rows = np.any(hit, axis=1)
        r[rows] = hit[rows].astype(float)
        # keep only the first exact hit on a row
        r[rows] = (np.cumsum(r[rows], axis=1) == 1) * r[rows]
        np.put_along_axis(P, cols, r, axis=1)
        return P

    def quadrature(self, lo: float, hi: float, order: int):
        """Gauss-Legendre rule for ``int_lo^hi f(theta) dtheta`` per overlapped panel.

        Returns ``(nodes, weights, P)`` with ``P`` the interpolation matrix
        from grid values to the nodes.
        """
        xg, wg = np.polynomial.legendre.leggauss(max(order, self.M))
        nodes, weights = [], []
        for a, c in zip(self.breaks[:-1], self.breaks[1:]):
            a2, c2 = max(a, lo), min(c, hi)
            if c2 - a2 <= 0:
                continue
            nodes.append(0.5 * (a2 + c2) + 0.5 * (c2 - a2) * xg)
            weights.append(0.5 * (c2 - a2) * wg)
        if not nodes:
            return np.zeros(0), np.zeros(0), np.zeros((0, self.size))
        nodes = np.concatenate(nodes)
        return nodes, np.concatenate(weights), self.interp_matrix(nodes)

    def solve_transport(self, lam: np.ndarray, f: np.ndarray) -> np.ndarray:
        """Solve ``(lam_k - d/dtheta) u_k = f_k`` with ``u_k(0) = 0``.

        ``lam`` has shape (K,); ``f`` has shape (K, size, n).  Panels are swept
        outward from ``theta = 0`` with continuity at panel boundaries.
        """
        K, _, n = f.shape
        u = np.zeros_like(f, dtype=complex)
        eye = np.eye(self.M)
        zp = int(np.flatnonzero(self.breaks == 0.0)[0])
        order = [(p, self.M - 1) for p in range(zp - 1, -1, -1)]
        order += [(p, 0) for p in range(zp, self.n_panels)]
        for p, inner in order:
            sl = self.panel_slice(p)
            A = lam[:, None, None] * eye[None] - self.panel_derivative(p)[None]
            A[:, inner, :] = 0.0
            A[:, inner, inner] = 1.0
            rhs = np.array(f[:, sl, :], dtype=complex)
            rhs[:, inner, :] = u[:, sl.start + inner, :]
            u[:, sl, :] = np.linalg.solve(A, rhs)
        return u


class HistoryField:
    """Values of ``phi(t)(theta)`` on ``N`` uniform times x grid nodes, ``C^n``-valued."""

    __slots__ = ("values", "grid", "period")

    def __init__(self, values, grid: HistoryGrid, period: float):
        v = np.array(values, dtype=complex)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.shape[1] != grid.size:
            raise ValueError("field values do not match the theta grid")
        self.values = v
        self.grid = grid
        self.period = float(period)

    @classmethod
    def from_function(cls, f, grid: HistoryGrid, period: float, N: int) -> "HistoryField":
        """Sample ``f(t, theta)`` given broadcastable arrays; returns (N, M) or (N, M, n)."""
        t = time_grid(N, period)[:, None]
        th = grid.theta[None, :]
        return cls(np.asarray(f(t, th), dtype=complex), grid, period)

    @classmethod
    def zeros(cls, grid: HistoryGrid, period: float, N: int, dim: int) -> "HistoryField":
        return cls(np.zeros((N, grid.size, dim), dtype=complex), grid, period)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[2]

    def _like(self, values) -> "HistoryField":
        return HistoryField(values, self.grid, self.period)

    def check_compatible(self, other: "HistoryField") -> None:
        if (
            self.values.shape != other.values.shape
            or self.period != other.period
            or not self.grid.same_as(other.grid)
        ):
            raise ValueError("grid mismatch between history fields")

    def fft_t(self) -> np.ndarray:
        return np.fft.fft(self.values, axis=0) / self.N

    def dt(self) -> "HistoryField":
        w = angular_frequencies(self.N, self.period)
        c = np.fft.fft(self.values, axis=0)
        return self._like(np.fft.ifft(1j * w[:, None, None] * c, axis=0))

    def dtheta(self) -> "HistoryField":
        return self._like(np.einsum("mk,ika->ima", self.grid.diff_matrix, self.values))

    def at_zero(self) -> PeriodicFunction:
        return PeriodicFunction(self.values[:, self.grid.zero_index, :], self.period)

    def weight(self) -> np.ndarray:
        if self.grid.rho is None:
            return np.ones(self.grid.size)
        return np.exp(self.grid.rho * self.grid.theta)

    def norm(self) -> float:
        """Sup norm over the grid (``exp(rho theta)``-weighted when the grid has a rho)."""
        if not self.values.size:
            return 0.0
        mag = np.max(np.abs(self.values), axis=2) * self.weight()[None, :]
        return float(mag.max())

    def __add__(self, other):
        if isinstance(other, HistoryField):
            self.check_compatible(other)
            return self._like(self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, HistoryField):
            self.check_compatible(other)
            return self._like(self.values - other.values)
        return NotImplemented

    def __neg__(self):
        return self._like(-self.values)

    def __mul__(self, alpha):
        if np.ndim(alpha) == 0:
            return self._like(alpha * self.values)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"HistoryField(N={self.N}, M_total={self.grid.size}, dim={self.dim})"
