"""Seeded random test inputs: band-limited periodic functions and smooth history fields."""

from __future__ import annotations

import numpy as np

from .history import HistoryField, HistoryGrid
from .model import FdeModel
from .periodic_fn import PeriodicFunction, time_grid

__all__ = ["random_periodic", "random_field", "random_points"]


def random_periodic(rng: np.random.Generator, model: FdeModel, N: int, bandwidth: int = 6) -> PeriodicFunction:
    """Trigonometric polynomial of degree ``bandwidth`` with O(1) complex coefficients."""
    if bandwidth >= N // 2:
        raise ValueError("bandwidth must be below N/2")
    k = np.arange(-bandwidth, bandwidth + 1)
    c = (rng.standard_normal((k.size, model.n)) + 1j * rng.standard_normal((k.size, model.n)))
    c /= (1.0 + np.abs(k))[:, None]
    t = time_grid(N, model.T)
    vals = np.exp(2j * np.pi * np.outer(t, k) / model.T) @ c
    return PeriodicFunction(vals, model.T)


def random_field(rng: np.random.Generator, model: FdeModel, grid: HistoryGrid, N: int,
                 bandwidth: int = 4, degree: int = 6) -> HistoryField:
    """``sum_{k, d} c_{k d} exp(2 pi i k t / T) P_d(theta)`` with Legendre ``P_d`` on the grid interval."""
    k = np.arange(-bandwidth, bandwidth + 1)
    c = rng.standard_normal((k.size, degree + 1, model.n)) + 1j * rng.standard_normal(
        (k.size, degree + 1, model.n))
    c /= ((1.0 + np.abs(k))[:, None] * (1.0 + np.arange(degree + 1))[None, :])[:, :, None]
    t = time_grid(N, model.T)
    x = 2.0 * (grid.theta - grid.lo) / (grid.hi - grid.lo) - 1.0
    P = np.polynomial.legendre.legvander(x, degree)
    E = np.exp(2j * np.pi * np.outer(t, k) / model.T)
    vals = np.einsum("ik,md,kda->ima", E, P, c)
    return HistoryField(vals, grid, model.T)


def random_points(rng: np.random.Generator, model: FdeModel, count: int) -> list[complex]:
    """``count`` points with ``Re`` in ``(-rho/2, 1)`` (``(-1, 1)`` without rho) and ``|Im| < 2``."""
    lo = -0.5 * model.rho if model.rho is not None else -1.0
    re = rng.uniform(lo, 1.0, count)
    im = rng.uniform(-2.0, 2.0, count)
    return [complex(a, b) for a, b in zip(re, im)]
