"""Independent reference values.

* Time integration of DDEs (classical RK4 with cubic Hermite dense output)
  and the resulting discretised monodromy operator ``U(T, 0)``.
* Closed-form characteristic functions of constant-coefficient models,
  built symbolically and solved by Newton from a lattice of seeds.

Nothing here uses :mod:`floquetspec.charop` or :mod:`floquetspec.spectrum`
beyond strip reduction, so agreement with them is a genuine cross-check.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .errors import DomainError
from .history import HistoryGrid
from .model import FdeModel, Kind
from .spectrum import strip_reduce

__all__ = [
    "Trajectory",
    "MonodromyMatrix",
    "integrate_dde",
    "monodromy_matrix",
    "exponents_from_monodromy",
    "cluster_multipliers",
    "characteristic_function",
    "closed_form_roots",
]

DEFAULT_RESOLUTION = 32


def _step_size(model: FdeModel, resolution: int) -> float:
    h = model.h if model.kind is Kind.DDE else -min(
        [theta for theta, _ in model.signed_terms()] or [-model.T]
    )
    dt0 = h / (resolution * math.ceil(h / model.T - 1e-12))
    return model.T / math.ceil(model.T / dt0 - 1e-9)


class Trajectory:
    """Dense-output solution on ``[-history, t_end]`` for a batch of columns.

    ``eval(t)`` returns shape ``(len(t), n, C)``.
    """

    def __init__(self, history, dt: float, n: int, C: int):
        self.history = history
        self.dt = dt
        self.n = n
        self.C = C
        self._x = np.zeros((64, n, C), dtype=complex)
        self._f = np.zeros((64, n, C), dtype=complex)
        self.count = 0

    def append(self, x: np.ndarray, f: np.ndarray) -> None:
        if self.count == self._x.shape[0]:
            self._x = np.concatenate([self._x, np.zeros_like(self._x)])
            self._f = np.concatenate([self._f, np.zeros_like(self._f)])
        self._x[self.count] = x
        self._f[self.count] = f
        self.count += 1

    @property
    def xs(self) -> np.ndarray:
        return self._x[: self.count]

    @property
    def fs(self) -> np.ndarray:
        return self._f[: self.count]

    @property
    def t_end(self) -> float:
        return (self.count - 1) * self.dt

    def eval(self, t, current: int | None = None) -> np.ndarray:
        """Values at ``t``; ``current`` is the index of the step being computed,
        for which the previous step's cubic is extended."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.size, self.n, self.C), dtype=complex)
        past = t <= 1e-14 * self.dt
        if np.any(past):
            out[past] = self.history(np.minimum(t[past], 0.0))
        fut = ~past
        if np.any(fut):
            tf = t[fut]
            last = self.count - 2 if current is None else current - 1
            j = np.floor(tf / self.dt + 1e-9).astype(int)
            j = np.minimum(j, last)
            xs, fs = self._x, self._f
            if last < 0:
                # first step: linear continuation from t = 0
                out[fut] = xs[0][None] + tf[:, None, None] * fs[0][None]
            else:
                j = np.maximum(j, 0)
                s = (tf - j * self.dt) / self.dt
                h00 = 2 * s**3 - 3 * s**2 + 1
                h10 = s**3 - 2 * s**2 + s
                h01 = -2 * s**3 + 3 * s**2
                h11 = s**3 - s**2
                out[fut] = (
                    h00[:, None, None] * xs[j]
                    + (h10 * self.dt)[:, None, None] * fs[j]
                    + h01[:, None, None] * xs[j + 1]
                    + (h11 * self.dt)[:, None, None] * fs[j + 1]
                )
        return out

    def derivative_at_nodes(self) -> np.ndarray:
        return self.fs.copy()


def _rhs_factory(model: FdeModel, dt: float):
    terms = model.signed_terms()
    kernels = []
    for k in model.kernels:
        lo, hi = model.signed_kernel_support(k)
        # panels aligned to the step grid so the integrand is smooth per panel
        a = math.floor(lo / dt + 1e-9)
        b = math.ceil(hi / dt - 1e-9)
        x, w = np.polynomial.legendre.leggauss(4)
        nodes, weights = [], []
        for p in range(a, b):
            p0, p1 = max(p * dt, lo), min((p + 1) * dt, hi)
            if p1 > p0:
                nodes.append(0.5 * (p0 + p1) + 0.5 * (p1 - p0) * x)
                weights.append(0.5 * (p1 - p0) * w)
        kernels.append((k, np.concatenate(nodes), np.concatenate(weights)))

    def rhs(traj: Trajectory, t: float, x_now: np.ndarray, step: int) -> np.ndarray:
        out = np.zeros_like(x_now)
        for theta, coeff in terms:
            if theta == 0.0:
                xv = x_now
            else:
                xv = traj.eval(np.array([t + theta]), current=step)[0]
            out += coeff(t) @ xv
        for k, nodes, weights in kernels:
            vals = traj.eval(t + nodes, current=step)
            dens = model.kernel_density_signed(k, np.full(nodes.shape, t), nodes)
            out += np.einsum("m,mab,mbc->ac", weights, dens, vals)
        return out

    return rhs


def integrate_dde(model: FdeModel, phi0, t_end: float, *, resolution: int = DEFAULT_RESOLUTION,
                  dt: float | None = None) -> Trajectory:
    """Integrate ``x' = L(t) x_t`` from ``t = 0`` with initial history ``phi0``.

    ``phi0`` maps an array of ``theta <= 0`` to shape ``(len, n)`` or
    ``(len, n, C)`` (a batch of ``C`` histories).  The step defaults to
    ``h / (resolution * ceil(h / T))`` adjusted to divide ``T``; it must not
    exceed the smallest point lag.  Kernel mass inside the current step is
    evaluated with the previous step's cubic extended by one step.
    """
    if model.kind is Kind.MFDE:
        raise DomainError("time integration is unsupported for MFDEs (ill-posed initial value problem)")
    dt = dt or _step_size(model, resolution)
    lags = [-theta for theta, _ in model.signed_terms() if theta != 0.0]
    if lags and dt > min(lags) + 1e-12:
        raise ValueError("integration step exceeds the smallest lag")
    probe = np.asarray(phi0(np.zeros(1)), dtype=complex)
    batched = probe.ndim == 3
    n = model.n
    C = probe.shape[2] if batched else 1

    def history(th):
        v = np.asarray(phi0(np.asarray(th)), dtype=complex)
        return v if batched else v.reshape(-1, n, 1)

    traj = Trajectory(history, dt, n, C)
    rhs = _rhs_factory(model, dt)
    x = history(np.zeros(1))[0]
    traj.append(x, np.zeros_like(x))
    traj._f[0] = rhs(traj, 0.0, x, 0)
    steps = int(round(t_end / dt))
    for k in range(steps):
        t = k * dt
        f1 = traj._f[k]
        # stage values inside the current step come from the extended cubic
        x2 = x + 0.5 * dt * f1
        f2 = rhs(traj, t + 0.5 * dt, x2, k)
        x3 = x + 0.5 * dt * f2
        f3 = rhs(traj, t + 0.5 * dt, x3, k)
        x4 = x + dt * f3
        f4 = rhs(traj, t + dt, x4, k)
        x = x + dt / 6.0 * (f1 + 2 * f2 + 2 * f3 + f4)
        traj.append(x, np.zeros_like(x))
        traj._f[k + 1] = rhs(traj, t + dt, x, k + 1)
    return traj


@dataclass
class MonodromyMatrix:
    matrix: np.ndarray
    grid: HistoryGrid
    n: int
    T: float
    dt: float
    steps_per_period: int
    scheme: str = "RK4 + cubic Hermite dense output"
    meta: dict = field(default_factory=dict)

    @property
    def M_h(self) -> int:
        return self.grid.size

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


def _history_interval(model: FdeModel) -> tuple[float, float | None]:
    if model.kind is Kind.IDDE:
        return -float(model.s_max), 1.0
    return -model.h, None


def monodromy_matrix(model: FdeModel, M_h: int = 64, *, resolution: int = DEFAULT_RESOLUTION,
                     dt: float | None = None, workers: int = 1) -> MonodromyMatrix:
    """Discretised ``U(T, 0)`` on ``M_h`` Chebyshev nodes of the history interval.

    Column ``(j, a)`` is the sampled ``x_T`` for the initial history equal to
    the ``j``-th nodal basis function in component ``a``.
    """
    if model.kind is Kind.MFDE:
        raise DomainError("time integration is unsupported for MFDEs (ill-posed initial value problem)")
    lo, panel = _history_interval(model)
    grid = HistoryGrid.for_interval(lo, 0.0, M_h, max_panel=panel)
    size, n = grid.size, model.n
    C = size * n
    dt = dt or _step_size(model, resolution)

    def run(cols):
        def phi0(th):
            P = grid.interp_matrix(th)
            out = np.zeros((P.shape[0], n, len(cols)), dtype=complex)
            for c, col in enumerate(cols):
                j, a = divmod(col, n)
                out[:, a, c] = P[:, j]
            return out

        traj = integrate_dde(model, phi0, model.T, dt=dt)
        vals = traj.eval(model.T + grid.theta)
        return vals.transpose(0, 1, 2).reshape(size * n, len(cols))

    cols = list(range(C))
    if workers > 1:
        chunks = [cols[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
        U = np.zeros((C, C), dtype=complex)
        for chunk, part in zip(chunks, parts):
            U[:, chunk] = part
    else:
        U = run(cols)
    steps = int(round(model.T / dt))
    return MonodromyMatrix(U, grid, n, model.T, dt, steps,
                           meta={"M_h": M_h, "history_interval": [lo, 0.0]})


def cluster_multipliers(mu, radius: float = 1e-4) -> list[tuple[complex, int]]:
    """Group multipliers closer than ``radius``; returns (mean, count) pairs."""
    mu = list(np.asarray(mu, dtype=complex))
    groups: list[list[complex]] = []
    for v in sorted(mu, key=lambda x: -abs(x)):
        for g in groups:
            if min(abs(v - u) for u in g) <= radius:
                g.append(v)
                break
        else:
            groups.append([v])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def exponents_from_monodromy(mono, cutoff: float = 1e-6, T: float | None = None) -> list[complex]:
    """``strip_reduce(log(mu) / T)`` for multipliers ``|mu| > cutoff``, by decreasing modulus."""
    if isinstance(mono, MonodromyMatrix):
        mu = mono.eigenvalues()
        T = mono.T
    else:
        mu = np.asarray(mono, dtype=complex)
        if T is None:
            raise ValueError("T is required when passing raw multipliers")
    keep = sorted((m for m in mu if abs(m) > cutoff), key=lambda m: -abs(m))
    return [strip_reduce(complex(np.log(m)) / T, T) for m in keep]


# ---------------------------------------------------------------------------
# constant-coefficient characteristic functions


def characteristic_function(model: FdeModel):
    """Symbolic ``det(lam I - sum_j A_j exp(lam theta_j) - K~(lam))`` and its symbol."""
    if not model.is_autonomous():
        raise ValueError("closed-form roots need coefficients that are constant in t")
    lam = sp.Symbol("lam")
    s = sp.Symbol("s", real=True)
    n = model.n
    M = lam * sp.eye(n)
    for theta, coeff in model.signed_terms():
        A = coeff.constant_value()
        Am = sp.Matrix(n, n, lambda a, b: sp.nsimplify(complex(A[a, b]).real)
                       + sp.I * sp.nsimplify(complex(A[a, b]).imag))
        M -= Am * sp.exp(lam * sp.nsimplify(theta))
    for k in model.kernels:
        lo, hi = k.support
        sign = 1 if model.kind is Kind.MFDE else -1
        hi_s = sp.oo if math.isinf(hi) else sp.nsimplify(hi)
        for a in range(n):
            for b in range(n):
                dens = k.density[a][b].to_sympy({"t": sp.Integer(0), "s": s})
                val = sp.integrate(dens * sp.exp(sign * lam * s), (s, sp.nsimplify(lo), hi_s),
                                   conds="none")
                M[a, b] -= sp.simplify(val)
    return sp.simplify(M.det()), lam


def _newton_polish(f, df, z, iters=60):
    z = np.array(z, dtype=complex)
    for _ in range(iters):
        with np.errstate(all="ignore"):
            fz, dz = f(z), df(z)
            step = np.where(np.abs(dz) > 0, fz / dz, 0)
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1, np.abs(z))):
            break
    return z


def _schroeder_polish(f, df, d2f, z, iters=30):
    """Iteration ``z - f f' / (f'^2 - f f'')``, quadratic at roots of any multiplicity."""
    z = np.array(z, dtype=complex)
    for _ in range(iters):
        with np.errstate(all="ignore"):
            fz, d1, d2 = f(z), df(z), d2f(z)
            den = d1 * d1 - fz * d2
            step = np.where(np.abs(den) > 0, fz * d1 / den, 0)
        step = np.where(np.isfinite(step), step, 0)
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1, np.abs(z))):
            break
    return z


def closed_form_roots(model: FdeModel, region=None, *, max_mode: int = 32, seed_spacing: float = 0.25,
                      strip: bool = True, with_multiplicity: bool = False):
    """Roots of the constant-coefficient characteristic function.

    Every root ``lam`` yields the exponent ``strip_reduce(lam)``.  Seeds cover
    ``Re`` in the region and ``Im`` in ``(-pi/T, pi/T]`` widened by
    ``max_mode`` multiples of ``2 pi / T``.  Rational characteristic
    functions are solved as polynomials.  For an IDDE roots with
    ``Re lam <= -rho`` are dropped.
    """
    f_sym, lam = characteristic_function(model)
    T = model.T
    if region is None:
        bounds = (-5.0 / T, 5.0 / T)
    elif hasattr(region, "bounds"):
        bounds = (region.bounds[0], region.bounds[1]) if region.kind == "rect" else (
            region.bounds[0] - region.bounds[2], region.bounds[0] + region.bounds[2])
    else:
        bounds = tuple(region)
    if model.kind is Kind.IDDE:
        bounds = (max(bounds[0], -model.rho), bounds[1])
    num, den = sp.fraction(sp.together(f_sym))
    roots: list[tuple[complex, int]] = []
    if f_sym.is_rational_function(lam):
        poly = sp.Poly(sp.expand(num), lam)
        coeffs = [complex(c) for c in poly.all_coeffs()]
        raw = np.roots(coeffs) if len(coeffs) > 1 else np.array([])
        den_f = sp.lambdify(lam, den, "numpy")
        for r in _group(raw, 1e-6):
            val, mult = r
            if abs(complex(den_f(val))) < 1e-10:
                continue
            roots.append((val, mult))
    else:
        derivs = [sp.lambdify(lam, sp.diff(f_sym, lam, j), "numpy") for j in range(4)]
        w = 2 * math.pi / T
        im_hi = math.pi / T + max_mode * w
        re = np.arange(bounds[0], bounds[1] + seed_spacing, seed_spacing)
        im = np.arange(-im_hi, im_hi + seed_spacing, seed_spacing)
        Z = (re[:, None] + 1j * im[None, :]).ravel()
        Z = _newton_polish(derivs[0], derivs[1], Z, iters=40)
        Z = _schroeder_polish(derivs[0], derivs[1], derivs[2], Z)
        with np.errstate(all="ignore"):
            ok = np.isfinite(Z) & (np.abs(derivs[0](Z)) < 1e-10 * np.maximum(1.0, np.abs(Z)))
        for z, _ in _group(Z[ok], 1e-6):
            mult = 1
            while mult < 3:
                d = complex(derivs[mult](z))
                if abs(d) > 1e-6 * max(1.0, abs(z)):
                    break
                mult += 1
            if mult > 1:
                z = complex(_newton_polish(derivs[mult - 1], derivs[mult], np.array([z]))[0])
            roots.append((z, mult))
    out = []
    for z, mult in roots:
        if not (bounds[0] - 1e-9 <= z.real <= bounds[1] + 1e-9):
            continue
        if model.kind is Kind.IDDE and not z.real > -model.rho:
            continue
        if abs(z.imag) > math.pi / T + max_mode * 2 * math.pi / T + 1e-9:
            continue
        out.append((strip_reduce(z, T) if strip else z, mult))
    merged = _group([z for z, _ in out], 1e-7, weights=[m for _, m in out], max_only=True)
    merged.sort(key=lambda r: (round(r[0].real, 9), round(r[0].imag, 9)))
    if with_multiplicity:
        return merged
    return [z for z, _ in merged]


def _group(values, tol, weights=None, max_only=False):
    """Cluster values; returns (representative, multiplicity) with the count (or max weight)."""
    vals = list(np.asarray(values, dtype=complex))
    wts = list(weights) if weights is not None else [1] * len(vals)
    groups: list[list[int]] = []
    for i, v in enumerate(vals):
        for g in groups:
            if abs(vals[g[0]] - v) <= tol * max(1.0, abs(v)):
                g.append(i)
                break
        else:
            groups.append([i])
    out = []
    for g in groups:
        rep = complex(vals[g[0]])
        m = max(wts[i] for i in g) if max_only else sum(wts[i] for i in g)
        out.append((rep, int(m)))
    return out
