"""The characteristic operator ``Delta(z)`` and its companion operators.

``(Delta(z) q)(t) = q'(t) + z q(t) - L(t)[theta -> exp(z theta) q(t + theta)]``

acts on T-periodic functions.  It is discretised by Fourier collocation
(``N`` points); point shifts are exact phase factors and distributed kernels
are integrated mode by mode, so no interpolation in ``t`` is involved.

The remaining operators act on history fields ``phi(t)(theta)`` stored on
the tensor grid of :mod:`floquetspec.history`:

* ``R(z, D0)``:  ``int_theta^0 exp(z (theta - s)) phi(t + theta - s)(s) ds``
* ``Q(z) iota``: ``exp(z theta) q(t + theta)``
* ``E(z)``, ``F(z)`` and their inverses, ``A_hat = (K, D)``, the generator
  ``A`` and its resolvent.

All functions are pure; per-``(model, N)`` setup is cached.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, SingularError
from .history import HistoryField, HistoryGrid
from .model import FdeModel, Kind, kernel_quadrature
from .periodic_fn import PeriodicFunction, angular_frequencies, diff_matrix, shift_matrix, time_grid

__all__ = [
    "DeltaOperator",
    "DeltaMatrix",
    "delta_operator",
    "check_domain",
    "delta_apply",
    "assemble_delta",
    "delta_derivative",
    "sigma_min",
    "singular_threshold",
    "history_grid",
    "apply_L_field",
    "r_d0_apply",
    "r_d0_bound",
    "q_iota_apply",
    "e_apply",
    "f_apply",
    "e_inverse",
    "f_inverse",
    "a_hat_apply",
    "a_apply",
    "equivalence_check",
    "resolvent_A_apply",
]

DOMAIN_MARGIN = 1e-8
SINGULAR_FACTOR = 1e3


def check_domain(model: FdeModel, z: complex) -> None:
    """Raise :class:`DomainError` if ``z`` is outside ``Re z > -rho`` for an IDDE."""
    if model.kind is Kind.IDDE and not complex(z).real > -model.rho + DOMAIN_MARGIN:
        raise DomainError(
            f"Re(z) = {complex(z).real:.6g} is not greater than -rho = {-model.rho:.6g}"
        )


class DeltaOperator:
    """Discretised ``Delta(z)`` and its z-derivatives for one model and grid size.

    Parameters
    ----------
    model : FdeModel
    N : int
        Number of collocation points in ``t``.
    """

    def __init__(self, model: FdeModel, N: int):
        if N < 2:
            raise ValueError("N must be at least 2")
        self.model = model
        self.N = N
        self.n = n = model.n
        T = model.T
        self.t = time_grid(N, T)
        self.omega = angular_frequencies(N, T)
        self.D = diff_matrix(N, T)
        self._points = []
        for theta, coeff in model.signed_terms():
            self._points.append((theta, coeff(self.t).reshape(N, n, n)))
        self._kernels = []
        panel = 4.0 * T / N
        for k in model.kernels:
            nodes, weights = kernel_quadrature(model, k, panel)
            if k.is_constant_in_t:
                dens = model.kernel_density_signed(k, np.zeros(1)[:, None], nodes[None, :])
            else:
                dens = model.kernel_density_signed(k, self.t[:, None], nodes[None, :])
            Kw = dens * weights[None, :, None, None]
            E = np.exp(1j * np.outer(nodes, self.omega))
            self._kernels.append((nodes, Kw, E))
        self._F = np.exp(1j * np.outer(self.t, self.omega))
        self._Finv = np.conj(self._F).T / N
        self._B = None

    @property
    def size(self) -> int:
        return self.n * self.N

    def _point_blocks(self):
        if self._B is None:
            N, n, T = self.N, self.n, self.model.T
            blocks = []
            for theta, A in self._points:
                S = shift_matrix(N, T, -theta)
                blocks.append(np.einsum("iab,ij->iajb", A, S).reshape(N * n, N * n))
            self._B = blocks
        return self._B

    def _kernel_modes(self, z: complex, order: int):
        """Per-kernel arrays ``G[i, k]`` (n x n) with ``i`` over times or a single row."""
        out = []
        for nodes, Kw, E in self._kernels:
            fac = np.exp(z * nodes) * nodes**order
            out.append(np.einsum("imab,mk->ikab", Kw * fac[None, :, None, None], E))
        return out

    def matrix(self, z: complex, order: int = 0) -> np.ndarray:
        """``Delta_N^{(order)}(z)`` as an ``nN x nN`` array (time-major ordering)."""
        z = complex(z)
        check_domain(self.model, z)
        N, n = self.N, self.n
        size = N * n
        if order == 0:
            M = np.kron(self.D, np.eye(n)) + z * np.eye(size)
        elif order == 1:
            M = np.eye(size, dtype=complex)
        else:
            M = np.zeros((size, size), dtype=complex)
        for (theta, _), B in zip(self._points, self._point_blocks()):
            M = M - (theta**order) * np.exp(z * theta) * B
        for G in self._kernel_modes(z, order):
            if G.shape[0] == 1:
                G = np.broadcast_to(G, (N,) + G.shape[1:])
            C = np.einsum("ikab,ik,kj->iajb", G, self._F, self._Finv).reshape(size, size)
            M = M - C
        return M

    def apply(self, z: complex, q, order: int = 0) -> np.ndarray:
        """Matrix-free ``Delta_N^{(order)}(z) q``; ``q`` given as (N, n) values."""
        z = complex(z)
        check_domain(self.model, z)
        q = np.asarray(q, dtype=complex).reshape(self.N, self.n)
        qh = np.fft.fft(q, axis=0)
        if order == 0:
            out = np.fft.ifft(1j * self.omega[:, None] * qh, axis=0) + z * q
        elif order == 1:
            out = q.copy()
        else:
            out = np.zeros_like(q)
        for theta, A in self._points:
            shifted = np.fft.ifft(np.exp(1j * self.omega * theta)[:, None] * qh, axis=0)
            out -= (theta**order) * np.exp(z * theta) * np.einsum("iab,ib->ia", A, shifted)
        for G in self._kernel_modes(z, order):
            if G.shape[0] == 1:
                out -= np.fft.ifft(np.einsum("kab,kb->ka", G[0], qh), axis=0)
            else:
                out -= np.einsum("ikab,kb,ik->ia", G, qh / self.N, self._F)
        return out


@lru_cache(maxsize=32)
def delta_operator(model: FdeModel, N: int) -> DeltaOperator:
    """Cached :class:`DeltaOperator` for ``(model, N)``."""
    return DeltaOperator(model, N)


@dataclass(frozen=True)
class DeltaMatrix:
    z: complex
    N: int
    matrix: np.ndarray
    model_hash: str
    order: int = 0

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    def sigma_min(self) -> float:
        return float(self.singular_values()[-1])

    def threshold(self) -> float:
        return singular_threshold(self.matrix)


def _check_q(model: FdeModel, q: PeriodicFunction) -> None:
    if q.dim != model.n:
        raise ValueError(f"function has dimension {q.dim}, model has n = {model.n}")
    if q.period != model.T:
        raise ValueError("function period differs from the model period")


def delta_apply(model: FdeModel, z: complex, q: PeriodicFunction) -> PeriodicFunction:
    """``Delta(z) q`` on the grid of ``q``."""
    _check_q(model, q)
    return PeriodicFunction(delta_operator(model, q.N).apply(z, q.values), model.T)


def delta_derivative(model: FdeModel, z: complex, l: int, q: PeriodicFunction) -> PeriodicFunction:
    """``Delta^{(l)}(z) q`` for ``l >= 1`` with analytic z-derivatives."""
    if l < 1:
        raise ValueError("derivative order must be at least 1; use delta_apply for l = 0")
    _check_q(model, q)
    return PeriodicFunction(delta_operator(model, q.N).apply(z, q.values, order=l), model.T)


def assemble_delta(model: FdeModel, z: complex, N: int, order: int = 0) -> DeltaMatrix:
    M = delta_operator(model, N).matrix(z, order)
    return DeltaMatrix(complex(z), N, M, model.model_hash, order)


def singular_threshold(matrix: np.ndarray) -> float:
    return SINGULAR_FACTOR * np.finfo(float).eps * float(np.linalg.norm(matrix, 2))


def sigma_min(model: FdeModel, z: complex, N: int) -> float:
    """Smallest singular value of ``Delta_N(z)``."""
    return assemble_delta(model, z, N).sigma_min()


# ---------------------------------------------------------------------------
# history fields


def history_grid(model: FdeModel, M: int = 64) -> HistoryGrid:
    return model.history_grid(M)


def _check_field(model: FdeModel, phi: HistoryField) -> None:
    if phi.period != model.T or phi.dim != model.n:
        raise ValueError("grid mismatch: field does not belong to this model")


def _check_grid_domain(grid: HistoryGrid, z: complex) -> None:
    if grid.rho is not None and not complex(z).real > -grid.rho + DOMAIN_MARGIN:
        raise DomainError(
            f"Re(z) = {complex(z).real:.6g} is not greater than -rho = {-grid.rho:.6g}"
        )


@lru_cache(maxsize=32)
def _field_ops(model: FdeModel, grid: HistoryGrid, N: int):
    t = time_grid(N, model.T)
    points = []
    for theta, coeff in model.signed_terms():
        P = grid.interp_matrix([theta])[0]
        points.append((P, coeff(t).reshape(N, model.n, model.n)))
    kernels = []
    for k in model.kernels:
        lo, hi = model.signed_kernel_support(k)
        nodes, weights, P = grid.quadrature(lo, hi, k.order)
        dens = model.kernel_density_signed(k, t[:, None], nodes[None, :])
        kernels.append((P, dens * weights[None, :, None, None]))
    return points, kernels


def apply_L_field(model: FdeModel, phi: HistoryField) -> PeriodicFunction:
    """``t -> L(t) phi(t)`` at every grid time."""
    _check_field(model, phi)
    points, kernels = _field_ops(model, phi.grid, phi.N)
    out = np.zeros((phi.N, model.n), dtype=complex)
    for P, A in points:
        out += np.einsum("iab,ib->ia", A, np.einsum("m,ima->ia", P, phi.values))
    for P, Kw in kernels:
        vals = np.einsum("qm,ima->iqa", P, phi.values)
        out += np.einsum("iqab,iqb->ia", Kw, vals)
    return PeriodicFunction(out, model.T)


def q_iota_apply(z: complex, q: PeriodicFunction, grid: HistoryGrid) -> HistoryField:
    """Tensor field ``exp(z theta) q(t + theta)``."""
    _check_grid_domain(grid, z)
    w = angular_frequencies(q.N, q.period)
    qh = np.fft.fft(q.values, axis=0)
    phase = np.exp(1j * np.outer(w, grid.theta))
    vals = np.fft.ifft(phase[:, :, None] * qh[:, None, :], axis=0)
    vals *= np.exp(complex(z) * grid.theta)[None, :, None]
    return HistoryField(vals, grid, q.period)


def r_d0_apply(z: complex, phi: HistoryField) -> HistoryField:
    """``[R(z, D0) phi](t)(theta) = int_theta^0 exp(z (theta - s)) phi(t + theta - s)(s) ds``.

    Mode by mode in ``t`` this is the transport problem
    ``(z + i omega_k - d/dtheta) u_k = phi_k`` with ``u_k(0) = 0``.
    """
    _check_grid_domain(phi.grid, z)
    lam = complex(z) + 1j * angular_frequencies(phi.N, phi.period)
    u = phi.grid.solve_transport(lam, np.fft.fft(phi.values, axis=0))
    return HistoryField(np.fft.ifft(u, axis=0), phi.grid, phi.period)


def r_d0_bound(z: complex, grid: HistoryGrid) -> float:
    """Constant ``M_z`` with ``||R(z, D0) phi|| <= M_z ||phi||`` on this grid's interval."""
    x = complex(z).real + (grid.rho or 0.0)
    vals = []
    for th in (grid.lo, grid.hi):
        if th == 0.0:
            continue
        vals.append(abs(th) if abs(x * th) < 1e-12 else abs((1.0 - np.exp(x * th)) / x))
    return max(vals, default=0.0)


def e_apply(model: FdeModel, z: complex, q: PeriodicFunction, phi: HistoryField):
    """``E(z)(q, phi) = (q, Q(z) iota q + R(z, D0) phi)``."""
    _check_q(model, q)
    _check_field(model, phi)
    check_domain(model, z)
    if q.N != phi.N:
        raise ValueError("grid mismatch between q and phi")
    return q, q_iota_apply(z, q, phi.grid) + r_d0_apply(z, phi)


def f_apply(model: FdeModel, z: complex, p: PeriodicFunction, phi: HistoryField):
    """``F(z)(p, phi) = (p + L(t)[R(z, D0) phi](t), phi)``."""
    _check_q(model, p)
    _check_field(model, phi)
    if p.N != phi.N:
        raise ValueError("grid mismatch between p and phi")
    return p + apply_L_field(model, r_d0_apply(z, phi)), phi


def f_inverse(model: FdeModel, z: complex, p: PeriodicFunction, phi: HistoryField):
    _check_q(model, p)
    _check_field(model, phi)
    return p - apply_L_field(model, r_d0_apply(z, phi)), phi


def _d_field(psi: HistoryField) -> HistoryField:
    """``D psi = psi' - psi_dot`` (theta-derivative minus time derivative)."""
    return psi.dtheta() - psi.dt()


def e_inverse(model: FdeModel, z: complex, q: PeriodicFunction, psi: HistoryField):
    """``E(z)^{-1}(q, psi) = (psi(.)(0), (z I - D) psi)``.

    Exact only for ``psi`` in the range of ``E(z)``; for other inputs the
    first component ignores ``q``.
    """
    _check_field(model, psi)
    check_domain(model, z)
    return psi.at_zero(), complex(z) * psi - _d_field(psi)


def a_hat_apply(model: FdeModel, q: PeriodicFunction, psi: HistoryField):
    """``A_hat(q, psi) = (K psi, D psi)`` with ``K psi = L(t) psi(t) - d/dt psi(t)(0)``."""
    _check_field(model, psi)
    k = apply_L_field(model, psi) - psi.at_zero().differentiate()
    return k, _d_field(psi)


def a_apply(model: FdeModel, phi: HistoryField) -> HistoryField:
    """Discrete generator: ``phi' - phi_dot`` with the ``theta = 0`` row set to ``L(t) phi(t) - phi_dot(t)(0)``."""
    _check_field(model, phi)
    out = _d_field(phi).values
    i0 = phi.grid.zero_index
    out[:, i0, :] = (apply_L_field(model, phi) - phi.at_zero().differentiate()).values
    return HistoryField(out, phi.grid, phi.period)


def equivalence_check(model: FdeModel, z: complex, q: PeriodicFunction, phi: HistoryField) -> float:
    """Max-norm defect of ``diag(Delta(z), I) = F(z) (z I - A_hat) E(z)`` applied to ``(q, phi)``."""
    z = complex(z)
    lhs_p = delta_apply(model, z, q)
    q1, psi = e_apply(model, z, q, phi)
    k, d = a_hat_apply(model, q1, psi)
    mid_p = z * q1 - k
    mid_phi = z * psi - d
    rhs_p, rhs_phi = f_apply(model, z, mid_p, mid_phi)
    return max((lhs_p - rhs_p).norm_inf(), (phi - rhs_phi).norm())


def resolvent_A_apply(model: FdeModel, z: complex, phi: HistoryField) -> HistoryField:
    """``R(z, A) phi = exp(z theta) phi_z(t + theta) + R(z, D0) phi``.

    ``phi_z`` solves ``Delta_N(z) phi_z = phi(.)(0) + L(.)[R(z, D0) phi](.)``.
    Raises :class:`SingularError` when ``Delta_N(z)`` is numerically singular.
    """
    _check_field(model, phi)
    check_domain(model, z)
    r = r_d0_apply(z, phi)
    w = phi.at_zero() + apply_L_field(model, r)
    M = delta_operator(model, phi.N).matrix(z)
    s = np.linalg.svd(M, compute_uv=False)
    thr = singular_threshold(M)
    if s[-1] <= thr:
        raise SingularError(z, s[-1], thr)
    qz = np.linalg.solve(M, w.vec())
    phi_z = PeriodicFunction.from_vec(qz, model.n, model.T)
    return q_iota_apply(z, phi_z, phi.grid) + r
