"""Characteristic values of ``Delta_N`` in a region, with multiplicity data.

Pipeline of :func:`find_exponents`:

1. block-Hankel contour integration of ``Delta_N(z)^{-1}`` against random
   probing matrices gives estimates of every characteristic value inside a
   slightly enlarged contour;
2. each estimate is refined by Newton's method on a bordered system (an
   extended chain system is used near defective roots);
3. candidates must pass a residual test at ``N`` and persist at ``2N``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .charop import check_domain, delta_operator
from .errors import AmbiguousRankError, ContourError, ConvergenceError, DomainError, NotCharacteristicError
from .model import FdeModel, Kind, validate
from .periodic_fn import PeriodicFunction

__all__ = [
    "Region",
    "SpectralPoint",
    "SpectrumResult",
    "RefineResult",
    "default_region",
    "strip_reduce",
    "contour_estimates",
    "refine",
    "find_exponents",
    "jordan_chains",
    "chain_defect",
    "spectrum",
]

PERSIST_TOL = 1e-6
CLUSTER_TOL = 1e-6
NOISE_FLOOR = 1e-10


def strip_reduce(sigma: complex, T: float) -> complex:
    """Representative of ``sigma + (2 pi i / T) Z`` with imaginary part in ``(-pi/T, pi/T]``."""
    sigma = complex(sigma)
    w = 2.0 * math.pi / T
    k = math.ceil(sigma.imag / w - 0.5)
    im = sigma.imag - k * w
    if im <= -math.pi / T + 1e-13 * w:
        im += w
    return complex(sigma.real, im)


@dataclass(frozen=True)
class Region:
    """Search region: ``rect`` with bounds ``(re_min, re_max, im_min, im_max)`` or
    ``disk`` with bounds ``(re_center, im_center, radius)``.

    ``order`` is the number of quadrature nodes per rectangle side (rect) or
    on the circle (disk).
    """

    kind: str = "rect"
    bounds: tuple = (-5.0, 5.0, -math.pi, math.pi)
    order: int | None = None
    rank_tol: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("rect", "disk"):
            raise ValueError("region kind must be 'rect' or 'disk'")
        b = tuple(float(x) for x in self.bounds)
        if self.kind == "rect":
            if len(b) != 4 or not (b[0] < b[1] and b[2] < b[3]):
                raise ValueError("rect bounds must be re_min < re_max, im_min < im_max")
        elif len(b) != 3 or not b[2] > 0:
            raise ValueError("disk bounds must be (re_center, im_center, radius > 0)")
        if not all(math.isfinite(x) for x in b):
            raise ValueError("region bounds must be finite")
        object.__setattr__(self, "bounds", b)

    @classmethod
    def rect(cls, re_min, re_max, im_min, im_max, **kw) -> "Region":
        return cls("rect", (re_min, re_max, im_min, im_max), **kw)

    @classmethod
    def disk(cls, center: complex, radius: float, **kw) -> "Region":
        return cls("disk", (complex(center).real, complex(center).imag, radius), **kw)

    @property
    def center(self) -> complex:
        b = self.bounds
        if self.kind == "rect":
            return complex(0.5 * (b[0] + b[1]), 0.5 * (b[2] + b[3]))
        return complex(b[0], b[1])

    @property
    def scale(self) -> float:
        b = self.bounds
        if self.kind == "rect":
            return 0.5 * max(b[1] - b[0], b[3] - b[2])
        return b[2]

    @property
    def re_min(self) -> float:
        b = self.bounds
        return b[0] if self.kind == "rect" else b[0] - b[2]

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        z = complex(z)
        b = self.bounds
        if self.kind == "rect":
            return b[0] - tol <= z.real <= b[1] + tol and b[2] - tol <= z.imag <= b[3] + tol
        return abs(z - self.center) <= b[2] + tol

    def split(self) -> list["Region"]:
        if self.kind != "rect":
            raise ValueError("only rectangles can be split")
        a, b, c, d = self.bounds
        mr, mi = 0.5 * (a + b), 0.5 * (c + d)
        return [
            Region.rect(a, mr, c, mi, order=self.order, rank_tol=self.rank_tol),
            Region.rect(mr, b, c, mi, order=self.order, rank_tol=self.rank_tol),
            Region.rect(a, mr, mi, d, order=self.order, rank_tol=self.rank_tol),
            Region.rect(mr, b, mi, d, order=self.order, rank_tol=self.rank_tol),
        ]

    def describe(self) -> dict:
        return {"kind": self.kind, "bounds": list(self.bounds), "order": self.order,
                "rank_tol": self.rank_tol}


def default_region(model: FdeModel) -> Region:
    """``[-5/T, 5/T] x (-pi/T, pi/T]``, clipped to ``Re z >= -rho`` for an IDDE."""
    T = model.T
    re_min = -5.0 / T
    if model.kind is Kind.IDDE:
        re_min = max(re_min, -model.rho)
    return Region.rect(re_min, 5.0 / T, -math.pi / T, math.pi / T)


def check_region(model: FdeModel, region: Region) -> None:
    if model.kind is Kind.IDDE and region.re_min < -model.rho - 1e-14:
        raise DomainError(
            f"region reaches Re z = {region.re_min:.6g} <= -rho = {-model.rho:.6g}; "
            "the spectrum is only characterised for Re z > -rho"
        )


# ---------------------------------------------------------------------------
# contour integration


def _contour(region: Region, pad: float, left_limit: float | None):
    """Nodes and weights for ``(1 / 2 pi i) oint f(z) dz`` around the padded region."""
    if region.kind == "disk":
        m = region.order or 128
        r = region.bounds[2] * (1.0 + pad)
        c = region.center
        ang = 2.0 * math.pi * (np.arange(m) + 0.5) / m
        z = c + r * np.exp(1j * ang)
        w = r * np.exp(1j * ang) / m
        if left_limit is not None and (c.real - r) <= left_limit:
            raise DomainError("disk contour would cross Re z = -rho")
        return z, w
    m = region.order or 48
    a, b, c, d = region.bounds
    p = pad * max(b - a, d - c)
    a, b, c, d = a - p, b + p, c - p, d + p
    if left_limit is not None:
        a = max(a, left_limit)
    x, wg = np.polynomial.legendre.leggauss(m)
    corners = [complex(a, c), complex(b, c), complex(b, d), complex(a, d)]
    zs, ws = [], []
    for k in range(4):
        z0, z1 = corners[k], corners[(k + 1) % 4]
        zs.append(0.5 * (z0 + z1) + 0.5 * (z1 - z0) * x)
        ws.append(0.5 * (z1 - z0) * wg / (2j * math.pi))
    return np.concatenate(zs), np.concatenate(ws)


def contour_estimates(model: FdeModel, region: Region, N: int, *, seed: int = 0,
                      n_probe: int | None = None, n_moments: int = 8, pad: float = 0.1,
                      workers: int = 1, max_retries: int = 3, _depth: int = 0,
                      _rng=None, _log=None) -> list[complex]:
    """Approximate characteristic values of ``Delta_N`` inside the padded contour."""
    rng = _rng if _rng is not None else np.random.default_rng(seed)
    log = _log if _log is not None else {"perturbations": 0, "subdivisions": 0}
    op = delta_operator(model, N)
    m = op.size
    ell = n_probe or min(m, 8)
    V = rng.standard_normal((m, ell)) + 1j * rng.standard_normal((m, ell))
    U = rng.standard_normal((m, ell)) + 1j * rng.standard_normal((m, ell))
    left = None
    if model.kind is Kind.IDDE:
        left = -model.rho + 1e-6
    c0, s0 = region.center, region.scale * (1.0 + pad)

    for attempt in range(max_retries + 1):
        lim = None if left is None else left + 1e-6 * (10.0**attempt - 1.0)
        z, w = _contour(region, pad * (1.37**attempt), lim)

        def solve(zj):
            M = op.matrix(zj)
            X = np.linalg.solve(M, V)
            growth = np.linalg.norm(X) / np.linalg.norm(V) * np.linalg.norm(M, 1)
            return U.conj().T @ X, growth

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                res = list(pool.map(solve, z))
        else:
            res = [solve(zj) for zj in z]
        if max(g for _, g in res) > 1e12:
            log["perturbations"] += 1
            continue
        break
    else:
        raise ContourError(
            f"contour passes too close to a characteristic value after {max_retries} perturbations"
        )

    zeta = (z - c0) / s0
    K = n_moments
    moments = []
    for p in range(2 * K):
        moments.append(sum(wj * zj**p * Yj for wj, zj, (Yj, _) in zip(w, zeta, res)))
    H0 = np.block([[moments[i + j] for j in range(K)] for i in range(K)])
    H1 = np.block([[moments[i + j + 1] for j in range(K)] for i in range(K)])
    W, S, Xh = np.linalg.svd(H0)
    # size of the integrand: moments below this (times eps-level factors) are noise
    ref = float(sum(abs(wj) * np.linalg.norm(Yj, 2) for wj, (Yj, _) in zip(w, res)))
    thresh = max(region.rank_tol * S[0], NOISE_FLOOR * ref)
    r = int(np.sum(S > thresh))
    if r == 0:
        return []
    if r > (K * ell) // 2:
        if region.kind == "rect" and _depth < 3:
            log["subdivisions"] += 1
            out = []
            for sub in region.split():
                out.extend(contour_estimates(model, sub, N, seed=seed, n_probe=n_probe,
                                             n_moments=n_moments, pad=pad, workers=workers,
                                             max_retries=max_retries, _depth=_depth + 1,
                                             _rng=rng, _log=log))
            return out
        if ell < m:
            return contour_estimates(model, region, N, seed=seed, n_probe=min(m, 2 * ell),
                                     n_moments=n_moments, pad=pad, workers=workers,
                                     max_retries=max_retries, _depth=_depth + 1, _rng=rng, _log=log)
        raise ContourError("too many characteristic values inside the contour")
    B = W[:, :r].conj().T @ H1 @ Xh[:r].conj().T / S[:r]
    lam = np.linalg.eigvals(B)
    return [complex(c0 + s0 * x) for x in lam]


# ---------------------------------------------------------------------------
# Newton refinement


class RefineResult(NamedTuple):
    sigma: complex
    q: PeriodicFunction
    residual: float
    iterations: int
    chain_length: int
    chain: tuple


def _taylor_blocks(op, z, k):
    return [op.matrix(z, l) / math.factorial(l) for l in range(k + 1)]


def _null_vector(M: np.ndarray) -> np.ndarray:
    _, _, Vh = np.linalg.svd(M)
    return Vh[-1].conj()


def chain_defect(model: FdeModel, sigma: complex, chain, N: int | None = None) -> float:
    """``max_i || sum_{l <= i} Delta^{(l)}(sigma) q_{i-l} / l! ||`` relative to ``||q_0||``."""
    vecs = [c.vec() if isinstance(c, PeriodicFunction) else np.asarray(c) for c in chain]
    N = N or vecs[0].size // model.n
    op = delta_operator(model, N)
    blocks = _taylor_blocks(op, sigma, len(vecs) - 1)
    scale = np.linalg.norm(vecs[0])
    out = 0.0
    for i in range(len(vecs)):
        r = sum(blocks[l] @ vecs[i - l] for l in range(i + 1))
        out = max(out, float(np.linalg.norm(r) / scale))
    return out


def _extended_newton(op, z, chain, c, tol, maxit):
    """Gauss-Newton on the chain system with unknowns ``(z, q_0..q_{k-1})``."""
    k = len(chain)
    m = op.size
    q = np.concatenate(chain)
    it = 0
    res = math.inf
    for it in range(1, maxit + 1):
        blocks = _taylor_blocks(op, z, k)
        qs = [q[i * m:(i + 1) * m] for i in range(k)]
        F = np.concatenate(
            [sum(blocks[l] @ qs[i - l] for l in range(i + 1)) for i in range(k)]
            + [np.array([c.conj() @ qs[0] - 1.0]), np.array([c.conj() @ qs[i] for i in range(1, k)])]
        )
        J = np.zeros((k * m + k, k * m + 1), dtype=complex)
        for i in range(k):
            J[i * m:(i + 1) * m, 0] = sum((l + 1) * blocks[l + 1] @ qs[i - l] for l in range(i + 1))
            for l in range(i + 1):
                j = i - l
                J[i * m:(i + 1) * m, 1 + j * m:1 + (j + 1) * m] = blocks[l]
        for i in range(k):
            J[k * m + i, 1 + i * m:1 + (i + 1) * m] = c.conj()
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        z = z + step[0]
        q = q + step[1:]
        qs = [q[i * m:(i + 1) * m] for i in range(k)]
        blocks = _taylor_blocks(op, z, k - 1)
        res = max(
            np.linalg.norm(sum(blocks[l] @ qs[i - l] for l in range(i + 1))) for i in range(k)
        ) / np.linalg.norm(qs[0])
        if res <= tol and abs(step[0]) <= 1e-10 * max(1.0, abs(z)):
            return z, qs, res, it, True
    return z, [q[i * m:(i + 1) * m] for i in range(k)], res, it, False


def refine(model: FdeModel, sigma0: complex, q0=None, N: int = 64, *, tol: float = 1e-11,
           maxit: int = 20) -> RefineResult:
    """Newton refinement of a characteristic value of ``Delta_N``.

    Newton runs on ``[Delta(z) q; c* q - 1] = 0``.  When convergence is only
    linear (step ratio above 0.25) or the bordered Jacobian has condition
    number above ``1e8``, the iteration switches to the extended chain system
    of length 2, 3, ... which restores quadratic convergence at defective
    roots.
    """
    op = delta_operator(model, N)
    m = op.size
    z = complex(sigma0)
    check_domain(model, z)
    if q0 is None:
        q = _null_vector(op.matrix(z))
    else:
        q = q0.vec() if isinstance(q0, PeriodicFunction) else np.asarray(q0, dtype=complex).ravel()
        if q.size != m:
            q = PeriodicFunction.from_vec(q, model.n, model.T).resample(N).vec()
    q = q / np.linalg.norm(q)
    c = q.copy()
    last = None
    slow = 0
    it = 0
    res = math.inf
    while it < maxit:
        it += 1
        D0 = op.matrix(z)
        D1 = op.matrix(z, 1)
        J = np.zeros((m + 1, m + 1), dtype=complex)
        J[:m, :m] = D0
        J[:m, m] = D1 @ q
        J[m, :m] = c.conj()
        F = np.concatenate([D0 @ q, [c.conj() @ q - 1.0]])
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        dz = step[m]
        z = z + dz
        q = q + step[:m]
        if model.kind is Kind.IDDE and not z.real > -model.rho + 1e-8:
            raise ConvergenceError("Newton iterate left the half-plane Re z > -rho")
        res = float(np.linalg.norm(op.apply(z, q)) / np.linalg.norm(q))
        if res <= tol and abs(dz) <= 1e-10 * max(1.0, abs(z)):
            qf = PeriodicFunction.from_vec(q, model.n, model.T)
            return RefineResult(z, qf, res, it, 1, (qf,))
        if last is not None and abs(dz) > 0.25 * last and abs(dz) < 1e-1:
            slow += 1
        else:
            slow = 0
        last = abs(dz)
        s = np.linalg.svd(J, compute_uv=False)
        ill = s[0] > 1e8 * s[-1]
        if slow >= 2 or (ill and abs(dz) < 1e-2):
            break
    else:
        raise ConvergenceError(f"Newton did not converge in {maxit} iterations (residual {res:.3e})")

    # defective root: extend to chain systems of increasing length
    budget = maxit - it
    for k in range(2, 5):
        blocks = _taylor_blocks(op, z, k - 1)
        chain = [q]
        for i in range(1, k):
            rhs = -sum(blocks[l] @ chain[i - l] for l in range(1, i + 1))
            A = np.vstack([blocks[0], c.conj()[None, :]])
            chain.append(np.linalg.lstsq(A, np.concatenate([rhs, [0.0]]), rcond=None)[0])
        z2, qs, res2, used, ok = _extended_newton(op, z, chain, c, tol, max(budget, 1))
        budget -= used
        it += used
        if ok:
            qfs = tuple(PeriodicFunction.from_vec(v, model.n, model.T) for v in qs)
            res0 = float(np.linalg.norm(op.apply(z2, qs[0])) / np.linalg.norm(qs[0]))
            return RefineResult(z2, qfs[0], res0, it, k, qfs)
        if budget <= 0:
            break
    raise ConvergenceError(f"Newton did not converge in {maxit} iterations (residual {res:.3e})")


# ---------------------------------------------------------------------------
# spectral points


@dataclass
class SpectralPoint:
    sigma: complex
    m_g: int
    partials: list = field(default_factory=list)
    chains: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    residual: float = 0.0
    sigma_2N: complex | None = None
    refinement_delta: float | None = None
    N: int = 64
    conditional: bool = False

    @property
    def m_a(self) -> int:
        return int(sum(self.partials)) if self.partials else self.m_g

    def to_dict(self, samples: bool = False) -> dict:
        d = {
            "sigma": [self.sigma.real, self.sigma.imag],
            "m_g": self.m_g,
            "partials": list(self.partials),
            "m_a": self.m_a,
            "residual": self.residual,
            "chain_residuals": list(self.residuals),
            "N": self.N,
            "sigma_2N": None if self.sigma_2N is None else [self.sigma_2N.real, self.sigma_2N.imag],
            "refinement_delta": self.refinement_delta,
            "pole_order_check": "not verified",
        }
        if self.conditional:
            d["conditional"] = True
        if samples:
            d["chains"] = [
                [[[complex(v).real, complex(v).imag] for v in row] for row in q.values]
                for chain in self.chains
                for q in chain
            ]
        return d


@dataclass
class SpectrumResult:
    points: list
    metadata: dict

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def sigmas(self) -> list[complex]:
        return [p.sigma for p in self.points]


def _rank_decision(s: np.ndarray, tau: float, what: str) -> int:
    band = (s > tau / 100.0) & (s <= tau * 100.0)
    r = int(np.sum(s <= tau))
    if np.any(band):
        lo = int(np.sum(s <= tau / 100.0))
        hi = int(np.sum(s <= tau * 100.0))
        raise AmbiguousRankError(
            f"numerically ambiguous {what}: singular values {s[band]} straddle the tolerance {tau:.3e}",
            {"nullity_candidates": sorted({lo, r, hi})},
        )
    return r


def geometric_multiplicity(model: FdeModel, sigma: complex, N: int, rank_tol: float = 1e-8) -> int:
    M = delta_operator(model, N).matrix(sigma)
    s = np.linalg.svd(M, compute_uv=False)
    return max(1, _rank_decision(s, rank_tol * s[0], "geometric multiplicity"))


def jordan_chains(model: FdeModel, sigma: complex, N: int = 64, *, rank_tol: float = 1e-8,
                  refine_first: bool = True, accept: float = 1e-4, max_length: int = 8) -> SpectralPoint:
    """Canonical system of Jordan chains of ``Delta_N`` at ``sigma``.

    Uses the block lower-triangular Toeplitz matrices ``T_k`` built from
    ``Delta^{(l)}(sigma) / l!``: ``dim ker T_k - dim ker T_{k-1}`` counts the
    chains of length at least ``k``.  Chains are then picked longest first,
    with eigenvectors independent of those already chosen.
    """
    op = delta_operator(model, N)
    m = op.size
    sigma = complex(sigma)
    check_domain(model, sigma)
    M0 = op.matrix(sigma)
    s0 = np.linalg.svd(M0, compute_uv=False)
    if s0[-1] > accept * s0[0]:
        raise NotCharacteristicError(sigma, s0[-1] / s0[0])
    if refine_first and s0[-1] > 1e3 * np.finfo(float).eps * s0[0]:
        sigma = refine(model, sigma, N=N).sigma
    tau = rank_tol * float(np.linalg.norm(op.matrix(sigma), 2))
    blocks = _taylor_blocks(op, sigma, max_length)
    nullity = [0]
    kernels = [None]
    for k in range(1, max_length + 1):
        Tk = np.zeros((k * m, k * m), dtype=complex)
        for i in range(k):
            for j in range(i + 1):
                Tk[i * m:(i + 1) * m, j * m:(j + 1) * m] = blocks[i - j]
        _, s, Vh = np.linalg.svd(Tk)
        r = _rank_decision(s, tau, f"kernel dimension of T_{k}")
        nullity.append(r)
        kernels.append(Vh[k * m - r:].conj().T if r else np.zeros((k * m, 0)))
        if nullity[k] - nullity[k - 1] == 0:
            break
    counts = [nullity[k] - nullity[k - 1] for k in range(1, len(nullity))]
    if not counts or counts[0] == 0:
        raise NotCharacteristicError(sigma, float(s0[-1] / s0[0]))
    K = len([c for c in counts if c > 0])
    chosen: list[np.ndarray] = []
    chains: list[list[np.ndarray]] = []
    for k in range(K, 0, -1):
        need = counts[k - 1] - len(chosen)
        if need <= 0:
            continue
        Nk = kernels[k]
        X0 = Nk[:m]
        if chosen:
            Q, _ = np.linalg.qr(np.column_stack(chosen))
            X0p = X0 - Q @ (Q.conj().T @ X0)
        else:
            X0p = X0
        u, sv, vh = np.linalg.svd(X0p, full_matrices=False)
        for j in range(need):
            coeff = vh[j].conj() / sv[j]
            chain = _normalise_chain(Nk @ coeff, m, k)
            chosen.append(chain[0])
            chains.append(chain)
    chains.sort(key=len, reverse=True)
    pf_chains = [[PeriodicFunction.from_vec(v, model.n, model.T) for v in ch] for ch in chains]
    residuals = [chain_defect(model, sigma, ch, N) for ch in pf_chains]
    partials = sorted(len(ch) for ch in chains)
    res = float(np.linalg.norm(op.apply(sigma, chains[0][0])) / np.linalg.norm(chains[0][0]))
    return SpectralPoint(sigma=sigma, m_g=len(chains), partials=partials, chains=pf_chains,
                         residuals=residuals, residual=res, N=N)


def _normalise_chain(x: np.ndarray, m: int, k: int) -> list[np.ndarray]:
    """Scale to ``max |q_0| = 1`` with a real positive largest entry and make
    every later vector orthogonal to ``q_0`` (shifted chains are in the kernel too)."""
    x = np.array(x, dtype=complex)
    q0 = x[:m]
    j = int(np.argmax(np.abs(q0)))
    x = x / q0[j]
    q0 = x[:m].copy()
    nq = np.vdot(q0, q0)
    for i in range(1, k):
        c = np.vdot(q0, x[i * m:(i + 1) * m]) / nq
        x[i * m:] = x[i * m:] - c * x[: (k - i) * m]
    return [x[i * m:(i + 1) * m] for i in range(k)]


def _cluster(values: list[complex], tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        for g in groups:
            if abs(values[g[0]] - v) <= tol * max(1.0, abs(v)):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def find_exponents(model: FdeModel, region: Region | None = None, N: int = 64, *,
                   tol: float = 1e-8, strip: bool = False, seed: int = 0, verify: bool = True,
                   chains: bool = False, workers: int = 1) -> SpectrumResult:
    """All characteristic values of ``Delta_N`` in ``region`` passing the residual
    and ``2N``-persistence tests."""
    report = validate(model)
    region = region or default_region(model)
    check_region(model, region)
    for msg in report.warnings:
        warnings.warn(msg, stacklevel=2)
    conditional = report.conditional
    search = region
    if strip:
        T = model.T
        b = region.bounds if region.kind == "rect" else None
        if b is None:
            raise ValueError("strip reduction needs a rectangular region")
        pad = 1e-3 * math.pi / T
        search = Region.rect(b[0], b[1], b[2] - pad, b[3] + pad, order=region.order,
                             rank_tol=region.rank_tol)
    log = {"perturbations": 0, "subdivisions": 0}
    estimates = contour_estimates(model, search, N, seed=seed, workers=workers, _log=log)
    scale_tol = 1e-9 * max(1.0, search.scale)
    candidates = []
    rejected = []
    for est in sorted(estimates, key=lambda z: (round(z.real, 6), round(z.imag, 6))):
        if not search.contains(est, tol=0.25 * search.scale):
            continue
        try:
            r = refine(model, est, N=N)
        except (ConvergenceError, DomainError) as exc:
            rejected.append({"estimate": [est.real, est.imag], "reason": str(exc)})
            continue
        if not search.contains(r.sigma, tol=scale_tol):
            continue
        candidates.append(r)
    groups = _cluster([c.sigma for c in candidates], CLUSTER_TOL)
    points = []
    for g in groups:
        best = min((candidates[i] for i in g), key=lambda c: c.residual)
        if best.residual > tol:
            rejected.append({"estimate": [best.sigma.real, best.sigma.imag],
                             "reason": f"residual {best.residual:.3e} above tolerance"})
            continue
        sigma_2N = None
        delta = None
        if verify:
            try:
                r2 = refine(model, best.sigma, best.q.resample(2 * N), N=2 * N)
                sigma_2N = r2.sigma
                delta = abs(r2.sigma - best.sigma)
            except ConvergenceError:
                delta = math.inf
            if not delta <= PERSIST_TOL:
                rejected.append({"estimate": [best.sigma.real, best.sigma.imag],
                                 "reason": f"not persistent at 2N (delta {delta:.3e})"})
                continue
        sigma = best.sigma
        try:
            m_g = geometric_multiplicity(model, sigma, N, region.rank_tol)
        except AmbiguousRankError:
            m_g = 1
        pt = SpectralPoint(sigma=sigma, m_g=m_g, residual=best.residual, sigma_2N=sigma_2N,
                           refinement_delta=delta, N=N, conditional=conditional)
        points.append(pt)
    if strip:
        T = model.T
        for p in points:
            p.sigma = strip_reduce(p.sigma, T)
            if p.sigma_2N is not None:
                p.sigma_2N = strip_reduce(p.sigma_2N, T)
        merged = []
        for g in _cluster([p.sigma for p in points], CLUSTER_TOL):
            merged.append(min((points[i] for i in g), key=lambda p: p.residual))
        points = merged
    if chains:
        full = []
        for p in points:
            jp = jordan_chains(model, p.sigma, N, rank_tol=region.rank_tol, refine_first=False)
            jp.sigma_2N, jp.refinement_delta, jp.conditional = p.sigma_2N, p.refinement_delta, p.conditional
            jp.residual = p.residual
            full.append(jp)
        points = full
    points.sort(key=lambda p: (round(p.sigma.real, 9), round(p.sigma.imag, 9)))
    meta = {
        "region": region.describe(),
        "N": N,
        "tol": tol,
        "seed": seed,
        "strip": strip,
        "contour_perturbations": log["perturbations"],
        "subdivisions": log["subdivisions"],
        "n_estimates": len(estimates),
        "rejected": rejected,
        "conditional": conditional,
        "warnings": list(report.warnings),
        "model_hash": model.model_hash,
    }
    if model.kind is Kind.IDDE:
        meta["s_max"] = model.s_max
    if report.mfde_condition is not None:
        meta["mfde_condition"] = dict(report.mfde_condition)
    return SpectrumResult(points, meta)


def spectrum(model: FdeModel, region: Region | None = None, N: int = 64, **kw) -> SpectrumResult:
    """:func:`find_exponents` followed by :func:`jordan_chains` for every point."""
    kw.setdefault("chains", True)
    return find_exponents(model, region, N, **kw)
