"""Property checks shared by the ``verify`` command and the test-suite.

Every check returns a :class:`Check` carrying the measured value and its
threshold; nothing here raises on a failed property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charop import a_apply, equivalence_check, history_grid, resolvent_A_apply, sigma_min
from .errors import DomainError, SingularError
from .floquet import elementary_solution, residual_fde
from .model import FdeModel, Kind
from .oracle import closed_form_roots, exponents_from_monodromy, monodromy_matrix
from .probes import random_field, random_periodic, random_points
from .spectrum import Region, strip_reduce

__all__ = [
    "Check",
    "strip_distance",
    "check_equivalence",
    "check_resolvent",
    "check_periodicity",
    "check_chain_defects",
    "check_elementary_residuals",
    "oracle_monodromy",
    "oracle_closed_form",
]


@dataclass
class Check:
    name: str
    status: str
    value: float | None = None
    threshold: float | None = None
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def skipped(self) -> bool:
        return self.status.startswith("skipped")

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "value": self.value,
                "threshold": self.threshold, "detail": self.detail}


def _judge(name, value, threshold, **detail) -> Check:
    ok = value is not None and math.isfinite(value) and value <= threshold
    return Check(name, "pass" if ok else "fail", value, threshold, detail)


def strip_distance(a: complex, b: complex, T: float) -> float:
    """Distance between the classes ``a + (2 pi i / T) Z`` and ``b + (2 pi i / T) Z``."""
    return abs(strip_reduce(complex(a) - complex(b), T))


def check_equivalence(model: FdeModel, rng, *, N: int = 64, M: int = 64, pairs: int = 4,
                      points: int = 3, threshold: float = 1e-8) -> Check:
    grid = history_grid(model, M)
    worst = 0.0
    zs = random_points(rng, model, points)
    for _ in range(pairs):
        q = random_periodic(rng, model, N)
        phi = random_field(rng, model, grid, N)
        for z in zs:
            worst = max(worst, equivalence_check(model, z, q, phi))
    return _judge("equivalence", worst, threshold, pairs=pairs, points=[[z.real, z.imag] for z in zs])


def check_resolvent(model: FdeModel, rng, *, z: complex = 0.3 + 0.2j, N: int = 64, M: int = 64,
                    count: int = 3, threshold: float = 1e-7) -> Check:
    grid = history_grid(model, M)
    worst = 0.0
    try:
        for _ in range(count):
            phi = random_field(rng, model, grid, N)
            r = resolvent_A_apply(model, z, phi)
            worst = max(worst, (complex(z) * r - a_apply(model, r) - phi).norm())
    except (SingularError, DomainError) as exc:
        return Check("resolvent", f"skipped: {exc}", None, threshold, {"z": [z.real, z.imag]})
    return _judge("resolvent", worst, threshold, z=[complex(z).real, complex(z).imag], count=count)


def _resolved(q, headroom: int, tail_tol: float = 1e-9) -> bool:
    """Whether ``q`` keeps a negligible Fourier tail after a shift by ``headroom`` modes."""
    c = np.abs(q.coeffs).max(axis=1)
    k = np.abs(q.modes)
    edge = q.N // 2 - headroom - 1
    return float(c[k > edge].max(initial=0.0)) <= tail_tol * float(c.max())


def check_periodicity(model: FdeModel, points, *, N: int = 64, shifts=(-2, -1, 1, 2),
                      threshold: float = 1e-7) -> Check:
    """``sigma_min(Delta_N(sigma + 2 pi i k / T))`` for every exponent.

    Shifting ``sigma`` by ``k`` multiples of ``2 pi i / T`` moves the kernel
    vector by ``k`` Fourier modes, so exponents whose eigenvectors reach the
    edge of the ``N``-mode band are excluded (and counted in ``detail``).
    """
    w = 2j * math.pi / model.T
    head = max(abs(k) for k in shifts)
    worst = 0.0
    used, excluded = 0, []
    for p in points:
        if not all(_resolved(q, head) for ch in p.chains for q in ch):
            excluded.append([p.sigma.real, p.sigma.imag])
            continue
        used += 1
        for k in shifts:
            worst = max(worst, sigma_min(model, complex(p.sigma) + k * w, N))
    if not used:
        return Check("periodicity", "skipped: no resolved exponents", None, threshold,
                     {"excluded": excluded})
    return _judge("periodicity", worst, threshold, shifts=list(shifts), checked=used,
                  excluded=excluded)


def check_chain_defects(points, threshold: float = 1e-7) -> Check:
    vals = [r for p in points for r in p.residuals]
    if not vals:
        return Check("chain_defect", "skipped: no exponents", None, threshold)
    return _judge("chain_defect", max(vals), threshold)


def check_elementary_residuals(model: FdeModel, points, threshold: float = 1e-6,
                               periods: float = 3.0) -> Check:
    worst = 0.0
    count = 0
    for p in points:
        for chain in p.chains:
            x = elementary_solution(p.sigma, chain)
            worst = max(worst, residual_fde(model, x, (0.0, periods * model.T)))
            count += 1
    if not count:
        return Check("residual_fde", "skipped: no exponents", None, threshold)
    return _judge("residual_fde", worst, threshold, chains=count, window=[0.0, periods * model.T])


def _region_representatives(z: complex, region: Region, T: float) -> list[complex]:
    """All ``z + 2 pi i k / T`` inside ``region``."""
    w = 2.0 * math.pi / T
    z = strip_reduce(z, T)
    b = region.bounds
    lo, hi = (b[2], b[3]) if region.kind == "rect" else (b[1] - b[2], b[1] + b[2])
    k0 = math.floor((lo - z.imag) / w)
    k1 = math.ceil((hi - z.imag) / w)
    return [z + 1j * w * k for k in range(k0, k1 + 1) if region.contains(z + 1j * w * k)]


def _compare(name, model, sigmas, reference, region, threshold, floor, **detail) -> Check:
    T = model.T
    forward = [min((strip_distance(s, r, T) for r in reference), default=math.inf)
               for s in sigmas if complex(s).real >= floor]
    fwd = max(forward, default=0.0)
    margin = 1e-3 * region.scale
    missing = []
    for r in reference:
        for z in _region_representatives(r, region, T):
            if z.real < floor or not _inside(region, z, margin):
                continue
            if min((strip_distance(s, z, T) for s in sigmas), default=math.inf) > threshold:
                missing.append([z.real, z.imag])
    value = fwd if not missing else math.inf
    return _judge(name, value, threshold, max_strip_distance=fwd, unmatched_reference=missing,
                  reference_floor=floor, **detail)


def _inside(region: Region, z: complex, margin: float) -> bool:
    b = region.bounds
    if region.kind == "rect":
        return b[0] + margin <= z.real <= b[1] - margin and b[2] + margin <= z.imag <= b[3] - margin
    return abs(z - region.center) <= b[2] - margin


def oracle_monodromy(model: FdeModel, sigmas, region: Region, *, M_h: int = 64,
                     resolution: int = 256, threshold: float = 1e-6, floor: float | None = None,
                     cutoff: float = 1e-6) -> Check:
    """Compare exponents with ``log(mu) / T`` from the monodromy matrix.

    Only exponents with ``Re >= floor`` are compared (default ``-3 / T``;
    below it the time-stepper loses accuracy).  In that range every exponent
    must match an oracle exponent and every oracle exponent inside the
    region must match an exponent.
    """
    if model.kind is Kind.MFDE:
        return Check("oracle_monodromy", "skipped: ill-posed", None, threshold)
    floor = -3.0 / model.T if floor is None else floor
    mono = monodromy_matrix(model, M_h, resolution=resolution)
    ref = exponents_from_monodromy(mono, cutoff=cutoff)
    return _compare("oracle_monodromy", model, sigmas, ref, region, threshold, floor,
                    M_h=mono.M_h, resolution=resolution, dt=mono.dt)


def oracle_closed_form(model: FdeModel, sigmas, region: Region, *, N: int = 64,
                       threshold: float = 1e-6) -> Check:
    """Compare with the roots of the symbolic characteristic function (constant coefficients only).

    Exponents are matched against roots from Fourier modes up to ``N``;
    conversely every root from a mode ``|k| <= N / 4`` (which ``Delta_N``
    resolves) must be found.
    """
    if not model.is_autonomous():
        return Check("oracle_closed_form", "skipped: coefficients depend on t", None, threshold)
    wide = closed_form_roots(model, region, max_mode=N)
    resolved = closed_form_roots(model, region, max_mode=max(1, N // 4))
    T = model.T
    fwd = max((min((strip_distance(s, r, T) for r in wide), default=math.inf) for s in sigmas),
              default=0.0)
    margin = 1e-3 * region.scale
    missing = []
    for r in resolved:
        for z in _region_representatives(r, region, T):
            if not _inside(region, z, margin):
                continue
            if min((strip_distance(s, z, T) for s in sigmas), default=math.inf) > threshold:
                missing.append([z.real, z.imag])
    value = fwd if not missing else math.inf
    return _judge("oracle_closed_form", value, threshold, max_strip_distance=fwd,
                  unmatched_reference=missing, n_roots=len(resolved))
