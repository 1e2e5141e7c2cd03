"""Acceptance criteria, each at its stated tolerance.

Every criterion prints one ``PASS``/``FAIL`` line with the measured values.
Run directly (``python tests/test_acceptance.py``) for just the summary.
"""

import functools
import math
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import fixture_model  # noqa: E402
from floquetspec.charop import (  # noqa: E402
    a_apply,
    assemble_delta,
    equivalence_check,
    history_grid,
    resolvent_A_apply,
    sigma_min,
)
from floquetspec.checks import strip_distance  # noqa: E402
from floquetspec.cli import main  # noqa: E402
from floquetspec.errors import DomainError  # noqa: E402
from floquetspec.floquet import elementary_solution, residual_fde  # noqa: E402
from floquetspec.oracle import exponents_from_monodromy, monodromy_matrix  # noqa: E402
from floquetspec.probes import random_field, random_periodic, random_points  # noqa: E402
from floquetspec.spectrum import Region, jordan_chains, spectrum  # noqa: E402

PI = math.pi


@functools.lru_cache(maxsize=None)
def c1_result():
    return spectrum(fixture_model("dde_pi_half"), Region.rect(-1, 1, -3, 3), 64)


@functools.lru_cache(maxsize=None)
def c2_point():
    return jordan_chains(fixture_model("dde_double_root"), -1.0, 64)


# Criterion 3 compares inside Re >= -3: the monodromy oracle is only accurate
# for the leading multipliers, and the deeper Fourier exponents are not
# resolved at N = 64 (they fail the 2N persistence test).
C3_REGION = Region.rect(-3.0, 1.0, -PI, PI)


@functools.lru_cache(maxsize=None)
def c3_result():
    return spectrum(fixture_model("dde_periodic"), C3_REGION, 64, strip=True)


@functools.lru_cache(maxsize=None)
def c8_result():
    return spectrum(fixture_model("mfde_symmetric"), Region.rect(-2, 2, -PI, PI), 64)


def criterion_1():
    got = c1_result().sigmas
    targets = [0.5j * PI, -0.5j * PI]
    errs = [min((abs(s - t) for s in got), default=math.inf) for t in targets]
    ok = len(got) == 2 and max(errs) <= 1e-8
    return ok, f"{len(got)} exponents, max |sigma -+ i pi/2| = {max(errs):.2e} (tol 1e-8)"


def criterion_2():
    m = fixture_model("dde_double_root")
    pt = c2_point()
    defect = max(pt.residuals)
    mono = monodromy_matrix(m, 64, resolution=256)
    near = [mu for mu in mono.eigenvalues() if abs(mu - math.exp(-1)) <= 1e-4]
    ok = pt.m_g == 1 and pt.partials == [2] and defect <= 1e-7 and len(near) == 2
    return ok, (f"m_g={pt.m_g}, partials={pt.partials}, chain defect {defect:.2e} (tol 1e-7), "
                f"{len(near)} multipliers within 1e-4 of 1/e")


def criterion_3():
    m = fixture_model("dde_periodic")
    res = c3_result()
    sig = res.sigmas
    persist = max((p.refinement_delta for p in res.points), default=0.0)
    mono = monodromy_matrix(m, 128, resolution=256)
    ref = [z for z in exponents_from_monodromy(mono, cutoff=1e-6) if C3_REGION.contains(z)]
    fwd = max((min(strip_distance(s, r, m.T) for r in ref) for s in sig), default=math.inf)
    bwd = max((min(strip_distance(r, s, m.T) for s in sig) for r in ref), default=math.inf)
    ok = len(sig) == len(ref) and max(fwd, bwd) <= 1e-6 and persist <= 1e-6
    return ok, (f"{len(sig)} exponents vs {len(ref)} oracle exponents in Re >= -3, "
                f"max distance {max(fwd, bwd):.2e} (tol 1e-6), N=64 vs 128 delta {persist:.2e}")


def criterion_4():
    m = fixture_model("dde_periodic")
    worst = 0.0
    for s in c3_result().sigmas:
        for k in (-2, -1, 1, 2):
            worst = max(worst, sigma_min(m, s + 2j * PI * k / m.T, 64))
    ok = len(c3_result()) > 0 and worst <= 1e-7
    return ok, f"max sigma_min(Delta_64(sigma + 2 pi i k)) = {worst:.2e} (tol 1e-7)"


def criterion_5():
    rng = np.random.default_rng(20)
    parts = []
    worst = 0.0
    for name in ("dde_pi_half", "mfde_symmetric"):
        m = fixture_model(name)
        grid = history_grid(m, 64)
        zs = random_points(rng, m, 5)
        r = 0.0
        for _ in range(20):
            q = random_periodic(rng, m, 64)
            phi = random_field(rng, m, grid, 64)
            r = max(r, max(equivalence_check(m, z, q, phi) for z in zs))
        parts.append(f"{name} {r:.2e}")
        worst = max(worst, r)
    return worst <= 1e-8, "equivalence residual " + ", ".join(parts) + " (tol 1e-8)"


def criterion_6():
    m = fixture_model("dde_pi_half")
    rng = np.random.default_rng(6)
    grid = history_grid(m, 64)
    z = 0.3 + 0.2j
    worst = 0.0
    for _ in range(10):
        phi = random_field(rng, m, grid, 64)
        r = resolvent_A_apply(m, z, phi)
        worst = max(worst, (z * r - a_apply(m, r) - phi).norm())
    return worst <= 1e-7, f"max ||(zI - A) R(z, A) phi - phi|| = {worst:.2e} (tol 1e-7)"


def criterion_7():
    m = fixture_model("idde_quad")
    res = spectrum(m, Region.rect(-0.5, 3.0, -PI, PI), 64)
    err = abs(res[0].sigma - 1) if len(res) else math.inf
    rejected = []
    for attempt in (lambda: spectrum(m, Region.rect(-0.6, 3.0, -PI, PI), 64),
                    lambda: assemble_delta(m, -0.5, 64),
                    lambda: assemble_delta(m, -0.7 + 0.3j, 64)):
        try:
            attempt()
            rejected.append(False)
        except DomainError:
            rejected.append(True)
    ok = len(res) == 1 and err <= 1e-6 and all(rejected)
    return ok, (f"{len(res)} exponent(s), |sigma - 1| = {err:.2e} (tol 1e-6), "
                f"Re z <= -rho rejected: {all(rejected)}")


def criterion_8():
    m = fixture_model("mfde_symmetric")
    res = c8_result()
    sig = res.sigmas
    zero = min((abs(s) for s in sig), default=math.inf)
    chain = max((r for p in res for r in p.residuals), default=math.inf)
    fde = max((residual_fde(m, elementary_solution(p.sigma, ch)) for p in res for ch in p.chains),
              default=math.inf)
    resid = max((p.residual for p in res), default=0.0)
    gaps = [abs(a - b) for i, a in enumerate(sig) for b in sig[i + 1:]]
    isolated = all(g > 10 * max(resid, chain) for g in gaps)
    ok = zero <= 1e-8 and chain <= 1e-7 and fde <= 1e-6 and isolated and len(sig) < math.inf
    return ok, (f"{len(sig)} exponent(s), |sigma_0| = {zero:.2e} (tol 1e-8), chain residual "
                f"{chain:.2e} (tol 1e-7), FDE residual {fde:.2e} (tol 1e-6), isolated: {isolated}")


def criterion_9():
    cases = [("dde_pi_half", c1_result().points), ("dde_double_root", [c2_point()]),
             ("dde_periodic", c3_result().points), ("mfde_symmetric", c8_result().points)]
    worst, count = 0.0, 0
    for name, points in cases:
        m = fixture_model(name)
        for p in points:
            for ch in p.chains:
                worst = max(worst, residual_fde(m, elementary_solution(p.sigma, ch), (0.0, 3 * m.T)))
                count += 1
    return worst <= 1e-6, f"{count} chains, max residual_fde over 3 periods {worst:.2e} (tol 1e-6)"


def criterion_10():
    with tempfile.TemporaryDirectory() as d:
        paths = [Path(d) / "a.json", Path(d) / "b.json"]
        codes = [main(["verify", "--model", "dde_pi_half", "--seed", "11", "--out", str(p), "-q"])
                 for p in paths]
        same = paths[0].read_bytes() == paths[1].read_bytes()
    return same and codes == [0, 0], f"exit codes {codes}, byte-identical: {same}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _line(k, ok, detail):
    return f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + _line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = [(k, *fn()) for k, fn in enumerate(CRITERIA, start=1)]
    for k, ok, detail in results:
        print(_line(k, ok, detail))
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)
