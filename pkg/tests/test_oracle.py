import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fixture_model
from floquetspec.errors import DomainError
from floquetspec.model import parse_model
from floquetspec.oracle import (
    characteristic_function,
    closed_form_roots,
    cluster_multipliers,
    exponents_from_monodromy,
    integrate_dde,
    monodromy_matrix,
)

UNIT = parse_model("kind: DDE\nT: 1\nn: 1\nterms:\n  - shift: 1\n    coeff: -1\n")


def test_method_of_steps_solution():
    # x' = -x(t - 1), x = 1 on [-1, 0]:  x = 1 - t on [0, 1], 1 - t + (t - 1)^2 / 2 on [1, 2]
    traj = integrate_dde(UNIT, lambda th: np.ones((len(th), 1)), 2.0, resolution=64)
    t = np.linspace(0, 2, 41)
    exact = np.where(t <= 1, 1 - t, 1 - t + 0.5 * (t - 1) ** 2)
    assert np.max(np.abs(traj.eval(t)[:, 0, 0] - exact)) < 1e-12


def test_batched_histories_are_independent():
    phi = lambda th: np.stack([np.ones((len(th), 1)), np.exp(th)[:, None]], axis=2)
    traj = integrate_dde(UNIT, phi, 1.0, resolution=32)
    single = integrate_dde(UNIT, lambda th: np.exp(th)[:, None], 1.0, resolution=32)
    t = np.linspace(0, 1, 9)
    assert np.allclose(traj.eval(t)[:, 0, 1], single.eval(t)[:, 0, 0], atol=1e-15)


def test_mfde_integration_refused(mfde):
    with pytest.raises(DomainError, match="ill-posed"):
        integrate_dde(mfde, lambda th: np.ones((len(th), 1)), 1.0)
    with pytest.raises(DomainError):
        monodromy_matrix(mfde, 16)


def test_monodromy_pi_half(pi_half):
    mono = monodromy_matrix(pi_half, 32, resolution=256)
    mu = mono.eigenvalues()
    top = sorted(mu, key=lambda m: -abs(m))[:2]
    for target in (1j, -1j):
        assert min(abs(m - target) for m in top) < 1e-9
    ex = exponents_from_monodromy(mono)
    assert min(abs(e - 0.5j * math.pi) for e in ex) < 1e-9


def test_monodromy_double_root_is_defective(double_root):
    mono = monodromy_matrix(double_root, 64, resolution=256)
    near = [m for m in mono.eigenvalues() if abs(m - math.exp(-1)) < 1e-4]
    assert len(near) == 2
    assert (math.exp(-1), 2) == pytest.approx(
        next((c.real, k) for c, k in cluster_multipliers(near) if k == 2), abs=1e-4)


def test_cluster_multipliers():
    groups = cluster_multipliers([1.0, 1.0 + 1e-6, 0.5, -0.5])
    assert sorted(k for _, k in groups) == [1, 1, 2]


@given(mu=st.complex_numbers(min_magnitude=1e-3, max_magnitude=10, allow_nan=False,
                             allow_infinity=False), T=st.floats(0.5, 3))
def test_exponent_from_multiplier_roundtrip(mu, T):
    (sigma,) = exponents_from_monodromy(np.array([mu]), T=T)
    assert abs(np.exp(sigma * T) - mu) < 1e-10 * abs(mu)
    assert -math.pi / T < sigma.imag <= math.pi / T + 1e-12


def test_characteristic_functions(pi_half, idde, mfde):
    import sympy as sp

    f, lam = characteristic_function(pi_half)
    for z in (0.3, 1 - 2j):
        expect = z + math.pi / 2 * complex(sp.exp(-z))
        assert complex(f.subs(lam, z)) == pytest.approx(expect, abs=1e-12)
    f, lam = characteristic_function(idde)
    assert complex(f.subs(lam, 1)) == pytest.approx(0, abs=1e-12)
    f, lam = characteristic_function(mfde)
    assert complex(f.subs(lam, 0.3)) == pytest.approx(0.3 + 0.2 * math.sinh(0.3), abs=1e-12)
    with pytest.raises(ValueError, match="constant in t"):
        characteristic_function(fixture_model("dde_periodic"))


def test_closed_form_roots(pi_half, double_root, idde, mfde):
    r = closed_form_roots(pi_half, (-0.5, 0.5))
    assert len(r) == 2 and all(abs(abs(z) - math.pi / 2) < 1e-12 for z in r)
    (z,) = closed_form_roots(double_root, (-1.5, 0.5), with_multiplicity=True)
    assert abs(z[0] + 1) < 1e-7 and z[1] == 2
    # z^2 + z - 2 = (z - 1)(z + 2): the root -2 lies left of -rho
    assert closed_form_roots(idde, (-0.5, 3)) == pytest.approx([1.0])
    assert closed_form_roots(mfde, (-2, 2)) == pytest.approx([0.0], abs=1e-12)
