import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_model
from floquetspec.charop import (
    a_apply,
    assemble_delta,
    delta_apply,
    delta_derivative,
    delta_operator,
    e_apply,
    e_inverse,
    equivalence_check,
    f_apply,
    f_inverse,
    history_grid,
    r_d0_apply,
    r_d0_bound,
    resolvent_A_apply,
    sigma_min,
)
from floquetspec.errors import DomainError, SingularError
from floquetspec.periodic_fn import PeriodicFunction
from floquetspec.probes import random_field, random_periodic

z_values = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


def test_exact_root_is_singular(pi_half):
    # i pi/2 + (pi/2) exp(-i pi/2) = 0
    assert sigma_min(pi_half, 0.5j * math.pi, 64) < 1e-12
    assert sigma_min(pi_half, 0.3 + 0.2j, 64) > 1e-2


def test_double_root_is_singular(double_root):
    assert sigma_min(double_root, -1.0, 32) < 1e-12


@given(z=z_values, k=st.integers(-10, 10))
def test_constant_coefficient_mode_symbol(pi_half, z, k):
    # Delta(z) exp(2 pi i k t) = (2 pi i k + z + (pi/2) exp(-z - 2 pi i k)) exp(2 pi i k t)
    q = PeriodicFunction.from_function(lambda t: np.exp(2j * np.pi * k * t), 1.0, 32)
    lam = z + 2j * math.pi * k
    expect = (lam + 0.5 * math.pi * np.exp(-lam)) * q.values[:, 0]
    got = delta_apply(pi_half, z, q).values[:, 0]
    assert np.max(np.abs(got - expect)) < 1e-11 * max(1.0, abs(lam))


@given(z=z_values)
def test_periodic_coefficient_pointwise(periodic, z):
    # q(t) = exp(2 pi i t): Delta q = (2 pi i + z) q(t) - a(t) exp(-z) q(t - 1)
    N = 32
    t = np.arange(N) / N
    q = PeriodicFunction(np.exp(2j * np.pi * t), 1.0)
    a = -1.2 + 0.4 * np.cos(2 * np.pi * t)
    expect = (2j * np.pi + z) * q.values[:, 0] - a * np.exp(-z) * np.exp(2j * np.pi * (t - 1))
    assert np.max(np.abs(delta_apply(periodic, z, q).values[:, 0] - expect)) < 1e-11


@given(z=z_values)
def test_idde_symbol(idde, z):
    z = complex(abs(z.real) - 0.2, z.imag)
    S = idde.s_max
    q = PeriodicFunction(np.ones(16), 1.0)
    expect = z - 2 * (1 - np.exp(-(1 + z) * S)) / (1 + z)
    assert np.max(np.abs(delta_apply(idde, z, q).values[:, 0] - expect)) < 1e-10


def test_mfde_symbol(mfde):
    # constant q: z q - 0.1 exp(-z) + 0.1 exp(z) = z + 0.2 sinh(z)
    q = PeriodicFunction(np.ones(8), 1.0)
    z = 0.4 - 0.3j
    assert np.allclose(delta_apply(mfde, z, q).values[:, 0], z + 0.2 * np.sinh(z), atol=1e-13)


def test_matrix_matches_apply(periodic):
    rng = np.random.default_rng(0)
    q = random_periodic(rng, periodic, 32)
    z = 0.2 + 0.9j
    M = assemble_delta(periodic, z, 32).matrix
    assert np.max(np.abs(M @ q.vec() - delta_apply(periodic, z, q).vec())) < 1e-11


@pytest.mark.parametrize("l", [1, 2, 3])
def test_derivatives_match_finite_differences(periodic, l):
    op = delta_operator(periodic, 16)
    z, h = 0.1 + 0.2j, 1e-3
    # five-point central difference of the (l-1)-th derivative
    f = lambda w: op.matrix(w, l - 1)
    fd = (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h)
    assert np.max(np.abs(op.matrix(z, l) - fd)) < 1e-8
    q = random_periodic(np.random.default_rng(l), periodic, 16)
    assert np.allclose(delta_derivative(periodic, z, l, q).vec(), op.matrix(z, l) @ q.vec(), atol=1e-11)


def test_idde_domain(idde):
    with pytest.raises(DomainError):
        assemble_delta(idde, -0.6, 16)
    with pytest.raises(DomainError):
        sigma_min(idde, -0.5, 16)


@settings(max_examples=8)
@given(seed=st.integers(0, 10_000))
@pytest.mark.parametrize("name", ["dde_periodic", "mfde_symmetric", "idde_quad"])
def test_equivalence_identity(name, seed):
    m = fixture_model(name)
    rng = np.random.default_rng(seed)
    grid = history_grid(m, 64)
    q = random_periodic(rng, m, 32)
    phi = random_field(rng, m, grid, 32)
    z = complex(rng.uniform(-0.2, 1.0), rng.uniform(-2, 2))
    assert equivalence_check(m, z, q, phi) < 1e-8


@settings(max_examples=8)
@given(seed=st.integers(0, 10_000))
def test_e_and_f_inverses(mfde, seed):
    rng = np.random.default_rng(seed)
    grid = history_grid(mfde, 64)
    q = random_periodic(rng, mfde, 32)
    phi = random_field(rng, mfde, grid, 32)
    z = 0.4 + 0.3j
    p, psi = f_inverse(mfde, z, *f_apply(mfde, z, q, phi))
    assert (p - q).norm_inf() < 1e-12 and (psi - phi).norm() < 1e-12
    q2, phi2 = e_inverse(mfde, z, *e_apply(mfde, z, q, phi))
    assert (q2 - q).norm_inf() < 1e-10 and (phi2 - phi).norm() < 1e-8


def test_r_d0_closed_form():
    # phi = 1: int_theta^0 exp(z (theta - s)) ds = (1 - exp(z theta)) / z
    m = fixture_model("dde_pi_half")
    grid = history_grid(m, 16)
    from floquetspec.history import HistoryField

    phi = HistoryField.from_function(lambda t, th: 1 + 0 * t * th, grid, 1.0, 8)
    z = 0.7 - 0.4j
    r = r_d0_apply(z, phi)
    expect = -np.expm1(z * grid.theta) / z
    assert np.max(np.abs(r.values[:, :, 0] - expect[None, :])) < 1e-12
    assert r.norm() <= r_d0_bound(z, grid) * phi.norm() + 1e-12


@settings(max_examples=6)
@given(seed=st.integers(0, 10_000))
def test_resolvent_identity(pi_half, seed):
    rng = np.random.default_rng(seed)
    grid = history_grid(pi_half, 64)
    phi = random_field(rng, pi_half, grid, 64)
    z = 0.3 + 0.2j
    r = resolvent_A_apply(pi_half, z, phi)
    assert (z * r - a_apply(pi_half, r) - phi).norm() < 1e-7


def test_resolvent_raises_in_spectrum(pi_half):
    grid = history_grid(pi_half, 16)
    phi = random_field(np.random.default_rng(0), pi_half, grid, 32)
    with pytest.raises(SingularError, match="z is in the spectrum"):
        resolvent_A_apply(pi_half, 0.5j * math.pi, phi)


def test_grid_mismatch(pi_half, mfde):
    grid = history_grid(mfde, 16)
    phi = random_field(np.random.default_rng(0), mfde, grid, 16)
    q = random_periodic(np.random.default_rng(0), mfde, 32)
    with pytest.raises(ValueError, match="grid mismatch"):
        e_apply(mfde, 0.1, q, phi)
