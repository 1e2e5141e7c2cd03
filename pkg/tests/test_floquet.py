import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from floquetspec.charop import history_grid
from floquetspec.errors import DomainError
from floquetspec.floquet import (
    ElementarySolution,
    eigenfunction,
    eigenfunction_defect,
    elementary_solution,
    residual_fde,
    verify_floquet_pair,
)
from floquetspec.periodic_fn import PeriodicFunction
from floquetspec.spectrum import jordan_chains


@pytest.fixture(scope="module")
def pi_point(pi_half):
    return jordan_chains(pi_half, 0.5j * math.pi, 64)


@pytest.fixture(scope="module")
def double_point(double_root):
    return jordan_chains(double_root, -1.0, 64)


@pytest.fixture(scope="module")
def periodic_point(periodic):
    return jordan_chains(periodic, complex(-0.19046298905767614, 1.4392235352058513), 64)


def test_floquet_pair_residual(pi_half, pi_point):
    assert verify_floquet_pair(pi_half, pi_point.sigma, pi_point.chains[0][0]) < 1e-12


def test_elementary_solution_is_exponential(pi_point):
    x = elementary_solution(pi_point.sigma, pi_point.chains[0])
    t = np.linspace(-2, 2, 9)
    q0 = pi_point.chains[0][0].values[0, 0]
    assert np.allclose(x(t)[:, 0], q0 * np.exp(0.5j * math.pi * t), atol=1e-12)


def test_residuals_small(pi_half, periodic, double_root, pi_point, periodic_point, double_point):
    for m, p in ((pi_half, pi_point), (periodic, periodic_point), (double_root, double_point)):
        for chain in p.chains:
            assert residual_fde(m, elementary_solution(p.sigma, chain)) < 1e-9


def test_double_root_second_solution(double_root, double_point):
    chain = double_point.chains[0]
    x = elementary_solution(double_point.sigma, chain)
    assert x.k == 2
    # the truncated solution is the plain Floquet solution
    assert residual_fde(double_root, x.truncated(1)) < 1e-9


def test_wrong_exponent_has_large_residual(pi_half, pi_point):
    x = elementary_solution(pi_point.sigma + 0.05, pi_point.chains[0])
    assert residual_fde(pi_half, x) > 1e-3


@given(t=st.floats(-3, 3), s=st.floats(-1, 1))
def test_derivative_matches_finite_difference(double_point, t, s):
    x = ElementarySolution(double_point.sigma, double_point.chains[0], s)
    h = 1e-5
    fd = (x([t + h]) - x([t - h])) / (2 * h)
    assert np.allclose(x.derivative([t]), fd, atol=1e-7)


def test_eigenfunction_defects(pi_half, double_root, pi_point, double_point):
    grid = history_grid(pi_half, 64)
    assert eigenfunction_defect(pi_half, pi_point.sigma, pi_point.chains[0], grid) < 1e-8
    grid = history_grid(double_root, 64)
    assert eigenfunction_defect(double_root, double_point.sigma, double_point.chains[0], grid) < 1e-7


def test_eigenfunction_at_zero(pi_half, pi_point):
    grid = history_grid(pi_half, 16)
    phi = eigenfunction(pi_point.sigma, pi_point.chains[0], 0, grid)
    assert np.allclose(phi.at_zero().values, pi_point.chains[0][0].values)
    with pytest.raises(ValueError):
        eigenfunction(pi_point.sigma, pi_point.chains[0], 1, grid)


class _Finite:
    domain = (0.0, 10.0)

    def __call__(self, t):
        return np.ones((len(np.atleast_1d(t)), 1))

    def derivative(self, t):
        return np.zeros((len(np.atleast_1d(t)), 1))


def test_residual_domain_check(pi_half):
    with pytest.raises(DomainError):
        residual_fde(pi_half, _Finite(), (0.0, 3.0))
    assert residual_fde(pi_half, _Finite(), (1.0, 3.0)) == pytest.approx(math.pi / 2)


def test_elementary_solution_needs_chain():
    with pytest.raises(ValueError):
        ElementarySolution(0.0, [])
    q = PeriodicFunction(np.ones(4), 1.0)
    assert ElementarySolution(0.0, [q]).domain == (-math.inf, math.inf)
