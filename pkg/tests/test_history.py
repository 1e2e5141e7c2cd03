import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from floquetspec.history import HistoryField, HistoryGrid, cheb_lobatto


def test_lobatto_differentiates_polynomials_exactly():
    x, D = cheb_lobatto(9)
    p = 3 * x**5 - x**2 + 2
    assert np.max(np.abs(D @ p - (15 * x**4 - 2 * x))) < 1e-11


def test_grid_contains_breakpoints_and_zero():
    g = HistoryGrid.for_interval(-2.0, 1.0, 8, extra=[-0.7], max_panel=1.0)
    for b in (-2.0, -0.7, 0.0, 1.0):
        assert np.min(np.abs(g.theta - b)) == 0.0
    assert g.theta[g.zero_index] == 0.0
    assert np.all(np.diff(g.theta) > 0)
    assert np.all(np.diff(g.breaks) <= 1.0 + 1e-12)


def test_zero_must_be_a_breakpoint():
    with pytest.raises(ValueError):
        HistoryGrid([-1.0, -0.5], 8)


@given(st.lists(st.floats(-1.5, 0.5), min_size=1, max_size=6))
def test_interpolation_is_exact_for_low_degree(points):
    g = HistoryGrid.for_interval(-1.5, 0.5, 10, max_panel=0.75)
    f = lambda th: np.cos(th) * 0 + th**4 - 2 * th + 1
    P = g.interp_matrix(points)
    assert np.max(np.abs(P @ f(g.theta) - f(np.array(points)))) < 1e-11


def test_interpolation_rejects_points_outside():
    g = HistoryGrid.for_interval(-1.0, 0.0, 6)
    with pytest.raises(ValueError, match="does not cover"):
        g.interp_matrix([-1.5])


def test_quadrature_integrates_exponential():
    g = HistoryGrid.for_interval(-3.0, 0.0, 12, max_panel=1.0)
    nodes, w, P = g.quadrature(-2.5, 0.0, 16)
    assert abs(np.sum(w * np.exp(nodes)) - (1 - np.exp(-2.5))) < 1e-13
    assert abs(np.sum(w * (P @ np.exp(g.theta))) - (1 - np.exp(-2.5))) < 1e-9


@given(lam=st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_transport_solve_matches_closed_form(lam):
    # (lam - d/dtheta) u = 1 with u(0) = 0  =>  u = (1 - exp(lam theta)) / lam
    g = HistoryGrid.for_interval(-1.0, 0.5, 16, max_panel=0.5)
    f = np.ones((1, g.size, 1), dtype=complex)
    u = g.solve_transport(np.array([lam]), f)[0, :, 0]
    th = g.theta
    exact = -th if lam == 0 else -np.expm1(lam * th) / lam
    assert np.max(np.abs(u - exact)) < 1e-10


def test_field_norm_weight_and_derivatives():
    g = HistoryGrid.for_interval(-2.0, 0.0, 12, max_panel=1.0, rho=0.5)
    phi = HistoryField.from_function(lambda t, th: np.exp(2j * np.pi * t) * (1 + 0 * th), g, 1.0, 8)
    assert abs(phi.norm() - 1.0) < 1e-14
    w = HistoryField.from_function(lambda t, th: np.exp(-0.5 * th) + 0 * t, g, 1.0, 8)
    assert abs(w.norm() - 1.0) < 1e-12
    assert np.allclose(phi.dt().values, 2j * np.pi * phi.values, atol=1e-11)
    assert np.allclose(phi.dtheta().values, 0, atol=1e-10)
    assert np.allclose(phi.at_zero().values[:, 0], np.exp(2j * np.pi * np.arange(8) / 8))


def test_field_grid_mismatch():
    g1 = HistoryGrid.for_interval(-1.0, 0.0, 6)
    g2 = HistoryGrid.for_interval(-1.0, 0.0, 8)
    a = HistoryField.zeros(g1, 1.0, 4, 1)
    b = HistoryField.zeros(g2, 1.0, 4, 1)
    with pytest.raises(ValueError, match="grid mismatch"):
        a + b
