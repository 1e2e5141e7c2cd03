import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FIXTURES, fixture_model
from floquetspec.charop import assemble_delta
from floquetspec.model import (
    Coefficient,
    Kind,
    ModelError,
    apply_L,
    parse_model,
    signed_shift,
    validate,
)

DDE_TEXT = """
kind: DDE
T: 1
n: 1
terms:
  - shift: 1
    coeff: -pi/2
"""


def test_all_fixtures_load():
    names = sorted(p.stem for p in FIXTURES.glob("*.yaml"))
    assert "dde_pi_half" in names and "mfde_symmetric" in names
    for name in names:
        m = fixture_model(name)
        assert m.T == 1.0 and m.n == 1


def test_parse_dde(pi_half):
    m = parse_model(DDE_TEXT)
    assert m.kind is Kind.DDE
    assert m.h == 1.0
    assert np.isclose(m.terms[0].coeff(0.0)[0, 0], -math.pi / 2)
    assert m.model_hash == pi_half.model_hash


def test_signed_shift_convention():
    assert signed_shift(Kind.DDE, 1.0) == -1.0
    assert signed_shift(Kind.IDDE, 2.0) == -2.0
    assert signed_shift(Kind.MFDE, 1.0) == 1.0
    assert signed_shift(Kind.MFDE, -1.0) == -1.0


def test_negative_lag_is_rejected_with_line():
    text = DDE_TEXT.replace("shift: 1", "shift: -1")
    with pytest.raises(ModelError) as exc:
        parse_model(text)
    assert any("lag must be positive" in e for e in exc.value.errors)
    assert any(e.startswith("line 6:") for e in exc.value.errors)


def test_idde_needs_rho():
    text = "kind: IDDE\nT: 1\nn: 1\nkernels:\n  - density: 2*exp(-s)\n    support: [0, inf]\n"
    with pytest.raises(ModelError, match="rho is required"):
        parse_model(text)


def test_unknown_keys_and_bad_values():
    with pytest.raises(ModelError, match="unknown key 'delay'"):
        parse_model(DDE_TEXT + "delay: 3\n")
    with pytest.raises(ModelError, match="kind must be one of"):
        parse_model(DDE_TEXT.replace("DDE", "ODE"))
    with pytest.raises(ModelError, match="missing required key 'T'"):
        parse_model("kind: DDE\nn: 1\n")
    with pytest.raises(ModelError, match="cannot parse"):
        parse_model("kind: [DDE\n")


def test_idde_truncation_point(idde):
    # exp(-rho s) * int_s^inf 2 exp(-u) du < 1e-12  <=>  s > log(2e12) / 1.5
    expect = math.log(2e12) / 1.5
    assert abs(idde.s_max - expect) < 1e-4
    assert idde.signed_kernel_support(idde.kernels[0]) == pytest.approx((-idde.s_max, 0.0))


def test_fourier_table_matches_expression(periodic):
    fourier = fixture_model("dde_fourier")
    t = np.linspace(0, 1, 7)
    assert np.allclose(fourier.terms[0].coeff(t).ravel(), periodic.terms[0].coeff(t).ravel())
    a = assemble_delta(fourier, 0.3 + 0.1j, 32).matrix
    b = assemble_delta(periodic, 0.3 + 0.1j, 32).matrix
    assert np.max(np.abs(a - b)) < 1e-12


def test_coefficient_constant_and_norm():
    c = Coefficient.constant([[1.0, 2.0], [0.0, -1.0]], n=2)
    assert c.is_constant
    assert np.isclose(c.sup_norm(), np.linalg.norm([[1, 2], [0, -1]], 2))


def test_mfde_condition_and_zero_model(mfde):
    rep = validate(mfde)
    assert rep.mfde_condition["holds"]
    assert not rep.conditional
    z = validate(fixture_model("zero"))
    assert "model has no terms (L = 0)" in z.warnings


def test_mfde_condition_can_fail():
    text = "kind: MFDE\nT: 1\nn: 1\nterms:\n  - shift: -1\n    coeff: 2\n  - shift: 1\n    coeff: 2\n"
    rep = validate(parse_model(text))
    assert rep.conditional


@given(sigma=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       t=st.floats(0, 1))
def test_apply_L_on_exponentials(sigma, t):
    # L(t)[theta -> exp(sigma theta)] = a(t) exp(-sigma) for a single unit delay
    m = fixture_model("dde_periodic")
    got = apply_L(m, t, lambda th: np.exp(sigma * th)[:, None])[0]
    a = -1.2 + 0.4 * math.cos(2 * math.pi * t)
    assert abs(got - a * np.exp(-sigma)) < 1e-12 * max(1.0, abs(got))


def test_apply_L_kernel_quadrature(idde):
    # 2 int_0^S exp(-s) exp(-z s) ds = 2 (1 - exp(-(1 + z) S)) / (1 + z)
    z = 0.7
    got = apply_L(idde, 0.0, lambda th: np.exp(z * th)[:, None], panel=0.5)[0]
    S = idde.s_max
    assert abs(got - 2 * (1 - math.exp(-(1 + z) * S)) / (1 + z)) < 1e-12


def test_model_hash_ignores_source(tmp_path, pi_half):
    p = tmp_path / "m.yaml"
    p.write_text(DDE_TEXT)
    from floquetspec import load_model

    assert load_model(p).model_hash == pi_half.model_hash
