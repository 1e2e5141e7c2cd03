import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from floquetspec.checks import (
    check_chain_defects,
    check_elementary_residuals,
    check_equivalence,
    check_periodicity,
    oracle_closed_form,
    oracle_monodromy,
    strip_distance,
)
from floquetspec.spectrum import Region, spectrum


@given(a=st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       k=st.integers(-5, 5))
def test_strip_distance_is_periodic(a, k):
    assert strip_distance(a, a + 2j * math.pi * k, 1.0) < 1e-9
    assert strip_distance(a, a + 0.1, 1.0) == pytest.approx(0.1)


@pytest.fixture(scope="module")
def pi_result(pi_half):
    return spectrum(pi_half, Region.rect(-2, 1, -math.pi, math.pi), 64)


def test_checks_pass_on_pi_half(pi_half, pi_result):
    region = Region.rect(-2, 1, -math.pi, math.pi)
    assert check_equivalence(pi_half, np.random.default_rng(0), pairs=2, points=2).passed
    assert check_periodicity(pi_half, pi_result.points).passed
    assert check_chain_defects(pi_result.points).passed
    assert check_elementary_residuals(pi_half, pi_result.points).passed
    assert oracle_closed_form(pi_half, pi_result.sigmas, region).passed
    mono = oracle_monodromy(pi_half, pi_result.sigmas, region, M_h=32)
    assert mono.passed and mono.detail["max_strip_distance"] < 1e-6


def test_oracle_flags_a_missing_exponent(pi_half, pi_result):
    region = Region.rect(-2, 1, -math.pi, math.pi)
    partial = pi_result.sigmas[1:]
    c = oracle_closed_form(pi_half, partial, region)
    assert c.status == "fail" and c.detail["unmatched_reference"]
    c = oracle_closed_form(pi_half, pi_result.sigmas + [0.5 + 0.5j], region)
    assert c.status == "fail"


def test_mfde_oracle_skipped(mfde):
    c = oracle_monodromy(mfde, [0j], Region.rect(-2, 2, -3, 3))
    assert c.skipped and c.status == "skipped: ill-posed"


def test_periodicity_skips_band_edge(pi_half):
    res = spectrum(pi_half, Region.rect(-5, -4.8, -math.pi, math.pi), 64)
    c = check_periodicity(pi_half, res.points)
    assert c.detail["excluded"]
