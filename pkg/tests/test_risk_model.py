import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ailiability.errors import DivergenceError, DomainError, ValidationError
from ailiability.mathkernel import RandomStream, expectation_mc
from ailiability.risk_model import (
    DamageModel,
    PopulationModel,
    RiskScenario,
    UncertaintyModel,
    expected_loss,
    log_loss_mgf,
    loss_false_negative,
    loss_false_positive,
    loss_mgf,
    population_size,
    sample_total_loss,
    sample_total_losses,
    uncertainty_variance_at,
)
from ailiability.roc import OperatingPoint, RocModel

from scenarios import REFERENCE_POINT, BASELINE_DAMAGES, baseline_scenario, random_scenario


def test_population_identity_and_products():
    assert population_size(PopulationModel(1, 1, 10)) == 10
    assert population_size(PopulationModel(2, 3, 5)) == 30
    k = 3.623 / 0.744
    assert k == pytest.approx(4.87, abs=0.005)
    assert population_size(PopulationModel(k, 1, 40)) == pytest.approx(k * 40)
    assert population_size(PopulationModel(4.87, 1, 10), as_count=True) == 49


@pytest.mark.parametrize("kwargs", [{"k": 0, "n": 1, "d_doc": 1}, {"k": 1, "n": 0, "d_doc": 1}, {"k": 1, "n": 1, "d_doc": -1}])
def test_population_invariants(kwargs):
    with pytest.raises(ValidationError):
        PopulationModel(**kwargs)


def test_false_positive_loss():
    assert loss_false_positive(0.2, 216, 5) == 216
    assert loss_false_positive(0, 216, 5) == 0
    assert loss_false_positive(1, 100, 1) == 100


def test_false_negative_loss():
    assert loss_false_negative(148, 0.4, 216, 5, 9.5) == 4684
    assert loss_false_negative(0, 0, 216, 5, 9.5) == 0
    assert loss_false_negative(100, 0.5, 2, 1, 0) == 101


def test_damage_model_requires_fn_above_fp():
    assert BASELINE_DAMAGES.l_fp == 216 and BASELINE_DAMAGES.l_fn == 4684
    with pytest.raises(ValidationError):
        DamageModel(alpha=1.0, beta=0.01, w=100, t_quarantine=5, m_treatment=0, r0=0)
    with pytest.raises(ValidationError):
        DamageModel(alpha=0.0, beta=0.4, w=216, t_quarantine=5, m_treatment=148, r0=9.5)


def test_variance_decay():
    u = UncertaintyModel(v=200, sigma0_sq=15, m=0.5)
    assert uncertainty_variance_at(u, 0) == 15
    assert uncertainty_variance_at(u, 2) == pytest.approx(15 * math.exp(-1))
    assert uncertainty_variance_at(u, 2) == pytest.approx(5.518, abs=1e-3)
    values = [uncertainty_variance_at(u, t) for t in (0, 1, 5, 20, 80)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-15
    with pytest.raises(DomainError):
        uncertainty_variance_at(u, -1)


def test_expected_loss_fig3_point():
    assert expected_loss(baseline_scenario(), REFERENCE_POINT, 10) == pytest.approx(249000, rel=1e-15)


def test_expected_loss_zero_for_perfect_certain_classifier():
    s = baseline_scenario(v=0.0)
    assert expected_loss(s, OperatingPoint(0, 1), 10) == 0


@given(st.floats(0, 0.5), st.floats(0, 0.5), st.floats(0, 0.5), st.floats(0, 20), st.floats(0.01, 5))
def test_expected_loss_monotone(pf, pm, bump, sigma_sq, dsig):
    s = baseline_scenario()
    base = expected_loss(s, OperatingPoint(pf, 1 - pm), sigma_sq)
    assert expected_loss(s, OperatingPoint(pf + bump, 1 - pm), sigma_sq) >= base
    assert expected_loss(s, OperatingPoint(pf, 1 - pm - bump), sigma_sq) >= base
    assert expected_loss(s, OperatingPoint(pf, 1 - pm), sigma_sq + dsig) > base


def test_expected_loss_matches_monte_carlo():
    rng = np.random.default_rng(11)
    for i in range(20):
        s, op, sigma_sq = random_scenario(rng)
        mean, se = expectation_mc(
            lambda g, n: sample_total_losses(s, op, sigma_sq, g, n), 10**6, RandomStream(100, i)
        )
        assert abs(mean - expected_loss(s, op, sigma_sq)) <= 4 * se, i


def test_sampler_degenerate_cases():
    s = baseline_scenario(v=0.0, d_ai=10)
    assert sample_total_loss(s, OperatingPoint(0, 1), 10, RandomStream(1)) == 0
    draws = sample_total_losses(s, OperatingPoint(1, 1), 10, RandomStream(1).generator(), 100)
    assert np.all(draws == 2160)


def test_sampler_false_negative_frequency():
    s = baseline_scenario(v=0.0, d_ai=1)
    op = OperatingPoint(0.1, 0.7)
    draws = sample_total_losses(s, op, 0, RandomStream(4).generator(), 10**5)
    freq = np.mean(draws == s.damages.l_fn)
    assert abs(freq - op.p_m) <= 4 * math.sqrt(op.p_m * (1 - op.p_m) / 10**5)


def test_sampler_rejects_impossible_mixture():
    # p_f + p_m > 1 means the operating point is below the chance diagonal complement
    with pytest.raises(DomainError):
        sample_total_loss(baseline_scenario(), OperatingPoint(0.8, 0.1), 1, RandomStream(0))


def test_mgf_at_zero_and_without_uncertainty():
    s = baseline_scenario()
    assert loss_mgf(s, REFERENCE_POINT, 10, 0.0) == 1.0
    s0 = baseline_scenario(v=0.0)
    sp = 1e-6
    d = s0.d_ai
    mix = 0.1 * math.exp(sp * d * 216) + 0.1 * math.exp(sp * d * 4684) + 0.8
    assert loss_mgf(s0, REFERENCE_POINT, 10, sp) == pytest.approx(mix, rel=1e-13)


def test_chi_square_mgf_identity_by_monte_carlo():
    # E[exp(c theta^2)] = (1 - 2 c sigma^2)^(-1/2), checked before the closed form is trusted
    for c, sigma_sq in [(0.01, 5.0), (0.02, 3.0), (0.005, 15.0)]:
        mean, se = expectation_mc(
            lambda g, n: np.exp(c * g.normal(0, math.sqrt(sigma_sq), n) ** 2), 10**6, RandomStream(7)
        )
        assert abs(mean - (1 - 2 * c * sigma_sq) ** -0.5) <= 4 * se


def test_mgf_divergence():
    s = baseline_scenario()
    with pytest.raises(DivergenceError):
        loss_mgf(s, REFERENCE_POINT, 10, 0.5 / (100 * 200 * 10))


def test_mgf_derivative_at_zero_is_mean():
    rng = np.random.default_rng(3)
    for _ in range(10):
        s, op, sigma_sq = random_scenario(rng)
        h = 1e-3 / expected_loss(s, op, sigma_sq) if expected_loss(s, op, sigma_sq) > 0 else 1e-9
        deriv = (loss_mgf(s, op, sigma_sq, h) - loss_mgf(s, op, sigma_sq, -h)) / (2 * h)
        assert deriv == pytest.approx(expected_loss(s, op, sigma_sq), rel=1e-4)


def test_log_mgf_large_exponents_use_stable_path():
    s = baseline_scenario(v=0.0)
    sp = 2.0  # exponents far beyond float exp range
    expected = sp * s.d_ai * 4684 + math.log(0.1)
    assert log_loss_mgf(s, REFERENCE_POINT, 0.0, sp) == pytest.approx(expected, rel=1e-12)
