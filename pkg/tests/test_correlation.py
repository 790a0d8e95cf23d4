import numpy as np
import pytest

from colsim.correlation import CorrelationCurve, correlation_function, fit_correlation_length
from colsim.errors import InsufficientData
from colsim.sampler import CorrelationModel, SamplerConfig, sample_jumps


def synthetic(gamma, den=10**6):
    gamma = np.asarray(gamma, dtype=float)
    lags = np.arange(1, len(gamma) + 1)
    d = np.full(len(gamma), den, dtype=np.int64)
    return CorrelationCurve(lags, gamma * d, d)


def test_all_same_sign():
    x = np.ones((3, 20), dtype=np.int8)
    curve = correlation_function(x, 10)
    np.testing.assert_array_equal(curve.gamma, np.ones(10))
    np.testing.assert_array_equal(curve.standard_error, np.zeros(10))


def test_alternating():
    x = np.tile([1, -1], 10)
    curve = correlation_function(x, 4)
    np.testing.assert_array_equal(curve.gamma, [-1, 1, -1, 1])


def test_no_pairs_is_undefined():
    x = np.zeros((4, 10), dtype=np.int8)
    x[0, 0] = 1
    curve = correlation_function(x, 3)
    assert not curve.defined.any()
    assert np.all(np.isnan(curve.gamma))


def test_pooled_equals_concatenation_with_gaps(rng):
    x = rng.choice([-1, 0, 0, 1], size=(7, 25))
    h_max = 9
    gap = np.zeros((7, h_max), dtype=int)
    joined = np.concatenate([x, gap], axis=1).reshape(1, -1)
    a = correlation_function(x, h_max)
    b = correlation_function(joined, h_max)
    np.testing.assert_array_equal(a.numerator, b.numerator)
    np.testing.assert_array_equal(a.denominator, b.denominator)


def test_merge(rng):
    x = rng.choice([-1, 0, 1], size=(10, 30))
    whole = correlation_function(x, 5)
    parts = correlation_function(x[:4], 5).merge(correlation_function(x[4:], 5))
    np.testing.assert_array_equal(whole.numerator, parts.numerator)
    with pytest.raises(ValueError):
        whole.merge(correlation_function(x, 6))


def test_input_errors():
    with pytest.raises(ValueError):
        correlation_function(np.zeros((2, 5)), 5)
    with pytest.raises(ValueError):
        correlation_function(np.zeros((0, 0)), 1)


def test_exponential_sampler_correlation():
    cfg = SamplerConfig(0.05, 120, CorrelationModel.exponential(10), seed=5)
    curve = correlation_function(sample_jumps(cfg, np.arange(40_000)), 30)
    target = np.exp(-curve.lags / 10.0)
    assert np.all(np.abs(curve.gamma - target) <= 5 * curve.standard_error)


def test_uncorrelated_sampler_correlation():
    cfg = SamplerConfig(0.05, 100, CorrelationModel.uncorrelated(), seed=6)
    curve = correlation_function(sample_jumps(cfg, np.arange(20_000)), 20)
    assert np.all(np.abs(curve.gamma) <= 5 * curve.standard_error)


def test_step_sampler_correlation():
    cfg = SamplerConfig(0.05, 100, CorrelationModel.step(6), seed=7)
    curve = correlation_function(sample_jumps(cfg, np.arange(20_000)), 20)
    g = curve.gamma
    assert np.all(g[:6] > 0.2)
    assert np.all(np.abs(g[8:]) <= 5 * curve.standard_error[8:])
    assert abs(fit_correlation_length(curve, "step") - 6) <= 1.5


def test_fit_exponential_exact():
    for n_cor in (3.0, 10.0, 25.0):
        curve = synthetic(np.exp(-np.arange(1, 41) / n_cor))
        assert abs(fit_correlation_length(curve, "exponential") - n_cor) < 1e-9


def test_fit_step_exact():
    g = np.where(np.arange(1, 31) <= 10, 1.0, 0.0)
    assert abs(fit_correlation_length(synthetic(g), "step") - 10) <= 0.5
    g = np.where(np.arange(1, 31) <= 4, 1.0, 0.0)
    g[4] = 0.5
    assert fit_correlation_length(synthetic(g), "step") == pytest.approx(4.5)


def test_fit_errors():
    with pytest.raises(InsufficientData):
        fit_correlation_length(synthetic([1, 1, 1, 1]), "step")
    with pytest.raises(InsufficientData):
        fit_correlation_length(synthetic([0.01] * 10), "exponential")
    with pytest.raises(InsufficientData):
        fit_correlation_length(synthetic(np.linspace(0.3, 0.9, 10)), "exponential")
    with pytest.raises(ValueError):
        fit_correlation_length(synthetic([1] * 10), "gaussian")
