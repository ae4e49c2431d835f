"""Test functions in predictors.py"""
import numpy as np
import pytest

from predictoco.errors import (
    InvalidConfigurationError,
    InvalidInputError,
    InvalidParameterError,
)
from predictoco.predictors import (
    LastValuePredictor,
    OracleDecayPredictor,
    PerfectPredictor,
    PredictorSpec,
    RunningMeanPredictor,
    ZeroPredictor,
    hint,
    hint_error,
    make_predictor,
    oracle_error_radius,
)


@pytest.fixture(scope="module")
def gradients():
    rng = np.random.default_rng(4)
    return rng.uniform(-1, 1, size=(20, 3))


def test_simple_predictors(gradients):
    c = gradients
    assert np.allclose(hint(PerfectPredictor(20), c[4], 5, 20, c[:4]), c[4])
    assert np.allclose(hint(ZeroPredictor(20), c[4], 5, 20, c[:4]), 0.0)
    assert np.allclose(hint(LastValuePredictor(20), c[4], 5, 20, c[:4]), c[3])
    assert np.allclose(hint(LastValuePredictor(20), c[0], 1, 20), 0.0)
    assert np.allclose(hint(RunningMeanPredictor(20), c[4], 5, 20, c[:4]), c[:4].mean(axis=0))
    assert np.allclose(hint(RunningMeanPredictor(20), c[0], 1, 20), 0.0)


def test_oracle_decay_error_radius():
    predictor = OracleDecayPredictor(T=10000, a_exp=0.5, delta=1.0, seed=3)
    c_t = np.array([0.3, -0.2])
    h = hint(predictor, c_t, 17, 10000)
    assert np.linalg.norm(c_t - h) == pytest.approx(0.1)
    assert oracle_error_radius(10000, 0.5, 1.0) == pytest.approx(0.1)

    # a = 0 gives error delta regardless of T
    predictor = OracleDecayPredictor(T=50, a_exp=0.0, delta=2.0)
    assert np.linalg.norm(hint(predictor, c_t, 1, 50) - c_t) == pytest.approx(2.0)


def test_oracle_decay_is_reproducible(gradients):
    a = OracleDecayPredictor(T=20, a_exp=0.3, delta=1.0, seed=8)
    b = OracleDecayPredictor(T=20, a_exp=0.3, delta=1.0, seed=8)
    assert np.array_equal(a.hint(gradients[5], 6), b.hint(gradients[5], 6))
    other = OracleDecayPredictor(T=20, a_exp=0.3, delta=1.0, seed=9)
    assert not np.array_equal(a.hint(gradients[5], 6), other.hint(gradients[5], 6))


def test_hint_error(gradients):
    errors = hint_error(LastValuePredictor(20), gradients)
    assert errors[0] == pytest.approx(np.linalg.norm(gradients[0]))
    assert errors[3] == pytest.approx(np.linalg.norm(gradients[3] - gradients[2]))
    assert np.allclose(hint_error(PerfectPredictor(20), gradients), 0.0)


def test_make_predictor():
    predictor = make_predictor(PredictorSpec("oracle-decay", a_exp=0.5), T=100, G=2.0)
    assert isinstance(predictor, OracleDecayPredictor)
    assert predictor.delta == 2.0
    assert predictor.radius == pytest.approx(2.0 * 100 ** -0.25)
    assert isinstance(make_predictor(PredictorSpec("last-value"), T=5), LastValuePredictor)
    assert isinstance(make_predictor(PredictorSpec("zero"), T=5), ZeroPredictor)


def test_horizon_checks(gradients):
    predictor = PerfectPredictor(10)
    with pytest.raises(InvalidConfigurationError):
        hint(predictor, gradients[0], 1, 20)
    with pytest.raises(InvalidInputError):
        predictor.hint(gradients[0], 11)
    with pytest.raises(InvalidInputError):
        predictor.hint(gradients[0], 0)


def test_spec_validation():
    with pytest.raises(InvalidParameterError):
        PredictorSpec("crystal-ball")
    with pytest.raises(InvalidParameterError):
        PredictorSpec("oracle-decay", a_exp=1.0)
    with pytest.raises(InvalidParameterError):
        PredictorSpec("oracle-decay", delta=-1.0)
