"""Test functions in core.py"""
import math

import numpy as np
import pytest

from predictoco.core import (
    BASELINE,
    PREDICTIVE,
    ConstraintBlock,
    LinearCost,
    VirtualQueue,
    eval_constraints,
    make_schedule,
    positive_part,
    weighted_violation_subgradient,
)
from predictoco.errors import InvalidInputError, InvalidParameterError


@pytest.fixture(scope="module")
def random_block():
    rng = np.random.default_rng(3)
    return ConstraintBlock.static(rng.standard_normal((3, 2)), rng.standard_normal(3))


def test_positive_part():
    assert np.array_equal(positive_part([-1.0, 2.0, 0.0]), [0.0, 2.0, 0.0])
    assert np.array_equal(positive_part([0.0, 0.0]), [0.0, 0.0])
    assert np.array_equal(positive_part([-3.5]), [0.0])

    v = np.array([-2.0, 0.5, 3.0])
    assert np.array_equal(positive_part(positive_part(v)), positive_part(v))


def test_linear_cost_value():
    cost = LinearCost([1.0, -2.0])
    assert cost.value([3.0, 1.0]) == pytest.approx(1.0)
    with pytest.raises(InvalidInputError):
        cost.value([1.0, 2.0, 3.0])


def test_eval_constraints():
    g = ConstraintBlock.static(np.eye(2), np.zeros(2))
    assert np.allclose(eval_constraints(g, 1, [0.5, -0.3]), [0.5, -0.3])

    g = ConstraintBlock.static([[1.0, 1.0]], [1.0])
    assert np.allclose(eval_constraints(g, 7, [0.5, 0.5]), [0.0])

    A = np.array([[2.0, 0.0], [0.0, 3.0]])
    g = ConstraintBlock.static(A, [1.0, 1.0])
    assert np.allclose(eval_constraints(g, 1, [1.0, 1.0]), A @ np.ones(2) - 1.0)
    assert np.allclose(eval_constraints(g, 1, [1.0, 1.0]), [1.0, 2.0])


def test_eval_constraints_timevarying():
    A = np.stack([np.eye(2), 2 * np.eye(2)])
    b = np.array([[0.0, 0.0], [1.0, 1.0]])
    g = ConstraintBlock.timevarying(A, b)
    assert g.horizon == 2
    assert np.allclose(eval_constraints(g, 2, [1.0, 0.0]), [1.0, -1.0])
    with pytest.raises(InvalidInputError):
        eval_constraints(g, 3, [1.0, 0.0])


def test_eval_constraints_dimension_mismatch():
    g = ConstraintBlock.static(np.eye(2), np.zeros(2))
    with pytest.raises(InvalidInputError):
        eval_constraints(g, 1, [1.0, 2.0, 3.0])


def test_constraint_block_shapes():
    with pytest.raises(InvalidInputError):
        ConstraintBlock.static(np.eye(2), np.zeros(3))
    with pytest.raises(InvalidInputError):
        ConstraintBlock.timevarying(np.eye(2), np.zeros(2))


def test_weighted_violation_subgradient():
    g = ConstraintBlock.static([[1.0]], [0.0])
    assert np.allclose(weighted_violation_subgradient(g, 1, [0.5], [0.0]), [0.0])
    assert np.allclose(weighted_violation_subgradient(g, 1, [0.5], [2.0]), [2.0])
    assert np.allclose(weighted_violation_subgradient(g, 1, [-0.5], [2.0]), [0.0])
    # At the kink the inactive branch is taken
    assert np.allclose(weighted_violation_subgradient(g, 1, [0.0], [2.0]), [0.0])
    with pytest.raises(InvalidInputError):
        weighted_violation_subgradient(g, 1, [0.5], [-1.0])


def test_subgradient_inequality(random_block):
    rng = np.random.default_rng(11)
    for _ in range(200):
        x, y = rng.uniform(-2, 2, size=(2, 2))
        w = rng.uniform(0, 3, size=3)
        sub = weighted_violation_subgradient(random_block, 1, x, w)
        lhs = w @ positive_part(eval_constraints(random_block, 1, y))
        rhs = w @ positive_part(eval_constraints(random_block, 1, x)) + sub @ (y - x)
        assert lhs >= rhs - 1e-12


def test_virtual_queue_updates():
    queue = VirtualQueue.empty(2)
    queue = queue.advance(0.5, [1.0, -2.0])
    assert np.allclose(queue.q, [0.5, 0.0])
    assert np.allclose(queue.q_hat, [0.0, 0.0])
    queue = queue.lookahead(0.5, [-1.0, 4.0])
    assert np.allclose(queue.q_hat, [0.5, 2.0])
    assert np.all(queue.q_hat >= queue.q)
    with pytest.raises(ValueError):
        queue.q[0] = 1.0
    with pytest.raises(InvalidInputError):
        VirtualQueue(np.array([-1.0]), np.array([0.0]))


def test_make_schedule():
    s = make_schedule(10000, 0.5, PREDICTIVE, 1.0)
    assert s.eta == pytest.approx(0.01)
    assert s.gamma == pytest.approx(10.0)
    assert s.gamma ** 2 * s.G ** 2 * s.eta == pytest.approx(1.0, rel=1e-12)
    assert abs(s.zeroed_coefficient) < 1e-9

    s = make_schedule(10000, 0.5, BASELINE, 1.0)
    assert s.eta == pytest.approx(0.01)
    assert s.gamma == pytest.approx(1 / (math.sqrt(2) * 0.1))
    assert s.gamma == pytest.approx(7.0711, abs=1e-4)

    s = make_schedule(1, 0.3, PREDICTIVE, 2.0)
    assert s.eta == 1.0
    assert s.gamma == pytest.approx(0.5)


def test_make_schedule_rejects_bad_exponents():
    for c_exp in [0.0, 1.0, -0.2, 1.5]:
        with pytest.raises(InvalidParameterError):
            make_schedule(100, c_exp, PREDICTIVE, 1.0)
    with pytest.raises(InvalidParameterError):
        make_schedule(100, 0.5, PREDICTIVE, 1.0, a_exp=1.0)
    with pytest.raises(InvalidParameterError):
        make_schedule(100, 0.5, "adaptive", 1.0)
    with pytest.raises(ValueError):
        make_schedule(0, 0.5, PREDICTIVE, 1.0)
