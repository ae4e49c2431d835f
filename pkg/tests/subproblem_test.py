"""Test functions in subproblem.py"""
import warnings
from dataclasses import replace

import numpy as np
import pytest

from predictoco.core import ConstraintBlock, positive_part
from predictoco.errors import (
    InvalidInputError,
    InvalidParameterError,
    UnsupportedDimensionError,
    UnverifiedToleranceWarning,
)
from predictoco.experiments import random_step_spec
from predictoco.geometry import Ball, Box
from predictoco.subproblem import (
    CLOSED_FORM,
    SUBGRADIENT,
    CompositeStepSpec,
    brute_force_step,
    objective,
    solve_composite_step,
)


def unconstrained_spec(v, eta, z=(0.0, 0.0), **kwargs):
    return CompositeStepSpec(
        v=v,
        w=[0.0],
        eta=eta,
        gamma=3.0,
        g=ConstraintBlock.static([[1.0, 0.0]], [0.0]),
        t=1,
        z=z,
        X=Box.cube(2),
        **kwargs,
    )


@pytest.fixture(scope="module")
def kink_spec():
    "-x + 2 [x]_+ + x^2 / 2 over [-2, 2], minimized at the kink x = 0"
    return CompositeStepSpec(
        v=[-1.0],
        w=[2.0],
        eta=1.0,
        gamma=1.0,
        g=ConstraintBlock.static([[1.0]], [0.0]),
        t=1,
        z=[0.0],
        X=Box.cube(1, -2.0, 2.0),
    )


@pytest.fixture(scope="module")
def random_specs():
    specs = []
    for i in range(40):
        rng = np.random.default_rng([7, i])
        specs.append(random_step_spec(rng, 1 + i % 2))
    return specs


def test_closed_form_steps():
    x, value = solve_composite_step(unconstrained_spec([1.0, 0.0], 0.1))
    assert np.allclose(x, [-0.1, 0.0])
    assert value == pytest.approx(-0.01 + 0.005)

    result = solve_composite_step(unconstrained_spec([100.0, 0.0], 0.1))
    assert np.allclose(result.x, [-1.0, 0.0])
    assert result.path == CLOSED_FORM
    assert result.verified and result.flag is None


def test_kink_instance(kink_spec):
    result = solve_composite_step(kink_spec)
    assert abs(result.x[0]) < 1e-6
    assert abs(result.value) < 1e-8
    assert result.verified

    oracle = brute_force_step(kink_spec, 1e-4)
    assert abs(oracle[0]) <= 1e-4


def test_subgradient_method(kink_spec):
    result = solve_composite_step(replace(kink_spec, method=SUBGRADIENT, max_iters=5000))
    assert abs(result.value) < 1e-6
    assert result.gap >= 0


def test_brute_force_examples():
    spec = unconstrained_spec([1.0, -0.5], 0.3, z=(0.2, 0.1))
    oracle = brute_force_step(spec, 1e-2, zoom_levels=2)
    closed, _ = solve_composite_step(spec)
    assert np.linalg.norm(oracle - closed) < 1e-3

    spec = unconstrained_spec([0.0, 0.0], 0.3, z=(0.31, -0.42))
    oracle = brute_force_step(spec, 1e-2, zoom_levels=2)
    assert np.allclose(oracle, [0.31, -0.42], atol=1e-4)

    spec_3d = CompositeStepSpec(
        v=np.zeros(3),
        w=[1.0],
        eta=1.0,
        gamma=1.0,
        g=ConstraintBlock.static([[1.0, 0.0, 0.0]], [0.0]),
        t=1,
        z=np.zeros(3),
        X=Box.cube(3),
    )
    with pytest.raises(UnsupportedDimensionError):
        brute_force_step(spec_3d, 0.1)


def test_solver_matches_oracle(random_specs):
    for spec in random_specs:
        result = solve_composite_step(spec)
        assert result.verified
        if spec.X.p == 1:
            oracle = brute_force_step(spec, 1e-4, zoom_levels=1)
        else:
            oracle = brute_force_step(spec, 2e-2, zoom_levels=4)
        assert abs(result.value - objective(spec, oracle)) <= 1e-4
        # The solver is never beaten by a grid point
        assert result.value <= objective(spec, oracle) + spec.tol * spec.scale


def test_optimality_on_random_points(random_specs):
    rng = np.random.default_rng(5)
    for spec in random_specs:
        result = solve_composite_step(spec)
        points = spec.X.sample(rng, 200)
        values = np.array([objective(spec, y) for y in points])
        assert np.all(values >= result.value - spec.tol * spec.scale)


def test_three_point_inequality(random_specs):
    """objective(d) >= objective(a) + (kappa / 2) ||d - a||^2 for every d in X, widened
    by the certified gap of the returned point a."""
    rng = np.random.default_rng(9)
    for spec in random_specs:
        result = solve_composite_step(spec)
        a, eps = result.x, result.gap
        kappa = spec.prox_weight
        slack = 2.0 * eps + spec.X.diameter * np.sqrt(2.0 * kappa * eps) + 1e-9
        for d in spec.X.sample(rng, 50):
            lhs = objective(spec, d)
            rhs = result.value + 0.5 * kappa * np.sum((d - a) ** 2)
            assert lhs >= rhs - slack


def test_multipliers_in_unit_box(random_specs):
    for spec in random_specs:
        result = solve_composite_step(spec)
        assert np.all(result.multipliers >= 0) and np.all(result.multipliers <= 1)


def test_unverified_tolerance_warning():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 2))
    spec = CompositeStepSpec(
        v=[3.0, -2.0],
        w=[50.0, 40.0, 30.0],
        eta=1.0,
        gamma=1.0,
        g=ConstraintBlock.static(A, [-0.2, -0.1, -0.3]),
        t=1,
        z=[0.9, 0.9],
        X=Ball(np.zeros(2), 1.0),
        tol=1e-15,
        max_iters=1,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = solve_composite_step(spec)
    if not result.verified:
        assert result.flag == "unverified-tolerance"
        assert any(issubclass(w.category, UnverifiedToleranceWarning) for w in caught)
    assert spec.X.contains(result.x)


def test_objective_value():
    spec = CompositeStepSpec(
        v=[1.0, 2.0],
        w=[1.0, 0.5],
        eta=0.5,
        gamma=2.0,
        g=ConstraintBlock.static([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0]),
        t=1,
        z=[0.0, 0.0],
        X=Box.cube(2),
    )
    x = np.array([0.5, -0.5])
    expected = 0.5 * (0.5 - 1.0) + 0.5 * 2.0 * np.array([1.0, 0.5]) @ positive_part(x) + 0.25
    assert objective(spec, x) == pytest.approx(expected)


def test_spec_validation():
    g = ConstraintBlock.static([[1.0, 0.0]], [0.0])
    base = dict(v=[1.0, 0.0], w=[1.0], eta=0.1, gamma=1.0, g=g, t=1, z=[0.0, 0.0], X=Box.cube(2))
    with pytest.raises(InvalidInputError):
        CompositeStepSpec(**{**base, "w": [-1.0]})
    with pytest.raises(InvalidInputError):
        CompositeStepSpec(**{**base, "v": [1.0, 0.0, 0.0]})
    with pytest.raises(InvalidParameterError):
        CompositeStepSpec(**{**base, "eta": 0.0})
    with pytest.raises(InvalidParameterError):
        CompositeStepSpec(**{**base, "method": "newton"})
    with pytest.raises(InvalidInputError):
        CompositeStepSpec(**{**base, "X": Box.cube(3)})


def test_step_reads_its_own_rows():
    A = np.array([[[1.0, 0.0]], [[0.0, 1.0]], [[1.0, 1.0]]])
    b = np.array([[0.1], [0.2], [0.3]])
    g = ConstraintBlock.timevarying(A, b)
    spec = CompositeStepSpec(
        v=[0.0, 0.0], w=[1.0], eta=0.5, gamma=2.0, g=g, t=2, z=[0.5, 0.5], X=Box.cube(2)
    )
    assert np.array_equal(spec.A, A[1])
    assert np.array_equal(spec.b, b[1])
    assert np.allclose(spec.beta, [1.0])
    assert not hasattr(spec, "g_ref")
    # Only row t = 2, x_2 <= 0.2, binds; its kink holds x_2 at 0.2
    assert np.allclose(solve_composite_step(spec).x, [0.5, 0.2], atol=1e-6)
