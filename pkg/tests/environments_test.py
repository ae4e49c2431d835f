"""Test functions in environments.py"""
import numpy as np
import pytest

from predictoco.core import STATIC_AFFINE, TIMEVARYING_AFFINE, eval_constraints
from predictoco.environments import (
    DRIFTING,
    IID_RANDOM,
    PIECEWISE_CONSTANT,
    Environment,
    EnvironmentSpec,
    drift_bound,
    generate_environment,
    verify_bounds,
)
from predictoco.errors import (
    GenerationError,
    InvalidConfigurationError,
    InvalidParameterError,
)


@pytest.fixture(scope="module")
def environments():
    specs = [
        EnvironmentSpec(p=2, m=1, T=200, cost_kind=IID_RANDOM, bias=0.3, seed=1),
        EnvironmentSpec(
            p=3, m=3, T=200, cost_kind=DRIFTING, constraint_kind=TIMEVARYING_AFFINE, seed=2
        ),
        EnvironmentSpec(
            p=2,
            m=2,
            T=200,
            cost_kind=PIECEWISE_CONSTANT,
            segments=4,
            feasible_set={"kind": "ball", "radius": 2.0},
            G=0.5,
            seed=3,
        ),
    ]
    return [generate_environment(spec) for spec in specs]


def test_generated_bounds(environments):
    for env in environments:
        report = verify_bounds(env)
        assert report.passed
        assert report.max_cost_norm <= env.G * (1 + 1e-12)
        assert report.max_matrix_norm <= env.G * (1 + 1e-12)
        assert report.max_constraint_sup <= env.F * (1 + 1e-12)
        row_norms = np.linalg.norm(env.constraints.rows()[0], axis=1)
        assert np.all(row_norms <= env.G * (1 + 1e-12))


def test_witness_is_strictly_feasible(environments):
    for env in environments:
        assert env.X.contains(env.witness)
        for t in [1, env.T // 2, env.T]:
            assert np.allclose(
                eval_constraints(env.constraints, t, env.witness), -env.spec.margin
            )


def test_unpacks_as_triple(environments):
    costs, constraints, X = environments[0]
    assert costs.shape == (200, 2)
    assert constraints.kind == STATIC_AFFINE
    assert X.p == 2


def test_generation_is_deterministic():
    spec = EnvironmentSpec(p=2, m=2, T=50, constraint_kind=TIMEVARYING_AFFINE, seed=9)
    a, b = generate_environment(spec), generate_environment(spec)
    assert np.array_equal(a.costs, b.costs)
    assert np.array_equal(a.constraints.A, b.constraints.A)
    c = generate_environment(EnvironmentSpec(p=2, m=2, T=50, seed=10))
    assert not np.array_equal(a.costs, c.costs)


def test_cost_kinds():
    drift = generate_environment(
        EnvironmentSpec(p=2, T=100, cost_kind=DRIFTING, sigma=0.01, seed=4)
    )
    steps = np.linalg.norm(np.diff(drift.costs, axis=0), axis=1)
    assert np.all(steps <= drift_bound(drift.spec) + 1e-12)

    frozen = generate_environment(
        EnvironmentSpec(p=2, T=30, cost_kind=DRIFTING, sigma=0.0, seed=4)
    )
    assert np.allclose(frozen.costs, frozen.costs[0])

    single = generate_environment(
        EnvironmentSpec(p=2, T=30, cost_kind=PIECEWISE_CONSTANT, segments=1, seed=4)
    )
    assert np.allclose(single.costs, frozen.costs)

    pieces = generate_environment(
        EnvironmentSpec(p=2, T=30, cost_kind=PIECEWISE_CONSTANT, segments=3, seed=5)
    )
    assert len(np.unique(pieces.costs, axis=0)) == 3


def test_declared_bound_too_small():
    spec = EnvironmentSpec(p=2, m=1, T=20, F=0.01, seed=1)
    with pytest.raises(GenerationError) as excinfo:
        generate_environment(spec)
    assert excinfo.value.step == 1


def test_verify_bounds_reports_first_failing_step(environments):
    env = environments[0]
    costs = env.costs.copy()
    costs[7] *= 5.0 / np.linalg.norm(costs[7])
    broken = Environment(
        spec=env.spec,
        costs=costs,
        constraints=env.constraints,
        X=env.X,
        witness=env.witness,
        G=env.G,
        F=env.F,
    )
    report = verify_bounds(broken)
    assert not report.passed
    assert report.failing_step == 8


def test_witness_outside_set():
    spec = EnvironmentSpec(p=2, T=10, witness=(3.0, 0.0))
    with pytest.raises(InvalidConfigurationError):
        generate_environment(spec)


def test_spec_validation():
    with pytest.raises(InvalidParameterError):
        EnvironmentSpec(cost_kind="adversarial")
    with pytest.raises(InvalidParameterError):
        EnvironmentSpec(T=5, cost_kind=PIECEWISE_CONSTANT, segments=6)
    with pytest.raises(InvalidParameterError):
        EnvironmentSpec(G=0.0)
