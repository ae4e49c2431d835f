"""Test functions in metrics.py"""
from dataclasses import replace

import numpy as np
import pytest

from predictoco.algorithms import run_baseline, run_ogd, run_predictive
from predictoco.core import (
    BASELINE,
    PREDICTIVE,
    TIMEVARYING_AFFINE,
    ConstraintBlock,
    make_schedule,
)
from predictoco.environments import Environment, EnvironmentSpec, generate_environment
from predictoco.errors import InvalidConfigurationError, InvalidInputError
from predictoco.geometry import Ball, Box
from predictoco.metrics import (
    GRID,
    LINPROG,
    WITNESS,
    check_comparator_optimality,
    check_lemma1,
    check_queue_identity,
    check_theorem3_bounds,
    compute_comparator,
    fit_rate,
    grid_comparator,
    regret,
    violation,
)
from predictoco.predictors import OracleDecayPredictor, PerfectPredictor


def one_dim_env(costs, A, b):
    costs = np.asarray(costs, dtype=float).reshape(-1, 1)
    return Environment(
        spec=EnvironmentSpec(p=1, m=1, T=len(costs)),
        costs=costs,
        constraints=ConstraintBlock.static(A, b),
        X=Box.cube(1),
        witness=np.array([-1.0]),
        G=1.0,
        F=2.0,
    )


@pytest.fixture(scope="module", params=[(0, "static-affine"), (1, TIMEVARYING_AFFINE)])
def predictive_run(request):
    seed, kind = request.param
    env = generate_environment(
        EnvironmentSpec(p=2, m=2, T=200, constraint_kind=kind, bias=0.3, seed=seed)
    )
    schedule = make_schedule(env.T, 0.5, PREDICTIVE, env.G, env.F, a_exp=0.5)
    trace = run_predictive(env, OracleDecayPredictor(env.T, 0.5, 1.0, seed=seed), schedule)
    comp = compute_comparator(env.costs, env.constraints, env.X, env.witness)
    return env, schedule, trace, comp


def test_box_comparator_is_a_corner():
    costs = np.array([[0.5, -0.2], [0.3, -0.4], [-0.1, -0.1]])
    comp = compute_comparator(costs, ConstraintBlock.static([[0.0, 0.0]], [1.0]), Box.cube(2))
    assert comp.method == LINPROG
    assert np.allclose(comp.x_star, [-1.0, 1.0])
    assert comp.value == pytest.approx(-0.7 - 0.7)
    assert comp.max_violation <= 0


def test_ball_comparator():
    costs = np.array([[0.3, 0.4], [0.3, 0.4]])
    comp = compute_comparator(
        costs, ConstraintBlock.static([[0.0, 0.0]], [1.0]), Ball(np.zeros(2), 1.0)
    )
    assert np.allclose(comp.x_star, [-0.6, -0.8], atol=1e-4)


def test_zero_total_returns_witness():
    costs = np.array([[1.0, -1.0], [-1.0, 1.0]])
    witness = np.array([0.2, -0.3])
    comp = compute_comparator(
        costs, ConstraintBlock.static([[1.0, 0.0]], [0.5]), Box.cube(2), witness
    )
    assert comp.method == WITNESS
    assert np.allclose(comp.x_star, witness)
    assert comp.value == pytest.approx(0.0)


def test_active_constraint_and_witness_pull():
    constraints = ConstraintBlock.static([[1.0]], [0.3])
    comp = compute_comparator([[-1.0], [-1.0]], constraints, Box.cube(1), witness=[0.0])
    assert comp.x_star[0] == pytest.approx(0.3, abs=1e-8)
    assert comp.x_star[0] <= 0.3


def test_infeasible_constraints():
    with pytest.raises(InvalidConfigurationError):
        compute_comparator([[1.0]], ConstraintBlock.static([[1.0]], [-2.0]), Box.cube(1))


@pytest.mark.parametrize(
    "p,m,feasible_set,resolution",
    [
        (1, 1, {"kind": "box"}, 1e-3),
        (1, 2, {"kind": "ball", "radius": 1.5}, 1e-3),
        (2, 1, {"kind": "box"}, 1e-2),
        (2, 3, {"kind": "ball"}, 1e-2),
    ],
)
def test_comparator_matches_grid(p, m, feasible_set, resolution):
    env = generate_environment(
        EnvironmentSpec(p=p, m=m, T=20, feasible_set=feasible_set, bias=0.5, seed=p + m)
    )
    comp = compute_comparator(env.costs, env.constraints, env.X, env.witness)
    grid = grid_comparator(env.costs, env.constraints, env.X, resolution)
    assert grid.method == GRID
    scale = np.linalg.norm(comp.total)
    assert comp.value <= grid.value + 1e-6 * (scale + 1)
    assert grid.value - comp.value <= 20 * resolution * scale


def test_comparator_optimality_check():
    env = generate_environment(EnvironmentSpec(p=3, m=2, T=50, bias=0.5, seed=9))
    comp = compute_comparator(env.costs, env.constraints, env.X, env.witness)
    report = check_comparator_optimality(
        env.costs, env.constraints, env.X, comp, env.witness, n=500
    )
    assert report.passed
    bad = replace(comp, x_star=env.witness.copy())
    report = check_comparator_optimality(
        env.costs, env.constraints, env.X, bad, env.witness, n=500
    )
    assert not report.passed


def test_regret_and_violation_examples():
    env = one_dim_env([1.0] * 4, [[1.0]], [-0.75])
    trace = run_ogd(env, make_schedule(4, 0.5, BASELINE, 1.0))
    assert np.allclose(trace.x[:, 0], [0.0, -0.5, -1.0, -1.0])
    comp = compute_comparator(env.costs, env.constraints, env.X)
    assert comp.x_star[0] == pytest.approx(-0.75)
    assert regret(trace, comp) == pytest.approx(-2.5 + 3.0)
    assert violation(trace) == pytest.approx(0.75 + 0.25)


def test_queue_identity():
    env = one_dim_env([-1.0, -1.0, 0.5, -0.2, -1.0, 0.3], [[1.0]], [0.0])
    trace = run_baseline(env, make_schedule(6, 0.5, BASELINE, 1.0))
    report = check_queue_identity(trace)
    assert report.violation > 0
    assert report.passed
    assert report.replay_matches

    corrupted = replace(trace, q=trace.q * 1.1)
    report = check_queue_identity(corrupted)
    assert not report.replay_matches
    assert not report.passed


def test_queue_identity_on_predictive_runs(predictive_run):
    _, _, trace, _ = predictive_run
    assert check_queue_identity(trace).passed


def test_lemma1_holds(predictive_run):
    _, _, trace, comp = predictive_run
    report = check_lemma1(trace, comp, prefix=True)
    assert report.passed
    assert np.isfinite(report.statement_slack_1)
    assert report.prefix_margin_1 >= 0
    assert report.prefix_margin_2 >= 0


def _shift_last_decision(trace, comp, target_slack):
    """Move x_T along c_T and recompute f_T so the first slack lands on `target_slack`.

    The slack is quadratic in the step length s:
    slack(s) = slack(0) - s (<c_T, u> + <x_T - z_T, u> / eta) - s^2 / (2 eta).
    """
    drop = check_lemma1(trace, comp).slack_1 - target_slack
    c, x, z, eta = trace.c[-1], trace.x[-1], trace.z[-1], trace.eta
    u = c / np.linalg.norm(c)
    linear = c @ u + (x - z) @ u / eta
    s = eta * (-linear + np.sqrt(linear ** 2 + 2.0 * drop / eta))
    x_new = trace.x.copy()
    x_new[-1] = x + s * u
    f_new = trace.f.copy()
    f_new[-1] = c @ x_new[-1]
    return replace(trace, x=x_new, f=f_new)


def test_lemma1_allowance_is_per_step_tolerance(predictive_run):
    _, _, trace, comp = predictive_run
    report = check_lemma1(trace, comp, tol=1e-8)
    # T tol plus rounding
    assert report.allowance >= trace.T * 1e-8
    assert report.allowance < 1e-4


def test_lemma1_fails_just_past_allowance(predictive_run):
    _, _, trace, comp = predictive_run
    allowance = check_lemma1(trace, comp).allowance

    bad = _shift_last_decision(trace, comp, -2.0 * allowance)
    report = check_lemma1(bad, comp)
    assert report.slack_1 == pytest.approx(-2.0 * allowance, rel=1e-3, abs=1e-9)
    assert not report.passed

    inside = _shift_last_decision(trace, comp, -0.5 * allowance)
    report = check_lemma1(inside, comp)
    assert report.slack_1 >= -report.allowance


def test_lemma1_fails_on_shifted_decisions(predictive_run):
    _, _, trace, comp = predictive_run
    x_new = trace.x + 0.05 * trace.c
    bad = replace(trace, x=x_new, f=np.sum(trace.c * x_new, axis=1))
    report = check_lemma1(bad, comp)
    assert report.slack_1 < -report.allowance
    assert not report.passed


def test_lemma1_with_perfect_hints():
    env = generate_environment(EnvironmentSpec(p=2, m=1, T=100, bias=0.3, seed=4))
    schedule = make_schedule(env.T, 0.5, PREDICTIVE, env.G, env.F)
    trace = run_predictive(env, PerfectPredictor(env.T), schedule)
    comp = compute_comparator(env.costs, env.constraints, env.X, env.witness)
    assert check_lemma1(trace, comp).passed
    assert check_theorem3_bounds(trace, comp, env.constraints).passed


def test_lemma1_needs_predictive_trace():
    env = one_dim_env([1.0, 1.0], [[1.0]], [0.5])
    trace = run_baseline(env, make_schedule(2, 0.5, BASELINE, 1.0))
    comp = compute_comparator(env.costs, env.constraints, env.X)
    with pytest.raises(InvalidInputError):
        check_lemma1(trace, comp)


def test_theorem3_holds(predictive_run):
    env, _, trace, comp = predictive_run
    report = check_theorem3_bounds(trace, comp, env.constraints)
    assert report.regret <= report.regret_bound + report.allowance
    assert report.violation <= report.violation_bound + report.violation_allowance
    assert report.passed
    assert report.max_abs_cost <= report.F
    assert report.violation <= report.strict_violation_bound + 1e-9
    assert report.strict_violation_bound <= np.sqrt(2 * trace.m) * report.violation_bound


def test_theorem3_rejects_other_schedules(predictive_run):
    env, schedule, _, comp = predictive_run
    predictor = PerfectPredictor(env.T)
    doubled = replace(schedule, gamma=2 * schedule.gamma)
    trace = run_predictive(env, predictor, doubled)
    with pytest.raises(InvalidConfigurationError):
        check_theorem3_bounds(trace, comp)

    no_bound = make_schedule(env.T, 0.5, PREDICTIVE, env.G)
    trace = run_predictive(env, predictor, no_bound)
    with pytest.raises(InvalidConfigurationError):
        check_theorem3_bounds(trace, comp)


def test_fit_rate_slopes():
    T = np.array([256, 1024, 4096, 16384])
    fit = fit_rate(list(zip(T, T.astype(float))))
    assert fit.slope == pytest.approx(1.0)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.n == 4

    fit = fit_rate(list(zip(T, 3.0 * np.sqrt(T))))
    assert fit.slope == pytest.approx(0.5)
    assert fit.intercept == pytest.approx(np.log(3.0))

    fit = fit_rate(list(zip(T, np.full(4, 2.0))))
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "points",
    [
        [(100, 1.0)],
        [(100, 1.0), (100, 2.0)],
        [(200, 1.0), (100, 2.0)],
        [(100, 1.0), (200, 0.0)],
        [(100, 1.0), (200, -3.0)],
    ],
)
def test_fit_rate_invalid(points):
    with pytest.raises(InvalidInputError):
        fit_rate(points)
