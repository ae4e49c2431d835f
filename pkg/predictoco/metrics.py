"""
Regret, cumulative violation, the offline comparator, and numerical checks of the
queue identity and the cumulative inequalities the guarantees rest on.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog, minimize
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from predictoco.algorithms import RunTrace
from predictoco.core import ConstraintBlock, as_vector, positive_part
from predictoco.errors import InvalidConfigurationError, InvalidInputError
from predictoco.geometry import QUADRATIC, Ball, Box, FeasibleSet

logger = logging.getLogger(__name__)

TOL_FEAS = 1e-6
QUEUE_IDENTITY_RTOL = 1e-9
# Relative allowance for rounding when summing many terms of an inequality
FLOAT_RTOL = 1e-9

LINPROG = "linprog"
SLSQP = "slsqp"
EXACT_PENALTY = "exact-penalty"
GRID = "grid"
WITNESS = "witness"


@dataclass(frozen=True, eq=False)
class Comparator:
    """Best fixed decision in hindsight.

    Attributes
    ----------
    x_star : np.ndarray
        The comparator.
    value : float
        sum_t <c_t, x_star>.
    max_violation : float
        Feasibility certificate, max_t max_j g_t^j(x_star).
    step_violations : np.ndarray
        (T, m) [g_t(x_star)]_+.
    method : str
        How x_star was found.
    total : np.ndarray
        sum_t c_t.
    witness : np.ndarray, optional
        Strictly feasible point used to pull x_star inside, if known.
    """

    x_star: np.ndarray
    value: float
    max_violation: float
    step_violations: np.ndarray
    method: str
    total: np.ndarray
    witness: Optional[np.ndarray] = None


def stacked_rows(constraints: ConstraintBlock) -> Tuple[np.ndarray, np.ndarray]:
    "Every distinct constraint row over the horizon as (A, b)"
    A, b = constraints.rows()
    unique = np.unique(np.column_stack([A, b]), axis=0)
    return unique[:, :-1], unique[:, -1]


def _step_values(constraints: ConstraintBlock, T: int, x: np.ndarray) -> np.ndarray:
    "(T, m) array of g_t(x)"
    if constraints.is_static:
        return np.tile(constraints.A @ x - constraints.b, (T, 1))
    if constraints.horizon < T:
        raise InvalidInputError(
            f"Constraints cover {constraints.horizon} steps, costs cover {T}"
        )
    return np.einsum("tmp,p->tm", constraints.A[:T], x) - constraints.b[:T]


def _pull_inside(x, A, b, witness) -> np.ndarray:
    """Move x toward a strictly feasible witness just far enough that every row holds.

    With violation v at x and slack s at the witness, the point x + theta (w - x),
    theta = v / (v + s), satisfies the row by convexity.
    """
    violation = float(np.max(A @ x - b))
    if violation <= 0:
        return x
    slack = -float(np.max(A @ witness - b))
    if slack <= 0:
        return x
    theta = min(1.0, violation / (violation + slack) * (1 + 1e-9))
    return x + theta * (witness - x)


def _solve_box_lp(s, A, b, X: Box) -> np.ndarray:
    result = linprog(
        s,
        A_ub=A,
        b_ub=b,
        bounds=list(zip(X.lower, X.upper)),
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if not result.success:
        raise InvalidConfigurationError(f"Comparator LP failed: {result.message}")
    return X._project(np.asarray(result.x, dtype=float))


def _solve_ball_slsqp(s, A, b, X: Ball, x0) -> np.ndarray:
    center, radius = X.center, X.radius
    constraints = [
        {"type": "ineq", "fun": lambda x: b - A @ x, "jac": lambda x: -A},
        {
            "type": "ineq",
            "fun": lambda x: radius ** 2 - (x - center) @ (x - center),
            "jac": lambda x: -2.0 * (x - center),
        },
    ]
    result = minimize(
        lambda x: s @ x,
        x0,
        jac=lambda x: s,
        method="SLSQP",
        constraints=constraints,
        options={"ftol": 1e-14, "maxiter": 1000},
    )
    if not result.success:
        logger.warning(f"SLSQP comparator stopped early: {result.message}")
    return X._project(np.asarray(result.x, dtype=float))


def _exact_penalty_descent(
    s, A, b, X: FeasibleSet, x0, mu: float, max_iters: int
) -> np.ndarray:
    """Projected subgradient on <s, x> + mu max(0, max_i a_i x - b_i) with
    diminishing steps, keeping the best iterate."""
    diam = X.diameter
    x = X._project(x0)
    best_x, best_value = x, math.inf
    for k in range(1, max_iters + 1):
        values = A @ x - b
        i = int(np.argmax(values))
        penalty = max(values[i], 0.0)
        value = s @ x + mu * penalty
        if value < best_value:
            best_x, best_value = x, value
        sub = s + mu * A[i] if penalty > 0 else s
        norm = np.linalg.norm(sub)
        if norm == 0:
            break
        x = X._project(x - diam / (norm * math.sqrt(k)) * sub)
    return best_x


def _solve_exact_penalty(s, A, b, X, x0, slack, tol_feas, max_iters) -> np.ndarray:
    # mu above the dual multiplier bound diam ||s|| / slack makes the penalty exact
    mu = 2.0 * X.diameter * np.linalg.norm(s) / slack if slack > 0 else 1.0
    for _ in range(8):
        x = _exact_penalty_descent(s, A, b, X, x0, mu, max_iters)
        if np.max(A @ x - b) <= tol_feas:
            return x
        logger.debug(f"Exact penalty with mu={mu:.3g} still infeasible, ramping up")
        mu *= 10.0
    return x


def compute_comparator(
    costs,
    constraints: ConstraintBlock,
    X: FeasibleSet,
    witness=None,
    method: str = "auto",
    tol_feas: float = TOL_FEAS,
    max_iters: int = 20000,
) -> Comparator:
    """Minimize sum_t <c_t, x> over X intersected with every {g_t <= 0}.

    Parameters
    ----------
    costs : array-like
        (T, p) gradients.
    constraints : ConstraintBlock
        Constraints covering at least T steps.
    X : FeasibleSet
        Feasible set.
    witness : array-like, optional
        A strictly feasible point. Returned when sum_t c_t = 0 and used to pull the
        solution strictly inside, by default None.
    method : str, optional
        "auto" (an LP for boxes, SLSQP for balls) or "exact-penalty" (projected
        subgradient with a ramped penalty weight), by default "auto".
    tol_feas : float, optional
        Largest accepted constraint value at the result, by default 1e-6.
    max_iters : int, optional
        Iterations per penalty weight for "exact-penalty", by default 20000.

    Returns
    -------
    Comparator

    Raises
    ------
    InvalidConfigurationError
        No point within tol_feas of feasibility was found.
    """
    costs = np.atleast_2d(np.asarray(costs, dtype=float))
    T = costs.shape[0]
    total = costs.sum(axis=0)
    A, b = stacked_rows(constraints)
    if witness is not None:
        witness = as_vector(witness, X.p, "witness")
        slack = -float(np.max(A @ witness - b))
    else:
        slack = 0.0
    start = witness if witness is not None else QUADRATIC.minimizer(X)

    norm = np.linalg.norm(total)
    if norm <= 1e-15 * max(T, 1):
        x, used = start.copy(), WITNESS
    else:
        s = total / norm
        if method == EXACT_PENALTY:
            x = _solve_exact_penalty(s, A, b, X, start, slack, tol_feas, max_iters)
            used = EXACT_PENALTY
        elif isinstance(X, Box):
            x, used = _solve_box_lp(s, A, b, X), LINPROG
        elif isinstance(X, Ball):
            x, used = _solve_ball_slsqp(s, A, b, X, start), SLSQP
        else:
            x = _solve_exact_penalty(s, A, b, X, start, slack, tol_feas, max_iters)
            used = EXACT_PENALTY

    if witness is not None and slack > 0:
        x = _pull_inside(x, A, b, witness)
    return _make_comparator(costs, constraints, x, used, witness, tol_feas)


def _make_comparator(costs, constraints, x, method, witness, tol_feas) -> Comparator:
    values = _step_values(constraints, costs.shape[0], x)
    max_violation = float(values.max())
    if max_violation > tol_feas:
        raise InvalidConfigurationError(
            f"No feasible comparator found, best point violates by {max_violation:.3e}"
        )
    return Comparator(
        x_star=x,
        value=float(np.sum(costs @ x)),
        max_violation=max_violation,
        step_violations=positive_part(values),
        method=method,
        total=costs.sum(axis=0),
        witness=witness,
    )


def grid_comparator(
    costs, constraints: ConstraintBlock, X: FeasibleSet, resolution: float
) -> Comparator:
    """Comparator by exhaustive search over a grid of X, for p <= 2.

    Parameters
    ----------
    costs : array-like
        (T, p) gradients.
    constraints : ConstraintBlock
        Constraints covering at least T steps.
    X : FeasibleSet
        Feasible set with p <= 2.
    resolution : float
        Grid spacing.

    Returns
    -------
    Comparator
    """
    costs = np.atleast_2d(np.asarray(costs, dtype=float))
    total = costs.sum(axis=0)
    A, b = stacked_rows(constraints)
    points = X.grid(resolution)
    best_x, best_value = None, math.inf
    for start in range(0, len(points), 250_000):
        chunk = points[start : start + 250_000]
        feasible = chunk[np.all(chunk @ A.T <= b, axis=1)]
        if len(feasible) == 0:
            continue
        values = feasible @ total
        i = int(np.argmin(values))
        if values[i] < best_value:
            best_x, best_value = feasible[i], values[i]
    if best_x is None:
        raise InvalidConfigurationError("No feasible grid point at this resolution")
    return _make_comparator(costs, constraints, best_x.copy(), GRID, None, TOL_FEAS)


def sample_feasible(
    constraints: ConstraintBlock,
    X: FeasibleSet,
    witness,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """n random points of X satisfying every constraint, drawn on segments from the
    witness toward uniform points of X."""
    A, b = stacked_rows(constraints)
    witness = as_vector(witness, X.p, "witness")
    targets = X.sample(rng, n)
    directions = targets - witness
    rise = directions @ A.T
    room = b - A @ witness
    with np.errstate(divide="ignore", invalid="ignore"):
        limits = np.where(rise > 0, room / rise, np.inf)
    theta_max = np.minimum(1.0, limits.min(axis=1))
    theta = theta_max * rng.uniform(size=n)
    return witness + theta[:, None] * directions


@dataclass
class OptimalityReport:
    worst_gap: float
    tolerance: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.worst_gap >= -self.tolerance


def check_comparator_optimality(
    costs,
    constraints: ConstraintBlock,
    X: FeasibleSet,
    comp: Comparator,
    witness,
    n: int = 200,
    seed: int = 0,
    rtol: float = 1e-6,
) -> OptimalityReport:
    """Check sum_t <c_t, y> >= sum_t <c_t, x_star> - rtol * scale on random feasible y."""
    costs = np.atleast_2d(np.asarray(costs, dtype=float))
    total = costs.sum(axis=0)
    points = sample_feasible(constraints, X, witness, n, np.random.default_rng(seed))
    values = points @ total
    scale = np.linalg.norm(total) * X.max_norm + 1.0
    return OptimalityReport(
        worst_gap=float(values.min() - total @ comp.x_star),
        tolerance=rtol * scale,
        samples=n,
    )


def regret(trace: RunTrace, comp: Comparator) -> float:
    "R_T = sum_t <c_t, x_t> - sum_t <c_t, x_star>"
    return float(trace.f.sum() - np.sum(trace.c @ comp.x_star))


def violation(trace: RunTrace) -> float:
    "C_T = sum_t ||[g_t(x_t)]_+||_1"
    return float(trace.violations.sum())


@dataclass
class QueueIdentityReport:
    violation: float
    queue_norm: float
    residual: float
    replay_matches: bool

    @property
    def passed(self) -> bool:
        return self.residual <= QUEUE_IDENTITY_RTOL * max(1.0, self.violation)


def check_queue_identity(trace: RunTrace) -> QueueIdentityReport:
    """Compare C_T with ||q_T||_1 / gamma, which agree exactly for a constant gamma.

    Parameters
    ----------
    trace : RunTrace
        Any complete trace.

    Returns
    -------
    QueueIdentityReport
        The residual and whether replaying the violations reproduces q bitwise.
    """
    C_T = violation(trace)
    queue_norm = float(np.abs(trace.q[-1]).sum())
    if trace.gamma > 0:
        residual = abs(C_T - queue_norm / trace.gamma)
    else:
        residual = queue_norm
    replay_matches = bool(np.array_equal(trace.replay_queue(), trace.q))
    if not replay_matches:
        logger.warning(f"Queue replay of {trace.environment} doesn't match the trace")
    return QueueIdentityReport(
        violation=C_T,
        queue_norm=queue_norm,
        residual=float(residual),
        replay_matches=replay_matches,
    )


def solve_allowance(trace: RunTrace, tol: float = 1e-8) -> np.ndarray:
    """Cumulative slack, per prefix t, granted to the inexact composite steps: t * tol.

    Each step is charged `tol`, whatever its certified gap. Solves that can't meet
    their target are flagged in the trace rather than absorbed here.
    """
    return np.arange(1, trace.T + 1) * tol


def _require_predictive(trace: RunTrace):
    if trace.z is None or trace.h is None or trace.z_final is None:
        raise InvalidInputError(
            f"{trace.algorithm} trace has no z_t series, the check needs a predictive run"
        )


@dataclass
class Lemma1Report:
    """Both cumulative inequalities as RHS - LHS, with the slack they're allowed."""

    lhs_1: float
    rhs_1: float
    lhs_2: float
    rhs_2: float
    statement_slack_1: float
    allowance: float
    prefix_margin_1: Optional[float] = None
    prefix_margin_2: Optional[float] = None

    @property
    def slack_1(self) -> float:
        return self.rhs_1 - self.lhs_1

    @property
    def slack_2(self) -> float:
        return self.rhs_2 - self.lhs_2

    @property
    def passed(self) -> bool:
        ok = self.slack_1 >= -self.allowance and self.slack_2 >= -self.allowance
        if self.prefix_margin_1 is not None:
            ok = ok and self.prefix_margin_1 >= 0 and self.prefix_margin_2 >= 0
        return ok


def _half_sq_dist(a, b) -> np.ndarray:
    diff = np.atleast_2d(a) - np.atleast_2d(b)
    return 0.5 * np.einsum("ij,ij->i", diff, diff)


def _lemma1_terms(trace: RunTrace, comp: Comparator) -> dict:
    _require_predictive(trace)
    T, m = trace.T, trace.m
    if comp.step_violations.shape != (T, m):
        raise InvalidInputError(
            f"Comparator violations have shape {comp.step_violations.shape}, "
            f"expected {(T, m)}"
        )
    eta, gamma, G = trace.eta, trace.gamma, trace.schedule.G
    x_star = comp.x_star
    z_next = np.vstack([trace.z[1:], trace.z_final])
    q_prev = np.vstack([np.zeros(m), trace.q[:-1]])
    q_hat_prev = np.vstack([trace.q_hat0, trace.q_hat[:-1]])

    regret_t = trace.f - trace.c @ x_star
    hint_t = 0.5 * eta * np.sum((trace.c - trace.h) ** 2, axis=1)
    telescope_t = (_half_sq_dist(x_star, trace.z) - _half_sq_dist(x_star, z_next)) / eta
    proximity_t = _half_sq_dist(trace.x, trace.z)
    queue_star_t = gamma * np.sum(q_hat_prev * comp.step_violations, axis=1)
    cross_t = gamma ** 2 * np.sum(trace.z_violations * trace.violations, axis=1)
    statement_cross_t = gamma ** 2 * np.sum(
        trace.z_violations * comp.step_violations, axis=1
    )
    queue_t = gamma * np.sum(q_prev * trace.violations, axis=1)

    lhs_1 = queue_t + regret_t
    rhs_1 = hint_t + telescope_t - proximity_t / eta + queue_star_t - cross_t
    statement_rhs_1 = (
        hint_t + telescope_t - proximity_t / eta + queue_star_t - statement_cross_t
    )
    lhs_2 = 0.5 * np.sum(trace.q ** 2, axis=1)
    rhs_2 = np.cumsum(
        hint_t + queue_star_t - regret_t + telescope_t
        + (gamma ** 2 * G ** 2 - 1.0 / eta) * proximity_t
    )
    magnitude = np.cumsum(
        np.abs(queue_t) + np.abs(regret_t) + hint_t + np.abs(telescope_t)
        + proximity_t / eta + queue_star_t + cross_t
        + gamma ** 2 * G ** 2 * proximity_t
    )
    return {
        "lhs_1": np.cumsum(lhs_1),
        "rhs_1": np.cumsum(rhs_1),
        "statement_rhs_1": np.cumsum(statement_rhs_1),
        "lhs_2": lhs_2,
        "rhs_2": rhs_2,
        "hint": np.cumsum(hint_t),
        "float": FLOAT_RTOL * (magnitude + 1.0),
    }


def check_lemma1(
    trace: RunTrace, comp: Comparator, prefix: bool = False, tol: float = 1e-8
) -> Lemma1Report:
    """Evaluate both cumulative inequalities of the predictive update term by term.

    First: sum gamma <q_{t-1}, [g_t(x_t)]_+> + R_T is at most
    (eta/2) sum ||c_t - h_t||^2 + (1/eta) sum (D(x*, z_t) - D(x*, z_{t+1}))
    - (1/eta) sum D(x_t, z_t) + sum gamma <q_hat_{t-1}, [g_t(x*)]_+>
    - sum gamma^2 <[g_t(z_t)]_+, [g_t(x_t)]_+>.

    Second: (1/2) ||q_T||^2 is at most (eta/2) sum ||c_t - h_t||^2
    + sum gamma <q_hat_{t-1}, [g_t(x*)]_+> - R_T + (1/eta) sum (D(x*, z_t) - D(x*, z_{t+1}))
    + sum (gamma^2 G^2 - 1/eta) D(x_t, z_t).

    Parameters
    ----------
    trace : RunTrace
        Predictive trace.
    comp : Comparator
        Any point of X; feasibility is not needed here.
    prefix : bool, optional
        Also check every prefix t <= T, by default False.
    tol : float, optional
        Solver tolerance, charged once per step as slack, by default 1e-8.

    Returns
    -------
    Lemma1Report
        The statement-form slack replaces [g_t(x_t)]_+ by [g_t(x*)]_+ in the last
        term of the first inequality; it is reported, not checked.
    """
    terms = _lemma1_terms(trace, comp)
    allowance = solve_allowance(trace, tol) + terms["float"]
    report = Lemma1Report(
        lhs_1=float(terms["lhs_1"][-1]),
        rhs_1=float(terms["rhs_1"][-1]),
        lhs_2=float(terms["lhs_2"][-1]),
        rhs_2=float(terms["rhs_2"][-1]),
        statement_slack_1=float(terms["statement_rhs_1"][-1] - terms["lhs_1"][-1]),
        allowance=float(allowance[-1]),
    )
    if prefix:
        report.prefix_margin_1 = float(
            np.min(terms["rhs_1"] - terms["lhs_1"] + allowance)
        )
        report.prefix_margin_2 = float(
            np.min(terms["rhs_2"] - terms["lhs_2"] + allowance)
        )
    if not report.passed:
        logger.warning(
            f"Cumulative inequalities fail on {trace.environment}: slacks "
            f"{report.slack_1:.3e}, {report.slack_2:.3e}, allowance {report.allowance:.3e}"
        )
    return report


def strictly_feasible(comp: Comparator, constraints: ConstraintBlock) -> Comparator:
    """Pull x_star toward the witness if any g_t^j(x_star) is still positive."""
    if comp.max_violation <= 0 or comp.witness is None:
        return comp
    A, b = stacked_rows(constraints)
    x = _pull_inside(comp.x_star, A, b, comp.witness)
    values = _step_values(constraints, comp.step_violations.shape[0], x)
    logger.debug(f"Comparator pulled inside by {np.linalg.norm(x - comp.x_star):.2e}")
    return replace(
        comp,
        x_star=x,
        value=float(comp.total @ x),
        max_violation=float(values.max()),
        step_violations=positive_part(values),
    )


@dataclass
class Theorem3Report:
    """Regret and violation against their bounds for a predictive run.

    `violation_bound` is (1/gamma) sqrt(B + F T) with B the regret bound;
    `strict_violation_bound` is (1/gamma) sqrt(2 m (B - R_T)), which needs no bound on
    -R_T.
    """

    regret: float
    regret_bound: float
    violation: float
    violation_bound: float
    strict_violation_bound: float
    hint_error: float
    divergence: float
    F: float
    max_abs_cost: float
    allowance: float
    violation_allowance: float

    @property
    def regret_passed(self) -> bool:
        return self.regret <= self.regret_bound + self.allowance

    @property
    def violation_passed(self) -> bool:
        return self.violation <= self.violation_bound + self.violation_allowance

    @property
    def passed(self) -> bool:
        return self.regret_passed and self.violation_passed


def check_theorem3_bounds(
    trace: RunTrace,
    comp: Comparator,
    constraints: Optional[ConstraintBlock] = None,
    tol: float = 1e-8,
) -> Theorem3Report:
    """Check R_T <= (eta/2) sum ||c_t - h_t||^2 + D_R(z_1, x*)/eta and
    C_T <= (1/gamma) sqrt((eta/2) sum ||c_t - h_t||^2 + D_R(z_1, x*)/eta + F T).

    Parameters
    ----------
    trace : RunTrace
        Predictive trace with gamma^2 G^2 eta = 1.
    comp : Comparator
        Feasible comparator.
    constraints : ConstraintBlock, optional
        Needed only to pull a slightly infeasible comparator inside, by default None.
    tol : float, optional
        Solver tolerance, charged once per step as slack, by default 1e-8.

    Returns
    -------
    Theorem3Report

    Raises
    ------
    InvalidConfigurationError
        The schedule doesn't satisfy gamma^2 G^2 eta = 1, or F is unknown.
    """
    _require_predictive(trace)
    schedule = trace.schedule
    if abs(schedule.gamma ** 2 * schedule.G ** 2 * schedule.eta - 1.0) > 1e-9:
        raise InvalidConfigurationError(
            "The bounds need gamma^2 G^2 eta = 1, got "
            f"{schedule.gamma ** 2 * schedule.G ** 2 * schedule.eta:.12g}"
        )
    if not math.isfinite(schedule.F):
        raise InvalidConfigurationError("The violation bound needs a finite F")
    if constraints is not None:
        comp = strictly_feasible(comp, constraints)

    eta, gamma, T = trace.eta, trace.gamma, trace.T
    hint_error = float(np.sum((trace.c - trace.h) ** 2))
    divergence = QUADRATIC.divergence(trace.z[0], comp.x_star)
    bound = 0.5 * eta * hint_error + divergence / eta
    R_T = regret(trace, comp)
    C_T = violation(trace)

    terms = _lemma1_terms(trace, comp)
    allowance = float(solve_allowance(trace, tol)[-1] + terms["float"][-1])
    FT = schedule.F * T
    violation_bound = math.sqrt(bound + FT) / gamma
    violation_allowance = (
        math.sqrt(bound + FT + allowance) / gamma - violation_bound
        + FLOAT_RTOL * max(1.0, C_T)
    )
    strict = math.sqrt(2.0 * trace.m * max(bound - R_T + allowance, 0.0)) / gamma
    max_abs_cost = float(
        max(np.max(np.abs(trace.f)), np.max(np.abs(trace.c @ comp.x_star)))
    )
    report = Theorem3Report(
        regret=R_T,
        regret_bound=bound,
        violation=C_T,
        violation_bound=violation_bound,
        strict_violation_bound=strict,
        hint_error=hint_error,
        divergence=divergence,
        F=schedule.F,
        max_abs_cost=max_abs_cost,
        allowance=allowance,
        violation_allowance=violation_allowance,
    )
    if not report.passed:
        logger.warning(
            f"Bounds fail on {trace.environment}: R_T={R_T:.4g} vs {bound:.4g}, "
            f"C_T={C_T:.4g} vs {violation_bound:.4g}"
        )
    return report


@dataclass
class RateFit:
    slope: float
    intercept: float
    r2: float
    n: int


def fit_rate(points: Sequence[Tuple[float, float]]) -> RateFit:
    """Least-squares fit of log(value) against log(T).

    Parameters
    ----------
    points : sequence of (T, value)
        At least two points with strictly increasing T and positive values.

    Returns
    -------
    RateFit
        Slope, intercept and R^2 of the log-log fit.
    """
    data = np.asarray(points, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or len(data) < 2:
        raise InvalidInputError("fit_rate needs at least two (T, value) pairs")
    T, values = data[:, 0], data[:, 1]
    if np.any(np.diff(T) <= 0) or np.any(T <= 0):
        raise InvalidInputError("T values must be positive and strictly increasing")
    if np.any(values <= 0):
        raise InvalidInputError("Rate fitting needs positive values")
    log_T = np.log(T).reshape(-1, 1)
    log_values = np.log(values)
    model = LinearRegression().fit(log_T, log_values)
    return RateFit(
        slope=float(model.coef_[0]),
        intercept=float(model.intercept_),
        r2=float(r2_score(log_values, model.predict(log_T))),
        n=len(data),
    )
