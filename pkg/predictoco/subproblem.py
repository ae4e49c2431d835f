"""
The composite step shared by every engine update:

    minimize  eta <x, v> + eta gamma <w, [A_t x - b_t]_+> + kappa D_R(x, z)  over x in X

with the quadratic regularizer, so kappa D_R(x, z) = (kappa / 2) ||x - z||^2. The
predictive engine uses kappa = 1 and the baseline's ||x - x_t||^2 uses kappa = 2.

The default solver works on the dual. Writing [s]_+ = max over lam in [0, 1] of lam s
turns the step into a saddle problem whose inner minimization is a single projection:

    x(lam) = Proj_X(z - (eta v + A^T (beta * lam)) / kappa),  beta = eta gamma w

The dual d(lam) is concave and smooth on the box [0, 1]^m, so accelerated projected
gradient ascent (or bisection with a single weighted row) converges quickly, and
objective(x(lam)) - d(lam) is a certified bound on the suboptimality of the returned
point.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from predictoco.core import ConstraintBlock, as_vector, positive_part
from predictoco.errors import (
    InvalidInputError,
    InvalidParameterError,
    UnverifiedToleranceWarning,
)
from predictoco.geometry import FeasibleSet

logger = logging.getLogger(__name__)

DUAL = "dual"
SUBGRADIENT = "subgradient"
SOLVER_METHODS = (DUAL, SUBGRADIENT)

# How the returned point was obtained
CLOSED_FORM = "closed-form"
UNVERIFIED_TOLERANCE = "unverified-tolerance"

_BISECTION_STEPS = 200
_GRID_CHUNK = 250_000
_ZOOM_POINTS = 1000


@dataclass(frozen=True, eq=False)
class CompositeStepSpec:
    """One instance of the composite step.

    Attributes
    ----------
    v : np.ndarray
        Linear direction, c_t for a z-step and h_{t+1} for an x-step.
    w : np.ndarray
        Nonnegative queue weights, length m.
    eta : float
        Step size, positive.
    gamma : float
        Queue gain, nonnegative.
    g : ConstraintBlock
        Constraint block the violation term is taken from.
    t : int
        Step index into `g`.
    z : np.ndarray
        Anchor of the proximity term.
    X : FeasibleSet
        Feasible set.
    prox_weight : float
        kappa, the weight of D_R(x, z). 1 for the predictive engine, 2 for the baseline.
    tol : float
        Suboptimality target relative to `scale`.
    max_iters : int
        Iteration budget of the inner solver.
    method : str
        "dual" (default) or "subgradient".
    """

    v: np.ndarray
    w: np.ndarray
    eta: float
    gamma: float
    g: ConstraintBlock
    t: int
    z: np.ndarray
    X: FeasibleSet
    prox_weight: float = 1.0
    tol: float = 1e-8
    max_iters: int = 2000
    method: str = DUAL

    def __post_init__(self):
        p = self.X.p
        if self.g.p != p:
            raise InvalidInputError(
                f"Constraints act on dimension {self.g.p} but X has dimension {p}"
            )
        w = as_vector(self.w, self.g.m, "w")
        if np.any(w < 0):
            raise InvalidInputError("Queue weights w must be nonnegative")
        if not self.eta > 0:
            raise InvalidParameterError(f"eta must be positive, got {self.eta}")
        if not self.gamma >= 0:
            raise InvalidParameterError(f"gamma must be nonnegative, got {self.gamma}")
        if not self.prox_weight > 0:
            raise InvalidParameterError("prox_weight must be positive")
        if not self.tol > 0:
            raise InvalidParameterError(f"tol must be positive, got {self.tol}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidParameterError("max_iters must be a positive integer")
        if self.method not in SOLVER_METHODS:
            raise InvalidParameterError(
                f"Solver method must be one of {SOLVER_METHODS}, got {self.method}"
            )
        object.__setattr__(self, "v", as_vector(self.v, p, "v"))
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "z", as_vector(self.z, p, "z"))
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "prox_weight", float(self.prox_weight))
        object.__setattr__(self, "max_iters", int(self.max_iters))

    @property
    def A(self) -> np.ndarray:
        return self.g.matrix(self.t)

    @property
    def b(self) -> np.ndarray:
        return self.g.offset(self.t)

    @property
    def beta(self) -> np.ndarray:
        "Per-row weight of the violation term, eta * gamma * w"
        return self.eta * self.gamma * self.w

    @property
    def scale(self) -> float:
        """Objective scale the relative tolerance refers to:
        eta (||v|| diam + gamma ||w||_1 F_g) + diam^2, with F_g = max_j sup_X [g_t^j]_+.
        """
        diam = self.X.diameter
        sup_g = self.X.support_rows(self.A) - self.b
        f_g = max(float(np.max(sup_g)), 0.0)
        return (
            self.eta * (np.linalg.norm(self.v) * diam + self.gamma * np.sum(self.w) * f_g)
            + diam ** 2
        )


@dataclass(frozen=True, eq=False)
class StepResult:
    """Outcome of one composite step.

    `gap` bounds objective(x) - min objective from above. `multipliers` are the
    lam in [0, 1]^m the returned point is the proximal image of; they identify the
    subgradient of the violation term used by the optimality condition.
    """

    x: np.ndarray
    value: float
    gap: float
    verified: bool
    path: str
    multipliers: np.ndarray
    iterations: int = 0

    @property
    def flag(self) -> Optional[str]:
        return None if self.verified else UNVERIFIED_TOLERANCE

    def __iter__(self):
        # Unpacks as (x, value)
        return iter((self.x, self.value))


def objective(spec: CompositeStepSpec, x) -> float:
    "Composite objective of `spec` at x"
    x = as_vector(x, spec.X.p)
    diff = x - spec.z
    return float(
        spec.eta * (spec.v @ x)
        + spec.beta @ positive_part(spec.A @ x - spec.b)
        + 0.5 * spec.prox_weight * (diff @ diff)
    )


def objective_rows(spec: CompositeStepSpec, points: np.ndarray) -> np.ndarray:
    "Composite objective at every row of an (n, p) array"
    points = np.atleast_2d(points)
    diff = points - spec.z
    return (
        spec.eta * (points @ spec.v)
        + positive_part(points @ spec.A.T - spec.b) @ spec.beta
        + 0.5 * spec.prox_weight * np.einsum("ij,ij->i", diff, diff)
    )


class _DualProblem:
    """The dual of a composite step restricted to rows with a positive weight."""

    def __init__(self, spec: CompositeStepSpec, rows: np.ndarray):
        self.spec = spec
        self.kappa = spec.prox_weight
        self.rows = rows
        self.weighted_A = spec.beta[rows, None] * spec.A[rows]
        self.weighted_b = spec.beta[rows] * spec.b[rows]
        self.base = spec.z - spec.eta * spec.v / self.kappa
        self.lipschitz = np.linalg.norm(self.weighted_A, 2) ** 2 / self.kappa

    def argmin(self, lam: np.ndarray) -> np.ndarray:
        return self.spec.X._project(self.base - self.weighted_A.T @ lam / self.kappa)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.weighted_A @ x - self.weighted_b

    def value(self, lam: np.ndarray, x: np.ndarray) -> float:
        spec = self.spec
        diff = x - spec.z
        return float(
            spec.eta * (spec.v @ x)
            + lam @ self.gradient(x)
            + 0.5 * self.kappa * (diff @ diff)
        )

    def primal(self, x: np.ndarray) -> float:
        spec = self.spec
        diff = x - spec.z
        return float(
            spec.eta * (spec.v @ x)
            + np.sum(positive_part(self.gradient(x)))
            + 0.5 * self.kappa * (diff @ diff)
        )


class _Certificate:
    "Best primal point and best dual bound seen so far"

    def __init__(self):
        self.x = None
        self.primal = math.inf
        self.lam = None
        self.dual = -math.inf

    def offer(self, problem: _DualProblem, lam: np.ndarray, x: np.ndarray) -> float:
        d = problem.value(lam, x)
        if d > self.dual:
            self.dual, self.lam = d, lam
        primal = problem.primal(x)
        if primal < self.primal:
            self.primal, self.x = primal, x
        return d

    @property
    def gap(self) -> float:
        return max(self.primal - self.dual, 0.0)


def _bisect_dual(
    problem: _DualProblem, tol_abs: float, cert: _Certificate
) -> int:
    """Single weighted row: the dual derivative is nonincreasing in lam, so bisect
    for its root on [0, 1]."""
    lo, hi = np.zeros(1), np.ones(1)
    x_hi = problem.argmin(hi)
    cert.offer(problem, hi, x_hi)
    if problem.gradient(x_hi)[0] >= 0:
        return 1
    for step in range(1, _BISECTION_STEPS + 1):
        mid = 0.5 * (lo + hi)
        x_mid = problem.argmin(mid)
        cert.offer(problem, mid, x_mid)
        if cert.gap <= tol_abs or hi[0] - lo[0] <= 1e-17:
            return step
        if problem.gradient(x_mid)[0] > 0:
            lo = mid
        else:
            hi = mid
    return _BISECTION_STEPS


def _accelerated_dual_ascent(
    problem: _DualProblem,
    lam0: np.ndarray,
    max_iters: int,
    tol_abs: float,
    cert: _Certificate,
) -> int:
    """Projected gradient ascent on [0, 1]^k with Nesterov momentum, restarted
    whenever the dual value drops."""
    step = 1.0 / problem.lipschitz if problem.lipschitz > 0 else 1.0
    lam = np.clip(lam0, 0.0, 1.0)
    d_lam = cert.offer(problem, lam, problem.argmin(lam))
    y = lam.copy()
    theta = 1.0
    for k in range(1, max_iters + 1):
        if cert.gap <= tol_abs:
            return k - 1
        grad = problem.gradient(problem.argmin(y))
        lam_next = np.clip(y + step * grad, 0.0, 1.0)
        d_next = cert.offer(problem, lam_next, problem.argmin(lam_next))
        if d_next < d_lam:
            theta = 1.0
            y = lam_next.copy()
        else:
            theta_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta ** 2))
            y = lam_next + ((theta - 1.0) / theta_next) * (lam_next - lam)
            theta = theta_next
        lam, d_lam = lam_next, d_next
    return max_iters


def _solve_dual(
    problem: _DualProblem, lam0: np.ndarray, max_iters: int, tol_abs: float
) -> tuple:
    cert = _Certificate()
    if problem.rows.sum() == 1:
        iterations = _bisect_dual(problem, tol_abs, cert)
    else:
        iterations = _accelerated_dual_ascent(problem, lam0, max_iters, tol_abs, cert)
    return cert, iterations


def _solve_subgradient(problem: _DualProblem, max_iters: int) -> tuple:
    """Projected subgradient on the primal objective with steps 1/(kappa k),
    warm-started at z, keeping the best iterate."""
    spec = problem.spec
    X = spec.X
    kappa = problem.kappa
    x = X._project(spec.z)
    best_x, best_value = x, problem.primal(x)
    for k in range(1, max_iters + 1):
        active = (problem.gradient(x) > 0).astype(float)
        sub = spec.eta * spec.v + problem.weighted_A.T @ active + kappa * (x - spec.z)
        x = X._project(x - sub / (kappa * k))
        value = problem.primal(x)
        if value < best_value:
            best_x, best_value = x, value
    implied = (problem.gradient(best_x) > 0).astype(float)
    return best_x, best_value, implied


def _full_multipliers(spec: CompositeStepSpec, rows: np.ndarray, lam) -> np.ndarray:
    out = np.zeros(spec.g.m)
    if lam is not None:
        out[rows] = lam
    return out


def solve_composite_step(spec: CompositeStepSpec) -> StepResult:
    """Minimize the composite objective of `spec` over X.

    Parameters
    ----------
    spec : CompositeStepSpec
        The step to solve.

    Returns
    -------
    StepResult
        The point, its objective value, the certified gap and whether the gap is
        within `spec.tol * spec.scale`. Unpacks as (x, value).
    """
    beta = spec.beta
    rows = beta > 0
    x0 = spec.X._project(spec.z - spec.eta * spec.v / spec.prox_weight)

    # The plain proximal step is optimal whenever no weighted row is violated at it
    if not np.any(rows) or np.all(spec.A[rows] @ x0 - spec.b[rows] <= 0):
        return StepResult(
            x=x0,
            value=objective(spec, x0),
            gap=0.0,
            verified=True,
            path=CLOSED_FORM,
            multipliers=np.zeros(spec.g.m),
        )

    problem = _DualProblem(spec, rows)
    tol_abs = spec.tol * spec.scale

    if spec.method == SUBGRADIENT:
        x, value, implied = _solve_subgradient(problem, spec.max_iters)
        cert, iterations = _solve_dual(problem, implied[rows], spec.max_iters, tol_abs)
        gap = max(value - cert.dual, 0.0)
        lam = cert.lam
        iterations += spec.max_iters
    else:
        cert, iterations = _solve_dual(problem, np.zeros(rows.sum()), spec.max_iters, tol_abs)
        x, gap, lam = cert.x, cert.gap, cert.lam

    verified = gap <= tol_abs
    if not verified:
        logger.warning(
            f"Composite step at t={spec.t} stopped with gap {gap:.3e} above "
            f"{tol_abs:.3e} after {iterations} iterations ({spec.method})"
        )
        warnings.warn(UnverifiedToleranceWarning())
    else:
        logger.debug(f"Composite step at t={spec.t}: gap {gap:.2e}, {iterations} iters")

    return StepResult(
        x=x,
        value=objective(spec, x),
        gap=gap,
        verified=verified,
        path=spec.method,
        multipliers=_full_multipliers(spec, rows, lam),
        iterations=iterations,
    )


def _grid_argmin(spec: CompositeStepSpec, points: np.ndarray) -> tuple:
    best_x, best_value = None, math.inf
    for start in range(0, len(points), _GRID_CHUNK):
        chunk = points[start : start + _GRID_CHUNK]
        values = objective_rows(spec, chunk)
        i = int(np.argmin(values))
        if values[i] < best_value:
            best_x, best_value = chunk[i], float(values[i])
    return best_x, best_value


def brute_force_step(
    spec: CompositeStepSpec, resolution: float, zoom_levels: int = 0
) -> np.ndarray:
    """Exhaustive grid search for the composite step, the reference oracle in tests.

    Parameters
    ----------
    spec : CompositeStepSpec
        Step with p <= 2.
    resolution : float
        Grid spacing of the first pass over X.
    zoom_levels : int, optional
        Extra passes on a finer grid around the incumbent, by default 0. The window
        radius comes from strong convexity, so each pass keeps the true minimizer.

    Returns
    -------
    np.ndarray
        The grid minimizer.
    """
    points = spec.X.grid(resolution)
    best_x, _ = _grid_argmin(spec, points)

    linear_slope = spec.eta * np.linalg.norm(spec.v) + spec.beta @ np.linalg.norm(
        spec.A, axis=1
    )
    window = spec.X.diameter
    for _ in range(int(zoom_levels)):
        # Lipschitz constant of the objective over the current window
        lipschitz = linear_slope + spec.prox_weight * (
            np.linalg.norm(best_x - spec.z) + window
        )
        excess = lipschitz * resolution * math.sqrt(spec.X.p) / 2.0
        radius = math.sqrt(2.0 * excess / spec.prox_weight) + resolution
        window = radius
        resolution = max(2.0 * radius / _ZOOM_POINTS, 1e-12)
        points = spec.X.grid(resolution, center=best_x, half_width=radius)
        if len(points) == 0:
            break
        candidate, _ = _grid_argmin(spec, np.vstack([points, best_x]))
        best_x = candidate
    return np.array(best_x, dtype=float)
