"""
Seeded generators for cost and constraint sequences, and the check that a generated
sequence respects its declared bounds G and F.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from predictoco.core import (
    CONSTRAINT_KINDS,
    STATIC_AFFINE,
    ConstraintBlock,
    eval_constraints,
)
from predictoco.errors import (
    GenerationError,
    InvalidConfigurationError,
    InvalidParameterError,
)
from predictoco.geometry import QUADRATIC, FeasibleSet, make_feasible_set

logger = logging.getLogger(__name__)

IID_RANDOM = "iid-random"
DRIFTING = "drifting"
PIECEWISE_CONSTANT = "piecewise-constant"
COST_KINDS = (IID_RANDOM, DRIFTING, PIECEWISE_CONSTANT)

# Relative slack for bounds that hold with equality by construction
_BOUND_RTOL = 1e-12


@dataclass(frozen=True)
class EnvironmentSpec:
    """Everything needed to regenerate an environment.

    Attributes
    ----------
    p, m, T : int
        Decision dimension, constraint count and horizon.
    cost_kind : str
        "iid-random", "drifting" or "piecewise-constant".
    constraint_kind : str
        "static-affine" or "timevarying-affine".
    feasible_set : dict
        Keyword arguments for `make_feasible_set`, including `kind`.
    G : float
        Declared bound on ||c_t|| and on the spectral norm of A_t.
    F : float, optional
        Declared bound on |f_t| and g_t over X, by default 2 G max_{x in X} ||x||.
    margin : float
        The witness satisfies g_t(x_feas) = -margin.
    sigma : float
        Drift noise scale for drifting costs.
    segments : int
        Number of constant pieces for piecewise-constant costs.
    bias : float
        Mean of iid-random costs along a fixed random direction, in units of G.
    jitter : float
        Per-step perturbation of A_t for time-varying constraints.
    witness : list, optional
        Feasible witness, by default the regularizer minimizer over X.
    seed : int
        Seed of every random draw.
    """

    p: int = 2
    m: int = 1
    T: int = 100
    cost_kind: str = IID_RANDOM
    constraint_kind: str = STATIC_AFFINE
    feasible_set: dict = field(default_factory=lambda: {"kind": "box"})
    G: float = 1.0
    F: Optional[float] = None
    margin: float = 0.1
    sigma: float = 0.05
    segments: int = 1
    bias: float = 0.0
    jitter: float = 0.1
    witness: Optional[tuple] = None
    seed: int = 0

    def __post_init__(self):
        for name in ["p", "m", "T"]:
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidParameterError(f"{name} must be a positive integer, got {value}")
        if self.cost_kind not in COST_KINDS:
            raise InvalidParameterError(
                f"cost_kind must be one of {COST_KINDS}, got {self.cost_kind}"
            )
        if self.constraint_kind not in CONSTRAINT_KINDS:
            raise InvalidParameterError(
                f"constraint_kind must be one of {CONSTRAINT_KINDS}, got {self.constraint_kind}"
            )
        if not self.G > 0:
            raise InvalidParameterError(f"G must be positive, got {self.G}")
        if self.F is not None and not self.F > 0:
            raise InvalidParameterError(f"F must be positive, got {self.F}")
        if self.margin < 0 or self.sigma < 0 or self.jitter < 0:
            raise InvalidParameterError("margin, sigma and jitter must be nonnegative")
        if not 0 <= self.bias <= 1:
            raise InvalidParameterError(f"bias must lie in [0, 1], got {self.bias}")
        if int(self.segments) != self.segments or not 1 <= self.segments <= self.T:
            raise InvalidParameterError(
                f"segments must be an integer in 1..T, got {self.segments}"
            )

    def make_set(self) -> FeasibleSet:
        kwargs = dict(self.feasible_set)
        return make_feasible_set(kwargs.pop("kind", "box"), self.p, **kwargs)

    @property
    def identifier(self) -> str:
        return (
            f"{self.cost_kind}/{self.constraint_kind}/p{self.p}-m{self.m}"
            f"/T{self.T}/seed{self.seed}"
        )


@dataclass(frozen=True, eq=False)
class Environment:
    """A generated instance: gradients c_1..c_T, constraints and the set X.

    Unpacks as (costs, constraints, X).
    """

    spec: EnvironmentSpec
    costs: np.ndarray
    constraints: ConstraintBlock
    X: FeasibleSet
    witness: np.ndarray
    G: float
    F: float

    @property
    def T(self) -> int:
        return self.costs.shape[0]

    @property
    def p(self) -> int:
        return self.costs.shape[1]

    @property
    def m(self) -> int:
        return self.constraints.m

    @property
    def identifier(self) -> str:
        return self.spec.identifier

    def __iter__(self):
        return iter((self.costs, self.constraints, self.X))


@dataclass
class BoundsReport:
    """Realized bounds of an environment against its declared G and F."""

    max_cost_norm: float
    max_matrix_norm: float
    max_constraint_sup: float
    max_abs_cost: float
    G: float
    F: float
    failures: List[str] = field(default_factory=list)
    failing_step: Optional[int] = None

    @property
    def passed(self) -> bool:
        return not self.failures


def _normalize(v: np.ndarray, G: float) -> np.ndarray:
    return v * (G / np.linalg.norm(v))


def _unit_draw(rng: np.random.Generator, p: int) -> np.ndarray:
    v = rng.standard_normal(p)
    while not np.linalg.norm(v) > 0:
        v = rng.standard_normal(p)
    return v


def _generate_costs(spec: EnvironmentSpec, rng: np.random.Generator) -> np.ndarray:
    p, T, G = spec.p, spec.T, spec.G
    # Shared first draw, so a drift-free sequence equals a single constant piece
    first = _normalize(_unit_draw(rng, p), G)
    costs = np.empty((T, p))

    if spec.cost_kind == IID_RANDOM:
        mean = spec.bias * first
        for t in range(T):
            raw = mean + rng.uniform(-G, G, size=p)
            norm = np.linalg.norm(raw)
            costs[t] = raw if norm <= G else raw * (G / norm)
    elif spec.cost_kind == DRIFTING:
        costs[0] = first
        for t in range(1, T):
            if spec.sigma == 0:
                costs[t] = costs[t - 1]
                continue
            moved = costs[t - 1] + spec.sigma * rng.uniform(-1.0, 1.0, size=p)
            norm = np.linalg.norm(moved)
            costs[t] = moved * (G / norm) if norm > 0 else costs[t - 1]
    else:
        pieces = np.array_split(np.arange(T), spec.segments)
        value = first
        for i, steps in enumerate(pieces):
            if i > 0:
                value = _normalize(_unit_draw(rng, p), G)
            costs[steps] = value
    return costs


def _scaled_matrix(A: np.ndarray, G: float) -> np.ndarray:
    "Rescale A so its spectral norm is G"
    norm = np.linalg.norm(A, 2)
    if not norm > 0:
        A = np.ones_like(A)
        norm = np.linalg.norm(A, 2)
    return A * (G / norm)


def _generate_constraints(
    spec: EnvironmentSpec, witness: np.ndarray, rng: np.random.Generator
) -> ConstraintBlock:
    base = rng.standard_normal((spec.m, spec.p))
    if spec.constraint_kind == STATIC_AFFINE:
        A = _scaled_matrix(base, spec.G)
        return ConstraintBlock.static(A, A @ witness + spec.margin)

    A = np.empty((spec.T, spec.m, spec.p))
    for t in range(spec.T):
        jitter = spec.jitter * rng.standard_normal((spec.m, spec.p))
        A[t] = _scaled_matrix(base + jitter, spec.G)
    b = A @ witness + spec.margin
    return ConstraintBlock.timevarying(A, b)


def generate_environment(spec: EnvironmentSpec) -> Environment:
    """Generate the cost and constraint sequences of `spec` and check their bounds.

    Parameters
    ----------
    spec : EnvironmentSpec
        Environment description. The same spec always gives the same sequences.

    Returns
    -------
    Environment
        Unpacks as (costs, constraints, X).

    Raises
    ------
    InvalidConfigurationError
        The witness is outside X or violates a generated constraint.
    GenerationError
        A realized sequence breaks the declared G or F.
    """
    X = spec.make_set()
    if spec.witness is None:
        witness = QUADRATIC.minimizer(X)
    else:
        witness = np.asarray(spec.witness, dtype=float)
    if witness.shape != (spec.p,) or not X.contains(witness):
        raise InvalidConfigurationError(f"The witness {witness} is not a point of X")

    rng = np.random.default_rng(spec.seed)
    costs = _generate_costs(spec, rng)
    constraints = _generate_constraints(spec, witness, rng)
    F = spec.F if spec.F is not None else 2.0 * spec.G * X.max_norm

    for t in [1] if constraints.is_static else range(1, spec.T + 1):
        if np.any(eval_constraints(constraints, t, witness) > 0):
            raise InvalidConfigurationError(f"The witness violates g_t at step {t}")

    env = Environment(
        spec=spec,
        costs=costs,
        constraints=constraints,
        X=X,
        witness=witness,
        G=float(spec.G),
        F=float(F),
    )
    report = verify_bounds(env)
    if not report.passed:
        raise GenerationError(
            f"{spec.identifier} breaks its declared bounds: {'; '.join(report.failures)}",
            step=report.failing_step,
        )
    logger.debug(f"Generated {spec.identifier} with G={env.G}, F={env.F:.4g}")
    return env


def verify_bounds(env: Environment, X: Optional[FeasibleSet] = None) -> BoundsReport:
    """Compare the realized sequence of `env` against its declared G and F.

    The sup of an affine function over a box or a ball is exact, so no sampling is
    involved.

    Parameters
    ----------
    env : Environment
        Generated environment.
    X : FeasibleSet, optional
        Set the sups are taken over, by default env.X.

    Returns
    -------
    BoundsReport
        Realized maxima, the list of failures and the first offending step.
    """
    X = X or env.X
    g = env.constraints
    G_limit = env.G * (1 + _BOUND_RTOL)
    F_limit = env.F * (1 + _BOUND_RTOL)

    cost_norms = np.linalg.norm(env.costs, axis=1)
    abs_costs = np.maximum(X.support_rows(env.costs), X.support_rows(-env.costs))

    steps = 1 if g.is_static else env.T
    matrix_norms = np.empty(steps)
    constraint_sups = np.empty(steps)
    for t in range(1, steps + 1):
        A = g.matrix(t)
        matrix_norms[t - 1] = np.linalg.norm(A, 2)
        constraint_sups[t - 1] = np.max(X.support_rows(A) - g.offset(t))
    if g.is_static:
        matrix_norms = np.repeat(matrix_norms, env.T)
        constraint_sups = np.repeat(constraint_sups, env.T)

    report = BoundsReport(
        max_cost_norm=float(cost_norms.max()),
        max_matrix_norm=float(matrix_norms.max()),
        max_constraint_sup=float(constraint_sups.max()),
        max_abs_cost=float(abs_costs.max()),
        G=env.G,
        F=env.F,
    )
    checks = [
        ("||c_t||", cost_norms, G_limit, "G"),
        ("||A_t||_2", matrix_norms, G_limit, "G"),
        ("sup g_t", constraint_sups, F_limit, "F"),
        ("sup |f_t|", abs_costs, F_limit, "F"),
    ]
    for label, values, limit, name in checks:
        bad = np.flatnonzero(values > limit)
        if bad.size:
            step = int(bad[0]) + 1
            report.failures.append(
                f"{label} = {values[bad[0]]:.6g} exceeds {name} at step {step}"
            )
            if report.failing_step is None or step < report.failing_step:
                report.failing_step = step
    return report


def drift_bound(spec: EnvironmentSpec) -> float:
    "Largest possible ||c_t - c_{t-1}|| of a drifting sequence, 2 sigma sqrt(p)"
    return 2.0 * spec.sigma * np.sqrt(spec.p)
