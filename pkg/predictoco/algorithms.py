"""
The online engines. Each one plays the whole horizon of an environment and returns a
RunTrace holding every quantity the metrics need.

- run_ogd: projected online gradient descent onto X, constraints ignored.
- run_baseline: the primal-dual update without prediction (static constraints).
- run_predictive: the optimistic primal-dual update with hints h_{t+1}.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from predictoco.core import (
    BASELINE,
    PREDICTIVE,
    ScheduleParams,
    VirtualQueue,
    eval_constraints,
    positive_part,
)
from predictoco.environments import Environment
from predictoco.errors import InvalidConfigurationError, InvalidInputError
from predictoco.geometry import QUADRATIC
from predictoco.predictors import Predictor, hint
from predictoco.subproblem import DUAL, CompositeStepSpec, solve_composite_step

logger = logging.getLogger(__name__)

OGD = "ogd"
ALGORITHMS = (OGD, BASELINE, PREDICTIVE)


@dataclass(frozen=True)
class SolverSettings:
    "Inner solver options passed to every composite step"

    tol: float = 1e-8
    max_iters: int = 2000
    method: str = DUAL


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Per-step record of one run, every series indexed by t = 1..T.

    Attributes
    ----------
    algorithm : str
        "ogd", "baseline" or "predictive".
    schedule : ScheduleParams
        Step sizes used.
    environment : str
        Identifier of the environment.
    x : np.ndarray
        (T, p) played decisions.
    q, q_hat : np.ndarray
        (T, m) queues after step t.
    c : np.ndarray
        (T, p) revealed gradients.
    f : np.ndarray
        (T,) costs f_t(x_t).
    violations : np.ndarray
        (T, m) [g_t(x_t)]_+.
    gaps : np.ndarray
        (T, 2) certified suboptimality of the z-step and x-step solved at step t.
    flags : np.ndarray
        (T,) number of solves at step t that missed their tolerance.
    prox_weight : float
        Weight of the proximity term of the x-updates.
    q_hat0 : np.ndarray
        q_hat_0, consumed by the first z-step.
    z, h, z_violations : np.ndarray, optional
        Predictive runs only: (T, p) anchors z_t, (T, p) hints h_t with h_1 = 0 and
        (T, m) [g_t(z_t)]_+.
    z_final, x_final : np.ndarray, optional
        z_{T+1} and x_{T+1}, computed but never played.
    """

    algorithm: str
    schedule: ScheduleParams
    environment: str
    x: np.ndarray
    q: np.ndarray
    q_hat: np.ndarray
    c: np.ndarray
    f: np.ndarray
    violations: np.ndarray
    gaps: np.ndarray
    flags: np.ndarray
    prox_weight: float
    q_hat0: np.ndarray
    z: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None
    z_violations: Optional[np.ndarray] = None
    z_final: Optional[np.ndarray] = None
    x_final: Optional[np.ndarray] = None

    def __post_init__(self):
        T = self.x.shape[0]
        for name in ["q", "q_hat", "c", "f", "violations", "gaps", "flags"]:
            if getattr(self, name).shape[0] != T:
                raise InvalidInputError(f"Trace series {name} doesn't have length {T}")
        for name in ["z", "h", "z_violations"]:
            series = getattr(self, name)
            if series is not None and series.shape[0] != T:
                raise InvalidInputError(f"Trace series {name} doesn't have length {T}")

    @property
    def T(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def m(self) -> int:
        return self.q.shape[1]

    @property
    def gamma(self) -> float:
        return self.schedule.gamma

    @property
    def eta(self) -> float:
        return self.schedule.eta

    @property
    def solver_flags(self) -> int:
        return int(self.flags.sum())

    def replay_queue(self) -> np.ndarray:
        "Recompute q_1..q_T from the recorded violations"
        queue = VirtualQueue.empty(self.m)
        replay = np.empty_like(self.q)
        for t in range(self.T):
            queue = queue.advance(self.gamma, self.violations[t])
            replay[t] = queue.q
        return replay

    def to_frame(self) -> pd.DataFrame:
        """Per-step table, one row per t with vector series spread over columns."""
        columns = {"t": np.arange(1, self.T + 1)}

        def spread(name, values):
            for j in range(values.shape[1]):
                columns[f"{name}_{j}"] = values[:, j]

        spread("x", self.x)
        if self.z is not None:
            spread("z", self.z)
        spread("c", self.c)
        if self.h is not None:
            spread("h", self.h)
        columns["f"] = self.f
        spread("violation", self.violations)
        spread("q", self.q)
        spread("q_hat", self.q_hat)
        columns["gap_z"] = self.gaps[:, 0]
        columns["gap_x"] = self.gaps[:, 1]
        columns["solver_flags"] = self.flags
        return pd.DataFrame(columns)


def _check_horizon(env: Environment, schedule: ScheduleParams):
    if schedule.T != env.T:
        raise InvalidConfigurationError(
            f"Schedule horizon {schedule.T} doesn't match environment horizon {env.T}"
        )


def _solve(
    v, w, schedule, env, t, z, prox_weight, solver: SolverSettings
):
    spec = CompositeStepSpec(
        v=v,
        w=w,
        eta=schedule.eta,
        gamma=schedule.gamma,
        g=env.constraints,
        t=t,
        z=z,
        X=env.X,
        prox_weight=prox_weight,
        tol=solver.tol,
        max_iters=solver.max_iters,
        method=solver.method,
    )
    return solve_composite_step(spec)


def run_ogd(env: Environment, schedule: ScheduleParams) -> RunTrace:
    """Projected online gradient descent x_{t+1} = Proj_X(x_t - eta c_t).

    The queues are shadow bookkeeping with the schedule's gamma; they don't feed back
    into the iterates.

    Parameters
    ----------
    env : Environment
        Generated environment.
    schedule : ScheduleParams
        Step size (and gamma for the shadow queue).

    Returns
    -------
    RunTrace
    """
    _check_horizon(env, schedule)
    T, p, m = env.T, env.p, env.m
    x = QUADRATIC.minimizer(env.X)
    queue = VirtualQueue.empty(m)
    xs, qs = np.empty((T, p)), np.empty((T, m))
    f, violations = np.empty(T), np.empty((T, m))

    for t in range(1, T + 1):
        c = env.costs[t - 1]
        xs[t - 1] = x
        f[t - 1] = c @ x
        violations[t - 1] = positive_part(eval_constraints(env.constraints, t, x))
        queue = queue.advance(schedule.gamma, violations[t - 1])
        qs[t - 1] = queue.q
        x = env.X.project(x - schedule.eta * c)

    return RunTrace(
        algorithm=OGD,
        schedule=schedule,
        environment=env.identifier,
        x=xs,
        q=qs,
        q_hat=qs.copy(),
        c=env.costs.copy(),
        f=f,
        violations=violations,
        gaps=np.zeros((T, 2)),
        flags=np.zeros(T, dtype=int),
        prox_weight=1.0,
        q_hat0=np.zeros(m),
        x_final=x,
    )


def run_baseline(
    env: Environment,
    schedule: ScheduleParams,
    solver: Optional[SolverSettings] = None,
) -> RunTrace:
    """Primal-dual updates without prediction.

    At each step, after c_t is revealed:

        q_t = q_{t-1} + gamma [g(x_t)]_+
        q_hat_t = q_t + gamma [g(x_t)]_+
        x_{t+1} = argmin eta <x, c_t> + eta gamma <q_hat_t, [g(x)]_+> + ||x - x_t||^2

    Parameters
    ----------
    env : Environment
        Environment with static constraints.
    schedule : ScheduleParams
        Constant step sizes.
    solver : SolverSettings, optional
        Inner solver options, by default SolverSettings().

    Returns
    -------
    RunTrace

    Raises
    ------
    InvalidConfigurationError
        The constraints change over time.
    """
    if not env.constraints.is_static:
        raise InvalidConfigurationError(
            "The baseline algorithm needs time-invariant constraints, "
            f"got {env.constraints.kind}"
        )
    _check_horizon(env, schedule)
    solver = solver or SolverSettings()
    T, p, m = env.T, env.p, env.m
    x = QUADRATIC.minimizer(env.X)
    queue = VirtualQueue.empty(m)
    xs, qs, q_hats = np.empty((T, p)), np.empty((T, m)), np.empty((T, m))
    f, violations = np.empty(T), np.empty((T, m))
    gaps, flags = np.zeros((T, 2)), np.zeros(T, dtype=int)

    for t in range(1, T + 1):
        c = env.costs[t - 1]
        xs[t - 1] = x
        f[t - 1] = c @ x
        violation = positive_part(eval_constraints(env.constraints, t, x))
        violations[t - 1] = violation
        queue = queue.advance(schedule.gamma, violation).lookahead(
            schedule.gamma, violation
        )
        qs[t - 1], q_hats[t - 1] = queue.q, queue.q_hat

        step = _solve(c, queue.q_hat, schedule, env, t, x, 2.0, solver)
        x = step.x
        gaps[t - 1, 1] = step.gap
        flags[t - 1] = int(not step.verified)

    if flags.any():
        logger.warning(f"{flags.sum()} baseline steps missed the solver tolerance")
    return RunTrace(
        algorithm=BASELINE,
        schedule=schedule,
        environment=env.identifier,
        x=xs,
        q=qs,
        q_hat=q_hats,
        c=env.costs.copy(),
        f=f,
        violations=violations,
        gaps=gaps,
        flags=flags,
        prox_weight=2.0,
        q_hat0=np.zeros(m),
        x_final=x,
    )


def run_predictive(
    env: Environment,
    predictor: Predictor,
    schedule: ScheduleParams,
    solver: Optional[SolverSettings] = None,
) -> RunTrace:
    """Primal-dual updates with gradient hints.

    Starting from x_1 = z_1 = argmin_X R and q_0 = 0, q_hat_0 = gamma [g_1(z_1)]_+,
    each step t plays x_t, observes c_t, then

        q_t = q_{t-1} + gamma [g_t(x_t)]_+
        z_{t+1} = argmin eta <z, c_t> + eta gamma <q_hat_{t-1}, [g_t(z)]_+> + D_R(z, z_t)
        q_hat_t = q_t + gamma [g_{t+1}(z_{t+1})]_+
        x_{t+1} = argmin eta <x, h_{t+1}> + eta gamma <q_hat_t, [g_{t+1}(x)]_+> + D_R(x, z_{t+1})

    At t = T the lookahead uses g_{T+1} = g_T and h_{T+1} = h_T. The hint h_1 is
    never observed and is recorded as 0, which is the hint x_1 = z_1 corresponds to.

    Parameters
    ----------
    env : Environment
        Generated environment.
    predictor : Predictor
        Hint source built for horizon env.T.
    schedule : ScheduleParams
        Constant step sizes.
    solver : SolverSettings, optional
        Inner solver options, by default SolverSettings().

    Returns
    -------
    RunTrace
    """
    _check_horizon(env, schedule)
    if predictor.T != env.T:
        raise InvalidConfigurationError(
            f"Predictor horizon {predictor.T} doesn't match environment horizon {env.T}"
        )
    solver = solver or SolverSettings()
    T, p, m = env.T, env.p, env.m
    g, gamma = env.constraints, schedule.gamma

    z = QUADRATIC.minimizer(env.X)
    x = z.copy()
    queue = VirtualQueue.empty(m)
    q_hat0 = gamma * positive_part(eval_constraints(g, 1, z))
    q_hat_prev = q_hat0

    xs, zs, hs = np.empty((T, p)), np.empty((T, p)), np.zeros((T, p))
    qs, q_hats = np.empty((T, m)), np.empty((T, m))
    f, violations, z_violations = np.empty(T), np.empty((T, m)), np.empty((T, m))
    gaps, flags = np.zeros((T, 2)), np.zeros(T, dtype=int)

    for t in range(1, T + 1):
        c = env.costs[t - 1]
        xs[t - 1], zs[t - 1] = x, z
        f[t - 1] = c @ x
        violation = positive_part(eval_constraints(g, t, x))
        violations[t - 1] = violation
        z_violations[t - 1] = positive_part(eval_constraints(g, t, z))
        queue = queue.advance(gamma, violation)

        z_step = _solve(c, q_hat_prev, schedule, env, t, z, 1.0, solver)
        z = z_step.x

        t_next = min(t + 1, T)
        if t < T:
            h_next = hint(predictor, env.costs[t], t + 1, T, env.costs[:t])
            hs[t] = h_next
        else:
            h_next = hs[T - 1]
        queue = queue.lookahead(gamma, eval_constraints(g, t_next, z))

        x_step = _solve(h_next, queue.q_hat, schedule, env, t_next, z, 1.0, solver)
        x = x_step.x

        qs[t - 1], q_hats[t - 1] = queue.q, queue.q_hat
        q_hat_prev = queue.q_hat
        gaps[t - 1] = z_step.gap, x_step.gap
        flags[t - 1] = int(not z_step.verified) + int(not x_step.verified)
        logger.debug(f"t={t}: ||q||_1={queue.q.sum():.4g}, f={f[t - 1]:.4g}")

    if flags.any():
        logger.warning(f"{flags.sum()} predictive solves missed the solver tolerance")
    return RunTrace(
        algorithm=PREDICTIVE,
        schedule=schedule,
        environment=env.identifier,
        x=xs,
        q=qs,
        q_hat=q_hats,
        c=env.costs.copy(),
        f=f,
        violations=violations,
        gaps=gaps,
        flags=flags,
        prox_weight=1.0,
        q_hat0=q_hat0,
        z=zs,
        h=hs,
        z_violations=z_violations,
        z_final=z,
        x_final=x,
    )


def run_algorithm(
    algorithm: str,
    env: Environment,
    schedule: ScheduleParams,
    predictor: Optional[Predictor] = None,
    solver: Optional[SolverSettings] = None,
) -> RunTrace:
    "Dispatch to one of the engines by name"
    if algorithm == OGD:
        return run_ogd(env, schedule)
    if algorithm == BASELINE:
        return run_baseline(env, schedule, solver)
    if algorithm == PREDICTIVE:
        if predictor is None:
            raise InvalidConfigurationError("The predictive algorithm needs a predictor")
        return run_predictive(env, predictor, schedule, solver)
    raise InvalidConfigurationError(
        f"Algorithm must be one of {ALGORITHMS}, got {algorithm}"
    )
