"""
Runs, sweeps and the verification battery behind the command line.

A cell is one (T, seed) run of one algorithm on one environment. Cells are independent,
so they can run in a process pool; results are always sorted by cell before anything
is written.
"""

import logging
import math
import time
from copy import deepcopy
from dataclasses import dataclass, field, replace
from functools import partial
from multiprocessing import Pool
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from predictoco.algorithms import RunTrace, SolverSettings, run_algorithm
from predictoco.core import (
    BASELINE,
    PREDICTIVE,
    STATIC_AFFINE,
    ConstraintBlock,
    ScheduleParams,
    make_schedule,
)
from predictoco.environments import (
    DRIFTING,
    Environment,
    EnvironmentSpec,
    generate_environment,
)
from predictoco.geometry import make_feasible_set
from predictoco.metrics import (
    RateFit,
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
from predictoco.predictors import Predictor, PredictorSpec, make_predictor
from predictoco.subproblem import (
    CompositeStepSpec,
    brute_force_step,
    objective,
    solve_composite_step,
)
from predictoco.util import update_dictionary

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "algorithm",
    "T",
    "seed",
    "c_exp",
    "a_exp",
    "eta",
    "gamma",
    "R_T",
    "C_T",
    "thm3_rhs_regret",
    "thm3_rhs_violation",
    "lemma1_slack_1",
    "lemma1_slack_2",
    "queue_residual",
    "solver_flags",
    "wall_ms",
]

CHECK_NAMES = ["queue_identity", "lemma1", "theorem3", "solver", "comparator"]

# Reported next to the pass/fail columns of checks.csv, never checked
DIAGNOSTIC_COLUMNS = [
    "lemma1_statement_slack_1",
    "thm3_strict_violation_bound",
    "thm3_max_abs_cost",
    "thm3_F",
]

ORACLE_TOLERANCE = 1e-4
GRID_COMPARATOR_TOLERANCE = 1e-3
GRID_COMPARATOR_RESOLUTION = 1e-3


@dataclass(frozen=True, order=True)
class Cell:
    "One run: horizon, seed offset, suite entry (-1 for the base environment) and algorithm"

    T: int
    seed: int
    suite: int = -1
    algorithm: str = PREDICTIVE

    @property
    def name(self) -> str:
        suite = "" if self.suite < 0 else f"_suite{self.suite}"
        return f"{self.algorithm}_T{self.T}_seed{self.seed}{suite}"


@dataclass
class CellResult:
    cell: Cell
    environment: str
    row: dict
    checks: Dict[str, Optional[bool]]
    trace: Optional[RunTrace] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.checks.values())

    @property
    def degraded(self) -> bool:
        return self.row["solver_flags"] > 0


def environment_settings(settings: dict, suite: int = -1) -> dict:
    "The environment section, with suite entry `suite` merged over it"
    env = deepcopy(settings["environment"])
    if suite >= 0:
        env = update_dictionary(env, deepcopy(settings["suite"][suite]))
    return env


def environment_spec(settings: dict, T: int, seed: int, suite: int = -1) -> EnvironmentSpec:
    """Environment description for one cell. The cell seed is added to the base seed.

    Parameters
    ----------
    settings : dict
        Complete settings.
    T : int
        Horizon.
    seed : int
        Seed offset of the cell.
    suite : int, optional
        Suite entry to merge over the environment section, by default -1 (none).

    Returns
    -------
    EnvironmentSpec
    """
    env = environment_settings(settings, suite)
    fs = env["feasible_set"]
    if fs["kind"] == "ball":
        feasible_set = {"kind": "ball", "center": fs["center"], "radius": fs["radius"]}
    else:
        feasible_set = {"kind": "box", "lower": fs["lower"], "upper": fs["upper"]}
    return EnvironmentSpec(
        p=env["p"],
        m=env["m"],
        T=T,
        cost_kind=env["cost_kind"],
        constraint_kind=env["constraint_kind"],
        feasible_set=feasible_set,
        G=env["G"],
        F=env["F"],
        margin=env["constraint"]["margin"],
        sigma=env["cost"]["sigma"],
        segments=env["cost"]["segments"],
        bias=env["cost"]["bias"],
        jitter=env["constraint"]["jitter"],
        seed=env["seed"] + seed,
    )


def schedule_for(settings: dict, algorithm: str, env: Environment) -> ScheduleParams:
    "Constant schedule for `algorithm` on `env`; OGD uses the baseline step sizes"
    sched = settings["schedule"]
    G = sched["G"] if sched["G"] is not None else env.G
    variant = PREDICTIVE if algorithm == PREDICTIVE else BASELINE
    schedule = make_schedule(env.T, sched["c_exp"], variant, G, env.F, sched["a_exp"])
    if sched["gamma_override"] is not None:
        logger.info(f"Queue gain overridden to {sched['gamma_override']}")
        schedule = replace(schedule, gamma=float(sched["gamma_override"]))
    return schedule


def predictor_for(settings: dict, schedule: ScheduleParams, seed: int = 0) -> Predictor:
    "Predictor for one cell; a missing a_exp falls back to the schedule's"
    pred = settings["predictor"]
    a_exp = pred["a_exp"] if pred["a_exp"] is not None else schedule.a_exp
    spec = PredictorSpec(
        kind=pred["kind"], a_exp=a_exp, delta=pred["delta"], seed=pred["seed"] + seed
    )
    return make_predictor(spec, schedule.T, schedule.G)


def solver_for(settings: dict) -> SolverSettings:
    s = settings["solver"]
    return SolverSettings(tol=s["tol"], max_iters=s["max_iters"], method=s["method"])


def run_cell(settings: dict, cell: Cell, keep_trace: bool = False) -> CellResult:
    """Generate the environment of `cell`, run it and evaluate the requested checks.

    Parameters
    ----------
    settings : dict
        Complete settings.
    cell : Cell
        The run to execute.
    keep_trace : bool, optional
        Return the full RunTrace with the result, by default False.

    Returns
    -------
    CellResult
        The summary row, a pass/fail (or None when not applicable) per check and the
        trace if requested.
    """
    start = time.perf_counter()
    checks = settings["checks"]
    solver = solver_for(settings)

    env = generate_environment(environment_spec(settings, cell.T, cell.seed, cell.suite))
    schedule = schedule_for(settings, cell.algorithm, env)
    predictor = None
    if cell.algorithm == PREDICTIVE:
        predictor = predictor_for(settings, schedule, cell.seed)
    trace = run_algorithm(cell.algorithm, env, schedule, predictor, solver)
    comp = compute_comparator(env.costs, env.constraints, env.X, witness=env.witness)

    queue = check_queue_identity(trace)
    results = {name: None for name in CHECK_NAMES}
    if checks["queue_identity"]:
        results["queue_identity"] = queue.passed and queue.replay_matches
    results["solver"] = trace.solver_flags == 0

    lemma_slacks = (math.nan, math.nan)
    bounds = (math.nan, math.nan)
    diagnostics = {name: math.nan for name in DIAGNOSTIC_COLUMNS}
    if cell.algorithm == PREDICTIVE:
        if checks["lemma1"]:
            lemma = check_lemma1(trace, comp, prefix=checks["prefix_mode"], tol=solver.tol)
            lemma_slacks = (lemma.slack_1, lemma.slack_2)
            diagnostics["lemma1_statement_slack_1"] = lemma.statement_slack_1
            results["lemma1"] = lemma.passed
        if checks["theorem3"]:
            if abs(schedule.gamma ** 2 * schedule.G ** 2 * schedule.eta - 1.0) <= 1e-9:
                thm = check_theorem3_bounds(trace, comp, env.constraints, tol=solver.tol)
                bounds = (thm.regret_bound, thm.violation_bound)
                results["theorem3"] = thm.passed
                diagnostics.update(
                    thm3_strict_violation_bound=thm.strict_violation_bound,
                    thm3_max_abs_cost=thm.max_abs_cost,
                    thm3_F=thm.F,
                )
            else:
                logger.info(f"{cell.name}: queue gain isn't 1/(G sqrt(eta)), bounds skipped")
    if checks["comparator"]:
        optimality = check_comparator_optimality(
            env.costs, env.constraints, env.X, comp, env.witness, seed=cell.seed
        )
        results["comparator"] = optimality.passed

    elapsed = 1000.0 * (time.perf_counter() - start)
    logger.info(f"{cell.name} on {env.identifier} finished in {elapsed:.0f} ms")
    row = {
        "algorithm": cell.algorithm,
        "T": cell.T,
        "seed": cell.seed,
        "c_exp": schedule.c_exp,
        "a_exp": schedule.a_exp,
        "eta": schedule.eta,
        "gamma": schedule.gamma,
        "R_T": regret(trace, comp),
        "C_T": violation(trace),
        "thm3_rhs_regret": bounds[0],
        "thm3_rhs_violation": bounds[1],
        "lemma1_slack_1": lemma_slacks[0],
        "lemma1_slack_2": lemma_slacks[1],
        "queue_residual": queue.residual,
        "solver_flags": trace.solver_flags,
        "wall_ms": elapsed if settings["output"]["record_wall_time"] else None,
    }
    return CellResult(
        cell=cell,
        environment=env.identifier,
        row=row,
        checks=results,
        trace=trace if keep_trace else None,
        diagnostics=diagnostics,
    )


def run_cells(
    settings: dict, cells: List[Cell], jobs: int = 1, keep_traces: bool = False
) -> List[CellResult]:
    """Run every cell, in a process pool when jobs > 1, and sort the results by cell."""
    worker = partial(run_cell, settings, keep_trace=keep_traces)
    logger.info(f"Running {len(cells)} cells with {jobs} worker(s)")
    if jobs > 1 and len(cells) > 1:
        with Pool(processes=jobs) as pool:
            results = pool.map(worker, cells)
    else:
        results = [worker(cell) for cell in cells]
    return sorted(results, key=lambda r: r.cell)


def make_cells(settings: dict, algorithm: Optional[str] = None, suites=None) -> List[Cell]:
    algorithm = algorithm or settings["algorithm"]
    suites = [-1] if suites is None else suites
    return [
        Cell(T=T, seed=seed, suite=suite, algorithm=algorithm)
        for suite in suites
        for T in settings["sweep"]["T"]
        for seed in settings["sweep"]["seeds"]
    ]


def summary_frame(results: List[CellResult]) -> pd.DataFrame:
    "One row per result with the stable summary columns"
    return pd.DataFrame([r.row for r in results], columns=SUMMARY_COLUMNS)


def checks_frame(results: List[CellResult]) -> pd.DataFrame:
    "Pass/fail of every check per run; empty cells mean the check didn't apply"
    rows = []
    for r in results:
        row = {
            "algorithm": r.cell.algorithm,
            "T": r.cell.T,
            "seed": r.cell.seed,
            "suite": r.cell.suite,
            "environment": r.environment,
        }
        row.update(r.checks)
        row["passed"] = r.passed
        row.update(
            {name: r.diagnostics.get(name, math.nan) for name in DIAGNOSTIC_COLUMNS}
        )
        rows.append(row)
    return pd.DataFrame(rows)


def theoretical_exponents(algorithm: str, c_exp: float, a_exp: float = 0.0):
    """Growth exponents of regret and violation guaranteed for constant schedules.

    Returns
    -------
    tuple
        (regret exponent, violation exponent or None). OGD ignores the constraints,
        so it has no violation exponent.
    """
    if algorithm == PREDICTIVE:
        return max(1.0 - a_exp - c_exp, c_exp), 0.5 - c_exp / 2.0
    if algorithm == BASELINE:
        return max(1.0 - c_exp, c_exp), 0.5 - c_exp / 2.0
    return 0.5, None


@dataclass
class RateReport:
    """Fitted log-log slopes of mean positive-part regret and mean violation for one
    (algorithm, c_exp, a_exp) group, against the guaranteed exponents."""

    algorithm: str
    c_exp: float
    a_exp: float
    T: List[int]
    mean_regret: List[float]
    mean_violation: List[float]
    regret_fit: Optional[RateFit]
    violation_fit: Optional[RateFit]
    regret_exponent: float
    violation_exponent: Optional[float]
    regret_slack: float
    violation_slack: float
    degraded: bool = False

    @property
    def regret_passed(self) -> bool:
        if self.regret_fit is None:
            return True
        return self.regret_fit.slope <= self.regret_exponent + self.regret_slack

    @property
    def violation_passed(self) -> bool:
        if self.violation_fit is None or self.violation_exponent is None:
            return True
        return self.violation_fit.slope <= self.violation_exponent + self.violation_slack

    @property
    def passed(self) -> bool:
        return self.regret_passed and self.violation_passed

    def to_text(self) -> str:
        def describe(label, fit, exponent, slack, passed):
            if fit is None:
                return f"  {label}: fewer than two positive means, nothing to fit"
            if exponent is None:
                return f"  {label}: slope {fit.slope:.4f} (R^2 {fit.r2:.3f}), no guarantee"
            status = "PASS" if passed else "FAIL"
            return (
                f"  {label}: slope {fit.slope:.4f} (R^2 {fit.r2:.3f}) vs exponent "
                f"{exponent:.4f} + {slack:.2f}  {status}"
            )

        lines = [
            f"{self.algorithm} c_exp={self.c_exp:g} a_exp={self.a_exp:g}"
            + ("  [DEGRADED: unverified solver tolerance]" if self.degraded else "")
        ]
        lines.append(f"  {'T':>8} {'mean [R_T]+':>16} {'mean C_T':>16}")
        for T, r, c in zip(self.T, self.mean_regret, self.mean_violation):
            lines.append(f"  {T:>8d} {r:>16.6g} {c:>16.6g}")
        lines.append(
            describe(
                "regret", self.regret_fit, self.regret_exponent, self.regret_slack,
                self.regret_passed,
            )
        )
        lines.append(
            describe(
                "violation", self.violation_fit, self.violation_exponent,
                self.violation_slack, self.violation_passed,
            )
        )
        return "\n".join(lines)


def _positive_fit(T: np.ndarray, values: np.ndarray) -> Optional[RateFit]:
    keep = values > 0
    if keep.sum() < 2:
        return None
    return fit_rate(list(zip(T[keep], values[keep])))


def rate_report(
    summary: pd.DataFrame, regret_slack: float = 0.15, violation_slack: float = 0.10
) -> List[RateReport]:
    """Average over seeds per T and fit the growth rates of every algorithm group.

    Parameters
    ----------
    summary : DataFrame
        Summary rows, as written to summary.csv.
    regret_slack : float, optional
        Allowed excess of the regret slope over its exponent, by default 0.15.
    violation_slack : float, optional
        Allowed excess of the violation slope over its exponent, by default 0.10.

    Returns
    -------
    list of RateReport
    """
    reports = []
    for (algorithm, c_exp, a_exp), group in summary.groupby(
        ["algorithm", "c_exp", "a_exp"], sort=True
    ):
        means = (
            group.assign(regret_plus=group["R_T"].clip(lower=0))
            .groupby("T", sort=True)
            .agg(mean_regret=("regret_plus", "mean"), mean_violation=("C_T", "mean"))
        )
        T = means.index.to_numpy(dtype=float)
        regret_exp, violation_exp = theoretical_exponents(algorithm, c_exp, a_exp)
        report = RateReport(
            algorithm=algorithm,
            c_exp=float(c_exp),
            a_exp=float(a_exp),
            T=[int(t) for t in means.index],
            mean_regret=means["mean_regret"].tolist(),
            mean_violation=means["mean_violation"].tolist(),
            regret_fit=_positive_fit(T, means["mean_regret"].to_numpy()),
            violation_fit=_positive_fit(T, means["mean_violation"].to_numpy()),
            regret_exponent=regret_exp,
            violation_exponent=violation_exp,
            regret_slack=regret_slack,
            violation_slack=violation_slack,
            degraded=bool(group["solver_flags"].sum() > 0),
        )
        if report.degraded:
            logger.warning(f"Rate report for {algorithm} includes unverified solves")
        reports.append(report)
    return reports


def sweep(settings: dict, jobs: int = 1, keep_traces: bool = False):
    """Run every (T, seed) cell of the configured algorithm and fit growth rates.

    Returns
    -------
    tuple
        (sorted list of CellResult, list of RateReport)
    """
    results = run_cells(settings, make_cells(settings), jobs, keep_traces)
    reports = rate_report(
        summary_frame(results),
        settings["sweep"]["regret_slack"],
        settings["sweep"]["violation_slack"],
    )
    return results, reports


@dataclass
class CheckSummary:
    """Outcome of one check across every instance it ran on."""

    name: str
    total: int = 0
    failures: List[str] = field(default_factory=list)
    worst: Optional[float] = None
    detail: str = ""

    @property
    def skipped(self) -> bool:
        return self.total == 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_text(self) -> str:
        if self.skipped:
            return f"{self.name:<24} SKIPPED {self.detail}".rstrip()
        status = "PASS" if self.passed else "FAIL"
        ok = self.total - len(self.failures)
        line = f"{self.name:<24} {status}    {ok}/{self.total}"
        if self.worst is not None:
            line += f"  worst {self.worst:.3e}"
        if self.detail:
            line += f"  {self.detail}"
        for failure in self.failures[:20]:
            line += f"\n    failed: {failure}"
        return line


@dataclass
class VerificationReport:
    checks: List[CheckSummary]
    results: List[CellResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failing_checks(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_text(self) -> str:
        lines = [c.to_text() for c in self.checks]
        lines.append("")
        lines.append(f"overall {'PASS' if self.passed else 'FAIL'}")
        if not self.passed:
            lines.append(f"failing checks: {', '.join(self.failing_checks)}")
        return "\n".join(lines)


def _summarize_runs(results: List[CellResult]) -> List[CheckSummary]:
    summaries = []
    residuals = [r.row["queue_residual"] for r in results]
    for name in CHECK_NAMES:
        summary = CheckSummary(name=name)
        for r in results:
            outcome = r.checks[name]
            if outcome is None:
                continue
            summary.total += 1
            if not outcome:
                summary.failures.append(f"{r.cell.name} ({r.environment})")
        if name == "queue_identity" and residuals:
            summary.worst = float(np.max(residuals))
        if name == "lemma1":
            slacks = [
                min(r.row["lemma1_slack_1"], r.row["lemma1_slack_2"])
                for r in results
                if r.checks["lemma1"] is not None
            ]
            if slacks:
                summary.worst = float(np.min(slacks))
                summary.detail = "(smallest slack)"
        if name == "theorem3":
            costs = [
                (r.diagnostics["thm3_max_abs_cost"], r.diagnostics["thm3_F"])
                for r in results
                if r.checks["theorem3"] is not None
            ]
            if costs:
                largest, F = max(costs)
                summary.detail = f"(largest |f_t| {largest:.3e}, F {F:.3e})"
        if name == "solver":
            flags = sum(r.row["solver_flags"] for r in results)
            summary.detail = f"({flags} unverified solves)"
        summaries.append(summary)
    return summaries


def random_step_spec(rng: np.random.Generator, p: int) -> CompositeStepSpec:
    """A random static composite step in dimension p, with slopes kept moderate so a
    zoomed grid reaches 1e-4 accuracy."""
    m = int(rng.integers(1, 3))
    if rng.uniform() < 0.5:
        X = make_feasible_set("box", p, lower=-1.0, upper=1.0)
    else:
        X = make_feasible_set("ball", p, center=0.0, radius=1.0)
    A = rng.standard_normal((m, p))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    b = 0.3 * rng.standard_normal(m)
    v = rng.standard_normal(p)
    v /= max(1.0, np.linalg.norm(v))
    return CompositeStepSpec(
        v=v,
        w=rng.uniform(0.0, 1.0, size=m),
        eta=float(rng.uniform(0.05, 0.5)),
        gamma=float(rng.uniform(0.5, 1.5)),
        g=ConstraintBlock.static(A, b),
        t=1,
        z=X.sample(rng, 1)[0],
        X=X,
        prox_weight=float(rng.choice([1.0, 2.0])),
    )


def check_solver_oracle(instances: int = 100, seed: int = 0) -> CheckSummary:
    """Compare solve_composite_step with the grid oracle on random 1-D and 2-D steps."""
    summary = CheckSummary(name="solver_oracle")
    worst = 0.0
    for i in range(instances):
        rng = np.random.default_rng([seed, i])
        p = 1 + i % 2
        spec = random_step_spec(rng, p)
        solved = solve_composite_step(spec)
        if p == 1:
            oracle = brute_force_step(spec, 1e-4, zoom_levels=1)
        else:
            oracle = brute_force_step(spec, 2e-2, zoom_levels=4)
        diff = abs(solved.value - objective(spec, oracle))
        worst = max(worst, diff)
        summary.total += 1
        if diff > ORACLE_TOLERANCE:
            summary.failures.append(f"instance {i} (p={p}): difference {diff:.3e}")
    summary.worst = worst
    return summary


def check_comparator_grid(instances: int = 50, seed: int = 0) -> CheckSummary:
    """Compare compute_comparator with an exhaustive grid on random 2-D instances.

    Gradients are scaled so sum_t ||c_t|| stays small, which keeps the grid's own
    discretization error well below the tolerance.
    """
    summary = CheckSummary(name="comparator_vs_grid")
    worst = 0.0
    for i in range(instances):
        rng = np.random.default_rng([seed, 10_000 + i])
        spec = EnvironmentSpec(
            p=2,
            m=int(rng.integers(1, 4)),
            T=10,
            cost_kind="iid-random",
            G=0.02,
            margin=0.004,
            bias=0.5,
            feasible_set={"kind": "box"} if i % 2 == 0 else {"kind": "ball"},
            seed=int(rng.integers(0, 2 ** 31)),
        )
        env = generate_environment(spec)
        comp = compute_comparator(env.costs, env.constraints, env.X, witness=env.witness)
        grid = grid_comparator(
            env.costs, env.constraints, env.X, GRID_COMPARATOR_RESOLUTION
        )
        diff = abs(comp.value - grid.value)
        worst = max(worst, diff)
        summary.total += 1
        if diff > GRID_COMPARATOR_TOLERANCE:
            summary.failures.append(f"{spec.identifier}: difference {diff:.3e}")
    summary.worst = worst
    return summary


def advantage_settings(settings: dict) -> dict:
    "Settings of the drifting-cost study, with static constraints so both engines apply"
    study = settings["checks"]["advantage"]
    paired = deepcopy(settings)
    paired["environment"]["cost_kind"] = DRIFTING
    paired["environment"]["cost"]["sigma"] = study["sigma"]
    paired["environment"]["constraint_kind"] = STATIC_AFFINE
    paired["schedule"]["c_exp"] = study["c_exp"]
    paired["schedule"]["gamma_override"] = None
    paired["predictor"]["kind"] = study["predictor"]
    paired["sweep"]["T"] = [study["T"]]
    paired["sweep"]["seeds"] = list(study["seeds"])
    paired["suite"] = []
    return paired


def check_prediction_advantage(settings: dict, jobs: int = 1) -> CheckSummary:
    """Mean R_T of the predictive engine must be strictly below the baseline's on the
    same drifting environments."""
    summary = CheckSummary(name="prediction_advantage")
    paired = advantage_settings(settings)
    cells = make_cells(paired, PREDICTIVE) + make_cells(paired, BASELINE)
    results = run_cells(paired, cells, jobs)
    frame = summary_frame(results)
    means = frame.groupby("algorithm")["R_T"].mean()
    summary.total = 1
    summary.worst = float(means[PREDICTIVE] - means[BASELINE])
    summary.detail = (
        f"(mean R_T predictive {means[PREDICTIVE]:.4g}, baseline {means[BASELINE]:.4g}, "
        f"T={paired['sweep']['T'][0]}, predictor {paired['predictor']['kind']})"
    )
    if not means[PREDICTIVE] < means[BASELINE]:
        summary.failures.append("predictive mean regret isn't below the baseline's")
    return summary


def verify(settings: dict, jobs: int = 1, keep_traces: bool = False) -> VerificationReport:
    """Run the verification battery.

    The suite runs (every suite entry crossed with the sweep T values and seeds) get
    the queue identity, both cumulative inequalities, the bounds, the solver flags and
    the comparator optimality check. The oracle comparisons and the prediction
    advantage study run once each when enabled.

    Parameters
    ----------
    settings : dict
        Complete settings.
    jobs : int, optional
        Worker processes, by default 1.
    keep_traces : bool, optional
        Keep the suite traces in the results, by default False.

    Returns
    -------
    VerificationReport
    """
    checks = settings["checks"]
    suites = list(range(len(settings["suite"]))) if settings["suite"] else None
    results = run_cells(settings, make_cells(settings, suites=suites), jobs, keep_traces)
    summaries = _summarize_runs(results)

    if checks["oracle"]:
        logger.info("Comparing the step solver with the grid oracle")
        summaries.append(check_solver_oracle(checks["oracle_instances"]))
        if checks["comparator"]:
            logger.info("Comparing the comparator with the grid oracle")
            summaries.append(check_comparator_grid(checks["comparator_instances"]))
    if checks["advantage"]["enabled"]:
        logger.info("Running the prediction advantage study")
        summaries.append(check_prediction_advantage(settings, jobs))
    else:
        summaries.append(CheckSummary(name="prediction_advantage", detail="(disabled)"))

    report = VerificationReport(checks=summaries, results=results)
    for summary in summaries:
        if not summary.passed:
            logger.warning(
                f"Check {summary.name} failed on {len(summary.failures)} instance(s)"
            )
    return report
