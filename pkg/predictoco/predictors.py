"""
Gradient hints h_t supplied to the predictive engine.

Every predictor is built for a horizon T. The engine asks for h_{t+1} right after
c_t is revealed, passing the realized history c_1..c_t. Oracle predictors also see the
upcoming c_{t+1}, which is what makes them oracles.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from predictoco.core import as_vector
from predictoco.errors import (
    InvalidConfigurationError,
    InvalidInputError,
    InvalidParameterError,
)

logger = logging.getLogger(__name__)

ORACLE_DECAY = "oracle-decay"
LAST_VALUE = "last-value"
ZERO = "zero"
PERFECT = "perfect"
RUNNING_MEAN = "running-mean"
PREDICTOR_KINDS = (ORACLE_DECAY, LAST_VALUE, ZERO, PERFECT, RUNNING_MEAN)


@dataclass(frozen=True)
class PredictorSpec:
    """Which hints to produce.

    Attributes
    ----------
    kind : str
        One of "oracle-decay", "last-value", "zero", "perfect", "running-mean".
    a_exp : float
        Hint-quality exponent for oracle-decay, in [0, 1).
    delta : float, optional
        Hint error scale for oracle-decay, by default None (the gradient bound G).
    seed : int
        Seed of the oracle-decay perturbation directions.
    """

    kind: str = ORACLE_DECAY
    a_exp: float = 0.0
    delta: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PREDICTOR_KINDS:
            raise InvalidParameterError(
                f"Predictor kind must be one of {PREDICTOR_KINDS}, got {self.kind}"
            )
        if not 0 <= self.a_exp < 1:
            raise InvalidParameterError(f"a_exp must lie in [0, 1), got {self.a_exp}")
        if self.delta is not None and self.delta < 0:
            raise InvalidParameterError(f"delta must be nonnegative, got {self.delta}")


class Predictor(ABC):
    """Predictor base class.

    Subclasses implement `_hint`, which gets the upcoming gradient c_t (only oracles
    may use it) and the history c_1..c_{t-1} as a (t - 1, p) array.
    """

    kind = None

    def __init__(self, T: int):
        if int(T) != T or T < 1:
            raise InvalidParameterError(f"Predictor horizon must be positive, got {T}")
        self.T = int(T)

    def hint(self, c_t, t: int, history: Optional[np.ndarray] = None) -> np.ndarray:
        """Return h_t.

        Parameters
        ----------
        c_t : array-like
            The gradient the hint stands in for.
        t : int
            Step index, 1..T.
        history : np.ndarray, optional
            Gradients revealed before step t, by default None (no history).

        Returns
        -------
        np.ndarray
            The hint, same length as c_t.
        """
        c_t = as_vector(c_t, name="c_t")
        if not 1 <= t <= self.T:
            raise InvalidInputError(f"Hint requested for step {t} outside 1..{self.T}")
        if history is None:
            history = np.empty((0, c_t.size))
        history = np.asarray(history, dtype=float).reshape(-1, c_t.size)
        return self._hint(c_t, t, history)

    @abstractmethod
    def _hint(self, c_t: np.ndarray, t: int, history: np.ndarray) -> np.ndarray:
        pass

    def __repr__(self):
        return f"{type(self).__name__}(T={self.T})"


class PerfectPredictor(Predictor):
    kind = PERFECT

    def _hint(self, c_t, t, history):
        return c_t.copy()


class ZeroPredictor(Predictor):
    kind = ZERO

    def _hint(self, c_t, t, history):
        return np.zeros_like(c_t)


class LastValuePredictor(Predictor):
    """h_t = c_{t-1}, with h_1 = 0."""

    kind = LAST_VALUE

    def _hint(self, c_t, t, history):
        if len(history) == 0:
            return np.zeros_like(c_t)
        return history[-1].copy()


class RunningMeanPredictor(Predictor):
    """h_t = mean of c_1..c_{t-1}, with h_1 = 0."""

    kind = RUNNING_MEAN

    def _hint(self, c_t, t, history):
        if len(history) == 0:
            return np.zeros_like(c_t)
        return history.mean(axis=0)


class OracleDecayPredictor(Predictor):
    """h_t = c_t + delta T^(-a/2) u_t with u_t a seeded uniform unit vector.

    The direction only depends on (seed, t), so a hint can be recomputed out of
    order and the error norm is the same at every step.
    """

    kind = ORACLE_DECAY

    def __init__(self, T: int, a_exp: float, delta: float, seed: int = 0):
        super().__init__(T)
        self.a_exp = float(a_exp)
        self.delta = float(delta)
        self.seed = int(seed)
        self.radius = self.delta * float(self.T) ** (-self.a_exp / 2)

    def direction(self, t: int, p: int) -> np.ndarray:
        rng = np.random.default_rng([self.seed, t])
        u = rng.standard_normal(p)
        while not np.linalg.norm(u) > 0:
            u = rng.standard_normal(p)
        return u / np.linalg.norm(u)

    def _hint(self, c_t, t, history):
        return c_t + self.radius * self.direction(t, c_t.size)

    def __repr__(self):
        return (
            f"OracleDecayPredictor(T={self.T}, a_exp={self.a_exp}, "
            f"delta={self.delta}, seed={self.seed})"
        )


def make_predictor(spec: PredictorSpec, T: int, G: float = 1.0) -> Predictor:
    """Build the predictor described by `spec` for horizon T.

    Parameters
    ----------
    spec : PredictorSpec
        Predictor description.
    T : int
        Horizon.
    G : float, optional
        Gradient bound, the default hint error scale, by default 1.0.

    Returns
    -------
    Predictor
    """
    if spec.kind == ORACLE_DECAY:
        delta = G if spec.delta is None else spec.delta
        return OracleDecayPredictor(T, spec.a_exp, delta, spec.seed)
    simple = {
        PERFECT: PerfectPredictor,
        ZERO: ZeroPredictor,
        LAST_VALUE: LastValuePredictor,
        RUNNING_MEAN: RunningMeanPredictor,
    }
    return simple[spec.kind](T)


def hint(predictor: Predictor, c_t, t: int, T: int, history=None) -> np.ndarray:
    "h_t from `predictor`, checking it was built for horizon T"
    if predictor.T != T:
        raise InvalidConfigurationError(
            f"Predictor was built for T={predictor.T} but the run has T={T}"
        )
    return predictor.hint(c_t, t, history)


def hint_error(predictor: Predictor, c: np.ndarray) -> np.ndarray:
    """||c_t - h_t|| at every step for a (T, p) gradient sequence, with the history
    the engine would pass."""
    c = np.asarray(c, dtype=float)
    errors = np.empty(len(c))
    for t in range(1, len(c) + 1):
        errors[t - 1] = np.linalg.norm(c[t - 1] - predictor.hint(c[t - 1], t, c[: t - 1]))
    return errors


def oracle_error_radius(T: int, a_exp: float, delta: float) -> float:
    "delta T^(-a/2)"
    return delta * math.pow(T, -a_exp / 2)
