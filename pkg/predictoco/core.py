"""
Domain types shared by the online engines: linear costs, time-varying affine
constraints, virtual queues and the constant step-size schedules.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from predictoco.errors import InvalidInputError, InvalidParameterError

logger = logging.getLogger(__name__)

STATIC_AFFINE = "static-affine"
TIMEVARYING_AFFINE = "timevarying-affine"
CONSTRAINT_KINDS = (STATIC_AFFINE, TIMEVARYING_AFFINE)

BASELINE = "baseline"
PREDICTIVE = "predictive"
SCHEDULE_VARIANTS = (BASELINE, PREDICTIVE)

# A decision x_t is a plain 1-D float array of length p.
DecisionVector = np.ndarray


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def as_vector(x, p: Optional[int] = None, name: str = "x") -> np.ndarray:
    """Convert to a finite 1-D float array, checking the dimension if given.

    Parameters
    ----------
    x : array-like
        Values to convert.
    p : int, optional
        Required length, by default None (any length >= 1).
    name : str, optional
        Name used in error messages, by default "x".

    Returns
    -------
    np.ndarray
        A 1-D float array.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidInputError(f"{name} must be a non-empty vector, got shape {arr.shape}")
    if p is not None and arr.size != p:
        raise InvalidInputError(f"{name} has dimension {arr.size}, expected {p}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite coordinates")
    return arr


def positive_part(v) -> np.ndarray:
    "Componentwise max(v_j, 0)"
    return np.maximum(np.asarray(v, dtype=float), 0.0)


@dataclass(frozen=True, eq=False)
class LinearCost:
    """A linear cost f_t(x) = <c_t, x>."""

    gradient: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gradient", _frozen(as_vector(self.gradient, name="c_t")))

    def value(self, x) -> float:
        return float(self.gradient @ as_vector(x, self.gradient.size))


@dataclass(frozen=True, eq=False)
class ConstraintBlock:
    """Affine constraints g_t(x) = A_t x - b_t.

    A static block stores one (m, p) matrix and one m-vector shared by every step.
    A time-varying block stores (T, m, p) and (T, m) arrays, one slice per step.
    """

    kind: str
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.kind not in CONSTRAINT_KINDS:
            raise InvalidInputError(
                f"Constraint kind must be one of {CONSTRAINT_KINDS}, got {self.kind}"
            )
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        expected_ndim = 2 if self.kind == STATIC_AFFINE else 3
        if A.ndim != expected_ndim or b.ndim != expected_ndim - 1:
            raise InvalidInputError(
                f"A {self.kind} block needs A with {expected_ndim} dimensions and b "
                f"with {expected_ndim - 1}, got {A.shape} and {b.shape}"
            )
        if A.shape[:-1] != b.shape:
            raise InvalidInputError(f"A {A.shape} and b {b.shape} don't align")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidInputError("Constraint data must be finite")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))

    @classmethod
    def static(cls, A, b) -> "ConstraintBlock":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return cls(STATIC_AFFINE, A, np.atleast_1d(np.asarray(b, dtype=float)))

    @classmethod
    def timevarying(cls, A, b) -> "ConstraintBlock":
        return cls(TIMEVARYING_AFFINE, A, b)

    @property
    def is_static(self) -> bool:
        return self.kind == STATIC_AFFINE

    @property
    def m(self) -> int:
        return self.A.shape[-2]

    @property
    def p(self) -> int:
        return self.A.shape[-1]

    @property
    def horizon(self) -> Optional[int]:
        "Number of steps covered, None for a static block (valid at every step)"
        return None if self.is_static else self.A.shape[0]

    def _check_step(self, t: int):
        if t < 1 or (self.horizon is not None and t > self.horizon):
            raise InvalidInputError(
                f"Step {t} is outside the constraint horizon 1..{self.horizon}"
            )

    def matrix(self, t: int) -> np.ndarray:
        self._check_step(t)
        return self.A if self.is_static else self.A[t - 1]

    def offset(self, t: int) -> np.ndarray:
        self._check_step(t)
        return self.b if self.is_static else self.b[t - 1]

    def rows(self):
        """All constraint rows over the horizon as a stacked (A, b) pair.

        Static blocks return their single matrix; time-varying blocks stack every
        step, which is what an offline comparator needs.
        """
        if self.is_static:
            return self.A, self.b
        return self.A.reshape(-1, self.p), self.b.reshape(-1)


def eval_constraints(g: ConstraintBlock, t: int, x) -> np.ndarray:
    "Return g_t(x) = A_t x - b_t"
    x = as_vector(x, g.p)
    return g.matrix(t) @ x - g.offset(t)


def weighted_violation_subgradient(g: ConstraintBlock, t: int, x, w) -> np.ndarray:
    """A subgradient of x -> <w, [g_t(x)]_+> at x.

    Rows with g_t^j(x) > 0 contribute w_j * a_j. Inactive rows and rows exactly at
    the kink (g_t^j(x) = 0) contribute zero, which is a valid choice from the
    subdifferential at the kink.

    Parameters
    ----------
    g : ConstraintBlock
        The constraint block.
    t : int
        Step index (1-based).
    x : array-like
        Point of evaluation, length p.
    w : array-like
        Nonnegative weights, length m.

    Returns
    -------
    np.ndarray
        A length p subgradient.
    """
    w = as_vector(w, g.m, name="w")
    if np.any(w < 0):
        raise InvalidInputError("Subgradient weights must be nonnegative")
    active = eval_constraints(g, t, x) > 0
    return g.matrix(t).T @ np.where(active, w, 0.0)


@dataclass(frozen=True, eq=False)
class VirtualQueue:
    """The accumulators q_t and q_hat_t of the primal-dual updates.

    Updates return a new queue; an instance never changes after construction.
    """

    q: np.ndarray
    q_hat: np.ndarray

    def __post_init__(self):
        q = _frozen(self.q)
        q_hat = _frozen(self.q_hat)
        if q.shape != q_hat.shape or q.ndim != 1:
            raise InvalidInputError("q and q_hat must be vectors of the same length")
        if np.any(q < 0) or np.any(q_hat < 0):
            raise InvalidInputError("Virtual queues must stay nonnegative")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "q_hat", q_hat)

    @classmethod
    def empty(cls, m: int) -> "VirtualQueue":
        return cls(np.zeros(m), np.zeros(m))

    def advance(self, gamma: float, violation) -> "VirtualQueue":
        "q_t = q_{t-1} + gamma * violation, q_hat unchanged"
        return VirtualQueue(self.q + gamma * positive_part(violation), self.q_hat)

    def lookahead(self, gamma: float, violation) -> "VirtualQueue":
        "q_hat_t = q_t + gamma * violation"
        return VirtualQueue(self.q, self.q + gamma * positive_part(violation))


@dataclass(frozen=True, eq=False)
class ScheduleParams:
    """Constant step sizes tied to the environment bounds.

    Attributes
    ----------
    T : int
        Horizon.
    c_exp : float
        Step-size exponent c, eta = T^(-c).
    a_exp : float
        Hint-quality exponent a, ||c_t - h_t|| = O(T^(-a/2)).
    eta : float
        Step size.
    gamma : float
        Queue gain.
    G : float
        Gradient bound.
    F : float
        Function bound.
    variant : str
        "baseline" (gamma = 1/(G sqrt(2 eta))) or "predictive" (gamma = 1/(G sqrt(eta))).
    """

    T: int
    c_exp: float
    a_exp: float
    eta: float
    gamma: float
    G: float
    F: float
    variant: str

    @property
    def zeroed_coefficient(self) -> float:
        "gamma^2 G^2 - 1/eta, which vanishes for predictive schedules"
        return self.gamma ** 2 * self.G ** 2 - 1.0 / self.eta


def make_schedule(
    T: int,
    c_exp: float,
    variant: str,
    G: float,
    F: float = math.inf,
    a_exp: float = 0.0,
) -> ScheduleParams:
    """Build the constant schedule eta = T^(-c) with the variant's queue gain.

    Parameters
    ----------
    T : int
        Horizon, at least 1.
    c_exp : float
        Exponent in (0, 1).
    variant : str
        "baseline" or "predictive".
    G : float
        Positive gradient bound.
    F : float, optional
        Function bound, by default inf (unknown).
    a_exp : float, optional
        Hint-quality exponent in [0, 1), by default 0.

    Returns
    -------
    ScheduleParams
    """
    if int(T) != T or T < 1:
        raise InvalidParameterError(f"T must be a positive integer, got {T}")
    if not 0 < c_exp < 1:
        raise InvalidParameterError(f"c_exp must lie in (0, 1), got {c_exp}")
    if not 0 <= a_exp < 1:
        raise InvalidParameterError(f"a_exp must lie in [0, 1), got {a_exp}")
    if not G > 0:
        raise InvalidParameterError(f"G must be positive, got {G}")
    if variant not in SCHEDULE_VARIANTS:
        raise InvalidParameterError(
            f"variant must be one of {SCHEDULE_VARIANTS}, got {variant}"
        )

    eta = float(T) ** (-c_exp)
    if variant == PREDICTIVE:
        gamma = 1.0 / (G * math.sqrt(eta))
    else:
        gamma = 1.0 / (G * math.sqrt(2 * eta))

    return ScheduleParams(
        T=int(T),
        c_exp=float(c_exp),
        a_exp=float(a_exp),
        eta=eta,
        gamma=gamma,
        G=float(G),
        F=float(F),
        variant=variant,
    )

