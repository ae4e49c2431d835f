"""
Feasible sets with closed-form projections, regularizers and Bregman divergences.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from predictoco.core import as_vector
from predictoco.errors import InvalidInputError, UnsupportedDimensionError

logger = logging.getLogger(__name__)

BOX = "box"
BALL = "ball"


class FeasibleSet(ABC):
    """A closed, convex and bounded set X with a cheap Euclidean projection."""

    kind = None

    @property
    @abstractmethod
    def p(self) -> int:
        pass

    def project(self, y) -> np.ndarray:
        return self._project(as_vector(y, self.p, "y"))

    @abstractmethod
    def _project(self, y: np.ndarray) -> np.ndarray:
        "Projection without input checks, for inner loops"
        pass

    @abstractmethod
    def support(self, direction: np.ndarray) -> float:
        "sup over x in X of <direction, x>"
        pass

    @abstractmethod
    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        pass

    @property
    @abstractmethod
    def diameter(self) -> float:
        pass

    @property
    @abstractmethod
    def max_norm(self) -> float:
        "max over x in X of ||x||_2"
        pass

    @abstractmethod
    def bounding_box(self):
        pass

    @abstractmethod
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        "Draw n points of X as an (n, p) array"
        pass

    def support_rows(self, rows: np.ndarray) -> np.ndarray:
        "Row-wise support function for an (k, p) array of directions"
        return np.array([self.support(r) for r in np.atleast_2d(rows)])

    def grid(self, resolution: float, center=None, half_width=None) -> np.ndarray:
        """Uniform grid of points of X, for exhaustive search in one or two dimensions.

        Parameters
        ----------
        resolution : float
            Spacing between neighboring grid points.
        center : array-like, optional
            Restrict the grid to a window around this point, by default None.
        half_width : float, optional
            Half side length of the window, by default None.

        Returns
        -------
        np.ndarray
            An (n, p) array of grid points inside X.
        """
        if self.p > 2:
            raise UnsupportedDimensionError(
                f"Grid search supports p <= 2, this set has p = {self.p}"
            )
        if resolution <= 0:
            raise InvalidInputError("Grid resolution must be positive")
        lower, upper = self.bounding_box()
        if center is not None and half_width is not None:
            center = as_vector(center, self.p, "center")
            lower = np.maximum(lower, center - half_width)
            upper = np.minimum(upper, center + half_width)
        axes = [
            np.append(np.arange(lo, hi, resolution), hi) for lo, hi in zip(lower, upper)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.column_stack([m.ravel() for m in mesh])
        return points[self._inside_rows(points)]

    def _inside_rows(self, points: np.ndarray) -> np.ndarray:
        return np.ones(len(points), dtype=bool)


@dataclass(frozen=True, eq=False)
class Box(FeasibleSet):
    """The box {x : lower <= x <= upper}."""

    lower: np.ndarray
    upper: np.ndarray
    kind = BOX

    def __post_init__(self):
        lower = as_vector(self.lower, name="lower")
        upper = as_vector(self.upper, lower.size, name="upper")
        if np.any(lower > upper):
            raise InvalidInputError("A box needs lower <= upper in every coordinate")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def cube(cls, p: int, lower: float = -1.0, upper: float = 1.0) -> "Box":
        return cls(np.full(p, float(lower)), np.full(p, float(upper)))

    @property
    def p(self) -> int:
        return self.lower.size

    def _project(self, y):
        return np.clip(y, self.lower, self.upper)

    def support(self, direction):
        d = as_vector(direction, self.p, "direction")
        return float(np.sum(np.where(d > 0, d * self.upper, d * self.lower)))

    def support_rows(self, rows):
        rows = np.atleast_2d(rows)
        return np.sum(np.where(rows > 0, rows * self.upper, rows * self.lower), axis=1)

    def contains(self, x, tol=1e-12):
        x = as_vector(x, self.p)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    @property
    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def max_norm(self):
        return float(np.linalg.norm(np.maximum(np.abs(self.lower), np.abs(self.upper))))

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def sample(self, rng, n):
        return rng.uniform(self.lower, self.upper, size=(n, self.p))


@dataclass(frozen=True, eq=False)
class Ball(FeasibleSet):
    """The Euclidean ball {x : ||x - center||_2 <= radius}."""

    center: np.ndarray
    radius: float
    kind = BALL

    def __post_init__(self):
        center = as_vector(self.center, name="center")
        if not self.radius > 0:
            raise InvalidInputError(f"A ball needs a positive radius, got {self.radius}")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def p(self) -> int:
        return self.center.size

    def _project(self, y):
        offset = y - self.center
        dist = np.linalg.norm(offset)
        if dist <= self.radius:
            return y.copy()
        return self.center + offset * (self.radius / dist)

    def support(self, direction):
        d = as_vector(direction, self.p, "direction")
        return float(d @ self.center + self.radius * np.linalg.norm(d))

    def support_rows(self, rows):
        rows = np.atleast_2d(rows)
        return rows @ self.center + self.radius * np.linalg.norm(rows, axis=1)

    def contains(self, x, tol=1e-12):
        x = as_vector(x, self.p)
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)

    @property
    def diameter(self):
        return 2.0 * self.radius

    @property
    def max_norm(self):
        return float(np.linalg.norm(self.center) + self.radius)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def sample(self, rng, n):
        directions = rng.standard_normal((n, self.p))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = self.radius * rng.uniform(size=(n, 1)) ** (1.0 / self.p)
        return self.center + directions * radii

    def _inside_rows(self, points):
        return np.linalg.norm(points - self.center, axis=1) <= self.radius


def make_feasible_set(kind: str, p: int, **kwargs) -> FeasibleSet:
    """Build a feasible set from settings values. Scalars broadcast to p coordinates.

    Parameters
    ----------
    kind : str
        "box" or "ball".
    p : int
        Dimension.
    **kwargs
        `lower` and `upper` for a box, `center` and `radius` for a ball.

    Returns
    -------
    FeasibleSet
    """
    if kind == BOX:
        lower = np.broadcast_to(np.asarray(kwargs.get("lower", -1.0), dtype=float), (p,))
        upper = np.broadcast_to(np.asarray(kwargs.get("upper", 1.0), dtype=float), (p,))
        return Box(lower.copy(), upper.copy())
    if kind == BALL:
        center = np.broadcast_to(np.asarray(kwargs.get("center", 0.0), dtype=float), (p,))
        return Ball(center.copy(), kwargs.get("radius", 1.0))
    raise InvalidInputError(f"Feasible set kind must be '{BOX}' or '{BALL}', got {kind}")


def project(X: FeasibleSet, y) -> np.ndarray:
    "argmin over x in X of ||x - y||_2"
    return X.project(y)


class Regularizer(ABC):
    """A 1-strongly convex function R with its gradient and Bregman divergence."""

    kind = None

    @abstractmethod
    def value(self, x: np.ndarray) -> float:
        pass

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray:
        pass

    def divergence(self, x, y) -> float:
        "D_R(x, y) = R(x) - R(y) - <grad R(y), x - y>"
        x = as_vector(x)
        y = as_vector(y, x.size, "y")
        return float(self.value(x) - self.value(y) - self.gradient(y) @ (x - y))

    @abstractmethod
    def minimizer(self, X: FeasibleSet) -> np.ndarray:
        pass


class QuadraticRegularizer(Regularizer):
    """R(x) = 0.5 ||x||_2^2, so D_R(x, y) = 0.5 ||x - y||_2^2."""

    kind = "quadratic"

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ x)

    def gradient(self, x):
        return np.asarray(x, dtype=float).copy()

    def divergence(self, x, y):
        diff = as_vector(x) - as_vector(y, np.size(x), "y")
        return 0.5 * float(diff @ diff)

    def minimizer(self, X):
        return X.project(np.zeros(X.p))

    def __eq__(self, other):
        return isinstance(other, QuadraticRegularizer)

    def __hash__(self):
        return hash(self.kind)


QUADRATIC = QuadraticRegularizer()


def bregman(R: Regularizer, x, y) -> float:
    return R.divergence(x, y)


def regularizer_minimizer(R: Regularizer, X: FeasibleSet) -> np.ndarray:
    "argmin over z in X of R(z), the initial point x_1 = z_1"
    return R.minimizer(X)
