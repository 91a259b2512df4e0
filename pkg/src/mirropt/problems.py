"""Convex functional oracles and constrained problem instances.

An oracle reports a function value and one subgradient at a query point.
Five closed-form kinds cover the solver's needs: affine functions, convex
quadratics, square roots of quadratic forms, scaled absolute values of
affine forms, and pointwise maxima of other oracles.  Optional Lipschitz
metadata (a bound on subgradient dual norms, a gradient Lipschitz constant)
rides along for reporting and a-priori iteration bounds; the solver never
uses it to pick step sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import Array, ProxGeometry, as_vector

__all__ = [
    "EvaluationError",
    "Oracle",
    "AffineOracle",
    "QuadraticOracle",
    "SqrtQuadraticOracle",
    "AbsAffinePlusOracle",
    "MaxOracle",
    "OracleBank",
    "ProblemInstance",
    "evaluate",
    "max_violation",
    "estimate_lipschitz",
]


class EvaluationError(RuntimeError):
    """An oracle produced a non-finite value or subgradient."""


def _read_only(arr: Array) -> Array:
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def _check_symmetric_psd(mat, name: str) -> Array:
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if not np.all(np.isfinite(mat)):
        raise ValueError(f"{name} contains non-finite entries")
    if not np.allclose(mat, mat.T, rtol=1e-9, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    eigs = np.linalg.eigvalsh(mat)
    # PSD up to a small spectral tolerance; convexity is all that is needed.
    if eigs[0] < -1e-10 * max(1.0, abs(eigs[-1])):
        raise ValueError(f"{name} must be positive semidefinite")
    return _read_only(mat)


class Oracle:
    """Base class: value and subgradient of a convex function on R^n."""

    dimension: int
    lipschitz_value: float | None = None
    lipschitz_gradient: float | None = None

    def value(self, x: Array) -> float:
        raise NotImplementedError

    def subgradient(self, x: Array) -> Array:
        raise NotImplementedError

    def value_and_subgradient(self, x: Array) -> tuple[float, Array]:
        return self.value(x), self.subgradient(x)


class AffineOracle(Oracle):
    """f(x) = <a, x> + b."""

    def __init__(self, a, b: float = 0.0, *, lipschitz_value: float | None = None,
                 lipschitz_gradient: float | None = None) -> None:
        self.a = _read_only(as_vector(a, name="a"))
        self.b = float(b)
        if not math.isfinite(self.b):
            raise ValueError("b must be finite")
        self.dimension = self.a.shape[0]
        if lipschitz_value is None:
            # ||a|| is the exact global constant, not an estimate.
            lipschitz_value = math.sqrt(float(self.a @ self.a))
        self.lipschitz_value = lipschitz_value
        self.lipschitz_gradient = 0.0 if lipschitz_gradient is None else lipschitz_gradient

    def value(self, x: Array) -> float:
        return float(self.a @ x) + self.b

    def subgradient(self, x: Array) -> Array:
        return self.a

    def value_and_subgradient(self, x: Array) -> tuple[float, Array]:
        return float(self.a @ x) + self.b, self.a


class QuadraticOracle(Oracle):
    """f(x) = <A x, x> / 2 - <b, x> + alpha with A symmetric PSD."""

    def __init__(self, A, b=None, alpha: float = 0.0, *,
                 lipschitz_value: float | None = None,
                 lipschitz_gradient: float | None = None) -> None:
        self.A = _check_symmetric_psd(A, "A")
        self.dimension = self.A.shape[0]
        if b is None:
            b = np.zeros(self.dimension)
        self.b = _read_only(as_vector(b, self.dimension, "b"))
        self.alpha = float(alpha)
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        self.lipschitz_value = lipschitz_value
        if lipschitz_gradient is None:
            lipschitz_gradient = float(np.linalg.eigvalsh(self.A)[-1])
        self.lipschitz_gradient = lipschitz_gradient

    def value(self, x: Array) -> float:
        Ax = self.A @ x
        return 0.5 * float(x @ Ax) - float(self.b @ x) + self.alpha

    def subgradient(self, x: Array) -> Array:
        return self.A @ x - self.b

    def value_and_subgradient(self, x: Array) -> tuple[float, Array]:
        Ax = self.A @ x
        val = 0.5 * float(x @ Ax) - float(self.b @ x) + self.alpha
        return val, Ax - self.b


class SqrtQuadraticOracle(Oracle):
    """f(x) = sqrt(scale * <Q x, x>) with Q symmetric PSD, scale > 0.

    Where the quadratic form vanishes the function is minimal and 0 is a
    valid subgradient; the oracle returns (0, 0) there.
    """

    def __init__(self, Q, scale: float = 1.0, *,
                 lipschitz_value: float | None = None,
                 lipschitz_gradient: float | None = None) -> None:
        self.Q = _check_symmetric_psd(Q, "Q")
        self.dimension = self.Q.shape[0]
        self.scale = float(scale)
        if not math.isfinite(self.scale) or self.scale <= 0.0:
            raise ValueError("scale must be finite and positive")
        if lipschitz_value is None:
            # ||grad f|| <= sqrt(scale * lambda_max(Q)) everywhere.
            lipschitz_value = math.sqrt(self.scale * float(np.linalg.eigvalsh(self.Q)[-1]))
        self.lipschitz_value = lipschitz_value
        self.lipschitz_gradient = lipschitz_gradient

    def value(self, x: Array) -> float:
        form = float(x @ (self.Q @ x))
        if form <= 0.0:
            return 0.0
        return math.sqrt(self.scale * form)

    def subgradient(self, x: Array) -> Array:
        return self.value_and_subgradient(x)[1]

    def value_and_subgradient(self, x: Array) -> tuple[float, Array]:
        Qx = self.Q @ x
        form = float(x @ Qx)
        if form <= 0.0:
            return 0.0, np.zeros(self.dimension)
        val = math.sqrt(self.scale * form)
        return val, (self.scale / val) * Qx


class AbsAffinePlusOracle(Oracle):
    """f(x) = scale * |<a, x>| + shift.

    At the kink <a, x> = 0 the zero vector is returned as the subgradient.
    """

    def __init__(self, a, shift: float = 0.0, scale: float = 1.0, *,
                 lipschitz_value: float | None = None,
                 lipschitz_gradient: float | None = None) -> None:
        self.a = _read_only(as_vector(a, name="a"))
        self.dimension = self.a.shape[0]
        self.shift = float(shift)
        self.scale = float(scale)
        if not math.isfinite(self.shift):
            raise ValueError("shift must be finite")
        if not math.isfinite(self.scale) or self.scale < 0.0:
            raise ValueError("scale must be finite and nonnegative")
        if lipschitz_value is None:
            lipschitz_value = self.scale * math.sqrt(float(self.a @ self.a))
        self.lipschitz_value = lipschitz_value
        self.lipschitz_gradient = lipschitz_gradient

    def value(self, x: Array) -> float:
        return self.scale * abs(float(self.a @ x)) + self.shift

    def subgradient(self, x: Array) -> Array:
        t = float(self.a @ x)
        if t > 0.0:
            return self.scale * self.a
        if t < 0.0:
            return -self.scale * self.a
        return np.zeros(self.dimension)

    def value_and_subgradient(self, x: Array) -> tuple[float, Array]:
        t = float(self.a @ x)
        if t > 0.0:
            return self.scale * t + self.shift, self.scale * self.a
        if t < 0.0:
            return -self.scale * t + self.shift, -self.scale * self.a
        return self.shift, np.zeros(self.dimension)


class OracleBank:
    """Ordered family of oracles evaluated together at one point.

    When every member is affine the values are computed through one stacked
    matrix-vector product.  Both the solver's constraint scan and
    :class:`MaxOracle` evaluate through this class, so an aggregate of M
    constraints and a single pre-composed max oracle see bitwise-identical
    numbers.
    """

    def __init__(self, oracles: Sequence[Oracle]) -> None:
        self.oracles = list(oracles)
        if not self.oracles:
            raise ValueError("oracle family must not be empty")
        dims = {o.dimension for o in self.oracles}
        if len(dims) != 1:
            raise ValueError("oracle family members disagree on dimension")
        self.dimension = dims.pop()
        self.size = len(self.oracles)
        if all(type(o) is AffineOracle for o in self.oracles):
            self._matrix = np.vstack([o.a for o in self.oracles])
            self._offsets = np.array([o.b for o in self.oracles])
        else:
            self._matrix = None
            self._offsets = None

    def values(self, x: Array) -> Array:
        if self._matrix is not None:
            return self._matrix @ x + self._offsets
        return np.array([o.value(x) for o in self.oracles])

    def subgradient(self, index: int, x: Array) -> Array:
        return self.oracles[index].subgradient(x)

    def max_entry(self, x: Array) -> tuple[float, int]:
        """Largest value and its lowest attaining 0-based index."""
        vals = self.values(x)
        idx = int(np.argmax(vals))
        return float(vals[idx]), idx


class MaxOracle(Oracle):
    """Pointwise maximum of child oracles.

    The reported subgradient is the one of the lowest-index child attaining
    the maximum.
    """

    def __init__(self, children: Sequence[Oracle], *,
                 lipschitz_value: float | None = None,
                 lipschitz_gradient: float | None = None) -> None:
        self.children = list(children)
        self._bank = OracleBank(self.children)
        self.dimension = self._bank.dimension
        if lipschitz_value is None:
            bounds = [c.lipschitz_value for c in self.children]
            if all(b is not None for b in bounds):
                lipschitz_value = max(bounds)
        self.lipschitz_value = lipschitz_value
        self.lipschitz_gradient = lipschitz_gradient

    def value(self, x: Array) -> float:
        return self._bank.max_entry(x)[0]

    def subgradient(self, x: Array) -> Array:
        _, idx = self._bank.max_entry(x)
        return self._bank.subgradient(idx, x)

    def value_and_subgradient(self, x: Array) -> tuple[float, Array]:
        val, idx = self._bank.max_entry(x)
        return val, self._bank.subgradient(idx, x)


@dataclass
class ProblemInstance:
    """A convex program: minimize objective subject to constraints <= 0.

    Parameters
    ----------
    dimension : int
        Number of decision variables.
    objective : Oracle
        Convex objective functional.
    constraints : sequence of Oracle
        Functional constraints g_m(x) <= 0, at least one.
    known_optimum : (array, float), optional
        A reference feasible point and its objective value, used by
        verification reports; not consulted by the solver.
    """

    dimension: int
    objective: Oracle
    constraints: Sequence[Oracle]
    known_optimum: tuple[Array, float] | None = None
    _bank: OracleBank = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.dimension = int(self.dimension)
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if self.objective.dimension != self.dimension:
            raise ValueError("objective dimension mismatch")
        self.constraints = list(self.constraints)
        if not self.constraints:
            raise ValueError("at least one constraint is required")
        for m, c in enumerate(self.constraints, start=1):
            if c.dimension != self.dimension:
                raise ValueError(f"constraint {m} dimension mismatch")
        self._bank = OracleBank(self.constraints)
        if self.known_optimum is not None:
            point, value = self.known_optimum
            point = as_vector(point, self.dimension, "known optimum point")
            value = float(value)
            if not math.isfinite(value):
                raise ValueError("known optimum value must be finite")
            worst, _ = max_violation(self, point)
            if worst > 0.0:
                raise ValueError("known optimum point violates a constraint")
            self.known_optimum = (point, value)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def constraint_bank(self) -> OracleBank:
        return self._bank


def evaluate(oracle: Oracle, x) -> tuple[float, Array]:
    """Evaluate an oracle, returning (value, subgradient).

    Raises
    ------
    ValueError
        On dimension mismatch.
    EvaluationError
        If the value or subgradient is non-finite.
    """
    x = as_vector(x, oracle.dimension, "x")
    val, sub = oracle.value_and_subgradient(x)
    if not math.isfinite(val) or not np.all(np.isfinite(sub)):
        raise EvaluationError("oracle produced a non-finite result")
    return val, sub


def max_violation(problem, x) -> tuple[float, int]:
    """Largest constraint value at x and its 1-based index.

    Ties go to the lowest index.  ``problem`` may be a
    :class:`ProblemInstance` or a sequence of constraint oracles.
    """
    if isinstance(problem, ProblemInstance):
        bank = problem.constraint_bank()
    else:
        bank = OracleBank(problem)
    x = as_vector(x, bank.dimension, "x")
    val, idx = bank.max_entry(x)
    if not math.isfinite(val):
        raise EvaluationError("constraint produced a non-finite value")
    return val, idx + 1


def estimate_lipschitz(oracle: Oracle, center, radius: float, samples: int = 1000,
                       *, seed: int = 0, structure: ProxGeometry | None = None) -> float:
    """Sampled estimate of max ||subgradient|| over a Euclidean ball.

    Draws points uniformly from the ball and returns the largest subgradient
    dual norm seen (l2, or the dual norm of ``structure`` when given).  A
    lower estimate of the true constant, not a certified bound.
    """
    center = as_vector(center, oracle.dimension, "center")
    radius = float(radius)
    if not math.isfinite(radius) or radius < 0.0:
        raise ValueError("radius must be finite and nonnegative")
    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    n = oracle.dimension
    best = 0.0
    for _ in range(samples):
        direction = rng.standard_normal(n)
        nrm = math.sqrt(float(direction @ direction))
        if nrm == 0.0:
            point = center
        else:
            # Uniform in the ball: radius scaled by U^(1/n).
            r = radius * rng.uniform() ** (1.0 / n)
            point = center + direction * (r / nrm)
        sub = oracle.subgradient(point)
        if structure is None:
            dn = math.sqrt(float(sub @ sub))
        else:
            dn = structure.dual_norm(sub)
        if not math.isfinite(dn):
            raise EvaluationError("oracle produced a non-finite subgradient")
        if dn > best:
            best = dn
    return best
