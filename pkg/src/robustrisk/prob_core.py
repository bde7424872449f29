"""Finite probability spaces, positions, scenario measures and distributional tooling.

Everything here is exact finite-atom arithmetic: quantile functions are step
functions with rational-free breakpoint merging, Wasserstein distances are
computed on merged quantile breakpoints (no LP), relative entropy and density
norms are plain weighted sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ATOL",
    "ProbSpace",
    "Position",
    "ScenarioMeasure",
    "ext_add",
    "expectation",
    "expectation_under",
    "quantile_function",
    "QuantileSteps",
    "wasserstein_distance",
    "relative_entropy",
    "density_norm",
    "same_distribution",
]

# Construction-time tolerance for probability/density normalization.
ATOL = 1e-12


def ext_add(a: float, b: float) -> float:
    """Extended-real addition; (+inf) + (-inf) is an error rather than nan."""
    if (a == math.inf and b == -math.inf) or (a == -math.inf and b == math.inf):
        raise ValueError("undefined extended-real sum (+inf) + (-inf)")
    return a + b


@dataclass(frozen=True)
class ProbSpace:
    """Finite outcome space with a strictly positive reference measure P."""

    probs: np.ndarray

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-D sequence")
        if np.any(p <= 0):
            raise ValueError("all atom probabilities must be strictly positive")
        if abs(p.sum() - 1.0) > ATOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, expected 1")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return self.probs.size

    def __eq__(self, other):
        return isinstance(other, ProbSpace) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())


@dataclass(frozen=True)
class Position:
    """Payoff vector over the atoms of a ProbSpace; positive values are gains."""

    space: ProbSpace
    values: np.ndarray

    def __init__(self, space: ProbSpace, values):
        v = np.asarray(values, dtype=float)
        if v.shape != (space.n,):
            raise ValueError(f"values must have length {space.n}, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("position values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "values", v)

    def replace(self, values) -> "Position":
        return Position(self.space, values)

    def __add__(self, other):
        if isinstance(other, Position):
            _check_same_space(self, other)
            return Position(self.space, self.values + other.values)
        return Position(self.space, self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Position):
            _check_same_space(self, other)
            return Position(self.space, self.values - other.values)
        return Position(self.space, self.values - float(other))

    def __mul__(self, scalar):
        return Position(self.space, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return Position(self.space, -self.values)


@dataclass(frozen=True)
class ScenarioMeasure:
    """Probability measure Q << P given by its density dQ/dP per atom."""

    space: ProbSpace
    density: np.ndarray

    def __init__(self, space: ProbSpace, density):
        d = np.asarray(density, dtype=float)
        if d.shape != (space.n,):
            raise ValueError(f"density must have length {space.n}, got shape {d.shape}")
        if np.any(d < 0):
            raise ValueError("density must be nonnegative")
        mass = float(np.dot(space.probs, d))
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"density integrates to {mass!r}, expected 1")
        d.flags.writeable = False
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "density", d)

    @staticmethod
    def reference(space: ProbSpace) -> "ScenarioMeasure":
        return ScenarioMeasure(space, np.ones(space.n))


def _check_same_space(a, b):
    if a.space is b.space:
        return
    if a.space.n != b.space.n or not np.allclose(a.space.probs, b.space.probs, atol=ATOL):
        raise ValueError("operands live on different probability spaces")


def expectation(X: Position) -> float:
    """E_P[X], the reference-measure expectation."""
    return float(np.dot(X.space.probs, X.values))


def expectation_under(Q: ScenarioMeasure, X: Position) -> float:
    """E_Q[X] computed through the density dQ/dP."""
    _check_same_space(Q, X)
    return float(np.dot(X.space.probs * Q.density, X.values))


@dataclass(frozen=True)
class QuantileSteps:
    """Right-continuous inverse CDF as a step function.

    ``values[k]`` is the quantile on the interval ``(cum[k-1], cum[k]]`` of
    (0, 1], with ``cum`` strictly increasing and ``cum[-1] == 1``.
    """

    values: np.ndarray
    cum: np.ndarray

    def at(self, u: float) -> float:
        """Quantile at u in (0, 1]."""
        if not 0.0 < u <= 1.0:
            raise ValueError("u must lie in (0, 1]")
        k = int(np.searchsorted(self.cum, u, side="left"))
        k = min(k, self.values.size - 1)
        return float(self.values[k])


def quantile_function(X: Position) -> QuantileSteps:
    """Quantile (inverse CDF) of the law of X under P, atoms merged."""
    return _quantile_of(X.values, X.space.probs)


def _quantile_of(values: np.ndarray, probs: np.ndarray) -> QuantileSteps:
    order = np.argsort(values, kind="stable")
    v = np.asarray(values, dtype=float)[order]
    w = np.asarray(probs, dtype=float)[order]
    # merge equal values so breakpoints are unique
    keep = np.concatenate(([True], np.diff(v) > 0))
    idx = np.cumsum(keep) - 1
    merged_v = v[keep]
    merged_w = np.zeros(merged_v.size)
    np.add.at(merged_w, idx, w)
    cum = np.cumsum(merged_w)
    cum[-1] = 1.0
    return QuantileSteps(values=merged_v, cum=cum)


def _merged_quantile_gaps(qx: QuantileSteps, qy: QuantileSteps):
    """Interval widths and |F_X^-1 - F_Y^-1| gaps on merged breakpoints."""
    cum = np.union1d(qx.cum, qy.cum)
    cum = cum[cum > 0]
    widths = np.diff(np.concatenate(([0.0], cum)))
    ix = np.minimum(np.searchsorted(qx.cum, cum, side="left"), qx.values.size - 1)
    iy = np.minimum(np.searchsorted(qy.cum, cum, side="left"), qy.values.size - 1)
    gaps = np.abs(qx.values[ix] - qy.values[iy])
    return widths, gaps


def wasserstein_distance(X: Position, Y: Position, p: float = 1.0) -> float:
    """Order-p Wasserstein distance between the laws of X and Y.

    Computed exactly from the quantile-function gap on merged breakpoints:
    (integral_0^1 |F_X^-1(u) - F_Y^-1(u)|^p du)^(1/p), essential sup for p=inf.
    """
    if p < 1:
        raise ValueError("Wasserstein order p must be >= 1")
    widths, gaps = _merged_quantile_gaps(quantile_function(X), quantile_function(Y))
    if math.isinf(p):
        return float(gaps[widths > 0].max(initial=0.0))
    return float(np.dot(widths, gaps**p) ** (1.0 / p))


def relative_entropy(Q: ScenarioMeasure) -> float:
    """Kullback-Leibler divergence H(Q|P) = E_P[(dQ/dP) ln(dQ/dP)], with 0 ln 0 = 0."""
    d = Q.density
    pos = d > 0
    return float(np.dot(Q.space.probs[pos] * d[pos], np.log(d[pos])))


def density_norm(Q: ScenarioMeasure, q: float) -> float:
    """L^q(P) norm of the density dQ/dP; q = inf gives the max."""
    if q < 1:
        raise ValueError("norm order q must be >= 1")
    if math.isinf(q):
        return float(Q.density.max())
    return float(np.dot(Q.space.probs, Q.density**q) ** (1.0 / q))


def same_distribution(X: Position, Y: Position, tol: float = ATOL) -> bool:
    """True iff X and Y induce the same law under P (atoms merged, tolerance tol)."""
    qx, qy = quantile_function(X), quantile_function(Y)
    widths, gaps = _merged_quantile_gaps(qx, qy)
    return bool(np.all(gaps[widths > 0] <= tol))
