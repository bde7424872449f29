"""Acceptance families at target levels, their inversion, and the robust
acceptance correspondence: a position is robust-acceptable at level m exactly
when its whole uncertainty set is acceptable at m."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .prob_core import Position
from .risk_measures import RiskFunctional
from .robustify import robust_value
from .uncertainty import UncertaintyFamily

__all__ = [
    "AcceptanceQuery",
    "is_acceptable",
    "acceptance_level",
    "robust_acceptance_check",
    "robust_level_by_sets",
]

_TOL = 1e-9


@dataclass(frozen=True)
class AcceptanceQuery:
    rho: RiskFunctional
    level: float


def is_acceptable(rho: RiskFunctional, X: Position, m: float) -> bool:
    """X lies in the acceptance set at target level m: rho(X) <= m."""
    return rho(X) <= m


def _default_bracket(X: Position) -> tuple:
    r = float(np.max(np.abs(X.values))) + 10.0
    return (-r, r)


def acceptance_level(rho: RiskFunctional, X: Position, bracket=None) -> float:
    """inf{m : X acceptable at m}; bisection, reproduces rho(X) within 1e-9."""
    if bracket is None:
        bracket = _default_bracket(X)
    lo, hi = bracket
    grow = 0
    while not is_acceptable(rho, X, hi):
        lo, hi = hi, hi + 2.0 * (hi - lo)
        grow += 1
        if grow > 80:
            raise ValueError("bracket expansion failed: risk appears unbounded")
    while is_acceptable(rho, X, lo):
        lo, hi = lo - 2.0 * (hi - lo), lo
        grow += 1
        if grow > 160:
            raise ValueError("bracket expansion failed downward")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if is_acceptable(rho, X, mid):
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-12 * max(1.0, abs(hi)):
            break
    return hi


def robust_acceptance_check(
    rho: RiskFunctional,
    family: UncertaintyFamily,
    X: Position,
    m: float,
    solver: str = "auto",
    seed: int = 0,
) -> dict:
    """Check the two sides of: robust-acceptable at m iff U_X subset of the
    acceptance set at m. Both sides reduce to the same scalar supremum; with a
    LowerBound solver only the forward implication is asserted."""
    rv = robust_value(rho, family, X, solver=solver, seed=seed)
    x_in_robust = rv.value <= m + _TOL
    u_subset_a = rv.value <= m + _TOL  # sup over U_X of rho, same solve
    agree = (x_in_robust == u_subset_a) if rv.exact else (not x_in_robust or u_subset_a)
    return {
        "x_in_robust": x_in_robust,
        "U_subset_A": u_subset_a,
        "agree": agree,
        "robust_value": rv.value,
        "guarantee": rv.guarantee,
    }


def robust_level_by_sets(
    rho: RiskFunctional,
    family: UncertaintyFamily,
    X: Position,
    bracket=None,
    solver: str = "auto",
    cash_additive_form: bool = False,
    seed: int = 0,
) -> float:
    """inf{m : U_X subset of the level-m acceptance set}, by bisection on m.

    With ``cash_additive_form`` (requires cash-additive rho) the equivalent
    shifted test inf{m : U_X + m subset of the level-0 set} is used.
    """
    if cash_additive_form and not rho.flags.cash_additive:
        raise ValueError("the shifted-set form requires a cash-additive measure")
    rv = robust_value(rho, family, X, solver=solver, seed=seed)

    def subset_at(m: float) -> bool:
        if cash_additive_form:
            # U_X + m inside the level-0 set iff sup rho(Z + m) <= 0,
            # i.e. sup rho(Z) <= m by cash-additivity
            return rv.value - m <= _TOL
        return rv.value <= m + _TOL

    if bracket is None:
        bracket = _default_bracket(X)
    lo, hi = bracket
    grow = 0
    while not subset_at(hi):
        lo, hi = hi, hi + 2.0 * (hi - lo)
        grow += 1
        if grow > 80:
            raise ValueError("bracket expansion failed: robust level unbounded")
    while subset_at(lo):
        lo, hi = lo - 2.0 * (hi - lo), lo
        grow += 1
        if grow > 160:
            raise ValueError("bracket expansion failed downward")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if subset_at(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-12 * max(1.0, abs(hi)):
            break
    return hi
