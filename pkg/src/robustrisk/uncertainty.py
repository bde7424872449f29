"""Uncertainty-set families: the map X -> U_X, property checkers, solidification.

Each family carries an exact membership predicate, a solver-facing
``discretize`` generator, and descriptor metadata used for closed-form
dispatch. ``check_property`` combines certified rules (closed-form arguments
or constructed counterexamples, verified before being returned) with seeded
sampled falsification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .prob_core import (
    Position,
    ProbSpace,
    quantile_function,
    same_distribution,
    wasserstein_distance,
    _merged_quantile_gaps,
)
from .risk_measures import RiskFunctional

__all__ = [
    "MEMBER_TOL",
    "UncertaintyFamily",
    "PropertyVerdict",
    "sup_norm_ball",
    "p_norm_ball",
    "wasserstein_ball",
    "level_band",
    "level_upper_set",
    "check_property",
    "replay_witness",
    "solidify",
    "random_position",
    "member_plus_cone",
    "member_below",
    "member_minkowski",
    "cone_witness",
    "minkowski_split",
    "transport_member",
    "FAMILY_PROPERTIES",
]

MEMBER_TOL = 1e-12

FAMILY_PROPERTIES = (
    "monotone",
    "order_preserving",
    "convex",
    "quasi_convex",
    "c_quasi_convex",
    "solid",
    "law_invariant",
    "cash_invariant",
    "continuous_from_above",
)


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class PropertyVerdict:
    """Outcome of a family/measure property check."""

    tag: str  # "certified_holds" | "sampled_no_counterexample" | "counterexample" | "unknown"
    trials: int = 0
    witness: Optional[dict] = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.tag in ("certified_holds", "sampled_no_counterexample")

    @property
    def is_counterexample(self) -> bool:
        return self.tag == "counterexample"


def certified(note: str = "") -> PropertyVerdict:
    return PropertyVerdict("certified_holds", note=note)


def no_counterexample(trials: int, note: str = "") -> PropertyVerdict:
    return PropertyVerdict("sampled_no_counterexample", trials=trials, note=note)


def counterexample(witness: dict, note: str = "") -> PropertyVerdict:
    return PropertyVerdict("counterexample", witness=witness, note=note)


def unknown(note: str = "") -> PropertyVerdict:
    return PropertyVerdict("unknown", note=note)


# ---------------------------------------------------------------------------
# family container


@dataclass(frozen=True)
class UncertaintyFamily:
    """A family of uncertainty sets X -> U_X with solver-facing structure."""

    name: str
    kind: str
    params: dict
    membership: Callable[[Position, Position], bool]
    discretize: Callable[[Position, float, int, int], list]

    def contains(self, X: Position, Z: Position) -> bool:
        return self.membership(X, Z)

    @property
    def eps(self) -> float:
        return self.params.get("eps", 0.0)

    @property
    def rho1(self) -> Optional[RiskFunctional]:
        return self.params.get("rho1")


def random_position(space: ProbSpace, rng: np.random.Generator, scale: float = 2.0) -> Position:
    return Position(space, rng.normal(0.0, scale, size=space.n))


def _lp_norm(space: ProbSpace, v: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(v)))
    return float(np.dot(space.probs, np.abs(v) ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# constructors


def sup_norm_ball(eps: float) -> UncertaintyFamily:
    """U_X = {Z : X - eps <= Z <= X + eps pointwise}."""
    if eps < 0:
        raise ValueError("radius eps must be nonnegative")

    def membership(X: Position, Z: Position) -> bool:
        return bool(np.max(np.abs(Z.values - X.values)) <= eps + MEMBER_TOL)

    def discretize(X: Position, resolution: float, budget: int, seed: int = 0) -> list:
        rng = np.random.default_rng(seed)
        pts = [X, X - eps, X + eps]
        n = X.space.n
        if 0 < n <= 16 and 2**n <= budget:
            for mask in range(2**n):
                signs = np.array([1.0 if mask >> i & 1 else -1.0 for i in range(n)])
                pts.append(X + Position(X.space, eps * signs) - 0.0)
        per_dim = max(2, int(round(2 * eps / resolution)) + 1) if eps > 0 else 1
        if per_dim**n <= budget and eps > 0:
            axes = np.linspace(-eps, eps, per_dim)
            mesh = np.stack(np.meshgrid(*([axes] * n), indexing="ij"), axis=-1).reshape(-1, n)
            pts.extend(Position(X.space, X.values + off) for off in mesh)
        else:
            for _ in range(max(0, budget - len(pts))):
                off = rng.uniform(-eps, eps, size=n)
                pts.append(Position(X.space, X.values + off))
        return [Z for Z in pts if membership(X, Z)]

    return UncertaintyFamily(
        name=f"sup_norm_ball(eps={eps})",
        kind="sup_norm_ball",
        params={"eps": eps},
        membership=membership,
        discretize=discretize,
    )


def p_norm_ball(p: float, eps: float) -> UncertaintyFamily:
    """U_X = {Z : ||Z - X||_{L^p(P)} <= eps}."""
    if p < 1:
        raise ValueError("norm order p must be >= 1")
    if eps < 0:
        raise ValueError("radius eps must be nonnegative")
    if math.isinf(p):
        fam = sup_norm_ball(eps)
        return replace(fam, name=f"p_norm_ball(p=inf,eps={eps})", kind="p_norm_ball", params={"p": p, "eps": eps})

    def membership(X: Position, Z: Position) -> bool:
        return _lp_norm(X.space, Z.values - X.values, p) <= eps + MEMBER_TOL

    def discretize(X: Position, resolution: float, budget: int, seed: int = 0) -> list:
        rng = np.random.default_rng(seed)
        n = X.space.n
        pts = [X, X - eps, X + eps]
        # extreme spikes of the weighted-ell^p ball (exact vertices for p=1)
        for i in range(n):
            height = eps / X.space.probs[i] ** (1.0 / p)
            for s in (-1.0, 1.0):
                off = np.zeros(n)
                off[i] = s * height
                pts.append(Position(X.space, X.values + off))
        while len(pts) < budget:
            d = rng.normal(size=n)
            nrm = _lp_norm(X.space, d, p)
            if nrm == 0:
                continue
            r = eps * rng.uniform() ** (1.0 / max(n, 1))
            pts.append(Position(X.space, X.values + d * (r / nrm)))
        return [Z for Z in pts if membership(X, Z)]

    return UncertaintyFamily(
        name=f"p_norm_ball(p={p},eps={eps})",
        kind="p_norm_ball",
        params={"p": p, "eps": eps},
        membership=membership,
        discretize=discretize,
    )


def wasserstein_ball(p: float, eps: float) -> UncertaintyFamily:
    """U_X = {Z : d_Wp(X, Z) <= eps}; membership depends on laws only."""
    if p < 1:
        raise ValueError("Wasserstein order p must be >= 1")
    if eps < 0:
        raise ValueError("radius eps must be nonnegative")

    def membership(X: Position, Z: Position) -> bool:
        return wasserstein_distance(X, Z, p) <= eps + MEMBER_TOL

    def discretize(X: Position, resolution: float, budget: int, seed: int = 0) -> list:
        rng = np.random.default_rng(seed)
        n = X.space.n
        order = np.argsort(X.values, kind="stable")
        widths = X.space.probs[order]
        sorted_v = X.values[order]

        def from_sorted(new_sorted: np.ndarray, perm=None) -> Position:
            vals = np.empty(n)
            vals[order] = np.sort(new_sorted)
            if perm is not None:
                vals = vals[perm]
            return Position(X.space, vals)

        pts = [X, X - eps, X + eps, from_sorted(sorted_v)]
        # quantile-space shifts of norm <= eps (comonotone worst cases included)
        n_shifts = max(4, budget // 4)
        for k in range(n_shifts):
            d = rng.normal(size=n)
            nrm = _lp_norm(X.space, d[np.argsort(order)], p) if not math.isinf(p) else np.max(np.abs(d))
            if math.isinf(p):
                nrm = float(np.max(np.abs(d)))
            else:
                nrm = float(np.dot(widths, np.abs(d) ** p) ** (1.0 / p))
            if nrm == 0:
                continue
            radius = eps if k < n_shifts // 2 else eps * rng.uniform()
            pts.append(from_sorted(sorted_v + d * (radius / nrm)))
        # rearrangements keep the law, hence always members
        for _ in range(max(2, budget // 8)):
            perm = rng.permutation(n)
            pts.append(Position(X.space, X.values[perm]))
        return [Z for Z in pts if membership(X, Z)]

    return UncertaintyFamily(
        name=f"wasserstein_ball(p={p},eps={eps})",
        kind="wasserstein_ball",
        params={"p": p, "eps": eps},
        membership=membership,
        discretize=discretize,
    )


def _require_level_flags(rho1: RiskFunctional):
    if not (rho1.flags.quasi_convex and (rho1.flags.cash_subadditive or rho1.flags.cash_additive)):
        raise ValueError(
            "level families require a quasi-convex, cash-subadditive base measure; "
            f"{rho1.name} is not flagged as such"
        )


def _boundary_step(rho1: RiskFunctional, Z: Position, target: float, k_hi: float = 1.0) -> float:
    """Smallest k >= 0 with rho1(Z - k) ~= target, by bracket growth + bisection.

    Relies on k -> rho1(Z - k) being increasing and continuous with
    rho1(Z - k) >= rho1(Z) + k (cash-subadditive convention).
    """
    if rho1(Z) >= target:
        return 0.0
    lo, hi = 0.0, k_hi
    while rho1(Z - hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("level boundary bracket growth failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if rho1(Z - mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, abs(hi)):
            break
    return hi


def _level_discretize(rho1: RiskFunctional, membership, band_lower):
    def discretize(X: Position, resolution: float, budget: int, seed: int = 0) -> list:
        rng = np.random.default_rng(seed)
        level = rho1(X) + band_lower.eps_hi
        pts = [X]
        # scan along X - k down to the level boundary
        k_star = _boundary_step(rho1, X, level)
        m = max(2, min(16, budget // 4))
        for j in range(m + 1):
            pts.append(X - k_star * j / m)
        # the constant position sitting exactly at the level (when it qualifies)
        pts.append(Position(X.space, np.full(X.space.n, -level)))
        # upward shifts (members whenever the family is solid)
        for j in range(1, 4):
            pts.append(X + j * max(resolution, 0.25))
        # random directions rescaled to the boundary by bisection
        while len(pts) < budget:
            D = Position(X.space, rng.normal(size=X.space.n))
            s_hi = 1.0
            found = False
            for _ in range(40):
                if rho1(X - s_hi * D) >= level or rho1(X + s_hi * D) >= level:
                    found = True
                    break
                s_hi *= 2.0
            if not found:
                pts.append(X + D)
                continue
            sign = -1.0 if rho1(X - s_hi * D) >= level else 1.0
            lo, hi = 0.0, s_hi
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if rho1(X + sign * mid * D) < level:
                    lo = mid
                else:
                    hi = mid
            pts.append(X + sign * lo * D)
            pts.append(X + sign * 0.5 * lo * D)
        return [Z for Z in pts if membership(X, Z)]

    return discretize


class _Eps:
    def __init__(self, eps_hi):
        self.eps_hi = eps_hi


def level_band(rho1: RiskFunctional, eps: float) -> UncertaintyFamily:
    """U_X = {Z : |rho1(Z) - rho1(X)| <= eps} for quasi-convex cash-subadditive rho1."""
    if eps < 0:
        raise ValueError("band width eps must be nonnegative")
    _require_level_flags(rho1)

    def membership(X: Position, Z: Position) -> bool:
        return abs(rho1(Z) - rho1(X)) <= eps + MEMBER_TOL

    return UncertaintyFamily(
        name=f"level_band({rho1.name},eps={eps})",
        kind="level_band",
        params={"eps": eps, "rho1": rho1},
        membership=membership,
        discretize=_level_discretize(rho1, membership, _Eps(eps)),
    )


def level_upper_set(rho1: RiskFunctional, eps: float) -> UncertaintyFamily:
    """U_X = {Z : rho1(Z) <= rho1(X) + eps}; solid and monotone by construction."""
    if eps < 0:
        raise ValueError("level offset eps must be nonnegative")
    _require_level_flags(rho1)

    def membership(X: Position, Z: Position) -> bool:
        return rho1(Z) <= rho1(X) + eps + MEMBER_TOL

    return UncertaintyFamily(
        name=f"level_upper_set({rho1.name},eps={eps})",
        kind="level_upper_set",
        params={"eps": eps, "rho1": rho1},
        membership=membership,
        discretize=_level_discretize(rho1, membership, _Eps(eps)),
    )


# ---------------------------------------------------------------------------
# exact per-instance deciders used by the checker


def member_plus_cone(family: UncertaintyFamily, X: Position, Z: Position) -> Optional[bool]:
    """Decide Z in U_X + L^p_+, i.e. whether some Z - K (K >= 0) is a member.

    Returns None when no exact decision procedure exists for the descriptor.
    """
    kind = family.kind
    if kind == "sup_norm_ball":
        eps = family.eps
        return bool(np.all(Z.values >= X.values - eps - MEMBER_TOL))
    if kind == "p_norm_ball":
        deficit = np.maximum(X.values - Z.values, 0.0)
        return _lp_norm(X.space, deficit, family.params["p"]) <= family.eps + MEMBER_TOL
    if kind == "wasserstein_ball":
        # lowering coordinates reaches exactly the laws with dominated quantiles
        p = family.params["p"]
        qx, qz = quantile_function(X), quantile_function(Z)
        widths, _ = _merged_quantile_gaps(qx, qz)
        cum = np.cumsum(widths)
        ix = np.minimum(np.searchsorted(qx.cum, cum, side="left"), qx.values.size - 1)
        iz = np.minimum(np.searchsorted(qz.cum, cum, side="left"), qz.values.size - 1)
        deficit = np.maximum(qx.values[ix] - qz.values[iz], 0.0)
        if math.isinf(p):
            dist = float(deficit[widths > 0].max(initial=0.0))
        else:
            dist = float(np.dot(widths, deficit**p) ** (1.0 / p))
        return dist <= family.eps + MEMBER_TOL
    if kind in ("level_band", "level_upper_set"):
        rho1 = family.rho1
        if rho1(Z) > rho1(X) + family.eps + MEMBER_TOL:
            return False
        if kind == "level_upper_set":
            return True
        # reachable values rho1(Z - k) sweep upward from rho1(Z); the band is hit
        target = rho1(X) - family.eps
        k = _boundary_step(rho1, Z, target)
        return abs(rho1(Z - k) - rho1(X)) <= family.eps + 1e-9 or rho1(Z - k) <= rho1(X) + family.eps
    return None


def member_below(family: UncertaintyFamily, X: Position, Yp: Position) -> Optional[bool]:
    """Decide whether some member of U_X lies pointwise below Yp (order preservation)."""
    kind = family.kind
    if kind == "sup_norm_ball":
        return bool(np.all(Yp.values >= X.values - family.eps - MEMBER_TOL))
    if kind == "p_norm_ball":
        excess = np.maximum(X.values - Yp.values, 0.0)
        return _lp_norm(X.space, excess, family.params["p"]) <= family.eps + MEMBER_TOL
    if kind == "wasserstein_ball":
        return member_plus_cone(family, X, Yp)
    if kind == "level_upper_set":
        return family.membership(X, Yp)  # X' = Yp itself works by monotonicity
    if kind == "level_band":
        return family.rho1(Yp) <= family.rho1(X) + family.eps + MEMBER_TOL
    return None


def member_minkowski(
    family: UncertaintyFamily, X: Position, Y: Position, lam: float, Z: Position
) -> Optional[bool]:
    """Decide Z in lam*U_X + (1-lam)*U_Y; exact for translated norm balls."""
    if family.kind in ("sup_norm_ball", "p_norm_ball"):
        mid = lam * X + (1.0 - lam) * Y
        return family.membership(mid, Z)
    return None


def cone_witness(family: UncertaintyFamily, X: Position, Z: Position) -> Optional[Position]:
    """A member W of U_X with W <= Z pointwise, when Z in U_X + L^p_+; else None.

    Used to turn cone-membership decisions into explicit dominated members.
    """
    kind = family.kind
    if family.membership(X, Z):
        return Z
    if member_plus_cone(family, X, Z) is not True:
        return None
    if kind == "sup_norm_ball":
        W = Position(X.space, np.minimum(Z.values, X.values + family.eps))
        return W if family.membership(X, W) else None
    if kind == "p_norm_ball":
        p = family.params["p"]
        D = Z.values - X.values
        lo, hi = 0.0, float(np.max(np.abs(D))) + 1.0
        for _ in range(80):
            tau = 0.5 * (lo + hi)
            if _lp_norm(X.space, np.minimum(D, tau), p) <= family.eps:
                lo = tau
            else:
                hi = tau
        W = Position(X.space, X.values + np.minimum(D, lo))
        return W if family.membership(X, W) else None
    if kind == "wasserstein_ball":
        # dominated quantile envelope, realized comonotonically along Z
        qx = quantile_function(X)
        order = np.argsort(Z.values, kind="stable")
        cum = np.cumsum(Z.space.probs[order])
        mids = cum - 0.5 * Z.space.probs[order]
        ixq = np.minimum(np.searchsorted(qx.cum, mids, side="left"), qx.values.size - 1)
        vals = np.empty(order.size)
        vals[order] = np.minimum(Z.values[order], qx.values[ixq])
        W = Position(Z.space, vals)
        return W if family.membership(X, W) else None
    if kind in ("level_band", "level_upper_set"):
        rho1 = family.rho1
        target = rho1(X) - family.eps if kind == "level_band" else rho1(X)
        k = _boundary_step(rho1, Z, min(target, rho1(X) + family.eps))
        W = Z - k
        return W if family.membership(X, W) else None
    return None


def minkowski_split(
    family: UncertaintyFamily, X: Position, Y: Position, lam: float, Z: Position
):
    """Decompose Z = lam*Z1 + (1-lam)*Z2 with Z1 in U_X, Z2 in U_Y, if certified.

    Exact for translated norm balls; attempted (membership-verified) for
    Wasserstein balls; None otherwise.
    """
    if family.kind in ("sup_norm_ball", "p_norm_ball", "wasserstein_ball"):
        mid = lam * X + (1.0 - lam) * Y
        D = Z - mid
        Z1, Z2 = X + D, Y + D
        if family.membership(X, Z1) and family.membership(Y, Z2):
            return Z1, Z2
    return None


def transport_member(
    family: UncertaintyFamily, src: Position, dst: Position, Z: Position
) -> Optional[Position]:
    """Map a member Z of U_src to a membership-verified candidate in U_dst.

    For the monotone comparison dst <= src the returned candidate W satisfies
    rho(W) >= rho(Z) for every decreasing rho (W is Z pushed down by src-dst,
    in payoff or quantile space).
    """
    kind = family.kind
    if kind in ("sup_norm_ball", "p_norm_ball"):
        W = Z + (dst - src)
        return W if family.membership(dst, W) else None
    if kind == "wasserstein_ball":
        # quantile-space shift realized along Z's comonotone order; exact on
        # uniform spaces, membership-verified in general
        space = Z.space
        order_z = np.argsort(Z.values, kind="stable")
        shift = np.sort(dst.values) - np.sort(src.values)
        vals = np.empty(space.n)
        vals[order_z] = Z.values[order_z] + shift
        W = Position(space, vals)
        return W if family.membership(dst, W) else None
    if kind in ("level_band", "level_upper_set"):
        if family.membership(dst, Z):
            return Z
        return cone_witness(family, dst, Z)
    if family.membership(dst, Z):
        return Z
    return None


# ---------------------------------------------------------------------------
# certified rules


def _verify_quasi_violation(family, X, Y, lam, Z) -> bool:
    mid = lam * X + (1.0 - lam) * Y
    return family.membership(mid, Z) and not family.membership(X, Z) and not family.membership(Y, Z)


def _verify_c_quasi_violation(family, X, Y, lam, Z) -> Optional[bool]:
    mid = lam * X + (1.0 - lam) * Y
    if not family.membership(mid, Z):
        return False
    in_x = member_plus_cone(family, X, Z)
    in_y = member_plus_cone(family, Y, Z)
    if in_x is None or in_y is None:
        return None
    return not in_x and not in_y


def _ball_quasi_counterexample(family: UncertaintyFamily, space: ProbSpace) -> Optional[dict]:
    eps = family.eps
    c = 10.0 * eps if eps > 0 else 1.0
    offset = 0.5 * eps if eps > 0 else 0.0
    X = Position(space, np.zeros(space.n))
    Y = Position(space, np.full(space.n, c))
    Z = Position(space, np.full(space.n, 0.5 * c + offset))
    if _verify_quasi_violation(family, X, Y, 0.5, Z):
        return {"X": X, "Y": Y, "lam": 0.5, "Z": Z}
    return None


def _ball_c_quasi_counterexample(family: UncertaintyFamily, space: ProbSpace) -> Optional[dict]:
    if space.n < 2:
        return None
    eps = family.eps
    base = max(eps, 1.0)
    for scale in (10.0, 40.0, 160.0, 640.0):
        y = np.full(space.n, -scale * base)
        y[0] = scale * base
        X = Position(space, np.zeros(space.n))
        Y = Position(space, y)
        Z = Position(space, 0.5 * y + 0.5 * eps)
        out = _verify_c_quasi_violation(family, X, Y, 0.5, Z)
        if out:
            return {"X": X, "Y": Y, "lam": 0.5, "Z": Z}
    return None


def _certified_rules(family: UncertaintyFamily, prop: str, space: ProbSpace) -> Optional[PropertyVerdict]:
    kind, eps = family.kind, family.eps
    rho1 = family.rho1

    if kind in ("sup_norm_ball", "p_norm_ball"):
        if prop == "convex":
            return certified("translated norm balls form a convex family")
        if prop == "cash_invariant":
            return certified("membership depends on Z - X only")
        if prop == "order_preserving":
            return certified("X' = Y' - (Y - X) is a dominated member")
        if prop == "quasi_convex":
            w = _ball_quasi_counterexample(family, space)
            if w is not None:
                return counterexample(w, "constant-shift witness")
        if prop == "c_quasi_convex":
            w = _ball_c_quasi_counterexample(family, space)
            if w is not None:
                return counterexample(w, "two-sided spread witness")
        if prop == "solid" and eps < math.inf:
            X = Position(space, np.zeros(space.n))
            Zbar = Position(space, np.full(space.n, 2.0 * eps + 1.0))
            if not family.membership(X, Zbar):
                return counterexample({"X": X, "Z": X, "Zbar": Zbar}, "raise above the band")
        if prop == "monotone" and eps < math.inf:
            X = Position(space, np.zeros(space.n))
            Y = Position(space, np.full(space.n, 3.0 * eps + 1.0))
            if not family.membership(X, Y):
                return counterexample({"X": X, "Y": Y, "Z": Y}, "translated ball escapes U_X")
        if prop == "law_invariant" and space.n >= 2:
            pr = space.probs
            pairs = [(i, j) for i in range(space.n) for j in range(i + 1, space.n) if abs(pr[i] - pr[j]) < 1e-15]
            if pairs:
                i, j = pairs[0]
                v = np.zeros(space.n)
                v[i] = 3.0 * eps + 1.0
                vp = np.zeros(space.n)
                vp[j] = 3.0 * eps + 1.0
                X, Xp = Position(space, v), Position(space, vp)
                Z = X
                if family.membership(X, Z) and not family.membership(Xp, Z):
                    return counterexample({"X": X, "Xp": Xp, "Z": Z}, "rearranged center moves the ball")
        return None

    if kind == "wasserstein_ball":
        if prop == "convex":
            return certified("Wasserstein balls form a convex family")
        if prop == "law_invariant":
            return certified("membership depends on laws only")
        if prop == "cash_invariant":
            return certified("d_W(X + c, Z) = d_W(X, Z - c)")
        if prop == "order_preserving":
            return certified("dominated comonotone quantile envelope is a member")
        if prop in ("solid", "monotone") and eps < math.inf:
            X = Position(space, np.zeros(space.n))
            Zbar = Position(space, np.full(space.n, 3.0 * eps + 1.0))
            if not family.membership(X, Zbar):
                if prop == "solid":
                    return counterexample({"X": X, "Z": X, "Zbar": Zbar}, "upward shift leaves the ball")
                return counterexample({"X": X, "Y": Zbar, "Z": Zbar}, "ball around Y escapes U_X")
        if prop == "quasi_convex":
            w = _ball_quasi_counterexample(family, space)
            if w is not None:
                return counterexample(w, "constant-shift witness")
        return None

    if kind in ("level_band", "level_upper_set"):
        if prop == "c_quasi_convex":
            return certified("intermediate-value scan over downward cash shifts")
        if prop == "law_invariant" and rho1.flags.law_invariant:
            return certified("base measure is law invariant")
        if prop == "cash_invariant" and rho1.flags.cash_additive:
            return certified("base measure is cash additive")
        if kind == "level_upper_set":
            if prop in ("solid", "monotone"):
                return certified("monotonicity of the base measure")
            if prop == "order_preserving":
                return certified("monotone families preserve order (take X' = Y')")
            if prop == "quasi_convex":
                return certified("c-quasi-convex and solid")
        if kind == "level_band" and rho1.flags.cash_additive and eps < math.inf:
            shift = 2.0 * eps + 1.0
            X = Position(space, np.zeros(space.n))
            if prop == "solid":
                Zbar = Position(space, np.full(space.n, shift))
                if not family.membership(X, Zbar):
                    return counterexample({"X": X, "Z": X, "Zbar": Zbar}, "level drops out of the band")
            if prop == "monotone":
                Y = Position(space, np.full(space.n, shift))
                if family.membership(Y, Y) and not family.membership(X, Y):
                    return counterexample({"X": X, "Y": Y, "Z": Y}, "band around Y misses U_X")
        return None

    return None


# ---------------------------------------------------------------------------
# sampled falsification


def _sampled_check(
    family: UncertaintyFamily, prop: str, space: ProbSpace, trials: int, seed: int
) -> PropertyVerdict:
    rng = np.random.default_rng(seed)
    resolution = max(family.eps / 2.0, 0.25)
    budget = 12
    undecided = 0

    for t in range(trials):
        X = random_position(space, rng)
        if prop == "monotone":
            Y = X + Position(space, np.abs(rng.normal(size=space.n)))
            for Z in family.discretize(Y, resolution, budget, seed + 7 * t + 1):
                if not family.membership(X, Z):
                    return counterexample({"X": X, "Y": Y, "Z": Z})
        elif prop == "order_preserving":
            Y = X + Position(space, np.abs(rng.normal(size=space.n)))
            for Yp in family.discretize(Y, resolution, budget, seed + 7 * t + 1):
                ok = member_below(family, X, Yp)
                if ok is None:
                    undecided += 1
                elif not ok:
                    return counterexample({"X": X, "Y": Y, "Yp": Yp})
        elif prop == "solid":
            for Z in family.discretize(X, resolution, budget, seed + 7 * t + 1):
                Zbar = Z + Position(space, np.abs(rng.normal(size=space.n)))
                if not family.membership(X, Zbar):
                    return counterexample({"X": X, "Z": Z, "Zbar": Zbar})
        elif prop in ("convex", "quasi_convex", "c_quasi_convex"):
            Y = random_position(space, rng)
            lam = float(rng.uniform())
            mid = lam * X + (1.0 - lam) * Y
            for Z in family.discretize(mid, resolution, budget, seed + 7 * t + 1):
                if prop == "quasi_convex":
                    if not family.membership(X, Z) and not family.membership(Y, Z):
                        return counterexample({"X": X, "Y": Y, "lam": lam, "Z": Z})
                elif prop == "c_quasi_convex":
                    out = _verify_c_quasi_violation(family, X, Y, lam, Z)
                    if out is None:
                        undecided += 1
                    elif out:
                        return counterexample({"X": X, "Y": Y, "lam": lam, "Z": Z})
                else:
                    out = member_minkowski(family, X, Y, lam, Z)
                    if out is None:
                        undecided += 1
                    elif not out:
                        return counterexample({"X": X, "Y": Y, "lam": lam, "Z": Z})
        elif prop == "law_invariant":
            perm = rng.permutation(space.n)
            if not np.allclose(space.probs[perm], space.probs):
                continue
            Xp = Position(space, X.values[perm])
            for Z in family.discretize(X, resolution, budget, seed + 7 * t + 1):
                if family.membership(X, Z) != family.membership(Xp, Z):
                    return counterexample({"X": X, "Xp": Xp, "Z": Z})
        elif prop == "cash_invariant":
            c = float(rng.uniform(-3, 3))
            for Z in family.discretize(X, resolution, budget, seed + 7 * t + 1):
                if family.membership(X + c, Z + c) != family.membership(X, Z):
                    return counterexample({"X": X, "c": c, "Z": Z})
        elif prop == "continuous_from_above":
            # finite decreasing chain X_n = X + 2^-n * Delta; a member of U_X must
            # eventually enter U_{X_n}, with a margin bounded away from zero
            Delta = Position(space, np.abs(rng.normal(size=space.n)))
            chain = [X + (0.5**k) * Delta for k in range(1, 12)]
            entered = False
            for Z in family.discretize(X, resolution, budget, seed + 7 * t + 1):
                if any(family.membership(Xn, Z) for Xn in chain):
                    entered = True
                    continue
                # a finite chain cannot falsify the limit property unless the
                # violation margin persists instead of decaying along the tail
                m_prev = _membership_margin(family, chain[-2], Z)
                m_last = _membership_margin(family, chain[-1], Z)
                if (
                    m_prev is not None
                    and m_last is not None
                    and m_last > 1e-9
                    and m_last > 0.75 * m_prev
                ):
                    return counterexample({"X": X, "Delta": Delta, "Z": Z})
            if not entered:
                undecided += 1
        else:
            return unknown(f"unsupported property {prop!r}")

    if undecided and undecided == trials:
        return unknown("no decision procedure applied on any trial")
    note = f"{undecided} undecided trials" if undecided else ""
    return no_counterexample(trials, note)


def _membership_margin(family: UncertaintyFamily, X: Position, Z: Position) -> Optional[float]:
    """Distance-style violation margin of Z relative to U_X, where computable."""
    kind = family.kind
    if kind == "sup_norm_ball":
        return float(np.max(np.abs(Z.values - X.values))) - family.eps
    if kind == "p_norm_ball":
        return _lp_norm(X.space, Z.values - X.values, family.params["p"]) - family.eps
    if kind == "wasserstein_ball":
        return wasserstein_distance(X, Z, family.params["p"]) - family.eps
    if kind == "level_upper_set":
        return family.rho1(Z) - family.rho1(X) - family.eps
    if kind == "level_band":
        return abs(family.rho1(Z) - family.rho1(X)) - family.eps
    return None


def check_property(
    family: UncertaintyFamily,
    prop: str,
    space: ProbSpace,
    trials: int = 200,
    seed: int = 0,
) -> PropertyVerdict:
    """Check a structural property of the family on the given space.

    Certified closed-form rules (including constructed, replay-verified
    counterexamples) take precedence; otherwise seeded sampled falsification.
    """
    if prop not in FAMILY_PROPERTIES:
        raise ValueError(f"unknown family property {prop!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    verdict = _certified_rules(family, prop, space)
    if verdict is not None:
        return verdict
    return _sampled_check(family, prop, space, trials, seed)


def replay_witness(family: UncertaintyFamily, prop: str, witness: dict) -> bool:
    """Re-verify that a counterexample witness violates the property. Deterministic."""
    w = witness
    if prop == "quasi_convex":
        return _verify_quasi_violation(family, w["X"], w["Y"], w["lam"], w["Z"])
    if prop == "c_quasi_convex":
        return bool(_verify_c_quasi_violation(family, w["X"], w["Y"], w["lam"], w["Z"]))
    if prop == "convex":
        out = member_minkowski(family, w["X"], w["Y"], w["lam"], w["Z"])
        mid = w["lam"] * w["X"] + (1.0 - w["lam"]) * w["Y"]
        return family.membership(mid, w["Z"]) and out is False
    if prop == "solid":
        return family.membership(w["X"], w["Z"]) and not family.membership(w["X"], w["Zbar"])
    if prop == "monotone":
        return family.membership(w["Y"], w["Z"]) and not family.membership(w["X"], w["Z"])
    if prop == "order_preserving":
        return member_below(family, w["X"], w["Yp"]) is False
    if prop == "law_invariant":
        Z = w["Z"]
        return same_distribution(w["X"], w["Xp"]) and (
            family.membership(w["X"], Z) != family.membership(w["Xp"], Z)
        )
    if prop == "cash_invariant":
        return family.membership(w["X"] + w["c"], w["Z"] + w["c"]) != family.membership(w["X"], w["Z"])
    if prop == "continuous_from_above":
        chain = [w["X"] + (0.5**k) * w["Delta"] for k in range(1, 12)]
        return family.membership(w["X"], w["Z"]) and not any(family.membership(Xn, w["Z"]) for Xn in chain)
    raise ValueError(f"unknown family property {prop!r}")


# ---------------------------------------------------------------------------
# solidification


def solidify(family: UncertaintyFamily) -> UncertaintyFamily:
    """Upward closure: membership'(X, Z) iff Z - K is a member for some K >= 0."""
    if family.kind == "level_upper_set":
        return family

    def membership(X: Position, Z: Position) -> bool:
        out = member_plus_cone(family, X, Z)
        if out is not None:
            return out
        # generic fallback: scalar downward scan
        if family.membership(X, Z):
            return True
        for k in np.linspace(0.0, 8.0 * (1.0 + family.eps), 257):
            if family.membership(X, Z - float(k)):
                return True
        return False

    def discretize(X: Position, resolution: float, budget: int, seed: int = 0) -> list:
        pts = family.discretize(X, resolution, budget, seed)
        rng = np.random.default_rng(seed + 1)
        lifted = [Z + Position(X.space, np.abs(rng.normal(size=X.space.n))) for Z in pts[: budget // 4]]
        return [Z for Z in pts + lifted if membership(X, Z)]

    return UncertaintyFamily(
        name=f"solidified({family.name})",
        kind="solidified",
        params={"base": family, "eps": family.eps},
        membership=membership,
        discretize=discretize,
    )
