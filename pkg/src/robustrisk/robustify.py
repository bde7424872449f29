"""Robustification: worst-case risk over an uncertainty set, with labelled solvers.

``robust_value`` dispatches between closed forms (Exact), polytope vertex
enumeration (Exact), and discretize-based search (LowerBound). Preservation
checks for the robustified measure and the induced largest family are sound
one-sided tests: with LowerBound solvers, candidates are transported between
the compared sets so a reported counterexample is a genuine violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .prob_core import Position, ProbSpace, expectation
from .risk_measures import RiskFunctional
from .uncertainty import (
    PropertyVerdict,
    UncertaintyFamily,
    _boundary_step,
    check_property,
    cone_witness,
    counterexample,
    minkowski_split,
    no_counterexample,
    random_position,
    transport_member,
    unknown,
)

__all__ = [
    "RobustValue",
    "robust_value",
    "largest_family_member",
    "verify_preservation",
    "largest_family_properties",
]

_TOL = 1e-9


@dataclass(frozen=True)
class RobustValue:
    """Worst-case risk sup_{Z in U_X} rho(Z) with provenance of the solve."""

    value: float
    witness: Optional[Position]
    solver: str
    guarantee: str  # "exact" | "lower_bound"

    @property
    def exact(self) -> bool:
        return self.guarantee == "exact"


def _lex_smaller(a: Position, b: Position) -> bool:
    return tuple(a.values) < tuple(b.values)


def _best(rho: RiskFunctional, candidates: Sequence[Position]):
    """Max of rho over candidates with deterministic lexicographic tie-break."""
    best_v, best_z = -math.inf, None
    for Z in candidates:
        v = rho(Z)
        if v == math.inf:
            return math.inf, Z
        if v > best_v + 1e-12 or (abs(v - best_v) <= 1e-12 and (best_z is None or _lex_smaller(Z, best_z))):
            best_v, best_z = v, Z
    return best_v, best_z


def _same_functional(rho: RiskFunctional, other: RiskFunctional) -> bool:
    if rho is other:
        return True
    if rho.kind != other.kind:
        return False
    pa = {k: v for k, v in rho.params.items() if isinstance(v, (int, float))}
    pb = {k: v for k, v in other.params.items() if isinstance(v, (int, float))}
    return pa == pb and rho.kind != ""


def _analytic(rho: RiskFunctional, family: UncertaintyFamily, X: Position) -> Optional[RobustValue]:
    kind, eps = family.kind, family.eps
    f = rho.flags
    p = family.params.get("p")

    if kind == "sup_norm_ball" or (kind == "p_norm_ball" and math.isinf(p)):
        if f.monotone:
            W = X - eps
            return RobustValue(rho(W), W, "analytic", "exact")
        return None

    if kind == "p_norm_ball":
        if eps == 0.0:
            return RobustValue(rho(X), X, "analytic", "exact")
        W = X - eps  # constant shift has L^p(P) norm exactly eps
        if rho.kind == "expectation_floor":
            return RobustValue(max(-expectation(X) + eps, rho.params["K"]), W, "analytic", "exact")
        if rho.kind == "neg_expectation":
            return RobustValue(-expectation(X) + eps, W, "analytic", "exact")
        return None

    if kind == "wasserstein_ball":
        if eps == 0.0 and f.law_invariant:
            return RobustValue(rho(X), X, "analytic", "exact")
        if math.isinf(p) and f.monotone and f.law_invariant:
            W = X - eps
            return RobustValue(rho(W), W, "analytic", "exact")
        if rho.kind == "neg_expectation":
            return RobustValue(-expectation(X) + eps, X - eps, "analytic", "exact")
        if rho.kind == "expectation_floor":
            return RobustValue(max(-expectation(X) + eps, rho.params["K"]), X - eps, "analytic", "exact")
        if f.convex and f.law_invariant:
            # comonotone shift: X - eps sits on the ball boundary for every
            # order; attainment of the supremum there is not certified
            W = X - eps
            return RobustValue(rho(W), W, "analytic", "lower_bound")
        return None

    if kind in ("level_band", "level_upper_set"):
        rho1 = family.rho1
        if _same_functional(rho, rho1):
            target = rho(X) + eps
            k = _boundary_step(rho1, X, target)
            W = X - k
            val = rho(W)
            if abs(val - target) <= 1e-8:
                return RobustValue(target, W, "analytic", "exact")
            return RobustValue(val, W, "analytic", "lower_bound")
        return None

    return None


def _vertex_enum(rho: RiskFunctional, family: UncertaintyFamily, X: Position) -> Optional[RobustValue]:
    if not rho.flags.convex:
        return None
    kind, eps = family.kind, family.eps
    space = X.space
    n = space.n
    p = family.params.get("p")

    if kind == "sup_norm_ball" or (kind == "p_norm_ball" and math.isinf(p)):
        if n > 20:
            raise ValueError(f"vertex enumeration guarded at n <= 20, got n = {n}")
        verts = [Position(space, X.values + eps * np.array(signs)) for signs in product((-1.0, 1.0), repeat=n)]
        v, w = _best(rho, verts)
        return RobustValue(v, w, "vertex_enum", "exact")

    if kind == "p_norm_ball" and p == 1.0:
        verts = [X]
        for i in range(n):
            for s in (-1.0, 1.0):
                vals = np.array(X.values, dtype=float)
                vals[i] += s * eps / space.probs[i]
                verts.append(Position(space, vals))
        v, w = _best(rho, verts)
        return RobustValue(v, w, "vertex_enum", "exact")

    return None


def _project(family: UncertaintyFamily, X: Position, Z: Position) -> Optional[Position]:
    """Pull Z back into U_X along the segment toward X (sets are X-star-shaped here)."""
    if family.membership(X, Z):
        return Z
    lo, hi = 0.0, 1.0
    if not family.membership(X, X):
        return None
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if family.membership(X, X + mid * (Z - X)):
            lo = mid
        else:
            hi = mid
    return X + lo * (Z - X)


def _ascend(
    rho: RiskFunctional,
    family: UncertaintyFamily,
    X: Position,
    start: Position,
    rng: np.random.Generator,
    max_iter: int = 500,
) -> Position:
    Z, best = start, rho(start)
    step = 1.0
    it = 0
    while step > 1e-7 and it < max_iter:
        it += 1
        D = rng.normal(size=X.space.n)
        cand = _project(family, X, Position(X.space, Z.values + step * D))
        if cand is not None:
            v = rho(cand)
            if v > best + 1e-12:
                Z, best = cand, v
                continue
        step *= 0.5
    return Z


def robust_value(
    rho: RiskFunctional,
    family: UncertaintyFamily,
    X: Position,
    solver: str = "auto",
    resolution: float = 0.1,
    budget: int = 64,
    seed: int = 0,
    extra_candidates: Sequence[Position] = (),
    restarts: int = 8,
) -> RobustValue:
    """sup_{Z in U_X} rho(Z), with guarantee label Exact or LowerBound.

    ``extra_candidates`` are membership-filtered and added to search-based
    solvers; callers use this to anchor known members (witness transport).
    """
    extras = [Z for Z in extra_candidates if family.membership(X, Z)]

    if solver in ("auto", "analytic"):
        rv = _analytic(rho, family, X)
        if rv is not None:
            if extras:
                v, w = _best(rho, [rv.witness, *extras])
                if v > rv.value + 1e-12:
                    return RobustValue(v, w, rv.solver, rv.guarantee)
            return rv
        if solver == "analytic":
            raise ValueError(f"no analytic solver for {rho.name} over {family.name}")

    if solver in ("auto", "vertex_enum"):
        rv = _vertex_enum(rho, family, X)
        if rv is not None:
            if extras:
                v, w = _best(rho, [rv.witness, *extras])
                if v > rv.value + 1e-12:
                    return RobustValue(v, w, rv.solver, rv.guarantee)
            return rv
        if solver == "vertex_enum":
            raise ValueError(f"vertex enumeration not applicable to {rho.name} over {family.name}")

    candidates = [X, *family.discretize(X, resolution, budget, seed), *extras]
    v, w = _best(rho, candidates)
    if solver == "projected_ascent" or (solver == "auto" and restarts > 0 and v < math.inf):
        rng = np.random.default_rng(seed + 101)
        n_restarts = 32 if solver == "projected_ascent" else restarts
        order = np.argsort([-rho(c) for c in candidates])
        starts = [candidates[i] for i in order[: max(1, n_restarts // 4)]]
        while len(starts) < n_restarts:
            starts.append(candidates[int(rng.integers(len(candidates)))])
        for s in starts:
            cand = _ascend(rho, family, X, s, rng)
            cv = rho(cand)
            if cv > v + 1e-12:
                v, w = cv, cand
        return RobustValue(v, w, f"projected_ascent({n_restarts})", "lower_bound")
    return RobustValue(v, w, f"grid({resolution})", "lower_bound")


def largest_family_member(rho: RiskFunctional, robust_val: float, Z: Position) -> bool:
    """Membership in the largest inducing family: rho(Z) <= robust value at X."""
    return rho(Z) <= robust_val + _TOL


# ---------------------------------------------------------------------------
# preservation of properties under robustification


_LIGHT = dict(resolution=0.25, budget=10, restarts=0)


def _solve(rho, family, X, seed, extra=()):
    return robust_value(rho, family, X, seed=seed, extra_candidates=extra, **_LIGHT)


def _family_holds(family, prop, space, seed) -> bool:
    v = check_property(family, prop, space, trials=40, seed=seed)
    return v.holds


def verify_preservation(
    rho: RiskFunctional,
    family: UncertaintyFamily,
    prop: str,
    trials: int = 200,
    seed: int = 0,
    space: Optional[ProbSpace] = None,
) -> PropertyVerdict:
    """Sampled check that a property of rho/the family carries over to the
    robustified measure, with hypotheses validated first.

    Supported conclusions: monotone, convex, quasi_convex,
    continuous_from_above, law_invariant. Hypothesis failures are reported as
    Unknown with a note, never silently skipped.
    """
    if space is None:
        raise ValueError("a probability space is required")
    rng = np.random.default_rng(seed)

    if prop == "monotone":
        if not (_family_holds(family, "monotone", space, seed) or _family_holds(family, "order_preserving", space, seed)):
            return unknown("hypothesis violation: family neither monotone nor order preserving")
        if not rho.flags.monotone:
            return unknown("hypothesis violation: base measure not monotone")
        for t in range(trials):
            X = random_position(space, rng)
            Y = X + Position(space, np.abs(rng.normal(size=space.n)))
            rY = _solve(rho, family, Y, seed + t)
            extra = []
            if not rY.exact:
                for Z in [rY.witness, *family.discretize(Y, 0.25, 8, seed + t)]:
                    W = transport_member(family, Y, X, Z)
                    if W is not None:
                        extra.append(W)
            elif rY.witness is not None:
                W = transport_member(family, Y, X, rY.witness)
                if W is not None:
                    extra.append(W)
            rX = _solve(rho, family, X, seed + t, extra=extra)
            if rX.value < rY.value - _TOL:
                return counterexample({"X": X, "Y": Y, "rX": rX.value, "rY": rY.value})
        return no_counterexample(trials)

    if prop == "convex":
        if not rho.flags.convex:
            return unknown("hypothesis violation: base measure not flagged convex")
        if not _family_holds(family, "convex", space, seed):
            return unknown("hypothesis violation: family not certified/sampled convex")
        for t in range(trials):
            X, Y = random_position(space, rng), random_position(space, rng)
            lam = float(rng.uniform())
            mid = lam * X + (1.0 - lam) * Y
            r_mid = _solve(rho, family, mid, seed + t)
            ex_x, ex_y = [], []
            if not r_mid.exact:
                kept = [mid]
                for Z in [r_mid.witness, *family.discretize(mid, 0.25, 8, seed + t)]:
                    split = minkowski_split(family, X, Y, lam, Z)
                    if split is not None:
                        kept.append(Z)
                        ex_x.append(split[0])
                        ex_y.append(split[1])
                lhs, _ = _best(rho, kept)
            else:
                lhs = r_mid.value
                split = minkowski_split(family, X, Y, lam, r_mid.witness) if r_mid.witness else None
                if split is not None:
                    ex_x.append(split[0])
                    ex_y.append(split[1])
            rX = _solve(rho, family, X, seed + t, extra=ex_x)
            rY = _solve(rho, family, Y, seed + t, extra=ex_y)
            if lhs > lam * rX.value + (1.0 - lam) * rY.value + _TOL:
                return counterexample(
                    {"X": X, "Y": Y, "lam": lam, "lhs": lhs, "rX": rX.value, "rY": rY.value}
                )
        return no_counterexample(trials)

    if prop == "quasi_convex":
        via_union = _family_holds(family, "c_quasi_convex", space, seed) or _family_holds(
            family, "quasi_convex", space, seed
        )
        via_convex = rho.flags.quasi_convex and _family_holds(family, "convex", space, seed)
        if via_union and not rho.flags.monotone:
            via_union = False
        if not (via_union or via_convex):
            return unknown(
                "hypothesis violation: need a (c-)quasi-convex family with monotone "
                "base measure, or a quasi-convex base measure with a convex family"
            )
        for t in range(trials):
            X, Y = random_position(space, rng), random_position(space, rng)
            lam = float(rng.uniform())
            mid = lam * X + (1.0 - lam) * Y
            r_mid = _solve(rho, family, mid, seed + t)
            ex_x, ex_y = [], []
            pool = [r_mid.witness] if r_mid.exact else [r_mid.witness, *family.discretize(mid, 0.25, 8, seed + t)]
            kept = [mid]
            for Z in pool:
                if Z is None:
                    continue
                placed = False
                if via_union:
                    W = cone_witness(family, X, Z)
                    if W is not None:
                        ex_x.append(W)
                        placed = True
                    else:
                        W = cone_witness(family, Y, Z)
                        if W is not None:
                            ex_y.append(W)
                            placed = True
                if not placed and via_convex:
                    split = minkowski_split(family, X, Y, lam, Z)
                    if split is not None:
                        ex_x.append(split[0])
                        ex_y.append(split[1])
                        placed = True
                if placed:
                    kept.append(Z)
            lhs = r_mid.value if r_mid.exact else _best(rho, kept)[0]
            rX = _solve(rho, family, X, seed + t, extra=ex_x)
            rY = _solve(rho, family, Y, seed + t, extra=ex_y)
            if lhs > max(rX.value, rY.value) + _TOL:
                return counterexample(
                    {"X": X, "Y": Y, "lam": lam, "lhs": lhs, "rX": rX.value, "rY": rY.value}
                )
        return no_counterexample(trials)

    if prop == "continuous_from_above":
        if not _family_holds(family, "monotone", space, seed):
            return unknown("hypothesis violation: family not monotone")
        cfa = check_property(family, "continuous_from_above", space, trials=20, seed=seed)
        if cfa.is_counterexample:
            return unknown("hypothesis violation: family continuity from above falsified")
        depth = 12
        for t in range(trials):
            X = random_position(space, rng)
            Delta = Position(space, np.abs(rng.normal(size=space.n)))
            Xn = X + (0.5**depth) * Delta
            rX = _solve(rho, family, X, seed + t)
            rXn = _solve(rho, family, Xn, seed + t)
            if rXn.value > rX.value + _TOL:  # monotone half
                if not (rX.exact and rXn.exact):
                    carried = [
                        Z
                        for Z in [rXn.witness, *family.discretize(Xn, 0.25, 8, seed + t)]
                        if Z is not None
                    ]
                    rX = _solve(rho, family, X, seed + t, extra=carried)
                if rXn.value > rX.value + _TOL:
                    return counterexample({"X": X, "Delta": Delta, "rX": rX.value, "rXn": rXn.value})
            if rX.exact and rXn.exact:
                # shipped measures are 1-Lipschitz in the sup norm, so the
                # robust values along the chain may differ by at most the gap
                gap = float(np.max(np.abs(Xn.values - X.values)))
                if rX.value - rXn.value > gap + _TOL:
                    return counterexample({"X": X, "Delta": Delta, "rX": rX.value, "rXn": rXn.value})
            else:
                extra = [
                    Z
                    for Z in [rX.witness, *family.discretize(X, 0.25, 8, seed + t)]
                    if Z is not None and family.membership(Xn, Z)
                ]
                if extra:
                    r2 = _solve(rho, family, Xn, seed + t, extra=extra)
                    lb = _best(rho, extra)[0]
                    if r2.value < lb - _TOL:
                        return counterexample({"X": X, "Delta": Delta, "rXn": r2.value, "lb": lb})
        return no_counterexample(trials)

    if prop == "law_invariant":
        if not _family_holds(family, "law_invariant", space, seed):
            return unknown("hypothesis violation: family not law invariant")
        for t in range(trials):
            X = random_position(space, rng)
            perm = rng.permutation(space.n)
            if not np.allclose(space.probs[perm], space.probs):
                continue
            Xp = Position(space, X.values[perm])
            rX = _solve(rho, family, X, seed + t)
            if rX.exact:
                rXp = _solve(rho, family, Xp, seed + t)
                if abs(rX.value - rXp.value) > _TOL:
                    return counterexample({"X": X, "Xp": Xp, "rX": rX.value, "rXp": rXp.value})
            else:
                cands = [rX.witness, *family.discretize(X, 0.25, 8, seed + t)]
                moved = [Position(space, Z.values[perm]) for Z in cands if Z is not None]
                rXp = _solve(rho, family, Xp, seed + t, extra=moved)
                if rXp.value < rX.value - _TOL and rho.flags.law_invariant:
                    return counterexample({"X": X, "Xp": Xp, "rX": rX.value, "rXp": rXp.value})
        return no_counterexample(trials)

    raise ValueError(f"unsupported preservation property {prop!r}")


def largest_family_properties(
    rho: RiskFunctional,
    family: UncertaintyFamily,
    trials: int = 200,
    seed: int = 0,
    space: Optional[ProbSpace] = None,
) -> dict:
    """Verdicts for solidity, monotonicity and quasi-convexity of the largest
    family Z -> {rho(Z) <= robust value}."""
    if space is None:
        raise ValueError("a probability space is required")
    rng = np.random.default_rng(seed)
    out = {}

    # solidity: lift any member upward, it must stay a member
    for t in range(trials):
        X = random_position(space, rng)
        rX = _solve(rho, family, X, seed + t)
        Z = rX.witness if rX.witness is not None else X
        Zbar = Z + Position(space, np.abs(rng.normal(size=space.n)))
        if largest_family_member(rho, rX.value, Z) and not largest_family_member(rho, rX.value, Zbar):
            out["solid"] = counterexample({"X": X, "Z": Z, "Zbar": Zbar})
            break
    else:
        out["solid"] = no_counterexample(trials)

    # monotonicity of the induced family, via monotonicity of the robust value
    mono = verify_preservation(rho, family, "monotone", trials=trials, seed=seed + 1, space=space)
    if mono.tag == "unknown":
        out["monotone"] = mono
    elif mono.is_counterexample:
        out["monotone"] = mono
    else:
        out["monotone"] = no_counterexample(trials)

    # quasi-convexity of the induced family from quasi-convexity of the value
    qc = verify_preservation(rho, family, "quasi_convex", trials=trials, seed=seed + 2, space=space)
    if qc.tag == "unknown" or qc.is_counterexample:
        out["quasi_convex"] = qc
        return out
    bad = None
    for t in range(trials):
        X, Y = random_position(space, rng), random_position(space, rng)
        lam = float(rng.uniform())
        mid = lam * X + (1.0 - lam) * Y
        r_mid = _solve(rho, family, mid, seed + 3 * t)
        Z = r_mid.witness if r_mid.witness is not None else mid
        if not largest_family_member(rho, r_mid.value, Z):
            continue
        ex_x = [W for W in [cone_witness(family, X, Z)] if W is not None]
        ex_y = [W for W in [cone_witness(family, Y, Z)] if W is not None]
        split = minkowski_split(family, X, Y, lam, Z)
        if split is not None:
            ex_x.append(split[0])
            ex_y.append(split[1])
        rX = _solve(rho, family, X, seed + 3 * t, extra=ex_x)
        rY = _solve(rho, family, Y, seed + 3 * t, extra=ex_y)
        if rho(Z) > max(rX.value, rY.value) + _TOL:
            bad = {"X": X, "Y": Y, "lam": lam, "Z": Z}
            break
    out["quasi_convex"] = counterexample(bad) if bad else no_counterexample(trials)
    return out
