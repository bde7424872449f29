"""Support functions, minimal penalties, penalty-type surfaces and dual verifiers.

The dual side of every verifier is a finite maximization over a simplex grid
of scenario measures. Brute-force penalty surfaces always include
caller-supplied anchor positions so the gap at the query point is one-sided
despite lattice coarseness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .prob_core import (
    Position,
    ProbSpace,
    ScenarioMeasure,
    density_norm,
    expectation_under,
    quantile_function,
    relative_entropy,
    same_distribution,
    _quantile_of,
)
from .risk_measures import LossFunction, RiskFunctional
from .robustify import robust_value
from .uncertainty import (
    PropertyVerdict,
    UncertaintyFamily,
    counterexample,
    no_counterexample,
)

__all__ = [
    "SimplexGrid",
    "simplex_grid",
    "PenaltySurface",
    "support_function",
    "minimal_penalty",
    "penalty_type",
    "loss_penalty",
    "verify_primal_dual",
    "verify_robust_dual",
    "verify_convex_cash_additive_dual",
    "verify_second_approach_dual",
    "non_expansivity_check",
    "wasserstein_bound_check",
    "dual_argmax",
]


# ---------------------------------------------------------------------------
# simplex grids


@dataclass(frozen=True)
class SimplexGrid:
    """Finite set of scenario measures covering the probability simplex."""

    space: ProbSpace
    step: float
    points: tuple

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head, *rest)


def simplex_grid(
    space: ProbSpace, step: float = 0.01, max_random: int = 300, seed: int = 0
) -> SimplexGrid:
    """Uniform lattice of probability vectors at the given step (n <= 3), plus
    vertices and the reference measure; Dirichlet sample for larger n."""
    if not 0 < step <= 1:
        raise ValueError("step must lie in (0, 1]")
    n = space.n
    seen = {}

    def add(weights: np.ndarray):
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
        key = tuple(np.round(w, 12))
        if key not in seen:
            seen[key] = ScenarioMeasure(space, w / space.probs)

    add(space.probs)  # P itself
    for i in range(n):
        v = np.zeros(n)
        v[i] = 1.0
        add(v)
    if n <= 3:
        M = max(1, int(round(1.0 / step)))
        for comp in _compositions(M, n):
            add(np.array(comp, dtype=float) / M)
    else:
        rng = np.random.default_rng(seed)
        for _ in range(max_random):
            add(rng.dirichlet(np.ones(n)))
    return SimplexGrid(space=space, step=step, points=tuple(seen.values()))


# ---------------------------------------------------------------------------
# support functions


def _conjugate_order(p: float) -> float:
    if math.isinf(p):
        return 1.0
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def rearranged_expectation(Q: ScenarioMeasure, Y: Position) -> float:
    """sup over Y' with the law of Y of E_Q[Y']: the comonotone quantile integral
    of Y against the density dQ/dP."""
    qy = quantile_function(Y)
    qd = _quantile_of(Q.density, Q.space.probs)
    cum = np.union1d(qy.cum, qd.cum)
    cum = cum[cum > 0]
    widths = np.diff(np.concatenate(([0.0], cum)))
    iy = np.minimum(np.searchsorted(qy.cum, cum, side="left"), qy.values.size - 1)
    idx = np.minimum(np.searchsorted(qd.cum, cum, side="left"), qd.values.size - 1)
    return float(np.dot(widths, qy.values[iy] * qd.values[idx]))


def support_function(
    family: UncertaintyFamily,
    Q: ScenarioMeasure,
    X: Position,
    resolution: float = 0.1,
    budget: int = 64,
    seed: int = 0,
) -> float:
    """phi_Q(X) = sup over U_X of E_Q[-Z]; closed forms for ball families."""
    kind, eps = family.kind, family.eps
    p = family.params.get("p")
    if kind == "sup_norm_ball":
        return expectation_under(Q, -X) + eps
    if kind == "p_norm_ball":
        if math.isinf(p):
            return expectation_under(Q, -X) + eps
        return expectation_under(Q, -X) + eps * density_norm(Q, _conjugate_order(p))
    if kind == "wasserstein_ball":
        return rearranged_expectation(Q, -X) + eps * density_norm(Q, _conjugate_order(p))
    if kind in ("level_band", "level_upper_set"):
        rho1 = family.rho1
        c1 = _closed_form_penalty(rho1, Q)
        if c1 is not None and rho1.flags.cash_additive:
            # members satisfy E_Q[-Z] <= rho1(Z) + c(Q) <= rho1(X) + eps + c(Q)
            return rho1(X) + eps + c1
    # numeric lower bound over discretized members
    best = -math.inf
    for Z in [X, *family.discretize(X, resolution, budget, seed)]:
        best = max(best, expectation_under(Q, -Z))
    return best


# ---------------------------------------------------------------------------
# minimal penalties


def _closed_form_penalty(rho: RiskFunctional, Q: ScenarioMeasure) -> Optional[float]:
    kind = rho.kind
    if kind == "entropic":
        return relative_entropy(Q) / rho.params["gamma"]
    if kind == "expected_shortfall":
        alpha = rho.params["alpha"]
        return 0.0 if float(Q.density.max()) <= 1.0 / alpha + 1e-9 else math.inf
    if kind == "neg_expectation":
        return 0.0 if np.allclose(Q.density, 1.0, rtol=0.0, atol=1e-9) else math.inf
    if kind == "worst_case":
        return 0.0
    if kind == "certainty_equivalent" and rho.params.get("loss") is not None:
        if rho.params["loss"].name == "exp":
            return relative_entropy(Q)
    return None


def _box_lattice(n: int, B: float, h: float) -> np.ndarray:
    axis = np.arange(-B, B + h / 2, h)
    return np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)


def _batch_rho(rho: RiskFunctional, pts: np.ndarray, space: ProbSpace) -> np.ndarray:
    """Vectorized evaluation for the shipped measure kinds; loop otherwise."""
    pr = space.probs
    kind = rho.kind
    if kind == "neg_expectation":
        return -pts @ pr
    if kind == "expectation_floor":
        return np.maximum(-pts @ pr, rho.params["K"])
    if kind == "worst_case":
        return np.max(-pts, axis=1)
    if kind == "entropic" or (
        kind == "certainty_equivalent" and rho.params.get("loss") is not None and rho.params["loss"].name == "exp"
    ):
        gamma = rho.params.get("gamma", 1.0)
        a = np.log(pr)[None, :] - gamma * pts
        m = a.max(axis=1, keepdims=True)
        return (m[:, 0] + np.log(np.exp(a - m).sum(axis=1))) / gamma
    if kind == "expected_shortfall":
        alpha = rho.params["alpha"]
        losses = -pts
        order = np.argsort(-losses, axis=1)
        w = pr[order]
        l_sorted = np.take_along_axis(losses, order, axis=1)
        cum = np.cumsum(w, axis=1)
        take = np.minimum(w, np.maximum(alpha - (cum - w), 0.0))
        return (take * l_sorted).sum(axis=1) / alpha
    return np.array([rho(Position(space, row)) for row in pts])


def minimal_penalty(
    rho: RiskFunctional, Q: ScenarioMeasure, bound: float = 20.0, step: float = 0.1
) -> float:
    """c_rho(Q) = sup_X {E_Q[-X] - rho(X)}; closed form where known, else a
    box-lattice supremum with linear-growth detection."""
    closed = _closed_form_penalty(rho, Q)
    if closed is not None:
        return closed
    space = Q.space
    lattice = _box_lattice(space.n, bound, step)
    gains = -(lattice @ (space.probs * Q.density)) - _batch_rho(rho, lattice, space)
    inner = np.max(np.abs(lattice), axis=1) <= bound / 2 + 1e-12
    s_full, s_half = float(gains.max()), float(gains[inner].max())
    if s_full > s_half + 1e-6:
        return math.inf  # still growing at the box boundary
    return s_full


# ---------------------------------------------------------------------------
# penalty-type surfaces R(t, Q)


@dataclass(frozen=True)
class PenaltySurface:
    """R(t, Q): smallest risk among positions with Q-expected loss t."""

    evaluator: Callable[[float, ScenarioMeasure], float]
    kind: str  # "brute_force" | "cash_additive" | "loss"
    params: dict = field(default_factory=dict)

    def __call__(self, t: float, Q: ScenarioMeasure) -> float:
        return self.evaluator(t, Q)


def _brute_force_R(rho_eval, space: ProbSpace, B: float, h: float, anchors: Sequence[Position]):
    axis = np.arange(-B, B + h / 2, h)

    def evaluator(t: float, Q: ScenarioMeasure) -> float:
        a = space.probs * Q.density  # weights of E_Q[.]
        live = a > 1e-15
        idx = np.argsort(-a)
        j = int(idx[0])  # solve the constraint for the heaviest coordinate
        best = math.inf
        free = [i for i in range(space.n) if i != j and live[i]]
        base = np.full(space.n, B, dtype=float)  # null atoms pushed to the top
        if free:
            mesh = np.stack(np.meshgrid(*([axis] * len(free)), indexing="ij"), axis=-1).reshape(-1, len(free))
        else:
            mesh = np.zeros((1, 0))
        pts = np.tile(base, (mesh.shape[0], 1))
        for col, i in enumerate(free):
            pts[:, i] = mesh[:, col]
        resid = -t - pts[:, [i for i in range(space.n) if i != j]] @ a[[i for i in range(space.n) if i != j]]
        yj = resid / a[j]
        ok = np.abs(yj) <= B + 1e-9
        if np.any(ok):
            pts = pts[ok]
            pts[:, j] = yj[ok]
            best = float(np.min(_batch_rho(rho_eval, pts, space)))
        for Y in anchors:
            shift = expectation_under(Q, -Y) - t  # move the anchor onto the hyperplane
            best = min(best, rho_eval(Y + shift))
        return best

    return evaluator


def penalty_type(
    rho: RiskFunctional,
    kind: str = "cash_additive",
    space: Optional[ProbSpace] = None,
    bound: float = 20.0,
    step: float = 0.4,
    anchors: Sequence[Position] = (),
    loss: Optional[LossFunction] = None,
    penalty_bound: float = 20.0,
    penalty_step: float = 0.1,
) -> PenaltySurface:
    """Build the penalty-type functional R_rho as a reusable surface."""
    if kind == "cash_additive":
        if not rho.flags.cash_additive:
            raise ValueError(f"{rho.name} is not flagged cash-additive")

        def evaluator(t: float, Q: ScenarioMeasure) -> float:
            return t - minimal_penalty(rho, Q, penalty_bound, penalty_step)

        return PenaltySurface(evaluator, "cash_additive", {"rho": rho})
    if kind == "loss":
        if loss is None:
            raise ValueError("loss surface requires a loss function")
        return PenaltySurface(lambda t, Q: loss_penalty(loss, t, Q), "loss", {"loss": loss})
    if kind == "brute_force":
        if space is None:
            raise ValueError("brute-force surface requires the probability space")
        ev = _brute_force_R(rho, space, bound, step, tuple(anchors))
        return PenaltySurface(ev, "brute_force", {"rho": rho, "B": bound, "h": step, "anchors": tuple(anchors)})
    raise ValueError(f"unknown penalty surface kind {kind!r}")


def loss_penalty(loss: LossFunction, t: float, Q: ScenarioMeasure) -> float:
    """R_ell(t, Q) = ell^-1(max_{x >= 0} { x t - E_P[ell*(x dQ/dP)] })."""
    if loss.name == "exp":
        return t - relative_entropy(Q)
    pr, d = Q.space.probs, Q.density

    def g(x: float) -> float:
        conj = loss.conj_vec(x * d)
        if np.any(np.isinf(conj)):
            return -math.inf
        return x * t - float(np.dot(pr, conj))

    lo, hi = 0.0, 1.0
    grew = 0
    while g(hi) >= g(max(hi / 2.0, 1e-12)) and math.isfinite(g(hi)):
        hi *= 2.0
        grew += 1
        if hi > 1e12:
            return math.inf  # objective still rising: +inf tendency
    if not math.isfinite(g(hi)) and not math.isfinite(g(0.0)):
        # scan for any feasible x before giving up
        xs = np.concatenate(([0.0], np.geomspace(1e-8, 1e4, 200)))
        vals = [g(float(x)) for x in xs]
        best = max(vals)
        if not math.isfinite(best):
            return -math.inf
        i = int(np.argmax(vals))
        lo, hi = xs[max(0, i - 1)], xs[min(len(xs) - 1, i + 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, dd = b - phi * (b - a), a + phi * (b - a)
    fc, fd = g(c), g(dd)
    for _ in range(200):
        if fc >= fd:
            b, dd, fd = dd, c, fc
            c = b - phi * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, dd, fd
            dd = a + phi * (b - a)
            fd = g(dd)
        if b - a < 1e-12 * max(1.0, abs(b)):
            break
    best = max(g(0.0), fc, fd)
    return float(loss.ell_inv(best)) if math.isfinite(best) else best


# ---------------------------------------------------------------------------
# dual verifiers


def _grid_max(grid: SimplexGrid, f) -> float:
    best = -math.inf
    for Q in grid:
        v = f(Q)
        if v > best:
            best = v
    return best


def _grid_opt(grid: SimplexGrid, f):
    best, arg = -math.inf, None
    for Q in grid:
        v = f(Q)
        if v > best:
            best, arg = v, Q
    return best, arg


def _polish_simplex(space: ProbSpace, f, Q0: ScenarioMeasure, radius: float, rounds: int = 120):
    """Local pattern search on the simplex around Q0: pairwise mass transfers
    with a halving radius. Tightens the lattice supremum without leaving the
    feasible set, so the result is still a valid dual lower bound. Returns the
    refined value together with the refined measure."""
    w = np.array(Q0.density * space.probs, dtype=float)
    Qbest = Q0
    best = f(Q0)
    r = radius
    for _ in range(rounds):
        improved = False
        for i in range(space.n):
            for j in range(space.n):
                if i == j:
                    continue
                move = min(r, w[j])
                if move <= 0.0:
                    continue
                w2 = w.copy()
                w2[i] += move
                w2[j] -= move
                Q2 = ScenarioMeasure(space, w2 / w2.sum() / space.probs)
                v = f(Q2)
                if v > best + 1e-15:
                    w, best, Qbest, improved = w2, v, Q2, True
        if not improved:
            r *= 0.5
            if r < 1e-13:
                break
    return best, Qbest


def verify_primal_dual(
    rho: RiskFunctional, X: Position, grid: SimplexGrid, penalty: PenaltySurface, polish: bool = True
) -> dict:
    """Compare rho(X) with the grid supremum of R(E_Q[-X], Q)."""
    if not (rho.flags.monotone and rho.flags.quasi_convex and rho.flags.continuous_from_above):
        raise ValueError(f"{rho.name} lacks the flags required by the dual representation")
    primal = rho(X)

    def g(Q):
        return penalty(expectation_under(Q, -X), Q)

    dual, arg = _grid_opt(grid, g)
    if polish and arg is not None:
        dual = max(dual, _polish_simplex(grid.space, g, arg, grid.step)[0])
    return {"primal": primal, "dual": dual, "gap": primal - dual, "step": grid.step}


def verify_robust_dual(
    rho: RiskFunctional,
    family: UncertaintyFamily,
    X: Position,
    grid: SimplexGrid,
    loss: Optional[LossFunction] = None,
    penalty: Optional[PenaltySurface] = None,
    seed: int = 0,
    polish: bool = True,
) -> dict:
    """Robust value vs sup_Q R_rho(phi_Q(X), Q) (certainty-equivalent form when
    a loss is supplied)."""
    if not (rho.flags.quasi_convex and (rho.flags.cash_subadditive or rho.flags.cash_additive or loss is not None)):
        raise ValueError(f"{rho.name} lacks the flags required by the robust dual")
    if penalty is None:
        if loss is not None:
            penalty = penalty_type(rho, "loss", loss=loss)
        elif rho.flags.cash_additive:
            penalty = penalty_type(rho, "cash_additive")
        else:
            anchors = (X, X - family.eps)
            penalty = penalty_type(rho, "brute_force", space=X.space, anchors=anchors)
    lhs = robust_value(rho, family, X, seed=seed)

    def g(Q):
        return penalty(support_function(family, Q, X, seed=seed), Q)

    dual, arg = _grid_opt(grid, g)
    if polish and arg is not None:
        dual = max(dual, _polish_simplex(grid.space, g, arg, grid.step)[0])
    return {
        "robust": lhs.value,
        "dual": dual,
        "gap": lhs.value - dual,
        "step": grid.step,
        "guarantee": lhs.guarantee,
    }


def _support_penalty(
    family: UncertaintyFamily, Q: ScenarioMeasure, Qt: ScenarioMeasure
) -> Optional[float]:
    """Minimal penalty of the support functional phi_Q, evaluated at Qt.

    For translated norm balls phi_Q is E_Q[-.] plus a constant, so the penalty
    is finite only at Qt = Q; for Wasserstein balls, at rearrangements of Q.
    """
    kind, eps = family.kind, family.eps
    p = family.params.get("p")
    if kind == "sup_norm_ball" or (kind == "p_norm_ball" and math.isinf(p)):
        if np.allclose(Q.density, Qt.density, atol=1e-9):
            return -eps
        return math.inf
    if kind == "p_norm_ball":
        if np.allclose(Q.density, Qt.density, atol=1e-9):
            return -eps * density_norm(Q, _conjugate_order(p))
        return math.inf
    if kind == "wasserstein_ball":
        a = Position(Q.space, Q.density)
        b = Position(Q.space, Qt.density)
        if same_distribution(a, b, tol=1e-9):
            return -eps * density_norm(Q, _conjugate_order(p))
        return math.inf
    return None


def verify_convex_cash_additive_dual(
    rho: RiskFunctional, family: UncertaintyFamily, X: Position, grid: SimplexGrid, polish: bool = True
) -> dict:
    """Robust value vs sup_{Qt} { E_Qt[-X] - inf_Q { c_{phi_Q}(Qt) + c_rho(Q) } }."""
    if not (rho.flags.convex and rho.flags.cash_additive):
        raise ValueError(f"{rho.name} must be convex and cash-additive")
    lhs = robust_value(rho, family, X)
    pts = list(grid)
    c_rho = [minimal_penalty(rho, Q) for Q in pts]
    dual, arg = -math.inf, None
    for Qt in pts:
        inner = math.inf
        for Q, cr in zip(pts, c_rho):
            if math.isinf(cr):
                continue
            cphi = _support_penalty(family, Q, Qt)
            if cphi is None:
                raise ValueError(f"no support-penalty closed form for {family.name}")
            if math.isinf(cphi):
                continue
            inner = min(inner, cphi + cr)
        if math.isinf(inner):
            continue
        v = expectation_under(Qt, -X) - inner
        if v > dual:
            dual, arg = v, Qt
    if polish and arg is not None:
        # along the diagonal Qt = Q the inner infimum collapses to the closed
        # form -k_Q + c_rho(Q), giving a one-measure objective to refine
        def g(Q):
            cphi = _support_penalty(family, Q, Q)
            return expectation_under(Q, -X) - cphi - minimal_penalty(rho, Q)

        dual = max(dual, _polish_simplex(grid.space, g, arg, grid.step)[0])
    return {
        "robust": lhs.value,
        "dual": dual,
        "gap": lhs.value - dual,
        "step": grid.step,
        "guarantee": lhs.guarantee,
    }


def verify_second_approach_dual(
    rho: RiskFunctional,
    family: UncertaintyFamily,
    X: Position,
    grid: SimplexGrid,
    seed: int = 0,
    polish: bool = True,
) -> dict:
    """Robust value vs sup_{Q,Qt} { R_{phi_Q}(E_Qt[-X], Qt) - c_rho(Q) }."""
    if not (rho.flags.convex and rho.flags.cash_additive and rho.flags.continuous_from_above):
        raise ValueError(f"{rho.name} must be convex, cash-additive, continuous from above")
    lhs = robust_value(rho, family, X, seed=seed)
    kind, eps = family.kind, family.eps
    p = family.params.get("p")
    if kind in ("sup_norm_ball", "p_norm_ball", "wasserstein_ball"):
        # phi_Q = E_Q[-.] + k_Q up to rearrangement, so R_{phi_Q}(t, Qt) is
        # t + k_Q at Qt = Q and -inf otherwise
        def g(Q):
            cr = minimal_penalty(rho, Q)
            if math.isinf(cr):
                return -math.inf
            if kind == "sup_norm_ball" or math.isinf(p):
                k_Q = eps
            else:
                k_Q = eps * density_norm(Q, _conjugate_order(p))
            t = expectation_under(Q, -X) if kind != "wasserstein_ball" else rearranged_expectation(Q, -X)
            return t + k_Q - cr

        dual, arg = _grid_opt(grid, g)
        if polish and arg is not None:
            dual = max(dual, _polish_simplex(grid.space, g, arg, grid.step)[0])
    elif kind in ("level_band", "level_upper_set"):
        rho1 = family.rho1
        base = penalty_type(rho1, "cash_additive") if rho1.flags.cash_additive else None
        if base is None:
            raise ValueError("second-approach verifier needs a cash-additive base for level families")

        # phi_Q(Y) = rho1(Y) + eps + c_rho1(Q), hence R_{phi_Q} = R_rho1 + eps + c_rho1(Q)
        def g_inner(Qt):
            return base(expectation_under(Qt, -X), Qt)

        inner, arg_in = _grid_opt(grid, g_inner)
        if polish and arg_in is not None:
            inner = max(inner, _polish_simplex(grid.space, g_inner, arg_in, grid.step)[0])

        def g_outer(Q):
            cr = minimal_penalty(rho, Q)
            c1 = _closed_form_penalty(rho1, Q)
            if c1 is None or math.isinf(c1) or math.isinf(cr):
                return -math.inf
            return inner + eps + c1 - cr

        dual, arg = _grid_opt(grid, g_outer)
        if polish and arg is not None:
            dual = max(dual, _polish_simplex(grid.space, g_outer, arg, grid.step)[0])
    else:
        raise ValueError(f"no second-approach closed form for {family.name}")
    return {
        "robust": lhs.value,
        "dual": dual,
        "gap": lhs.value - dual,
        "step": grid.step,
        "guarantee": lhs.guarantee,
    }


def non_expansivity_check(
    penalty: PenaltySurface,
    grid: SimplexGrid,
    samples: int = 500,
    seed: int = 0,
    tol: float = 1e-6,
) -> PropertyVerdict:
    """|R(t,Q) - R(t',Q)| <= |t - t'| + tol and R increasing in t, sampled."""
    rng = np.random.default_rng(seed)
    pts = list(grid)
    for k in range(samples):
        Q = pts[int(rng.integers(len(pts)))]
        t, tp = float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5))
        a, b = penalty(t, Q), penalty(tp, Q)
        if math.isinf(a) or math.isinf(b):
            continue
        if abs(a - b) > abs(t - tp) + tol:
            return counterexample({"t": t, "tp": tp, "Q": Q, "Rt": a, "Rtp": b})
        lo, hi = min(t, tp), max(t, tp)
        vlo, vhi = (a, b) if t <= tp else (b, a)
        if vlo > vhi + tol:
            return counterexample({"t": lo, "tp": hi, "Q": Q, "Rt": vlo, "Rtp": vhi}, "not increasing in t")
    return no_counterexample(samples)


def dual_argmax(
    rho: RiskFunctional, X: Position, grid: SimplexGrid, q: float
) -> ScenarioMeasure:
    """Grid argmax of R_rho(E_Q[-X], Q); ties by smallest density q-norm, then
    lexicographically smallest density."""
    best = None
    best_val = -math.inf
    for Q in grid:
        c = minimal_penalty(rho, Q)
        if math.isinf(c):
            continue
        v = expectation_under(Q, -X) - c
        if best is None or v > best_val + 1e-12:
            best, best_val = Q, v
        elif abs(v - best_val) <= 1e-12:
            dn_new, dn_old = density_norm(Q, q), density_norm(best, q)
            if dn_new < dn_old - 1e-12 or (
                abs(dn_new - dn_old) <= 1e-12 and tuple(Q.density) < tuple(best.density)
            ):
                best = Q
    if best is None:
        raise ValueError("dual supremum is -inf on the whole grid")
    return best


def wasserstein_bound_check(
    rho: RiskFunctional,
    eps: float,
    p: float,
    X: Position,
    grid: SimplexGrid,
    seed: int = 0,
) -> dict:
    """lhs = robust value over the Wasserstein ball; rhs = rho(X) plus eps times
    the density q-norm of the dual argmax scenario."""
    from .uncertainty import wasserstein_ball

    q = _conjugate_order(p)
    family = wasserstein_ball(p, eps)
    lhs = robust_value(rho, family, X, seed=seed)
    Qstar = dual_argmax(rho, X, grid, q)
    rhs = rho(X) + eps * density_norm(Qstar, q)
    return {"lhs": lhs.value, "rhs": rhs, "holds": lhs.value <= rhs + 1e-9, "Qstar": Qstar}
