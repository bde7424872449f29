"""Uncertainty families: membership, structural properties, witnesses."""

import numpy as np
import pytest

import robustrisk as rr
from robustrisk import (
    FAMILY_PROPERTIES,
    Position,
    check_property,
    cone_witness,
    minkowski_split,
    replay_witness,
    solidify,
    transport_member,
)

from conftest import random_pos


def test_family_property_names():
    assert len(FAMILY_PROPERTIES) == 9
    assert "continuous_from_above" in FAMILY_PROPERTIES
    assert "c_quasi_convex" in FAMILY_PROPERTIES


def test_sup_ball_membership(uniform4):
    fam = rr.sup_norm_ball(0.5)
    X = Position(uniform4, [0.0, 0.0, 0.0, 0.0])
    assert fam.membership(X, Position(uniform4, [0.5, -0.5, 0.1, 0.0]))
    assert not fam.membership(X, Position(uniform4, [0.51, 0.0, 0.0, 0.0]))


def test_p_ball_membership(skewed3):
    fam = rr.p_norm_ball(2.0, 0.3)
    X = Position(skewed3, [1.0, 1.0, 1.0])
    # L2(P)-norm of the perturbation decides membership
    d = np.array([0.2, -0.3, 0.1])
    nrm = float(np.sqrt(np.sum(skewed3.probs * d**2)))
    Z = Position(skewed3, X.values + d)
    assert fam.membership(X, Z) == (nrm <= 0.3)


def test_wasserstein_ball_is_distributional(uniform4):
    fam = rr.wasserstein_ball(1.0, 0.25)
    X = Position(uniform4, [1.0, 2.0, 3.0, 4.0])
    Xp = Position(uniform4, [4.0, 3.0, 2.0, 1.0])
    assert fam.membership(X, Xp)  # same law, distance zero
    assert fam.membership(X, X - 0.25)
    assert not fam.membership(X, X - 0.26)


def test_level_upper_set_membership(uniform4):
    rho1 = rr.entropic(1.0)
    fam = rr.level_upper_set(rho1, 0.4)
    X = Position(uniform4, [1.0, -1.0, 0.5, 0.0])
    Z = Position(uniform4, [2.0, 0.0, 1.0, 0.5])
    assert fam.membership(X, Z) == (rho1(Z) <= rho1(X) + 0.4 + 1e-12)
    assert fam.membership(X, X)


def test_level_band_membership(uniform4):
    rho1 = rr.entropic(1.0)
    fam = rr.level_band(rho1, 0.4)
    X = Position(uniform4, [1.0, -1.0, 0.5, 0.0])
    assert fam.membership(X, X)
    # far below the band: risk too small
    assert not fam.membership(X, X + 10.0)
    assert not fam.membership(X, X - 10.0)


def test_level_families_require_flags(uniform4):
    with pytest.raises(ValueError):
        rr.level_upper_set(rr.expectation_floor(0.0), 0.1)


def test_quasi_convex_counterexample_sup_ball(uniform4):
    """Midpoint sets contain points outside both endpoint sets for norm balls."""
    eps = 0.5
    fam = rr.sup_norm_ball(eps)
    v = check_property(fam, "quasi_convex", uniform4, trials=10, seed=1)
    assert v.is_counterexample
    assert replay_witness(fam, "quasi_convex", v.witness)
    # the classic constant-shift witness violates it directly
    X = Position(uniform4, np.zeros(4))
    Y = Position(uniform4, np.full(4, 10.0 * eps))
    Z = Position(uniform4, np.full(4, 5.5 * eps))
    mid = 0.5 * X + 0.5 * Y
    assert fam.membership(mid, Z)
    assert not fam.membership(X, Z) and not fam.membership(Y, Z)


def test_c_quasi_convex_counterexample_sup_ball(uniform4):
    fam = rr.sup_norm_ball(0.5)
    v = check_property(fam, "c_quasi_convex", uniform4, trials=10, seed=1)
    assert v.is_counterexample
    assert replay_witness(fam, "c_quasi_convex", v.witness)


def test_certified_verdicts(uniform4):
    ball = rr.p_norm_ball(2.0, 0.3)
    assert check_property(ball, "convex", uniform4).tag == "certified_holds"
    assert check_property(ball, "cash_invariant", uniform4).tag == "certified_holds"
    assert check_property(ball, "order_preserving", uniform4).tag == "certified_holds"
    assert check_property(ball, "solid", uniform4).is_counterexample
    assert check_property(ball, "monotone", uniform4).is_counterexample

    wb = rr.wasserstein_ball(1.0, 0.3)
    for prop in ("convex", "law_invariant", "cash_invariant", "order_preserving"):
        assert check_property(wb, prop, uniform4).tag == "certified_holds", prop

    lev = rr.level_upper_set(rr.entropic(1.0), 0.3)
    for prop in ("solid", "monotone", "quasi_convex", "c_quasi_convex",
                 "order_preserving", "law_invariant", "cash_invariant"):
        assert check_property(lev, prop, uniform4).tag == "certified_holds", prop


def test_ball_law_invariance_counterexample(uniform4, skewed3):
    ball = rr.sup_norm_ball(0.4)
    v = check_property(ball, "law_invariant", uniform4, trials=20, seed=3)
    assert v.is_counterexample
    assert replay_witness(ball, "law_invariant", v.witness)


def test_no_counterexample_verdicts(uniform4):
    ball = rr.sup_norm_ball(0.4)
    for prop in ("continuous_from_above",):
        v = check_property(ball, prop, uniform4, trials=30, seed=5)
        assert not v.is_counterexample, (prop, v.note)
    lev = rr.level_upper_set(rr.entropic(1.0), 0.3)
    v = check_property(lev, "continuous_from_above", uniform4, trials=30, seed=5)
    assert not v.is_counterexample, v.note
    v = check_property(lev, "convex", uniform4, trials=30, seed=5)
    assert not v.is_counterexample


def test_check_property_rejects_bad_input(uniform4):
    fam = rr.sup_norm_ball(0.4)
    with pytest.raises(ValueError):
        check_property(fam, "definitely_not_a_property", uniform4)
    with pytest.raises(ValueError):
        check_property(fam, "convex", uniform4, trials=0)


def test_check_property_deterministic(uniform4):
    fam = rr.sup_norm_ball(0.4)
    a = check_property(fam, "quasi_convex", uniform4, trials=15, seed=9)
    b = check_property(fam, "quasi_convex", uniform4, trials=15, seed=9)
    assert a.tag == b.tag
    if a.is_counterexample:
        assert np.allclose(a.witness["Z"].values, b.witness["Z"].values)


def test_transport_member_sup_ball(uniform4, rng):
    fam = rr.sup_norm_ball(0.5)
    for _ in range(20):
        src = random_pos(uniform4, rng)
        dst = src - Position(uniform4, np.abs(rng.normal(size=4)))
        Z = src + Position(uniform4, rng.uniform(-0.5, 0.5, size=4))
        W = transport_member(fam, src, dst, Z)
        assert W is not None
        assert fam.membership(dst, W)
        assert np.all(W.values <= Z.values + 1e-12)


def test_transport_member_wasserstein(uniform4, rng):
    fam = rr.wasserstein_ball(1.0, 0.5)
    for _ in range(20):
        src = random_pos(uniform4, rng)
        dst = src - Position(uniform4, np.abs(rng.normal(size=4)))
        Z = src - float(rng.uniform(0, 0.5))
        W = transport_member(fam, src, dst, Z)
        assert W is not None and fam.membership(dst, W)


def test_cone_witness(uniform4, rng):
    for fam in (rr.sup_norm_ball(0.5), rr.p_norm_ball(2.0, 0.5),
                rr.level_upper_set(rr.entropic(1.0), 0.5)):
        for _ in range(15):
            X = random_pos(uniform4, rng)
            Z = X + Position(uniform4, np.abs(rng.normal(size=4)))
            W = cone_witness(fam, X, Z)
            if W is not None:
                assert fam.membership(X, W)
                assert np.all(W.values <= Z.values + 1e-9)


def test_minkowski_split(uniform4, rng):
    fam = rr.p_norm_ball(2.0, 0.5)
    for _ in range(15):
        X, Y = random_pos(uniform4, rng), random_pos(uniform4, rng)
        lam = float(rng.uniform(0.1, 0.9))
        mid = lam * X + (1 - lam) * Y
        Z = mid + Position(uniform4, rng.uniform(-0.2, 0.2, size=4))
        if not fam.membership(mid, Z):
            continue
        out = minkowski_split(fam, X, Y, lam, Z)
        assert out is not None
        Z1, Z2 = out
        assert fam.membership(X, Z1) and fam.membership(Y, Z2)
        assert np.allclose(lam * Z1.values + (1 - lam) * Z2.values, Z.values)


def test_solidify(uniform4):
    fam = rr.sup_norm_ball(0.5)
    sol = solidify(fam)
    X = Position(uniform4, np.zeros(4))
    high = Position(uniform4, np.full(4, 3.0))
    assert not fam.membership(X, high)
    assert sol.membership(X, high)
    # still bounded below
    assert not sol.membership(X, Position(uniform4, [-1.0, 0.0, 0.0, 0.0]))
    v = check_property(sol, "solid", uniform4, trials=10, seed=2)
    assert not v.is_counterexample
    # a solid family is its own solidification for upper level sets
    lev = rr.level_upper_set(rr.entropic(1.0), 0.3)
    assert solidify(lev) is lev


def test_eps_zero_degenerate(uniform4):
    fam = rr.sup_norm_ball(0.0)
    X = Position(uniform4, [1.0, 2.0, 3.0, 4.0])
    assert fam.membership(X, X)
    assert not fam.membership(X, X + 1e-6)
