"""Finite probability spaces, positions, scenario measures, quantiles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustrisk import (
    Position,
    ProbSpace,
    ScenarioMeasure,
    density_norm,
    expectation,
    expectation_under,
    quantile_function,
    relative_entropy,
    same_distribution,
    wasserstein_distance,
)

from conftest import random_pos


def test_space_validation():
    with pytest.raises(ValueError):
        ProbSpace([0.5, 0.6])
    with pytest.raises(ValueError):
        ProbSpace([1.0, 0.0])  # null atoms rejected
    with pytest.raises(ValueError):
        ProbSpace([])


def test_position_arithmetic(uniform4):
    X = Position(uniform4, [1.0, 2.0, 3.0, 4.0])
    Y = Position(uniform4, [0.5, 0.5, 0.5, 0.5])
    assert np.allclose((X + Y).values, [1.5, 2.5, 3.5, 4.5])
    assert np.allclose((X - 1.0).values, [0.0, 1.0, 2.0, 3.0])
    assert np.allclose((2.0 * X).values, (X * 2.0).values)
    assert np.allclose((-X).values, -X.values)


def test_scenario_measure_normalization(skewed3):
    Q = ScenarioMeasure(skewed3, [1.0, 1.0, 1.0])
    assert expectation_under(Q, Position(skewed3, [1.0, 1.0, 1.0])) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ScenarioMeasure(skewed3, [2.0, 1.0, 1.0])  # does not integrate to one
    with pytest.raises(ValueError):
        ScenarioMeasure(skewed3, [-0.1, 1.3, 1.3])


def test_expectation_matches_weighted_sum(skewed3):
    X = Position(skewed3, [1.0, -2.0, 4.0])
    assert expectation(X) == pytest.approx(0.5 - 0.6 + 0.8)


def test_reference_measure(uniform4):
    P = ScenarioMeasure.reference(uniform4)
    assert np.allclose(P.density, 1.0)
    assert relative_entropy(P) == pytest.approx(0.0, abs=1e-15)


def test_quantile_function_steps(skewed3):
    X = Position(skewed3, [3.0, 1.0, 2.0])
    q = quantile_function(X)
    # sorted values 1 (mass .3), 2 (mass .2), 3 (mass .5)
    assert q.at(0.1) == 1.0
    assert q.at(0.35) == 2.0
    assert q.at(0.9) == 3.0


def test_wasserstein_shift_identity(uniform4, rng):
    for _ in range(20):
        X = random_pos(uniform4, rng)
        c = float(rng.uniform(0.1, 2.0))
        for p in (1.0, 2.0, math.inf):
            assert wasserstein_distance(X, X - c, p) == pytest.approx(c, abs=1e-12)
            assert wasserstein_distance(X, X, p) == pytest.approx(0.0, abs=1e-12)


def test_wasserstein_is_distributional(uniform4):
    X = Position(uniform4, [1.0, 2.0, 3.0, 4.0])
    Xp = Position(uniform4, [4.0, 3.0, 2.0, 1.0])  # same law
    assert wasserstein_distance(X, Xp, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert same_distribution(X, Xp)


def test_wasserstein_one_explicit(uniform4):
    X = Position(uniform4, [0.0, 0.0, 0.0, 0.0])
    Y = Position(uniform4, [0.0, 0.0, 0.0, 2.0])
    # one atom of mass 1/4 moved by 2
    assert wasserstein_distance(X, Y, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert wasserstein_distance(X, Y, math.inf) == pytest.approx(2.0, abs=1e-12)


def test_relative_entropy_closed_form(skewed3):
    d = np.array([1.2, 0.9, 0.65])
    w = skewed3.probs * d
    d = d / w.sum()
    Q = ScenarioMeasure(skewed3, d)
    expected = float(np.sum(skewed3.probs * d * np.log(d)))
    assert relative_entropy(Q) == pytest.approx(expected, abs=1e-12)
    assert relative_entropy(Q) >= 0.0


def test_density_norms(skewed3):
    Q = ScenarioMeasure(skewed3, [1.4, 0.8, 0.3])
    assert density_norm(Q, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert density_norm(Q, math.inf) == pytest.approx(1.4, abs=1e-12)
    two = (0.5 * 1.4**2 + 0.3 * 0.8**2 + 0.2 * 0.3**2) ** 0.5
    assert density_norm(Q, 2.0) == pytest.approx(two, abs=1e-12)


@given(vals=st.lists(st.floats(-50, 50), min_size=3, max_size=3))
@settings(max_examples=100, deadline=None)
def test_wasserstein_triangle(vals):
    sp = ProbSpace([0.5, 0.3, 0.2])
    X = Position(sp, vals)
    Y = Position(sp, [0.0, 1.0, -1.0])
    Z = Position(sp, [2.0, -2.0, 0.5])
    dxz = wasserstein_distance(X, Z, 1.0)
    assert dxz <= wasserstein_distance(X, Y, 1.0) + wasserstein_distance(Y, Z, 1.0) + 1e-9


@given(
    vals=st.lists(st.floats(-20, 20), min_size=4, max_size=4),
    p=st.sampled_from([1.0, 2.0, 3.0]),
)
@settings(max_examples=100, deadline=None)
def test_wasserstein_order_monotone(vals, p):
    """Quantile-integral distances grow with the order p (probability space)."""
    sp = ProbSpace([0.25] * 4)
    X = Position(sp, vals)
    Y = Position(sp, [0.0, 0.0, 1.0, -1.0])
    assert wasserstein_distance(X, Y, p) <= wasserstein_distance(X, Y, math.inf) + 1e-9


def test_same_distribution_tolerance(uniform4):
    X = Position(uniform4, [1.0, 2.0, 3.0, 4.0])
    Y = Position(uniform4, [1.0 + 1e-14, 4.0, 3.0, 2.0])
    assert same_distribution(X, Y, tol=1e-9)
    assert not same_distribution(X, X + 0.5)
