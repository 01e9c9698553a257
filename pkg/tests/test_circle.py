import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tube_geodesics.circle import (
    Arc,
    ArcSet,
    mobius,
    mobius_derivative,
    poincare_distance,
    strip_map_tau,
    strip_map_tau_inverse,
    wrap_angle,
)


def test_mobius_values():
    assert mobius(0, 0.3 + 0.4j) == 0.3 + 0.4j
    assert mobius(0.5, 0.5) == 0
    assert mobius(0.5, -0.5) == pytest.approx(-0.8, abs=1e-15)


def test_mobius_rejects_points_outside_disc():
    with pytest.raises(ValueError):
        mobius(1.0, 0.2)


def test_mobius_inverse_on_grid():
    r, t = np.meshgrid(np.linspace(0, 0.99, 10), np.linspace(0, 2 * np.pi, 10, endpoint=False))
    lam = (r * np.exp(1j * t)).ravel()
    for c in (0.3 - 0.6j, -0.9, 0.1j):
        assert np.max(np.abs(mobius(-c, mobius(c, lam)) - lam)) < 1e-14


def test_mobius_derivative_matches_difference_quotient():
    c, lam, h = 0.4 + 0.1j, 0.2 - 0.3j, 1e-6
    fd = (mobius(c, lam + h) - mobius(c, lam - h)) / (2 * h)
    assert abs(mobius_derivative(c, lam) - fd) < 1e-9


def test_poincare_distance_values():
    assert poincare_distance(0, 0) == 0
    assert poincare_distance(0, 0.5) == pytest.approx(math.atanh(0.5), rel=1e-15)


disc = st.complex_numbers(max_magnitude=0.95, allow_nan=False, allow_infinity=False)


@given(disc, disc, disc)
@settings(max_examples=200, deadline=None)
def test_poincare_distance_is_mobius_invariant(c, s, t):
    d = poincare_distance(s, t)
    assert poincare_distance(mobius(c, s), mobius(c, t)) == pytest.approx(d, rel=1e-9, abs=1e-12)


def test_strip_map_values():
    assert strip_map_tau(0) == pytest.approx(0.5, abs=1e-15)
    assert strip_map_tau(1j) == pytest.approx(1.0, abs=1e-15)
    assert strip_map_tau(-1j) == pytest.approx(0.0, abs=1e-15)


def test_strip_map_interior_and_inverse():
    rng = np.random.default_rng(0)
    lam = np.sqrt(rng.uniform(0, 0.999, 500)) * np.exp(1j * rng.uniform(0, 2 * np.pi, 500))
    w = strip_map_tau(lam)
    assert np.all((w.real > 0) & (w.real < 1))
    assert np.max(np.abs(strip_map_tau_inverse(w) - lam)) < 1e-12


def test_wrap_angle_range():
    assert wrap_angle(-0.5) == pytest.approx(2 * np.pi - 0.5)
    assert wrap_angle(2 * np.pi) == 0.0


def test_arc_contains_and_wraps():
    a = Arc(3 * np.pi / 2, np.pi)  # covers angle 0
    assert a.contains(0.1) and a.contains(6.0) and not a.contains(np.pi)


def test_arcset_complement_and_measure():
    s = ArcSet([Arc(0.5, 1.0), Arc(3.0, 0.5)])
    assert s.measure() == pytest.approx(1.5)
    assert s.complement().measure() == pytest.approx(2 * np.pi - 1.5)
    assert (s | s.complement()).is_full
    assert (s & s.complement()).is_empty


arcs = st.lists(st.tuples(st.floats(0, 2 * np.pi, exclude_max=True), st.floats(0, 2 * np.pi)), max_size=4)


@given(arcs, arcs)
@settings(max_examples=200, deadline=None)
def test_arcset_inclusion_exclusion(xs, ys):
    A = ArcSet([Arc(s, l) for s, l in xs])
    B = ArcSet([Arc(s, l) for s, l in ys])
    lhs = (A | B).measure() + (A & B).measure()
    assert lhs == pytest.approx(A.measure() + B.measure(), abs=1e-9)
    assert (A - B).measure() == pytest.approx(A.measure() - (A & B).measure(), abs=1e-9)
