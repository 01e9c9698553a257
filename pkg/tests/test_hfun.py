import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tube_geodesics.hfun import (
    QuadCertificate,
    circle_root,
    circle_symbol,
    combine,
    eval_h,
    is_nonneg_on_circle,
    positivity_arc,
    transform_by_mobius,
    transform_by_rotation,
)
from tube_geodesics.circle import mobius


def test_eval_h_values():
    assert eval_h(QuadCertificate([0], [1]), 1j)[0] == 1j
    assert abs(eval_h(QuadCertificate([-1], [2]), 1.0)[0]) < 1e-15
    t = np.linspace(0, 2 * np.pi, 17)
    lam = np.exp(1j * t)
    vals = np.conj(lam) * eval_h(QuadCertificate([0.5], [0.0]), lam)[:, 0]
    assert np.max(np.abs(vals - np.cos(t))) < 1e-15


def test_circle_symbol_values():
    assert circle_symbol(0, 1, 2.3) == 1
    assert circle_symbol(0.5, 0, 0.0) == pytest.approx(1.0)
    assert circle_symbol(-1, 2, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_positivity_arc_values():
    assert positivity_arc(0, 1).measure() == pytest.approx(2 * np.pi)
    arc = positivity_arc(0.5, 0)
    assert arc.measure() == pytest.approx(np.pi)
    assert arc.contains(0.0) and arc.contains(1.5) and not arc.contains(np.pi)
    assert positivity_arc(0.5, -1).is_empty


def test_nonnegativity():
    assert is_nonneg_on_circle(-1, 2)
    assert not is_nonneg_on_circle(1, 0)
    assert is_nonneg_on_circle(0, 0)


def test_circle_root():
    assert circle_root(-1, 2) == pytest.approx(0.0, abs=1e-12)
    assert circle_root(0, 1) is None
    assert circle_root(0.5, 1) == pytest.approx(np.pi)


def test_combine_examples():
    h = QuadCertificate([0.5, -0.5], [1.0, 1.0])
    assert combine((1, 0), h) == (-0.5, 1.0)
    assert combine((1, 1), h) == (-1.0, 0.0)
    assert combine((0, 1), h) == (-0.5, -1.0)


def test_positivity_arc_brute_force():
    # fraction of a fine uniform grid where the symbol is positive; the grid
    # spacing bounds the error by two cells
    rng = np.random.default_rng(7)
    t = np.arange(10**6) * (2 * np.pi / 10**6)
    for _ in range(20):
        a = complex(*rng.normal(size=2))
        b = float(rng.normal())
        frac = np.count_nonzero(circle_symbol(a, b, t) > 0) / t.size
        assert positivity_arc(a, b).measure() == pytest.approx(2 * np.pi * frac, abs=2 * 2 * np.pi / 10**6)


def test_symbol_is_real_part_of_conj_lam_h():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        a = complex(*rng.normal(size=2))
        b = float(rng.normal())
        t = rng.uniform(0, 2 * np.pi)
        lam = np.exp(1j * t)
        w = np.conj(lam) * eval_h(QuadCertificate([a], [b]), lam)[0]
        assert abs(w.real - circle_symbol(a, b, t)) < 1e-13
        assert abs(w.imag) < 1e-13


@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       st.floats(-5, 5), st.sampled_from([1e-3, 0.5, 1.0, 7.0, 1e3]))
@settings(max_examples=200, deadline=None)
def test_positivity_arc_scale_invariant(a, b, s):
    assume(abs(a) + abs(b) > 1e-6)
    assert positivity_arc(s * a, s * b) == positivity_arc(a, b)


def test_transforms_preserve_symbol_sign_pattern():
    # the symbol of the transported certificate is a positive multiple of the
    # original symbol at the transported point
    a, b, c = 0.3 - 0.4j, 0.2, 0.25 + 0.1j
    a2, b2 = transform_by_mobius(a, b, c)
    t = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    lam = np.exp(1j * t)
    moved = mobius(-c, lam)
    ratio = circle_symbol(a2, b2, t) / circle_symbol(a, b, np.angle(moved))
    assert np.all(ratio > 0)
    a3, b3 = transform_by_rotation(a, b, 0.7)
    assert np.allclose(circle_symbol(a3, b3, t), circle_symbol(a, b, t + 0.7))
