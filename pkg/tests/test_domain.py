import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tube_geodesics.domain import (
    DomainError,
    StaircaseDomain,
    StripDomain,
    canonical_staircase,
    from_reinhardt,
    supporting_normal,
    validate_staircase,
)

V = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
P = [[0.0, -2.0], [0.0, -1.0], [-1.0, 0.0], [-2.0, 0.0]]


def test_canonical_data_is_valid():
    assert validate_staircase(V, P) == []


def test_determinant_violation_names_pair():
    bad = validate_staircase([[1.0, 0.0], [1.0, -1.0], [0.0, 1.0]], P)
    det = [v for v in bad if v.rule == "determinant"]
    assert [v.index for v in det] == [(1, 2)]
    assert any(v.rule == "normal_nonnegative" and v.index == (2,) for v in bad)


def test_orthogonality_violation():
    p = [row[:] for row in P]
    p[2] = [-1.0, -0.5]
    bad = validate_staircase(V, p)
    assert any(v.rule == "orthogonality" and v.index == (1,) for v in bad)


def test_shape_violation():
    assert validate_staircase([[1.0, 0.0]], [[0.0, 0.0]])[0].rule == "shape"


def test_contains():
    D = canonical_staircase()
    assert D.contains([-1.5, -1.5])
    assert not D.contains([-0.5, -0.5])
    assert StripDomain().contains([0.5])


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
@settings(max_examples=200, deadline=None)
def test_contains_ignores_imaginary_parts(x1, x2, y1, y2):
    D = canonical_staircase()
    assert D.contains([x1, x2]) == D.contains([complex(x1, y1), complex(x2, y2)])


def test_reinhardt_one_factor_is_canonical():
    D = from_reinhardt([(1, 1, math.exp(-1))])
    assert D.m == 3
    assert np.allclose(D.v, V) and np.allclose(D.p, P, atol=1e-15)


def test_reinhardt_redundant_factor_dropped():
    # 2 x1 + 2 x2 < -1 is x1 + x2 < -1/2, implied by x1 + x2 < -1
    D = from_reinhardt([(1, 1, math.exp(-1)), (2, 2, math.exp(-1))])
    assert D.m == 3
    assert np.allclose(D.v, V) and np.allclose(D.p, P, atol=1e-15)


def test_reinhardt_two_slanted_factors():
    D = from_reinhardt([(1, 2, math.exp(-2)), (2, 1, math.exp(-2))])
    assert D.m == 4
    assert np.allclose(D.vertex(2), [-2 / 3, -2 / 3])
    assert D.validate() == []


factor = st.tuples(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.01, 0.99))


@given(st.lists(factor, min_size=1, max_size=5))
@settings(max_examples=100, deadline=None)
def test_reinhardt_output_always_valid(fs):
    assert from_reinhardt(fs).validate() == []


def test_reinhardt_rejects_bad_level():
    with pytest.raises(DomainError):
        from_reinhardt([(1, 1, 1.5)])


def test_supporting_normals():
    D = canonical_staircase()
    (n,) = supporting_normal(D, [0.0, -1.5])
    assert np.allclose(n, [1, 0])
    cone = supporting_normal(D, [0.0, -1.0])
    assert len(cone) == 2 and np.allclose(cone[0], [1, 0]) and np.allclose(cone[1], np.array([1, 1]) / math.sqrt(2))
    (n,) = supporting_normal(D, [-0.5, -0.5])
    assert np.allclose(n, np.array([1, 1]) / math.sqrt(2))
    with pytest.raises(DomainError):
        supporting_normal(D, [-3.0, -3.0])


def test_boundary_decomposition():
    # vertical half-line, the slanted segment, then the horizontal half-line
    D = canonical_staircase()
    poly = D.boundary_polyline(extent=5.0)
    assert np.allclose(poly, [[0, -6], [0, -1], [-1, 0], [-6, 0]])
    for a, b in zip(poly[:-1], poly[1:]):
        for s in np.linspace(0, 1, 7):
            x = (1 - s) * a + s * b
            assert np.max(D.facet_values(x)) == pytest.approx(0.0, abs=1e-12)


def test_staircase_arrays_are_read_only():
    D = StaircaseDomain(V, P)
    with pytest.raises(ValueError):
        D.v[0, 0] = 3.0
