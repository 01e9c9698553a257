import numpy as np
import pytest

from tube_geodesics.circle import TWO_PI
from tube_geodesics.domain import DiscBaseDomain, HalfPlaneProduct, StripDomain, canonical_staircase
from tube_geodesics.geodesic import (
    CaseOneIndicator,
    DiscBaseSpec,
    HalfPlaneAtomSpec,
    InadmissibleSpec,
    StaircaseISpec,
    StaircaseIISpec,
    StripSpec,
    boundary_measure_of,
    canonical_staircase_spec,
    disc_base_boundary_direction,
    eval_halfplane_geodesic,
    eval_phi_h,
    geodesic_map,
    klis_arcs,
    klis_k1k2,
    precompose,
    project,
)
from tube_geodesics.hfun import QuadCertificate, circle_root, positivity_arc
from tube_geodesics.measure import CircleMeasure, herglotz_transform

from _corpus import regression_corpus

D = canonical_staircase()


def disc_grid(n_r=10, n_t=20, rmax=0.95):
    r, t = np.meshgrid(np.linspace(0, rmax, n_r), np.linspace(0, TWO_PI, n_t, endpoint=False))
    return (r * np.exp(1j * t)).ravel()


def test_halfplane_values():
    assert eval_halfplane_geodesic(-TWO_PI, 1.0, 0.0, 0.0) == pytest.approx(-1.0)
    assert eval_halfplane_geodesic(-TWO_PI, 1.0, 0.0, 1 / 3) == pytest.approx(-2.0)
    assert eval_halfplane_geodesic(-TWO_PI, 1.0, 5.0, 0.0) == pytest.approx(-1 + 5j)


def test_phi_h_values():
    assert eval_phi_h(0.5, 0.0, 0.0) == pytest.approx(0.5)
    assert eval_phi_h(0.5, 0.0, 1 - 1e-9).real == pytest.approx(1.0, abs=1e-6)
    # mpmath quadrature of the indicator of the positivity arc, 30 digits
    assert abs(eval_phi_h(0.3 + 0.2j, 0.1, 0.2 - 0.1j) - (0.61853243032806977462 - 0.11843345456640302882j)) < 1e-14
    assert abs(eval_phi_h(0.5, 0.0, 0.3 + 0.4j) - (0.71477671252272272213 + 0.24133419837791649644j)) < 1e-14


def test_phi_h_is_transform_of_indicator():
    rng = np.random.default_rng(4)
    lam = disc_grid(10, 10)
    for _ in range(10):
        a = complex(*rng.normal(size=2))
        b = rng.uniform(-1.9, 1.9) * abs(a)
        mu = CircleMeasure.indicator(positivity_arc(a, b), [1.0])
        ref = herglotz_transform(mu, lam)[:, 0]
        assert np.max(np.abs(eval_phi_h(a, b, lam) - ref)) < 1e-9


def test_klis_arcs_canonical():
    arcs = klis_arcs(D, canonical_staircase_spec().h)
    assert arcs.measures == pytest.approx([TWO_PI, np.pi, 0.0])
    C2 = arcs.C[1]
    assert C2.contains(np.pi) and not C2.contains(0.1)
    assert np.allclose(C2.intervals, [(np.pi / 2, 3 * np.pi / 2)])
    assert arcs.A[1] == C2
    assert (arcs.A[0] | C2).is_full and (arcs.A[0] & C2).is_empty
    assert arcs.B == pytest.approx((0.0, np.pi))


def test_parallel_certificate_signals_facet_case():
    with pytest.raises(CaseOneIndicator):
        klis_arcs(D, QuadCertificate([0.3, 0.3], [1.0, 1.0]))


def test_k1k2():
    assert klis_k1k2([TWO_PI, np.pi, 0.0]) == (1, 3)
    assert klis_k1k2([TWO_PI, 0.0]) == (1, 2)
    assert klis_k1k2([TWO_PI, TWO_PI, 1.0, 0.5, 0.0]) == (2, 5)


def test_canonical_staircase_values():
    phi = geodesic_map(canonical_staircase_spec(), D)
    assert np.array_equal(phi(0.0), np.array([-1.5, -1.5], dtype=complex))
    assert D.contains(phi(0.5))
    # mpmath quadrature of the boundary measure, 30 digits
    frozen = {0.5: (-0.53816609803246678498, -3.7951672353008665484),
              0.3 + 0.4j: (-0.69062869288268267971 + 0.67376663081034895548j,
                           -1.8686228663688764921 - 1.4721034291471472709j)}
    for lam, ref in frozen.items():
        assert np.max(np.abs(phi(lam) - np.array(ref))) < 1e-13


def test_atom_free_canonical_is_rejected():
    spec = StaircaseIISpec(canonical_staircase_spec().h, (0.0, 0.0), (np.pi, 0.0), (0.0, 0.0))
    with pytest.raises(InadmissibleSpec):
        geodesic_map(spec, D)


def test_misplaced_atom_is_rejected():
    spec = StaircaseIISpec(canonical_staircase_spec().h, (-TWO_PI, -TWO_PI), (0.0, 0.0), (0.0, 0.0))
    with pytest.raises(InadmissibleSpec):
        geodesic_map(spec, D)


def test_boundary_measures():
    mu = boundary_measure_of(HalfPlaneAtomSpec(1, 0, -TWO_PI, 0.0, 0.0), HalfPlaneProduct(1))
    assert mu.pieces == () and mu.atoms == ((0.0, (-TWO_PI,)),)
    mu = boundary_measure_of(StripSpec(0.5, 0.0), StripDomain())
    assert mu.atoms == () and len(mu.pieces) == 1
    arc, w = mu.pieces[0]
    assert arc.length == pytest.approx(np.pi) and w == (1.0,) and arc.contains(0.0)

    mu = boundary_measure_of(canonical_staircase_spec(), D)
    assert mu.density_at(0.0) == pytest.approx([0.0, -1.0])
    assert mu.density_at(np.pi) == pytest.approx([-1.0, 0.0])
    assert mu.atoms == ((0.0, (0.0, -TWO_PI)), (pytest.approx(np.pi), (-TWO_PI, 0.0)))


def test_measure_reproduces_map():
    lam = disc_grid()
    for name, spec, dom, _ in regression_corpus():
        phi = geodesic_map(spec, dom, check_image=False)
        mu = phi.measure
        if not isinstance(mu, CircleMeasure):
            continue
        err = np.max(np.abs(herglotz_transform(mu, lam, phi.offset) - phi(lam)))
        assert err < 1e-9, name


def test_atoms_sit_at_certificate_roots():
    rng = np.random.default_rng(8)
    from _corpus import random_staircase_spec
    for _ in range(10):
        spec = random_staircase_spec(D, rng)
        for l in range(2):
            if spec.alpha[l] < 0:
                root = circle_root(*spec.h.component(l))
                assert root is not None
                assert abs(np.angle(np.exp(1j * (root - spec.atom_angles[l])))) < 1e-9


def test_arcs_are_nested_for_nonnegative_certificates():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        rho = rng.uniform(0.01, 1, 2)
        a = rho * np.exp(1j * rng.uniform(0, TWO_PI, 2))
        b = 2 * rho + rng.exponential(1.0, 2) * (rng.random(2) < 0.5)
        ms = klis_arcs(D, QuadCertificate(a, b)).measures
        assert all(ms[j + 1] <= ms[j] + 1e-12 for j in range(len(ms) - 1))


def test_strip_boundary_dichotomy():
    rng = np.random.default_rng(6)
    r = 1 - 1e-6
    for _ in range(10):
        a = complex(*rng.normal(size=2))
        b = rng.uniform(-1.8, 1.8) * abs(a)
        arc = positivity_arc(a, b)
        t = np.linspace(0, TWO_PI, 200, endpoint=False)
        ends = np.array(arc.endpoints())
        far = np.min(np.abs(np.angle(np.exp(1j * (t[:, None] - ends[None, :])))), axis=1) > 0.05
        vals = eval_phi_h(a, b, r * np.exp(1j * t[far])).real
        inside = np.array([arc.contains(s) for s in t[far]])
        assert np.all((vals[inside] >= 0.99) & (vals[inside] <= 1))
        assert np.all((vals[~inside] >= 0) & (vals[~inside] <= 0.01))


def test_disc_base_direction():
    assert np.allclose(disc_base_boundary_direction((1, 0), (0, 0), 0.0), [1, 0])
    assert np.allclose(disc_base_boundary_direction((1, 1j), (0, 0), np.pi / 2), [0, 1])
    # a constant direction gives a constant map; geodesic_map refuses it
    assert np.allclose(disc_base_boundary_direction((0, 0), (1, 0), 0.3), [1, 0])
    with pytest.raises(InadmissibleSpec):
        geodesic_map(DiscBaseSpec((0, 0), (1, 0)), DiscBaseDomain())


def test_disc_base_map():
    spec = DiscBaseSpec((1, 1j), (0.0, 0.0), (0.25, -1.0))
    phi = geodesic_map(spec, DiscBaseDomain())
    assert np.allclose(phi(0.0), [0.25j, -1j], atol=1e-14)
    # oracle: the Herglotz transform of (cos t, sin t) is (lam, -i lam)
    lam = 0.3 - 0.2j
    assert np.allclose(phi(lam), [lam + 0.25j, -1j * lam - 1j], atol=1e-13)
    x = phi(disc_grid(rmax=0.999)).real
    assert np.all(np.sum(x**2, axis=-1) < 1)
    assert np.allclose(phi(1 - 1e-9).real, [1, 0], atol=1e-6)


def test_project_identity_and_sum():
    phi = geodesic_map(canonical_staircase_spec(), D)
    lam = disc_grid(5, 8)
    assert np.array_equal(project(np.eye(2), phi)(lam), phi(lam))
    s = project([[1.0, 1.0]], phi)
    assert np.allclose(s(lam)[:, 0], phi(lam).sum(axis=1))
    V = np.array([[1.0, 1.0]])
    ref = phi.measure.apply(V)
    assert s.measure == ref


def test_project_facet_spec_is_halfplane_geodesic():
    spec = StaircaseISpec(2, -2.0, 0.7, 0.3, (-0.7 + 0.2j, 0.05j), 0.2j, 0.4)
    phi = geodesic_map(spec, D)
    v, p = D.normal(2), D.vertex(2)
    g = project([v], phi)
    lam = disc_grid(5, 8)
    ref = eval_halfplane_geodesic(-2.0, np.exp(0.7j), 0.3, lam)
    assert np.max(np.abs(g(lam)[:, 0] - float(np.dot(p, v)) - ref)) < 1e-13


def test_precompose_is_composition():
    phi = geodesic_map(canonical_staircase_spec(), D)
    c, th = 0.3 - 0.2j, 0.5
    moved = geodesic_map(precompose(canonical_staircase_spec(), D, c, th), D)
    lam = disc_grid(6, 9, 0.9)
    m = (np.exp(1j * th) * lam + c) / (1 + np.conj(c) * np.exp(1j * th) * lam)
    assert np.max(np.abs(moved(lam) - phi(m))) < 1e-12


def test_type_mismatch_rejected():
    with pytest.raises(InadmissibleSpec):
        geodesic_map(canonical_staircase_spec(), HalfPlaneProduct(2))
