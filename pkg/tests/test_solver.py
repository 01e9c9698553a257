import math

import numpy as np
import pytest

from tube_geodesics.circle import TWO_PI, poincare_distance
from tube_geodesics.domain import HalfPlaneProduct, StripDomain, canonical_staircase
from tube_geodesics.geodesic import HalfPlaneAtomSpec, canonical_staircase_spec, geodesic_map, precompose
from tube_geodesics.solver import (
    SolveOptions,
    SolveProblem,
    SolverError,
    align_by_automorphism,
    halfplane_two_point,
    solve_two_point,
)
from tube_geodesics.verify import distance_sandwich, left_inverse_residual

D = canonical_staircase()


@pytest.fixture(scope="module")
def canonical():
    return geodesic_map(canonical_staircase_spec(), D)


@pytest.fixture(scope="module")
def canonical_solution(canonical):
    return solve_two_point(SolveProblem(D, [-1.5, -1.5], canonical(0.4)))


def test_canonical_round_trip(canonical, canonical_solution):
    sol = canonical_solution
    assert sol.residual < 1e-8
    assert sol.sigma == pytest.approx(0.4, abs=1e-9)
    assert sol.report.passed
    phi = geodesic_map(sol.spec, D)
    lam = 0.9 * np.exp(1j * np.linspace(0, TWO_PI, 64, endpoint=False))
    assert np.max(np.abs(phi(lam) - canonical(lam))) < 1e-7


def test_alignment_of_aligned_spec_is_identity(canonical):
    spec, sigma = align_by_automorphism(canonical_staircase_spec(), D, canonical(0.0), canonical(0.4))
    assert sigma == pytest.approx(0.4, abs=1e-10)
    lam = np.array([0.1, -0.3 + 0.5j])
    assert np.max(np.abs(geodesic_map(spec, D)(lam) - canonical(lam))) < 1e-9


def test_alignment_recovers_parametrization(canonical):
    c, th = 0.2 - 0.35j, 1.1
    moved = precompose(canonical_staircase_spec(), D, c, th)
    z, w = canonical(0.0), canonical(0.4)
    spec, sigma = align_by_automorphism(moved, D, z, w)
    phi = geodesic_map(spec, D)
    assert sigma == pytest.approx(0.4, abs=1e-9)
    assert np.max(np.abs(phi(0.0) - z)) < 1e-9 and np.max(np.abs(phi(sigma) - w)) < 1e-9
    assert left_inverse_residual(phi, phi.certificate).residual < 1e-7


def test_rotation_moves_atom():
    H1 = HalfPlaneProduct(1)
    spec = HalfPlaneAtomSpec(1, 0, -TWO_PI, 0.0, 0.0)
    rotated = precompose(spec, H1, 0.0, 0.8)
    assert rotated.atom_angle == pytest.approx(TWO_PI - 0.8)
    phi = geodesic_map(spec, H1)
    z, w = phi(0.0), phi(0.5j)
    aligned, sigma = align_by_automorphism(rotated, H1, z, w)
    psi = geodesic_map(aligned, H1)
    assert sigma == pytest.approx(0.5, abs=1e-10)
    assert abs(psi(sigma)[0] - w[0]) < 1e-10


def test_halfplane_two_point_closed_form():
    z, w = -1 + 0.3j, -0.5 - 1j
    sigma, alpha, t0, beta = halfplane_two_point(z, w)
    phi = geodesic_map(HalfPlaneAtomSpec(1, 0, alpha, t0, beta), HalfPlaneProduct(1))
    assert abs(phi(0.0)[0] - z) < 1e-14 and abs(phi(sigma)[0] - w) < 1e-14
    assert sigma == pytest.approx(abs(w - z) / abs(w + np.conj(z)))


def test_halfplane_product_single_coordinate_change():
    prob = SolveProblem(HalfPlaneProduct(2), [-1 + 0.3j, -2.0], [-0.5 - 1j, -2.0])
    sol = solve_two_point(prob)
    assert sol.case == "coordinate_1"
    assert sol.spec.free[0][0].atoms == ()  # affine second coordinate: constant measure
    assert sol.sigma == pytest.approx(abs(prob.w[0] - prob.z[0]) / abs(prob.w[0] + np.conj(prob.z[0])))
    assert sol.residual < 1e-12


def test_halfplane_product_both_coordinates():
    prob = SolveProblem(HalfPlaneProduct(2), [-1 + 0.3j, -2.0], [-0.5 - 1j, -1.5 + 0.2j])
    sol = solve_two_point(prob)
    assert sol.residual < 1e-12 and sol.report.passed
    rho = [abs(w - z) / abs(w + np.conj(z)) for z, w in zip(prob.z, prob.w)]
    assert sol.sigma == pytest.approx(max(rho))


def test_strip_closed_form():
    sol = solve_two_point(SolveProblem(StripDomain(), [0.3 + 0.2j], [0.8 - 1j]))
    assert sol.residual < 1e-12 and sol.report.passed


def test_invalid_problems():
    with pytest.raises(ValueError):
        solve_two_point(SolveProblem(D, [-1.5, -1.5], [-1.5, -1.5]))
    with pytest.raises(ValueError):
        solve_two_point(SolveProblem(D, [-1.5, -1.5], [-0.2, -0.2]))


def test_budget_exhaustion_lists_best_residuals(canonical):
    prob = SolveProblem(D, [-1.5, -1.5], canonical(0.4), SolveOptions(cases=("atoms_none",), multistart=2))
    with pytest.raises(SolverError) as info:
        solve_two_point(prob)
    best = info.value.diagnostics["best_residual_per_case"]
    assert set(best) == {"atoms_none"} and best["atoms_none"] > 1e-9


def test_exhaustive_lists_every_verified_case(canonical):
    z, w = [-1.5, -1.5], canonical(0.4)
    first = solve_two_point(SolveProblem(D, z, w))
    every = solve_two_point(SolveProblem(D, z, w, SolveOptions(exhaustive=True)))
    assert first.report.metadata["verified_cases"] == [first.case]
    cases = every.report.metadata["verified_cases"]
    assert cases[0] == first.case == every.case
    assert set(every.attempts) >= {"atoms_both", "atom_1", "atom_2", "atoms_none"}


def test_determinism(canonical):
    w = canonical(0.3 + 0.2j)
    prob = SolveProblem(D, canonical(-0.1j), w)
    a, b = solve_two_point(prob), solve_two_point(prob)
    assert a.spec == b.spec and a.sigma == b.sigma
    assert a.report.to_dict() == b.report.to_dict()


def test_lempert_consistency(canonical_solution):
    sol = canonical_solution
    phi = geodesic_map(sol.spec, D)
    lo, hi = distance_sandwich(phi, phi.certificate, 0.0, sol.sigma)
    d = poincare_distance(0.0, sol.sigma)
    assert abs(lo - d) < 1e-6 and abs(hi - d) < 1e-6


def test_facet_case():
    from tube_geodesics.geodesic import StaircaseISpec
    phi = geodesic_map(StaircaseISpec(2, -2.0, 0.7, 0.3, (-0.5 + 0.1j, 0.05)), D)
    prob = SolveProblem(D, phi(0.0), phi(0.5), SolveOptions(cases=("facets",)))
    sol = solve_two_point(prob)
    assert sol.case == "facet_2"
    assert sol.sigma == pytest.approx(0.5, abs=1e-12)
    assert sol.residual < 1e-12 and sol.report.passed
