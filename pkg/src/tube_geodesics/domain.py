"""Taut convex tube domains ``Omega + i R^n`` with polyhedral or disc bases."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

GEOM_TOL = 1e-10
BOUNDARY_TOL = 1e-9


class DomainError(ValueError):
    """Invalid domain data or a query that does not fit the domain."""


def _real_part(z, n: int) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1:] != (n,):
        raise DomainError(f"expected points with {n} coordinates, got shape {z.shape}")
    return z.real


class TubeDomain:
    kind: str = ""
    n: int = 0

    def base_contains(self, x) -> np.ndarray:
        raise NotImplementedError

    def contains(self, z):
        """Strict membership; vectorized over leading axes."""
        out = self.base_contains(_real_part(z, self.n))
        return bool(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class HalfPlaneProduct(TubeDomain):
    """``{z : Re z_l < 0 for every l}``."""

    n: int = 1
    kind = "halfplane_product"

    def __post_init__(self):
        if int(self.n) < 1:
            raise DomainError("a half-plane product needs n >= 1")

    def base_contains(self, x):
        return np.all(np.asarray(x) < 0.0, axis=-1)

    def base_distance(self, x) -> float:
        """Distance from an interior base point to the boundary."""
        return float(np.min(-np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class StripDomain(TubeDomain):
    """``{z in C : 0 < Re z < 1}``."""

    n: int = field(default=1, init=False)
    kind = "strip"

    def base_contains(self, x):
        x = np.asarray(x)[..., 0]
        return (x > 0.0) & (x < 1.0)


@dataclass(frozen=True)
class DiscBaseDomain(TubeDomain):
    """``{z in C^2 : (Re z_1)^2 + (Re z_2)^2 < 1}``."""

    n: int = field(default=2, init=False)
    kind = "disc_base"

    def base_contains(self, x):
        x = np.asarray(x)
        return np.sum(x * x, axis=-1) < 1.0


@dataclass(frozen=True)
class Violation:
    rule: str
    index: tuple
    message: str

    def __str__(self):
        return f"{self.rule} at {self.index}: {self.message}"


def _det(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


@dataclass(frozen=True, eq=False)
class StaircaseDomain(TubeDomain):
    """Tube over ``{x : <x - p_j, v_j> < 0, j = 1..m}``.

    ``v`` holds ``v_1..v_m`` and ``p`` holds ``p_0..p_m``; facet ``j`` is the
    segment (or half-line) from ``p_{j-1}`` to ``p_j``.
    """

    v: np.ndarray = None
    p: np.ndarray = None
    kind = "staircase"
    n = 2

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        p = np.array(self.p, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or p.ndim != 2 or p.shape[1] != 2:
            raise DomainError("v and p must be lists of planar points")
        if len(v) < 2 or len(p) != len(v) + 1:
            raise DomainError("need m >= 2 normals v_1..v_m and m + 1 points p_0..p_m")
        v.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "p", p)

    def __eq__(self, other):
        return (isinstance(other, StaircaseDomain) and np.array_equal(self.v, other.v)
                and np.array_equal(self.p, other.p))

    def __hash__(self):
        return hash((self.v.tobytes(), self.p.tobytes()))

    @property
    def m(self) -> int:
        return len(self.v)

    def normal(self, j: int) -> np.ndarray:
        """``v_j`` with the 1-based index used throughout."""
        return self.v[j - 1]

    def vertex(self, j: int) -> np.ndarray:
        return self.p[j]

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.p))), float(np.max(np.abs(self.v))))

    def facet_values(self, x) -> np.ndarray:
        """``<x - p_j, v_j>`` for ``j = 1..m``; shape ``x.shape[:-1] + (m,)``."""
        x = np.asarray(x, dtype=float)[..., None, :]
        return np.sum((x - self.p[1:]) * self.v, axis=-1)

    def base_contains(self, x):
        return np.all(self.facet_values(x) < 0.0, axis=-1)

    def validate(self) -> list[Violation]:
        return validate_staircase(self.v, self.p)

    def supporting_normal(self, x) -> list[np.ndarray]:
        return supporting_normal(self, x)

    def boundary_polyline(self, extent: float = 1.0) -> np.ndarray:
        """Vertices of the base boundary, the two half-lines cut at ``extent``."""
        first = self.p[1] - extent * np.array([0.0, 1.0])
        last = self.p[self.m - 1] - extent * np.array([1.0, 0.0])
        return np.vstack([first, self.p[1 : self.m], last])


def validate_staircase(v, p) -> list[Violation]:
    """All violated structural rules of staircase data; empty when valid."""
    v = np.asarray(v, dtype=float)
    p = np.asarray(p, dtype=float)
    m = len(v)
    out: list[Violation] = []
    if m < 2 or p.shape != (m + 1, 2) or v.shape != (m, 2):
        return [Violation("shape", (), "need v_1..v_m (m >= 2) and p_0..p_m as planar points")]
    scale = max(1.0, float(np.max(np.abs(p))), float(np.max(np.abs(v))))
    tol = GEOM_TOL * scale

    for j in range(1, m + 1):
        if np.any(v[j - 1] < 0.0):
            out.append(Violation("normal_nonnegative", (j,), f"v_{j} = {v[j - 1].tolist()} has a negative entry"))
    if not (v[0, 0] > 0.0 and abs(v[0, 1]) <= tol):
        out.append(Violation("first_normal", (1,), "v_1 must be (positive, 0)"))
    if not (abs(v[m - 1, 0]) <= tol and v[m - 1, 1] > 0.0):
        out.append(Violation("last_normal", (m,), "v_m must be (0, positive)"))

    # first coordinates: 0 = p_{0,1} = p_{1,1} > p_{2,1} > ... > p_{m,1}
    for j in (0, 1):
        if abs(p[j, 0]) > tol:
            out.append(Violation("first_coordinates", (j,), f"p_{j},1 must be 0"))
    for j in range(1, m):
        if not p[j, 0] > p[j + 1, 0]:
            out.append(Violation("first_coordinates", (j, j + 1), f"p_{j},1 > p_{j + 1},1 fails"))
    # second coordinates: 0 = p_{m,2} = p_{m-1,2} > ... > p_{0,2}
    for j in (m, m - 1):
        if abs(p[j, 1]) > tol:
            out.append(Violation("second_coordinates", (j,), f"p_{j},2 must be 0"))
    for j in range(0, m - 1):
        if not p[j + 1, 1] > p[j, 1]:
            out.append(Violation("second_coordinates", (j, j + 1), f"p_{j + 1},2 > p_{j},2 fails"))

    for j in range(1, m):
        d = _det(v[j - 1], v[j])
        if not d > 0.0:
            out.append(Violation("determinant", (j, j + 1), f"det[v_{j}, v_{j + 1}] = {d:.6g} is not positive"))

    for j in range(0, m):
        ip = float(np.dot(p[j + 1] - p[j], v[j]))
        if abs(ip) > tol:
            out.append(Violation("orthogonality", (j,), f"<p_{j + 1} - p_{j}, v_{j + 1}> = {ip:.6g} is not 0"))
    return out


def supporting_normal(domain: StaircaseDomain, x) -> list[np.ndarray]:
    """Generators of the outward normal cone of the base at a boundary point.

    One unit vector on an open facet, two (``v_j``, ``v_{j+1}``) at a vertex.
    """
    x = np.asarray(x, dtype=float)
    vals = domain.facet_values(x) / np.linalg.norm(domain.v, axis=1)
    tol = BOUNDARY_TOL * domain.scale
    top = float(np.max(vals))
    if top < -tol:
        raise DomainError("point lies in the interior of the base")
    if top > tol:
        raise DomainError("point lies outside the base")
    active = [j for j in range(domain.m) if abs(vals[j]) <= tol]
    return [domain.v[j] / np.linalg.norm(domain.v[j]) for j in active]


@dataclass(frozen=True)
class ReinhardtFactor:
    p: float
    q: float
    alpha: float

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise DomainError("Reinhardt exponents must be positive")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError("Reinhardt level alpha must lie in (0, 1)")


def from_reinhardt(factors: Iterable) -> StaircaseDomain:
    """Staircase base of ``log |.|`` of ``{z in D^2 : 0 < |z_1|^p |z_2|^q < alpha}``.

    The base is cut out by ``x_1 < 0``, ``x_2 < 0`` and
    ``p x_1 + q x_2 < log alpha`` for each factor; redundant lines are dropped
    by keeping only those that carry an edge between two feasible vertices.
    """
    fs = [f if isinstance(f, ReinhardtFactor) else ReinhardtFactor(*f) for f in factors]
    if not fs:
        raise DomainError("need at least one Reinhardt factor")
    lines = [(np.array([1.0, 0.0]), 0.0), (np.array([0.0, 1.0]), 0.0)]
    lines += [(np.array([f.p, f.q], dtype=float), math.log(f.alpha)) for f in fs]
    scale = max(1.0, max(abs(c) for _, c in lines), max(float(np.max(nv)) for nv, _ in lines))
    tol = 1e-12 * scale

    def feasible(x):
        return all(float(np.dot(nv, x)) - c <= tol * max(1.0, float(np.linalg.norm(nv))) for nv, c in lines)

    verts: list[np.ndarray] = []
    for i in range(len(lines)):
        for k in range(i + 1, len(lines)):
            A = np.vstack([lines[i][0], lines[k][0]])
            if abs(np.linalg.det(A)) <= 1e-14 * scale:
                continue
            x = np.linalg.solve(A, [lines[i][1], lines[k][1]])
            if feasible(x) and not any(np.linalg.norm(x - y) <= 1e-9 * scale for y in verts):
                verts.append(x)
    verts.sort(key=lambda x: -x[0])
    if len(verts) < 2:
        raise DomainError("Reinhardt factors do not produce a staircase base")

    normals = [np.array([1.0, 0.0])]
    for a, b in zip(verts[:-1], verts[1:]):
        best = min(lines[2:], key=lambda L: max(abs(np.dot(L[0], a) - L[1]), abs(np.dot(L[0], b) - L[1])))
        normals.append(best[0].copy())
    normals.append(np.array([0.0, 1.0]))

    verts[0][0] = 0.0
    verts[-1][1] = 0.0
    p = [verts[0] - np.array([0.0, 1.0])] + verts + [verts[-1] - np.array([1.0, 0.0])]
    dom = StaircaseDomain(np.array(normals), np.array(p))
    bad = dom.validate()
    if bad:
        raise DomainError("constructed staircase is invalid: " + "; ".join(map(str, bad)))
    return dom


def canonical_staircase() -> StaircaseDomain:
    """The three-facet staircase over ``x_1 < 0, x_2 < 0, x_1 + x_2 < -1``."""
    return StaircaseDomain(
        v=[[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        p=[[0.0, -2.0], [0.0, -1.0], [-1.0, 0.0], [-2.0, 0.0]],
    )
