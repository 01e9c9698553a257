"""Closed-form geodesic families and their boundary measures.

Every family is described by an immutable spec; :func:`geodesic_map` binds a
spec to a domain and returns a map object that evaluates ``phi`` and
``phi'`` on arrays of disc points and exposes the boundary measure,
``Im phi(0)`` and the quadratic certificate that witnesses geodesy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circle import (
    TWO_PI,
    Arc,
    ArcSet,
    DiscError,
    mobius,
    mobius_derivative,
    strip_map_tau,
    strip_map_tau_derivative,
    wrap_angle,
)
from .domain import (
    DiscBaseDomain,
    HalfPlaneProduct,
    StaircaseDomain,
    StripDomain,
    TubeDomain,
)
from .hfun import (
    QuadCertificate,
    circle_symbol,
    combine,
    is_nonneg_on_circle,
    positivity_arc,
    transform_by_mobius,
    transform_by_rotation,
)
from .measure import (
    CircleMeasure,
    CompositeMeasure,
    QuadratureError,
    SmoothDensity,
    herglotz_derivative,
    herglotz_transform,
)

ATOM_TOL = 1e-10
FULL_TOL = 1e-9


class InadmissibleSpec(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class CaseOneIndicator(ValueError):
    """``v_{j,1} h_2 - v_{j,2} h_1`` vanishes identically for facet ``j``."""

    def __init__(self, j: int):
        self.j = j
        super().__init__(f"combined certificate vanishes identically at facet j={j}")


# --- elementary families -------------------------------------------------------

def _kernel(angle: float, lam):
    z = np.exp(1j * angle)
    return (z + lam) / (z - lam)


def _kernel_derivative(angle: float, lam):
    z = np.exp(1j * angle)
    return 2.0 * z / (z - lam) ** 2


def eval_halfplane_geodesic(alpha: float, lam0, beta: float, lam):
    """``(alpha/2pi)(lam0 + lam)/(lam0 - lam) + i beta`` for ``alpha < 0``."""
    if not alpha < 0:
        raise ValueError("a half-plane geodesic needs alpha < 0")
    lam0 = complex(lam0)
    if abs(abs(lam0) - 1.0) > 1e-12:
        raise DiscError("lam0 must lie on the unit circle")
    lam = np.asarray(lam, dtype=complex)
    if np.any(np.abs(lam) >= 1.0):
        raise DiscError("evaluation point must lie in the open disc")
    out = alpha / TWO_PI * (lam0 + lam) / (lam0 - lam) + 1j * beta
    return out[()] if out.ndim == 0 else out


def strip_center(a, b) -> float:
    """Moebius centre ``c = -b / (2|a| + sqrt(4|a|^2 - b^2))``."""
    a, b = complex(a), float(b)
    if not abs(b) < 2.0 * abs(a):
        raise ValueError("strip geodesic needs |b| < 2|a|")
    return -b / (2.0 * abs(a) + np.sqrt(4.0 * abs(a) ** 2 - b * b))


def eval_phi_h(a, b, lam):
    """Strip geodesic ``tau(i T_c(conj(a)/|a| lam))``."""
    c = strip_center(a, b)
    a = complex(a)
    lam = np.asarray(lam, dtype=complex)
    if np.any(np.abs(lam) >= 1.0):
        raise DiscError("evaluation point must lie in the open disc")
    u = np.conj(a) / abs(a) * lam
    return strip_map_tau(1j * mobius(c, u))


def eval_phi_h_derivative(a, b, lam):
    c = strip_center(a, b)
    a = complex(a)
    rot = np.conj(a) / abs(a)
    u = rot * np.asarray(lam, dtype=complex)
    return strip_map_tau_derivative(1j * mobius(c, u)) * 1j * mobius_derivative(c, u) * rot


def disc_base_boundary_direction(a, b, t):
    """Unit vector ``(Re(conj(a) e^{it}) + b) / ||.||`` in the plane."""
    a = np.asarray(a, dtype=complex).reshape(2)
    b = np.asarray(b, dtype=float).reshape(2)
    t = np.asarray(t, dtype=float)
    vec = np.real(np.conj(a) * np.exp(1j * t)[..., None]) + b
    nrm = np.linalg.norm(vec, axis=-1, keepdims=True)
    if np.any(nrm <= 1e-14):
        raise ValueError("direction vanishes at the requested angle")
    return vec / nrm


# --- staircase arcs -------------------------------------------------------------

@dataclass(frozen=True)
class KlisArcs:
    C: tuple
    A: tuple
    B: tuple
    symbols: tuple

    @property
    def measures(self) -> list[float]:
        return [c.measure() for c in self.C]


def klis_arcs(domain: StaircaseDomain, h: QuadCertificate) -> KlisArcs:
    """Positivity arcs ``C_j`` of ``v_{j,1} h_2 - v_{j,2} h_1``, ``A_j = C_j - C_{j+1}``
    and the finite set ``B`` of symbol zeros."""
    C, syms = [], []
    B = set()
    scale = max(h.scale, 1e-300)
    for j in range(1, domain.m + 1):
        a, b = combine(domain.normal(j), h)
        if max(abs(a), abs(b)) <= 1e-14 * scale * float(np.max(np.abs(domain.v))):
            raise CaseOneIndicator(j)
        C.append(positivity_arc(a, b))
        syms.append((a, b))
        if is_nonneg_on_circle(a, b) and abs(a) > 0 and abs(b - 2 * abs(a)) <= ATOM_TOL * max(abs(a), abs(b)):
            B.add(wrap_angle(float(np.angle(a)) + np.pi))
        if is_nonneg_on_circle(-a, -b) and abs(a) > 0 and abs(-b - 2 * abs(a)) <= ATOM_TOL * max(abs(a), abs(b)):
            B.add(wrap_angle(float(np.angle(a))))
    for j in range(len(C) - 1):
        extra = C[j + 1] - C[j]
        if extra.measure() > FULL_TOL:
            raise ValueError(f"arcs are not nested: C_{j + 2} is not inside C_{j + 1}")
    A = [C[j] - C[j + 1] for j in range(len(C) - 1)] + [C[-1]]
    return KlisArcs(tuple(C), tuple(A), tuple(sorted(B)), tuple(syms))


def klis_k1k2(measures: Sequence[float]) -> tuple[int, int]:
    """``k_1 = max{j : |C_j| = 2pi}``, ``k_2 = min{j : |C_j| = 0}`` (1-based)."""
    ms = [float(x) for x in measures]
    if any(ms[j + 1] > ms[j] + FULL_TOL for j in range(len(ms) - 1)):
        raise ValueError("arc measures must be nonincreasing")
    if not ms or abs(ms[0] - TWO_PI) > FULL_TOL or ms[-1] > FULL_TOL:
        raise ValueError("need |C_1| = 2pi and |C_m| = 0")
    k1 = max(j + 1 for j, x in enumerate(ms) if abs(x - TWO_PI) <= FULL_TOL)
    k2 = min(j + 1 for j, x in enumerate(ms) if x <= FULL_TOL)
    return k1, k2


# --- specs -----------------------------------------------------------------------

def _floats(x, n=None) -> tuple:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if n is not None and arr.shape != (n,):
        raise ValueError(f"expected {n} values, got shape {arr.shape}")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class HalfPlaneAtomSpec:
    """Coordinate ``j0`` is a one-atom half-plane geodesic; the others are
    arbitrary maps into the left half-plane given by (1-D measure, offset)."""

    n: int
    j0: int
    alpha: float
    atom_angle: float
    beta: float
    free: tuple = ()

    kind = "halfplane_atom"

    def __post_init__(self):
        object.__setattr__(self, "free", tuple((mu, float(off)) for mu, off in self.free))


@dataclass(frozen=True)
class StripSpec:
    a: complex
    b: float
    offset: float = 0.0

    kind = "strip"


@dataclass(frozen=True)
class StaircaseIISpec:
    h: QuadCertificate
    alpha: tuple
    atom_angles: tuple
    beta: tuple

    kind = "staircase_ii"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _floats(self.alpha, 2))
        object.__setattr__(self, "atom_angles", tuple(wrap_angle(t) for t in _floats(self.atom_angles, 2)))
        object.__setattr__(self, "beta", _floats(self.beta, 2))


@dataclass(frozen=True)
class StaircaseISpec:
    """``phi = p_j + g v_j/|v_j|^2 + e u_j`` with ``g`` a half-plane geodesic and
    ``e(lam) = sum_k coeffs[k] M(lam)^k`` for the automorphism
    ``M(lam) = (e^{i theta} lam + c)/(1 + conj(c) e^{i theta} lam)``."""

    facet: int
    alpha: float
    atom_angle: float
    beta: float
    transverse: tuple = (0.0,)
    transverse_c: complex = 0.0
    transverse_theta: float = 0.0

    kind = "staircase_i"

    def __post_init__(self):
        object.__setattr__(self, "transverse", tuple(complex(x) for x in np.atleast_1d(self.transverse)))


@dataclass(frozen=True)
class DiscBaseSpec:
    a: tuple
    b: tuple
    offset: tuple = (0.0, 0.0)

    kind = "disc_base"

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(x) for x in np.atleast_1d(self.a)))
        object.__setattr__(self, "b", _floats(self.b, 2))
        object.__setattr__(self, "offset", _floats(self.offset, 2))
        if len(self.a) != 2:
            raise ValueError("disc-base spec needs a in C^2")


@dataclass(frozen=True)
class MeasureSpec:
    """A map given directly by its boundary measure and ``Im phi(0)``."""

    measure: CircleMeasure
    offset: tuple
    certificate: Optional[QuadCertificate] = None

    kind = "measure"

    def __post_init__(self):
        object.__setattr__(self, "offset", _floats(self.offset, self.measure.n))


SPEC_TYPES = (HalfPlaneAtomSpec, StripSpec, StaircaseIISpec, StaircaseISpec, DiscBaseSpec, MeasureSpec)


def halfplane_certificate(atom_angle: float, weight: float = 1.0) -> tuple[complex, float]:
    """``(a, b)`` of ``-conj(lam0)(lam - lam0)^2``: symbol ``|lam - lam0|^2``."""
    return -weight * np.exp(1j * atom_angle), 2.0 * weight


# --- maps ------------------------------------------------------------------------

class GeodesicMap:
    """Holomorphic map of the disc with known boundary measure."""

    n: int
    spec = None
    domain: Optional[TubeDomain] = None

    def __call__(self, lam) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, lam) -> np.ndarray:
        raise NotImplementedError

    @property
    def measure(self):
        raise NotImplementedError

    @property
    def offset(self) -> np.ndarray:
        return np.imag(self(0.0))

    @property
    def certificate(self) -> Optional[QuadCertificate]:
        return None

    def atom_angles(self) -> list[float]:
        """Angles where the radial limit diverges."""
        return [t for t, m in self.measure.atoms if np.any(np.abs(m) > 0)]

    def singular_angles(self) -> list[float]:
        """Atoms plus jump points of the boundary density."""
        mu = self.measure
        return sorted(set(mu.singular_angles()) | set(self.atom_angles()))

    def _check(self, lam):
        lam = np.asarray(lam, dtype=complex)
        if np.any(np.abs(lam) >= 1.0):
            raise DiscError("evaluation point must lie in the open disc")
        return lam


def _embed(mu1: CircleMeasure, l: int, n: int) -> CircleMeasure:
    E = np.zeros((n, 1))
    E[l, 0] = 1.0
    return mu1.apply(E)


class HalfPlaneAtomGeodesic(GeodesicMap):
    def __init__(self, spec: HalfPlaneAtomSpec, domain=None):
        self.spec, self.domain, self.n = spec, domain, int(spec.n)
        if not spec.alpha < 0:
            raise InadmissibleSpec(["alpha must be negative"])
        if not 0 <= spec.j0 < self.n or len(spec.free) != self.n - 1:
            raise InadmissibleSpec(["need j0 in range and one free component per other coordinate"])
        self._others = [l for l in range(self.n) if l != spec.j0]
        for mu, _ in spec.free:
            if mu.n != 1:
                raise InadmissibleSpec(["free components must be one-dimensional measures"])

    def __call__(self, lam):
        lam = self._check(lam)
        s = self.spec
        out = np.empty(lam.shape + (self.n,), dtype=complex)
        out[..., s.j0] = eval_halfplane_geodesic(s.alpha, np.exp(1j * s.atom_angle), s.beta, lam)
        for l, (mu, off) in zip(self._others, s.free):
            out[..., l] = herglotz_transform(mu, lam, [off])[..., 0]
        return out

    def derivative(self, lam):
        lam = self._check(lam)
        s = self.spec
        out = np.empty(lam.shape + (self.n,), dtype=complex)
        out[..., s.j0] = s.alpha / TWO_PI * _kernel_derivative(s.atom_angle, lam)
        for l, (mu, _) in zip(self._others, s.free):
            out[..., l] = herglotz_derivative(mu, lam)[..., 0]
        return out

    @property
    def measure(self) -> CircleMeasure:
        s = self.spec
        mu = _embed(CircleMeasure.dirac(s.atom_angle, [s.alpha]), s.j0, self.n)
        for l, (m1, _) in zip(self._others, s.free):
            mu = mu + _embed(m1, l, self.n)
        return mu

    @property
    def offset(self):
        out = np.zeros(self.n)
        out[self.spec.j0] = self.spec.beta
        for l, (_, off) in zip(self._others, self.spec.free):
            out[l] = off
        return out

    @property
    def certificate(self) -> QuadCertificate:
        a = [0j] * self.n
        b = [0.0] * self.n
        a[self.spec.j0], b[self.spec.j0] = halfplane_certificate(self.spec.atom_angle)
        return QuadCertificate(a, b)


class StripGeodesic(GeodesicMap):
    n = 1

    def __init__(self, spec: StripSpec, domain=None):
        self.spec, self.domain = spec, domain
        if not abs(spec.b) < 2.0 * abs(spec.a):
            raise InadmissibleSpec(["strip certificate needs |b| < 2|a|"])

    def __call__(self, lam):
        lam = self._check(lam)
        return (eval_phi_h(self.spec.a, self.spec.b, lam) + 1j * self.spec.offset)[..., None]

    def derivative(self, lam):
        lam = self._check(lam)
        return eval_phi_h_derivative(self.spec.a, self.spec.b, lam)[..., None]

    @property
    def measure(self) -> CircleMeasure:
        return CircleMeasure.indicator(positivity_arc(self.spec.a, self.spec.b), [1.0])

    @property
    def offset(self):
        return np.array([self.spec.offset])

    @property
    def certificate(self) -> QuadCertificate:
        return QuadCertificate([self.spec.a], [self.spec.b])


def staircase_ii_problems(spec: StaircaseIISpec, domain: StaircaseDomain) -> list[str]:
    """Structural admissibility of a case-(ii) staircase spec (image test excluded)."""
    probs = []
    h = spec.h
    if h.n != 2 or h.is_zero:
        return ["certificate must be a nonzero pair"]
    for l in range(2):
        a, b = h.component(l)
        if not is_nonneg_on_circle(a, b):
            probs.append(f"symbol of h_{l + 1} changes sign on the circle")
        al = spec.alpha[l]
        if al > 0:
            probs.append(f"alpha_{l + 1} must be <= 0")
        elif al < 0:
            val = circle_symbol(a, b, spec.atom_angles[l])
            if abs(val) > ATOM_TOL * max(h.scale, 1e-300) * 10:
                probs.append(f"atom {l + 1} is not at a zero of the symbol of h_{l + 1}")
    return probs


class StaircaseIIGeodesic(GeodesicMap):
    n = 2

    def __init__(self, spec: StaircaseIISpec, domain: StaircaseDomain):
        if not isinstance(domain, StaircaseDomain):
            raise InadmissibleSpec(["case-(ii) staircase spec needs a staircase domain"])
        self.spec, self.domain = spec, domain
        probs = staircase_ii_problems(spec, domain)
        if probs:
            raise InadmissibleSpec(probs)
        self.arcs = klis_arcs(domain, spec.h)
        self.k1, self.k2 = klis_k1k2(self.arcs.measures)
        self._terms = []
        for j in range(self.k1 + 1, self.k2):
            coef = domain.vertex(j) - domain.vertex(j - 1)
            self._terms.append((j, coef, self.arcs.symbols[j - 1]))

    def __call__(self, lam):
        lam = self._check(lam)
        s = self.spec
        out = np.broadcast_to(self.domain.vertex(self.k1).astype(complex), lam.shape + (2,)).copy()
        for _, coef, (a, b) in self._terms:
            out += eval_phi_h(a, b, lam)[..., None] * coef
        for l in range(2):
            if s.alpha[l] != 0.0:
                out[..., l] += s.alpha[l] / TWO_PI * _kernel(s.atom_angles[l], lam)
            out[..., l] += 1j * s.beta[l]
        return out

    def derivative(self, lam):
        lam = self._check(lam)
        s = self.spec
        out = np.zeros(lam.shape + (2,), dtype=complex)
        for _, coef, (a, b) in self._terms:
            out += eval_phi_h_derivative(a, b, lam)[..., None] * coef
        for l in range(2):
            if s.alpha[l] != 0.0:
                out[..., l] += s.alpha[l] / TWO_PI * _kernel_derivative(s.atom_angles[l], lam)
        return out

    @property
    def measure(self) -> CircleMeasure:
        s = self.spec
        mu = CircleMeasure.lebesgue(self.domain.vertex(self.k1))
        for j, coef, _ in self._terms:
            mu = mu + CircleMeasure.indicator(self.arcs.C[j - 1], coef)
        for l in range(2):
            if s.alpha[l] != 0.0:
                mass = np.zeros(2)
                mass[l] = s.alpha[l]
                mu = mu + CircleMeasure.dirac(s.atom_angles[l], mass)
        return mu

    @property
    def offset(self):
        return np.array(self.spec.beta)

    @property
    def certificate(self) -> QuadCertificate:
        return self.spec.h


def _automorphism(c: complex, theta: float):
    """``M(lam) = (e^{i theta} lam + c)/(1 + conj(c) e^{i theta} lam)`` and ``M'``."""
    rot = np.exp(1j * theta)

    def f(lam):
        return mobius(-c, rot * np.asarray(lam, dtype=complex))

    def df(lam):
        return mobius_derivative(-c, rot * np.asarray(lam, dtype=complex)) * rot

    return f, df


class StaircaseIGeodesic(GeodesicMap):
    n = 2

    def __init__(self, spec: StaircaseISpec, domain: StaircaseDomain):
        if not isinstance(domain, StaircaseDomain):
            raise InadmissibleSpec(["case-(i) staircase spec needs a staircase domain"])
        if not 1 <= spec.facet <= domain.m:
            raise InadmissibleSpec([f"facet index must lie in 1..{domain.m}"])
        if not spec.alpha < 0:
            raise InadmissibleSpec(["alpha must be negative"])
        if abs(spec.transverse_c) >= 1.0:
            raise InadmissibleSpec(["transverse automorphism centre must lie in the disc"])
        self.spec, self.domain = spec, domain
        v = domain.normal(spec.facet)
        self.v = v
        self.vdir = v / float(np.dot(v, v))
        self.u = np.array([-v[1], v[0]]) / float(np.linalg.norm(v))
        self.p = domain.vertex(spec.facet)
        self._M, self._dM = _automorphism(complex(spec.transverse_c), spec.transverse_theta)
        self._poly = np.array(spec.transverse)

    def projection(self, lam):
        """``<phi - p_j, v_j>``: the one-dimensional half-plane geodesic."""
        s = self.spec
        return eval_halfplane_geodesic(s.alpha, np.exp(1j * s.atom_angle), s.beta, lam)

    def transverse(self, lam):
        return np.polynomial.polynomial.polyval(self._M(lam), self._poly)

    def __call__(self, lam):
        lam = self._check(lam)
        g = np.asarray(self.projection(lam))[..., None]
        e = np.asarray(self.transverse(lam))[..., None]
        return self.p + g * self.vdir + e * self.u

    def derivative(self, lam):
        lam = self._check(lam)
        s = self.spec
        dg = (s.alpha / TWO_PI * _kernel_derivative(s.atom_angle, lam))[..., None]
        dpoly = np.polynomial.polynomial.polyder(self._poly) if len(self._poly) > 1 else np.zeros(1)
        de = (np.polynomial.polynomial.polyval(self._M(lam), dpoly) * self._dM(lam))[..., None]
        return dg * self.vdir + de * self.u

    @property
    def measure(self) -> CompositeMeasure:
        s = self.spec
        disc = CircleMeasure.lebesgue(self.p) + CircleMeasure.dirac(s.atom_angle, s.alpha * self.vdir)
        uu, M, poly = self.u, self._M, self._poly

        def dens(t):
            vals = np.real(np.polynomial.polynomial.polyval(M(np.exp(1j * np.asarray(t))), poly))
            return vals[:, None] * uu

        return CompositeMeasure(disc, SmoothDensity(2, dens))

    @property
    def offset(self):
        e0 = complex(self.transverse(0.0))
        return self.spec.beta * self.vdir + e0.imag * self.u

    @property
    def certificate(self) -> QuadCertificate:
        a, b = halfplane_certificate(self.spec.atom_angle)
        return QuadCertificate([a * self.v[0], a * self.v[1]], [b * self.v[0], b * self.v[1]])

    def atom_angles(self):
        return [wrap_angle(self.spec.atom_angle)]

    def singular_angles(self):
        return self.atom_angles()


def _fourier_herglotz(density, n: int, tol: float = 1e-15, max_nodes: int = 2**18):
    """Taylor coefficients of the Herglotz transform of ``density(t) dL``."""
    m = 256
    while True:
        t = TWO_PI * np.arange(m) / m
        vals = density(t)
        coef = np.fft.fft(vals, axis=0) / m
        half = m // 2
        tail = np.max(np.abs(coef[half // 2 : half]))
        if tail <= tol * max(1.0, float(np.max(np.abs(coef[0])))):
            out = coef[:half].copy()
            out[1:] *= 2.0
            keep = np.nonzero(np.max(np.abs(out), axis=1) > tol * 1e-3)[0]
            return out[: (keep[-1] + 1 if keep.size else 1)]
        if m >= max_nodes:
            raise QuadratureError("Fourier coefficients of the boundary density do not decay")
        m *= 2


class DiscBaseGeodesic(GeodesicMap):
    n = 2

    def __init__(self, spec: DiscBaseSpec, domain=None):
        if all(x == 0 for x in spec.a) and all(x == 0 for x in spec.b):
            raise InadmissibleSpec(["disc-base certificate must be nonzero"])
        self.spec, self.domain = spec, domain
        a, b = np.array(spec.a), np.array(spec.b)
        self._density = lambda t: disc_base_boundary_direction(a, b, t).reshape(-1, 2)
        self._coef = _fourier_herglotz(self._density, 2)

    def __call__(self, lam):
        lam = self._check(lam)
        P = np.polynomial.polynomial
        out = np.stack([P.polyval(lam, self._coef[:, l]) for l in range(2)], axis=-1)
        return out - 1j * np.imag(self._coef[0]) + 1j * np.array(self.spec.offset)

    def derivative(self, lam):
        lam = self._check(lam)
        P = np.polynomial.polynomial
        return np.stack([P.polyval(lam, P.polyder(self._coef[:, l])) for l in range(2)], axis=-1)

    @property
    def measure(self) -> SmoothDensity:
        return SmoothDensity(2, self._density)

    @property
    def offset(self):
        return np.array(self.spec.offset)

    @property
    def certificate(self) -> QuadCertificate:
        return QuadCertificate(self.spec.a, [2.0 * x for x in self.spec.b])

    def atom_angles(self):
        return []

    def singular_angles(self):
        return []


class MeasureGeodesic(GeodesicMap):
    def __init__(self, spec: MeasureSpec, domain=None):
        self.spec, self.domain, self.n = spec, domain, spec.measure.n

    def __call__(self, lam):
        return herglotz_transform(self.spec.measure, self._check(lam), self.spec.offset)

    def derivative(self, lam):
        return herglotz_derivative(self.spec.measure, self._check(lam))

    @property
    def measure(self):
        return self.spec.measure

    @property
    def offset(self):
        return np.array(self.spec.offset)

    @property
    def certificate(self):
        return self.spec.certificate


class ProjectedMap(GeodesicMap):
    """``lam -> V phi(lam)`` for a real full-row-rank matrix ``V``."""

    def __init__(self, V, base: GeodesicMap, certificate: Optional[QuadCertificate] = None):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        if V.shape[1] != base.n:
            raise ValueError("projection matrix width does not match the map")
        if np.linalg.matrix_rank(V) < V.shape[0]:
            raise ValueError("projection matrix must have full row rank")
        self.V, self.base, self.n = V, base, V.shape[0]
        self.domain = None
        self._cert = certificate

    def __call__(self, lam):
        return self.base(lam) @ self.V.T

    def derivative(self, lam):
        return self.base.derivative(lam) @ self.V.T

    @property
    def measure(self):
        return self.base.measure.apply(self.V)

    @property
    def offset(self):
        return self.V @ self.base.offset

    @property
    def certificate(self):
        return self._cert

    def atom_angles(self):
        return self.base.atom_angles()

    def singular_angles(self):
        return self.base.singular_angles()


def project(V, phi: GeodesicMap, certificate: Optional[QuadCertificate] = None) -> ProjectedMap:
    return ProjectedMap(V, phi, certificate)


_MAP_TYPES = {
    HalfPlaneAtomSpec: HalfPlaneAtomGeodesic,
    StripSpec: StripGeodesic,
    StaircaseIISpec: StaircaseIIGeodesic,
    StaircaseISpec: StaircaseIGeodesic,
    DiscBaseSpec: DiscBaseGeodesic,
    MeasureSpec: MeasureGeodesic,
}

_DOMAIN_OF = {
    HalfPlaneAtomSpec: (HalfPlaneProduct,),
    StripSpec: (StripDomain,),
    StaircaseIISpec: (StaircaseDomain,),
    StaircaseISpec: (StaircaseDomain,),
    DiscBaseSpec: (DiscBaseDomain,),
    MeasureSpec: (HalfPlaneProduct, StripDomain, StaircaseDomain, DiscBaseDomain),
}


def spec_matches_domain(spec, domain) -> bool:
    if not isinstance(domain, _DOMAIN_OF[type(spec)]):
        return False
    n = spec.n if isinstance(spec, HalfPlaneAtomSpec) else (
        spec.measure.n if isinstance(spec, MeasureSpec) else _MAP_TYPES[type(spec)].n)
    return n == domain.n


def geodesic_map(spec, domain: Optional[TubeDomain] = None, check_image: bool = True) -> GeodesicMap:
    """Bind a spec to its domain; inadmissible specs raise :class:`InadmissibleSpec`."""
    if domain is not None and not spec_matches_domain(spec, domain):
        raise InadmissibleSpec([f"{spec.kind} spec does not fit a {domain.kind} domain"])
    phi = _MAP_TYPES[type(spec)](spec, domain)
    if check_image and domain is not None:
        ok, witness = image_in_domain(phi, domain)
        if not ok:
            raise InadmissibleSpec([f"image leaves the domain near lam = {witness:.6g}"])
    return phi


def boundary_measure_of(spec, domain: Optional[TubeDomain] = None):
    return geodesic_map(spec, domain, check_image=False).measure


def image_in_domain(phi: GeodesicMap, domain: TubeDomain, n_angles: int = 64, n_radii: int = 16,
                    margin: float = 1e-12):
    """Sampled test of ``phi(D) in D`` on a polar grid plus probes next to atoms.

    Points must clear every facet by ``margin`` (relative to the domain scale),
    so images lying on a face are rejected despite rounding.
    """
    radii = 1.0 - 0.5 ** np.arange(n_radii)
    angles = TWO_PI * (np.arange(n_angles) + 0.5) / n_angles
    lam = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    probes = []
    for t in phi.atom_angles():
        for dt in (-1e-3, 1e-3, 0.0):
            probes.append((1.0 - 1e-4) * np.exp(1j * (t + dt)))
    lam = np.concatenate([lam, np.array(probes, dtype=complex)])
    x = np.real(phi(lam))
    if isinstance(domain, StaircaseDomain):
        worst = np.max(domain.facet_values(x) / np.linalg.norm(domain.v, axis=1), axis=-1)
        bad = worst >= -margin * domain.scale
    elif isinstance(domain, HalfPlaneProduct):
        bad = np.max(x, axis=-1) >= -margin
    elif isinstance(domain, StripDomain):
        bad = (x[:, 0] <= margin) | (x[:, 0] >= 1.0 - margin)
    else:
        bad = np.sum(x * x, axis=-1) >= 1.0 - margin
    if np.any(bad):
        return False, complex(lam[np.argmax(bad)])
    return True, None


# --- reparametrization -----------------------------------------------------------

def _transport_angle(angle: float, c: complex, theta: float) -> tuple[float, float]:
    """New angle and Jacobian factor ``1/|M'|`` of a boundary point under ``M^{-1}``."""
    pt = mobius(c, np.exp(1j * angle))
    jac = abs(mobius_derivative(-c, pt))
    return wrap_angle(float(np.angle(pt)) - theta), 1.0 / jac


def precompose(spec, domain, c: complex = 0.0, theta: float = 0.0):
    """Spec of ``phi o M`` with ``M(lam) = (e^{i theta} lam + c)/(1 + conj(c) e^{i theta} lam)``."""
    c = complex(c)
    if abs(c) >= 1.0:
        raise DiscError("automorphism centre must lie in the open disc")
    phi = geodesic_map(spec, domain, check_image=False)
    off = np.imag(phi(c))

    def cert(a, b):
        a2, b2 = transform_by_mobius(a, b, c)
        return transform_by_rotation(a2, b2, theta)

    def meas(mu):
        return mu.transported(c).rotated(theta)

    if isinstance(spec, HalfPlaneAtomSpec):
        t, f = _transport_angle(spec.atom_angle, c, theta)
        others = [l for l in range(spec.n) if l != spec.j0]
        free = tuple((meas(mu), off[l]) for l, (mu, _) in zip(others, spec.free))
        return HalfPlaneAtomSpec(spec.n, spec.j0, spec.alpha * f, t, off[spec.j0], free)
    if isinstance(spec, StripSpec):
        a, b = cert(spec.a, spec.b)
        return StripSpec(a, b, off[0])
    if isinstance(spec, StaircaseIISpec):
        pairs = [cert(*spec.h.component(l)) for l in range(2)]
        h = QuadCertificate([p[0] for p in pairs], [p[1] for p in pairs])
        alpha, angles = [], []
        for l in range(2):
            t, f = _transport_angle(spec.atom_angles[l], c, theta)
            alpha.append(spec.alpha[l] * f)
            angles.append(t)
        return StaircaseIISpec(h, alpha, angles, off)
    if isinstance(spec, StaircaseISpec):
        t, f = _transport_angle(spec.atom_angle, c, theta)
        old_M, old_dM = _automorphism(complex(spec.transverse_c), spec.transverse_theta)
        new_M, new_dM = _automorphism(c, theta)
        c_new = complex(old_M(new_M(0.0)))
        d0 = complex(old_dM(new_M(0.0)) * new_dM(0.0))
        beta = float(np.dot(off, phi.v))
        return StaircaseISpec(spec.facet, spec.alpha * f, t, beta, spec.transverse, c_new,
                              float(np.angle(d0)))
    if isinstance(spec, DiscBaseSpec):
        pairs = [cert(spec.a[l], 2.0 * spec.b[l]) for l in range(2)]
        return DiscBaseSpec([p[0] for p in pairs], [0.5 * p[1] for p in pairs], off)
    if isinstance(spec, MeasureSpec):
        h = None
        if spec.certificate is not None:
            pairs = [cert(*spec.certificate.component(l)) for l in range(spec.certificate.n)]
            h = QuadCertificate([p[0] for p in pairs], [p[1] for p in pairs])
        return MeasureSpec(meas(spec.measure), off, h)
    raise TypeError(f"unsupported spec type {type(spec).__name__}")


def canonical_staircase_spec() -> StaircaseIISpec:
    """Two-atom geodesic of the three-facet staircase through ``(-3/2, -3/2)``."""
    return StaircaseIISpec(
        h=QuadCertificate([0.5, -0.5], [1.0, 1.0]),
        alpha=(-TWO_PI, -TWO_PI),
        atom_angles=(np.pi, 0.0),
        beta=(0.0, 0.0),
    )


def squared_pole_spec() -> MeasureSpec:
    """``(lam^2 + 1)/(lam^2 - 1)`` into the left half-plane with ``h(lam) = lam``.

    Its real part is negative and the certificate is nonnegative on the circle,
    yet the map is two-to-one, so it is not a geodesic.
    """
    mu = CircleMeasure(1, (), ((0.0, [-np.pi]), (np.pi, [-np.pi])))
    return MeasureSpec(mu, [0.0], QuadCertificate([0.0], [1.0]))
