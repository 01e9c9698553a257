"""Checkers for geodesy of a map ``phi`` with certificate ``h``.

Three independent routes are provided:

* the measure condition: ``conj(lam) h(lam) . (Re z dL - d mu) <= 0`` for every
  ``z`` in the domain, decided exactly per cell of the boundary measure;
* the radial conditions on estimated radial limits ``phi*`` and on the
  interior function ``Re[h . (phi(0) - phi)/lam]``;
* the contour-integral left inverse ``f`` with ``f o phi = id``, whose
  residual certifies geodesy directly.

Universal statements over the domain or the circle are sampled; reports say
so in their metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .circle import TWO_PI, DiscError, poincare_distance, wrap_angle
from .domain import DiscBaseDomain, HalfPlaneProduct, StaircaseDomain, StripDomain, TubeDomain
from .geodesic import GeodesicMap, StaircaseIIGeodesic
from .hfun import QuadCertificate, eval_h
from .measure import CircleMeasure, CompositeMeasure, SmoothDensity

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

MEASURE_TOL = 1e-11
RADIAL_I_TOL = 1e-7
RADIAL_II_TOL = 1e-10
RESIDUAL_TOL = 1e-7


def _c2l(z) -> list:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return [[float(x.real), float(x.imag)] for x in z]


@dataclass
class ConditionResult:
    name: str
    status: str
    value: Optional[float] = None
    tolerance: Optional[float] = None
    witness: Optional[dict] = None
    notes: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "value": self.value,
                "tolerance": self.tolerance, "witness": self.witness, "notes": self.notes}

    @classmethod
    def from_dict(cls, d: dict) -> "ConditionResult":
        return cls(d["name"], d["status"], d.get("value"), d.get("tolerance"), d.get("witness"),
                   d.get("notes", ""))


@dataclass
class VerificationReport:
    conditions: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        states = [c.status for c in self.conditions]
        if FAIL in states:
            return FAIL
        if INCONCLUSIVE in states or not states:
            return INCONCLUSIVE
        return PASS

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        self.conditions.extend(other.conditions)
        self.metadata.update(other.metadata)
        return self

    def to_dict(self) -> dict:
        return {"status": self.status, "conditions": [c.to_dict() for c in self.conditions],
                "metadata": self.metadata}

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls([ConditionResult.from_dict(c) for c in d["conditions"]], dict(d.get("metadata", {})))


# --- sampling of the domain ------------------------------------------------------

def structured_z_samples(domain: TubeDomain, seed: int = 0, n_random: int = 10,
                         delta: float = 1e-3) -> np.ndarray:
    """Points near every facet and vertex, far out along recession directions,
    and ``n_random`` seeded interior points; imaginary parts are random."""
    rng = np.random.default_rng(seed)
    pts: list[np.ndarray] = []
    if isinstance(domain, StaircaseDomain):
        units = domain.v / np.linalg.norm(domain.v, axis=1)[:, None]
        for j in range(1, domain.m + 1):
            mid = 0.5 * (domain.vertex(j - 1) + domain.vertex(j))
            pts.append(mid - delta * units[j - 1])
        for j in range(1, domain.m):
            pts.append(domain.vertex(j) - delta * (units[j - 1] + units[j]))
        far = 100.0 * domain.scale
        pts += [domain.vertex(1) - [delta, far], domain.vertex(domain.m - 1) - [far, delta],
                domain.vertex(1) - [far, far]]
        box = 3.0 * domain.scale
        while len(pts) < 2 * domain.m + 2 + n_random:
            x = -box * rng.uniform(size=2)
            if domain.base_contains(x):
                pts.append(x)
    elif isinstance(domain, HalfPlaneProduct):
        n = domain.n
        for l in range(n):
            x = -np.ones(n)
            x[l] = -delta
            pts.append(x)
        pts += [-delta * np.ones(n), -100.0 * np.ones(n)]
        pts += [-3.0 * rng.uniform(0.001, 1.0, size=n) for _ in range(n_random)]
    elif isinstance(domain, StripDomain):
        pts += [np.array([delta]), np.array([1.0 - delta]), np.array([0.5])]
        pts += [rng.uniform(0.001, 0.999, size=1) for _ in range(n_random)]
    elif isinstance(domain, DiscBaseDomain):
        for k in range(8):
            t = TWO_PI * k / 8
            pts.append((1.0 - delta) * np.array([math.cos(t), math.sin(t)]))
        for _ in range(n_random):
            r, t = math.sqrt(rng.uniform()) * 0.999, rng.uniform(0, TWO_PI)
            pts.append(r * np.array([math.cos(t), math.sin(t)]))
    else:
        raise TypeError(f"no sampler for {type(domain).__name__}")
    x = np.array(pts, dtype=float)
    return x + 1j * rng.normal(size=x.shape)


def _facets_covered(domain: TubeDomain, z: np.ndarray) -> bool:
    if not isinstance(domain, StaircaseDomain):
        return True
    vals = domain.facet_values(np.real(z)) / np.linalg.norm(domain.v, axis=1)
    nearest = set(int(j) for j in np.argmax(vals, axis=1))
    return nearest == set(range(domain.m))


# --- measure condition -------------------------------------------------------------

def _densities_on(mu, t: np.ndarray) -> np.ndarray:
    if isinstance(mu, CompositeMeasure):
        return _densities_on(mu.discrete, t) + mu.smooth(t)
    if isinstance(mu, SmoothDensity):
        return mu(t)
    out = np.zeros((len(t), mu.n))
    for arc, w in mu.pieces:
        inside = arc.is_full | (wrap_angle(t - arc.start) < arc.length)
        out[inside] += np.array(w)
    return out


def _cell_max(A: complex, B: float, lo: float, length: float) -> tuple[float, float]:
    """Max of ``2 Re(conj(A) e^{it}) + B`` over ``[lo, lo + length]`` and its argmax."""
    cands = [lo, lo + length]
    peak = float(np.angle(A))
    if abs(A) > 0 and wrap_angle(peak - lo) <= length:
        cands.append(lo + wrap_angle(peak - lo))
    best_t, best = lo, -np.inf
    for t in cands:
        val = 2.0 * float(np.real(np.conj(A) * np.exp(1j * t))) + B
        if val > best:
            best_t, best = t, val
    return best, wrap_angle(best_t)


def check_measure_condition(mu, h: QuadCertificate, domain: TubeDomain, z_samples=None,
                            tol: float = MEASURE_TOL, grid: int = 4096) -> VerificationReport:
    """Negativity of ``nu_z = conj(lam) h(lam) . (Re z dL - d mu)`` over sampled ``z``.

    Piecewise-constant parts are decided exactly per cell (the density of
    ``nu_z`` is a trigonometric polynomial of degree one there); smooth parts
    are sampled on ``grid`` angles.
    """
    if h.is_zero:
        raise ValueError("certificate must not vanish identically")
    hn = h.normalized()
    a, b = np.array(hn.a), np.array(hn.b)
    user_samples = z_samples is not None
    z_samples = structured_z_samples(domain) if z_samples is None else np.atleast_2d(
        np.asarray(z_samples, dtype=complex))
    X = np.real(z_samples)
    discrete = mu.discrete if isinstance(mu, CompositeMeasure) else mu
    atoms = [] if isinstance(mu, SmoothDensity) else list(discrete.atoms)
    exact = isinstance(mu, CircleMeasure)
    cells = mu.density_cells() if exact else []
    if not exact:
        t_grid = TWO_PI * (np.arange(grid) + 0.5) / grid
        sym = 2.0 * np.real(np.conj(a)[None, :] * np.exp(1j * t_grid)[:, None]) + b[None, :]
        dens = _densities_on(mu, t_grid)

    mags = [1.0, float(np.max(np.abs(X)))] + [float(np.max(np.abs(w))) for _, w in cells]
    mags += [float(np.max(np.abs(m))) for _, m in atoms]
    tol_eff = tol * max(mags)

    def one(k):
        x = X[k]
        worst = (-np.inf, None)
        if exact:
            for arc, w in cells:
                c = x - w
                val, t = _cell_max(complex(np.dot(a, c)), float(np.dot(b, c)), arc.start, arc.length)
                if val > worst[0]:
                    worst = (val, {"kind": "density", "angle": t, "cell": [arc.start, arc.length]})
        else:
            vals = np.sum(sym * (x[None, :] - dens), axis=1)
            i = int(np.argmax(vals))
            worst = (float(vals[i]), {"kind": "density", "angle": float(t_grid[i])})
        for t, m in atoms:
            s = 2.0 * np.real(np.conj(a) * np.exp(1j * t)) + b
            val = -float(np.dot(s, m))
            if val > worst[0]:
                worst = (val, {"kind": "atom", "angle": t})
        return worst

    results = ordered_map(one, range(len(X)))
    top = max(r[0] for r in results)
    first_bad = next((k for k, r in enumerate(results) if r[0] > tol_eff), None)
    notes = "sampled over z; exact per measure cell" if exact else "sampled over z and angles"
    if first_bad is not None:
        wit = dict(results[first_bad][1])
        wit.update({"z": _c2l(z_samples[first_bad]), "value": results[first_bad][0]})
        cond = ConditionResult("measure", FAIL, top, tol_eff, wit, notes)
    elif user_samples and not _facets_covered(domain, z_samples):
        cond = ConditionResult("measure", INCONCLUSIVE, top, tol_eff, None,
                               notes + "; z samples do not reach every facet")
    else:
        cond = ConditionResult("measure", PASS, top, tol_eff, None, notes)
    return VerificationReport([cond], {"measure_semi_decision": True, "z_count": len(X)})


# --- radial conditions ---------------------------------------------------------------

def default_angle_grid(n: int = 256) -> np.ndarray:
    return TWO_PI * (np.arange(n) + (math.sqrt(2.0) - 1.0)) / n


def default_interior_grid() -> np.ndarray:
    probes = np.array([0.5, -0.5, 0.5j, -0.5j])
    radii = np.array([0.1, 0.3, 0.5, 0.7, 0.85, 0.95])
    angles = TWO_PI * (np.arange(24) + 0.3) / 24
    return np.concatenate([probes, (radii[:, None] * np.exp(1j * angles[None, :])).ravel()])


def radial_limit_real(phi: GeodesicMap, angles, ks: Sequence[int] = range(4, 21),
                      rel_tol: float = 1e-9):
    """Estimate ``Re phi*`` at ``angles`` from radii ``1 - 2^-k``.

    Two rounds of Richardson extrapolation in ``1 - r``; an angle counts as
    converged when the last two extrapolants agree to ``rel_tol``.
    Returns ``(estimate, converged, spread)``.
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    r = 1.0 - 0.5 ** np.asarray(list(ks), dtype=float)
    V = np.real(phi(r[:, None] * np.exp(1j * angles)[None, :]))
    R1 = 2.0 * V[1:] - V[:-1]
    R2 = (4.0 * R1[1:] - R1[:-1]) / 3.0
    est = R2[-1]
    spread = np.max(np.abs(R2[-1] - R2[-2]), axis=-1)
    conv = spread <= rel_tol * (1.0 + np.max(np.abs(est), axis=-1))
    return est, conv, spread


def _away_from(angles: np.ndarray, bad: Sequence[float], gap: float) -> np.ndarray:
    keep = np.ones(len(angles), dtype=bool)
    for s in bad:
        d = np.abs(wrap_angle(angles - s))
        keep &= np.minimum(d, TWO_PI - d) > gap
    return keep


def eval_psi(phi: GeodesicMap, h: QuadCertificate, z, lam) -> np.ndarray:
    """``psi_z(lam)``, holomorphically extended through ``lam = 0``."""
    lam = np.asarray(lam, dtype=complex)
    z = np.asarray(z, dtype=complex)
    p0 = phi(0.0)
    h0 = eval_h(h, 0.0)
    d = z - p0
    small = np.abs(lam) < 1e-12
    safe = np.where(small, 0.5, lam)
    hl = eval_h(h, safe)
    out = (np.sum((p0 - phi(safe)) * hl, axis=-1) / safe
           + np.sum((hl - h0) * d, axis=-1) / safe
           + safe * np.conj(np.sum(h0 * d)))
    limit = -np.sum(phi.derivative(0.0) * h0) + np.sum(h.derivative(0.0) * d)
    out = np.where(small, limit, out)
    return out[()] if out.ndim == 0 else out


def check_radial_conditions(phi: GeodesicMap, h: QuadCertificate, domain: TubeDomain,
                            angle_grid=None, z_samples=None, ks: Sequence[int] = range(4, 21),
                            exclusion: float = 0.02, interior=None,
                            tol_i: float = RADIAL_I_TOL, tol_ii: float = RADIAL_II_TOL) -> VerificationReport:
    """Condition (i) on ``phi*`` at grid angles and condition (ii) on an interior grid.

    (i):  ``Re[conj(lam) h(lam) . (z - phi*(lam))] < 0`` for sampled ``z``,
          skipping a ``exclusion`` neighbourhood of atoms and density jumps.
    (ii): ``Re[h(lam) . (phi(0) - phi(lam))/lam] < 0`` on the interior grid.
    """
    if h.is_zero:
        raise ValueError("certificate must not vanish identically")
    hn = h.normalized()
    angles = default_angle_grid() if angle_grid is None else np.atleast_1d(np.asarray(angle_grid, dtype=float))
    excluded = list(phi.singular_angles())
    angles = angles[_away_from(angles, excluded, exclusion)]
    Z = structured_z_samples(domain) if z_samples is None else np.atleast_2d(np.asarray(z_samples, dtype=complex))
    X = np.real(Z)

    chunks = np.array_split(np.arange(len(angles)), max(1, len(angles) // 32))
    parts = ordered_map(lambda idx: radial_limit_real(phi, angles[idx], ks), chunks)
    est = np.concatenate([p[0] for p in parts]) if parts else np.zeros((0, phi.n))
    conv = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, dtype=bool)
    spread = np.concatenate([p[2] for p in parts]) if parts else np.zeros(0)

    sym = np.real(np.conj(np.exp(1j * angles))[:, None] * eval_h(hn, np.exp(1j * angles)))
    vals = np.einsum("tl,ztl->zt", sym, X[:, None, :] - est[None, :, :])
    vals[:, ~conv] = -np.inf
    conds = []
    top = float(np.max(vals)) if vals.size else -np.inf
    bad = np.argwhere(vals > tol_i)
    meta = {"excluded_angles": excluded, "exclusion": exclusion, "angle_count": int(len(angles))}
    if bad.size:
        zi, ti = bad[0]
        conds.append(ConditionResult("radial_i", FAIL, top, tol_i,
                                     {"z": _c2l(Z[zi]), "angle": float(angles[ti]),
                                      "value": float(vals[zi, ti])}, "sampled"))
    elif not np.all(conv):
        k = int(np.argmin(conv))
        conds.append(ConditionResult("radial_i", INCONCLUSIVE, top, tol_i,
                                     {"angle": float(angles[k]), "spread": float(spread[k])},
                                     "radial limit estimate did not stabilize"))
    else:
        conds.append(ConditionResult("radial_i", PASS, top, tol_i, None, "sampled"))

    lam = default_interior_grid() if interior is None else np.atleast_1d(np.asarray(interior, dtype=complex))
    p0 = phi(0.0)
    v2 = np.real(np.sum(eval_h(hn, lam) * (p0 - phi(lam)), axis=-1) / lam)
    top2 = float(np.max(v2))
    bad2 = np.nonzero(v2 > tol_ii)[0]
    if bad2.size:
        k = int(bad2[0])
        conds.append(ConditionResult("radial_ii", FAIL, top2, tol_ii,
                                     {"lam": _c2l(lam[k])[0], "value": float(v2[k])}, "sampled"))
    else:
        conds.append(ConditionResult("radial_ii", PASS, top2, tol_ii, None, "sampled"))
    return VerificationReport(conds, meta)


# --- left inverse -----------------------------------------------------------------

@dataclass(frozen=True)
class LeftInverseSettings:
    radii: tuple = (0.5, 0.7, 0.9, 0.97, 0.995)
    # tried only when no standard radius encloses a root
    outer_radii: tuple = (0.999, 0.9999)
    start_nodes: int = 256
    max_nodes: int = 2**17
    outer_max_nodes: int = 2**20
    tol: float = 1e-12
    count_tol: float = 1e-6
    eps_values: tuple = (1e-3, 1e-6)


@dataclass
class LeftInverseResult:
    status: str
    value: Optional[complex]
    counts: list
    radius: Optional[float] = None
    nodes: Optional[int] = None
    eps: float = 0.0
    re_psi_max: Optional[float] = None
    message: str = ""

    def to_dict(self) -> dict:
        return {"status": self.status, "value": None if self.value is None else _c2l(self.value)[0],
                "counts": [None if c is None else _c2l(c)[0] for c in self.counts],
                "radius": self.radius, "nodes": self.nodes, "eps": self.eps,
                "re_psi_max": self.re_psi_max, "message": self.message}


class LeftInverseError(RuntimeError):
    def __init__(self, result: LeftInverseResult):
        self.result = result
        super().__init__(result.message)


class LeftInverse:
    """Argument-principle root extraction for ``Phi(z, lam) = (z - phi(lam)) . h(lam) - eps lam``.

    Contour data (``h``, ``h'``, ``phi . h`` and its derivative on ``r T``)
    does not depend on ``z`` and is cached per radius and node count.
    """

    def __init__(self, phi: GeodesicMap, h: QuadCertificate, settings: LeftInverseSettings = LeftInverseSettings()):
        if h.is_zero:
            raise ValueError("certificate must not vanish identically")
        self.phi, self.h, self.settings = phi, h.normalized(), settings
        self._cache: dict = {}

    def _contour(self, r: float, m: int):
        key = (r, m)
        if key not in self._cache:
            lam = r * np.exp(1j * TWO_PI * np.arange(m) / m)
            H = eval_h(self.h, lam)
            Hp = self.h.derivative(lam)
            f = self.phi(lam)
            fp = self.phi.derivative(lam)
            G = np.sum(f * H, axis=-1)
            Gp = np.sum(fp * H + f * Hp, axis=-1)
            self._cache[key] = (lam, H, Hp, G, Gp)
        return self._cache[key]

    def estimate(self, z, r: float, m: int, eps: float = 0.0):
        """Trapezoid values of the count and first-moment integrals with ``m`` nodes."""
        z = np.asarray(z, dtype=complex)
        lam, H, Hp, G, Gp = self._contour(r, m)
        Phi = H @ z - G - eps * lam
        dPhi = Hp @ z - Gp - eps
        if np.any(Phi == 0) or not np.all(np.isfinite(Phi)):
            return None
        q = lam * dPhi / Phi
        return complex(np.mean(q)), complex(np.mean(lam * q))

    def integrals(self, z, r: float, eps: float = 0.0, max_nodes: Optional[int] = None):
        """``(N, f, nodes)`` on ``r T`` or ``None`` without convergence."""
        s = self.settings
        m, prev = s.start_nodes, None
        while m <= (max_nodes or s.max_nodes):
            est = self.estimate(z, r, m, eps)
            if est is None:
                return None
            N, f = est
            if prev is not None and abs(N - prev[0]) <= s.tol * 10 and abs(f - prev[1]) <= s.tol:
                return N, f, m
            prev = (N, f)
            m *= 2
        return None

    def _scan(self, z, eps: float):
        out = []
        for r in self.settings.radii:
            out.append(self.integrals(z, r, eps))
        return out

    def extract(self, z) -> LeftInverseResult:
        s = self.settings
        z = np.asarray(z, dtype=complex).reshape(self.phi.n)
        radii = list(s.radii)
        scan = self._scan(z, 0.0)

        def rounded_counts():
            out = []
            for x in scan:
                c = None if x is None else x[0]
                out.append(None if c is None or abs(c - round(c.real)) >= s.count_tol else int(round(c.real)))
            return out

        rounded = rounded_counts()
        if all(k == 0 for k in rounded):
            # the root may sit closer to the circle than the largest radius
            for r in s.outer_radii:
                scan.append(self.integrals(z, r, 0.0, s.outer_max_nodes))
                radii.append(r)
                rounded = rounded_counts()
                if rounded[-1] != 0:
                    break
        counts = [None if x is None else x[0] for x in scan]
        if any(k is not None and k >= 2 for k in rounded):
            return LeftInverseResult("structural", None, counts,
                                     message=f"root count {max(k for k in rounded if k is not None)} > 1")
        for i, k in enumerate(rounded):
            if k == 1:
                r = radii[i]
                N, f, m = scan[i]
                if abs(f) >= r:
                    return LeftInverseResult("structural", None, counts, r, m,
                                             message="extracted root lies outside the contour")
                lam, H, _, G, _ = self._contour(r, m)
                re_psi = float(np.max(np.real((H @ z - G) / lam)))
                return LeftInverseResult("ok", f, counts, r, m, 0.0, re_psi)
        # no clean unit count at eps = 0: perturbed family with linear extrapolation
        e1, e2 = s.eps_values
        for i, r in enumerate(s.radii):
            a1 = self.integrals(z, r, e1)
            a2 = self.integrals(z, r, e2)
            if a1 and a2 and abs(a1[0] - 1) < s.count_tol and abs(a2[0] - 1) < s.count_tol:
                f0 = (e1 * a2[1] - e2 * a1[1]) / (e1 - e2)
                return LeftInverseResult("ok", complex(f0), counts, r, max(a1[2], a2[2]), e2,
                                         message="extrapolated from perturbed contours")
        if all(k == 0 for k in rounded):
            return LeftInverseResult("inconclusive", None, counts,
                                     message="no contour encloses a root; it may lie closer to the circle")
        if all(k is not None for k in rounded):
            return LeftInverseResult("structural", None, counts,
                                     message="no contour radius encloses exactly one root")
        return LeftInverseResult("inconclusive", None, counts,
                                 message="contour quadrature did not converge at any radius")

    def value(self, z) -> complex:
        res = self.extract(z)
        if res.status != "ok":
            raise LeftInverseError(res)
        return res.value


def left_inverse_value(phi: GeodesicMap, h: QuadCertificate, z,
                       settings: LeftInverseSettings = LeftInverseSettings()) -> complex:
    """``f(z) = (1/2 pi i) int_{rT} lam Phi'/Phi dlam`` for the single enclosed root."""
    return LeftInverse(phi, h, settings).value(z)


def default_sigma_grid(n: int = 50, radius: float = 0.9) -> np.ndarray:
    """Sunflower pattern of ``n`` points in the disc of the given radius."""
    k = np.arange(n)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    return radius * np.sqrt((k + 0.5) / n) * np.exp(1j * golden * k)


@dataclass
class ResidualResult:
    status: str
    residual: float
    worst_sigma: Optional[complex]
    failure: Optional[LeftInverseResult] = None

    def condition(self, tol: float = RESIDUAL_TOL) -> ConditionResult:
        if self.status == "ok":
            st = PASS if self.residual < tol else FAIL
            wit = None if st == PASS else {"sigma": _c2l(self.worst_sigma)[0], "value": self.residual}
            return ConditionResult("left_inverse", st, self.residual, tol, wit)
        st = FAIL if self.status == "structural" else INCONCLUSIVE
        wit = {"sigma": _c2l(self.worst_sigma)[0], "counts": self.failure.to_dict()["counts"],
               "message": self.failure.message}
        return ConditionResult("left_inverse", st, None, tol, wit, self.failure.message)


def left_inverse_residual(phi: GeodesicMap, h: QuadCertificate, sigmas=None,
                          settings: LeftInverseSettings = LeftInverseSettings()) -> ResidualResult:
    """``max |f(phi(sigma)) - sigma|`` over a grid in ``|sigma| <= 0.9``."""
    sigmas = default_sigma_grid() if sigmas is None else np.atleast_1d(np.asarray(sigmas, dtype=complex))
    inv = LeftInverse(phi, h, settings)
    zs = phi(sigmas)
    results = ordered_map(inv.extract, list(zs))
    worst, worst_s = 0.0, None
    for s, res in zip(sigmas, results):
        if res.status != "ok":
            return ResidualResult(res.status, math.inf, complex(s), res)
        err = abs(res.value - s)
        if worst_s is None or err > worst:
            worst, worst_s = err, complex(s)
    return ResidualResult("ok", worst, worst_s)


def distance_sandwich(phi: GeodesicMap, h: QuadCertificate, s1, s2,
                      settings: LeftInverseSettings = LeftInverseSettings()) -> tuple[float, float]:
    """Lower bound from the left inverse, upper bound from ``phi`` itself."""
    s1, s2 = complex(s1), complex(s2)
    upper = poincare_distance(s1, s2)
    if s1 == s2:
        return 0.0, 0.0
    inv = LeftInverse(phi, h, settings)
    f1, f2 = inv.value(phi(s1)), inv.value(phi(s2))
    return poincare_distance(f1, f2), upper


# --- vertex limits ----------------------------------------------------------------

def vertex_limit_check(phi: StaircaseIIGeodesic, domain: StaircaseDomain, angles: Optional[dict] = None,
                       exponents: Sequence[int] = range(1, 7), tol: float = 1e-3,
                       exclusion: float = 0.05) -> VerificationReport:
    """``Re phi(r e^{it}) -> p_j`` for ``t`` inside ``A_j`` and ``chi_{A_j} mu = p_j chi_{A_j} dL``.

    ``angles`` maps a facet-pair index ``j`` to explicit sample angles; by
    default three points per arc of ``A_j`` are used, away from atoms, the
    exceptional set ``B`` and density jumps.
    """
    arcs = phi.arcs
    avoid = sorted(set(phi.singular_angles()) | set(arcs.B))
    radii = 1.0 - 10.0 ** (-np.asarray(list(exponents), dtype=float))
    limit_records, measure_records = [], []
    mu = phi.measure
    for j in range(1, domain.m):
        A = arcs.A[j - 1]
        if A.is_empty:
            continue
        if angles is not None:
            ts = [float(t) for t in angles.get(j, [])]
        else:
            ts = []
            for arc in A.arcs:
                for frac in (0.25, 0.5, 0.75):
                    ts.append(wrap_angle(arc.start + frac * arc.length))
            ts = [t for t, ok in zip(ts, _away_from(np.array(ts), avoid, exclusion)) if ok]
        p = domain.vertex(j)
        for t in ts:
            vals = np.real(phi(radii * np.exp(1j * t)))
            errs = np.max(np.abs(vals - p), axis=1)
            monotone = bool(np.all(np.diff(errs) <= 1e-15 * (1 + errs[:-1])))
            limit_records.append({"j": j, "angle": t, "errors": [float(e) for e in errs],
                                  "monotone": monotone, "ok": bool(monotone and errs[-1] < tol)})
        sub = mu.restrict(A, exclude=arcs.B)
        dens_ok = all(np.allclose(w, p, rtol=0, atol=1e-12) for c, w in sub.density_cells()
                      if A.contains(c.midpoint()))
        measure_records.append({"j": j, "ok": dens_ok and not sub.atoms,
                                "atoms": [[t, list(m)] for t, m in sub.atoms]})

    conds = []
    bad = next((r for r in limit_records if not r["ok"]), None)
    final = max((r["errors"][-1] for r in limit_records), default=None)
    if not limit_records:
        conds.append(ConditionResult("vertex_limits", INCONCLUSIVE, None, tol, None, "no sample angles"))
    elif bad is not None:
        conds.append(ConditionResult("vertex_limits", FAIL, final, tol, bad))
    else:
        conds.append(ConditionResult("vertex_limits", PASS, final, tol))
    mbad = next((r for r in measure_records if not r["ok"]), None)
    conds.append(ConditionResult("vertex_measure", FAIL if mbad else PASS, None, 1e-12, mbad))
    return VerificationReport(conds, {"vertex_samples": limit_records})


# --- all checks --------------------------------------------------------------------

def verify_map(phi: GeodesicMap, domain: TubeDomain, level: str = "all", h: Optional[QuadCertificate] = None,
               z_samples=None, sigmas=None) -> VerificationReport:
    """Run the requested checkers (``measure``, ``radial``, ``inverse`` or ``all``)."""
    if level not in ("measure", "radial", "inverse", "all"):
        raise ValueError(f"unknown verification level {level!r}")
    h = phi.certificate if h is None else h
    report = VerificationReport([], {"level": level})
    if h is None or h.is_zero:
        names = {"measure": ["measure"], "radial": ["radial_i", "radial_ii"],
                 "inverse": ["left_inverse"]}
        for key, ns in names.items():
            if level in (key, "all"):
                for nm in ns:
                    report.conditions.append(ConditionResult(nm, INCONCLUSIVE, notes="no certificate"))
        return report
    if level in ("measure", "all"):
        report.extend(check_measure_condition(phi.measure, h, domain, z_samples))
    if level in ("radial", "all"):
        report.extend(check_radial_conditions(phi, h, domain, z_samples=z_samples))
    if level in ("inverse", "all"):
        res = left_inverse_residual(phi, h, sigmas)
        report.conditions.append(res.condition())
    return report
