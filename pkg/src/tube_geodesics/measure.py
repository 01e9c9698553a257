"""Vector-valued real measures on the unit circle and their Herglotz transforms.

The measures handled here are finite sums of atoms and piecewise-constant
densities with respect to arc length.  Every geodesic boundary measure in the
staircase, strip and half-plane families has this form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .circle import (
    MERGE_TOL,
    TWO_PI,
    Arc,
    ArcSet,
    DiscError,
    breakpoints,
    mobius,
    mobius_derivative,
    wrap_angle,
)

NEG_TOL = 1e-12


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach its tolerance within the budget."""


def _vec(x, n=None) -> tuple:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if n is not None and arr.shape != (n,):
        raise ValueError(f"expected a vector of length {n}, got shape {arr.shape}")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class CircleMeasure:
    """``sum w_k chi_{arc_k} dL + sum m_j delta_{t_j}`` with vector weights."""

    n: int
    pieces: tuple = ()
    atoms: tuple = ()

    def __post_init__(self):
        n = int(self.n)
        pieces = []
        for arc, w in self.pieces:
            arc = arc if isinstance(arc, Arc) else Arc(*arc)
            if arc.is_empty:
                continue
            pieces.append((arc, _vec(w, n)))
        merged: dict[float, np.ndarray] = {}
        order: list[float] = []
        for t, m in self.atoms:
            t = wrap_angle(float(t))
            m = np.array(_vec(m, n))
            for s in order:
                d = abs(s - t)
                if min(d, TWO_PI - d) <= MERGE_TOL:
                    merged[s] = merged[s] + m
                    break
            else:
                order.append(t)
                merged[t] = m
        atoms = tuple((t, tuple(float(x) for x in merged[t])) for t in sorted(order))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "pieces", tuple(pieces))
        object.__setattr__(self, "atoms", atoms)

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "CircleMeasure":
        return cls(n)

    @classmethod
    def lebesgue(cls, weight) -> "CircleMeasure":
        w = _vec(weight)
        return cls(len(w), pieces=((Arc(0.0, TWO_PI), w),))

    @classmethod
    def indicator(cls, arcs: ArcSet | Iterable[Arc], weight) -> "CircleMeasure":
        w = _vec(weight)
        arcs = arcs.arcs if isinstance(arcs, ArcSet) else list(arcs)
        return cls(len(w), pieces=tuple((a, w) for a in arcs))

    @classmethod
    def dirac(cls, angle: float, mass) -> "CircleMeasure":
        m = _vec(mass)
        return cls(len(m), atoms=((angle, m),))

    # algebra ----------------------------------------------------------------
    def __add__(self, other: "CircleMeasure") -> "CircleMeasure":
        if self.n != other.n:
            raise ValueError("cannot add measures of different dimension")
        return CircleMeasure(self.n, self.pieces + other.pieces, self.atoms + other.atoms)

    def apply(self, V) -> "CircleMeasure":
        """The measure ``V . mu`` for a real ``m x n`` matrix ``V``."""
        V = np.atleast_2d(np.asarray(V, dtype=float))
        if V.shape[1] != self.n:
            raise ValueError("matrix width does not match the measure dimension")
        pieces = tuple((a, V @ np.array(w)) for a, w in self.pieces)
        atoms = tuple((t, V @ np.array(m)) for t, m in self.atoms)
        return CircleMeasure(V.shape[0], pieces, atoms)

    def scaled(self, s: float) -> "CircleMeasure":
        return self.apply(s * np.eye(self.n))

    def coordinate(self, l: int) -> "CircleMeasure":
        return self.apply(np.eye(self.n)[l : l + 1])

    # inspection -------------------------------------------------------------
    def support_sets(self) -> list[ArcSet]:
        return [ArcSet([a]) for a, _ in self.pieces]

    def density_cells(self) -> list[tuple[Arc, np.ndarray]]:
        """Disjoint cells of the common refinement with their summed density."""
        cuts = breakpoints(self.support_sets())
        edges = np.append(cuts, TWO_PI)
        cells = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi - lo <= MERGE_TOL:
                continue
            mid = 0.5 * (lo + hi)
            w = self.density_at(mid)
            cells.append((Arc(lo, hi - lo), w))
        return cells

    def density_at(self, t) -> np.ndarray:
        w = np.zeros(self.n)
        for a, wt in self.pieces:
            if a.contains(t):
                w += np.array(wt)
        return w

    def total_mass(self) -> np.ndarray:
        out = np.zeros(self.n)
        for a, w in self.pieces:
            out += a.length * np.array(w)
        for _, m in self.atoms:
            out += np.array(m)
        return out

    def total_variation(self) -> np.ndarray:
        out = np.zeros(self.n)
        for a, w in self.density_cells():
            out += a.length * np.abs(w)
        for _, m in self.atoms:
            out += np.abs(np.array(m))
        return out

    def restrict(self, arcs: ArcSet, exclude: Iterable[float] = ()) -> "CircleMeasure":
        """``chi_E mu`` for ``E`` the arc set minus the finite set ``exclude``."""
        pieces = []
        for a, w in self.pieces:
            for b in ArcSet([a]).intersection(arcs).arcs:
                pieces.append((b, w))
        drop = [wrap_angle(float(x)) for x in exclude]

        def excluded(t):
            return any(min(abs(t - x), TWO_PI - abs(t - x)) <= 1e-9 for x in drop)

        atoms = [(t, m) for t, m in self.atoms if arcs.contains(t) and not excluded(t)]
        return CircleMeasure(self.n, tuple(pieces), tuple(atoms))

    def atom_angles(self) -> list[float]:
        return [t for t, _ in self.atoms]

    def singular_angles(self) -> list[float]:
        """Atoms and density jump points: where radial limits may fail to exist."""
        pts = set(self.atom_angles())
        cells = self.density_cells()
        for (a, w), (b, v) in zip(cells, cells[1:] + cells[:1]):
            if len(cells) > 1 and not np.allclose(w, v, atol=1e-14):
                pts.add(wrap_angle(b.start))
        return sorted(pts)

    # transport ----------------------------------------------------------------
    def rotated(self, theta: float) -> "CircleMeasure":
        """Boundary measure of ``phi(e^{i theta} lam)``."""
        pieces = tuple((Arc(a.start - theta, a.length), w) for a, w in self.pieces)
        atoms = tuple((t - theta, m) for t, m in self.atoms)
        return CircleMeasure(self.n, pieces, atoms)

    def transported(self, c: complex) -> "CircleMeasure":
        """Boundary measure of ``phi o T`` with ``T(lam) = (lam + c)/(1 + conj(c) lam)``.

        Density values move with the points; atom masses pick up the factor
        ``1/|T'|`` at the new atom location.
        """
        c = complex(c)
        pre = lambda t: np.angle(mobius(c, np.exp(1j * t)))
        pieces = []
        for a, w in self.pieces:
            if a.is_full:
                pieces.append((a, w))
                continue
            s0, s1 = pre(a.start), pre(a.end)
            length = wrap_angle(s1 - s0)
            if length == 0.0 and a.length > np.pi:
                length = TWO_PI
            pieces.append((Arc(s0, length), w))
        atoms = []
        for t, m in self.atoms:
            new = mobius(c, np.exp(1j * t))
            jac = abs(mobius_derivative(-c, new))
            atoms.append((float(np.angle(new)), np.array(m) / jac))
        return CircleMeasure(self.n, tuple(pieces), tuple(atoms))

    def pulled_back_by_power(self, k: int) -> "CircleMeasure":
        """Boundary measure of ``phi(lam^k)``."""
        pieces, atoms = [], []
        for a, w in self.pieces:
            for j in range(k):
                if a.is_full:
                    pieces.append((a, w))
                    break
                pieces.append((Arc(a.start / k + TWO_PI * j / k, a.length / k), w))
        for t, m in self.atoms:
            for j in range(k):
                atoms.append((t / k + TWO_PI * j / k, np.array(m) / k))
        return CircleMeasure(self.n, tuple(pieces), tuple(atoms))


@dataclass(frozen=True)
class SmoothDensity:
    """Absolutely continuous measure ``u(t) dL`` with a callable density.

    ``func`` maps an array of angles ``(M,)`` to densities ``(M, n)``.
    Only the quadrature route applies to these.
    """

    n: int
    func: Callable = field(compare=False)

    def __call__(self, t) -> np.ndarray:
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float).reshape(-1, self.n)

    def apply(self, V) -> "SmoothDensity":
        V = np.atleast_2d(np.asarray(V, dtype=float))
        if V.shape[1] != self.n:
            raise ValueError("matrix width does not match the measure dimension")
        return SmoothDensity(V.shape[0], lambda t, f=self: f(t) @ V.T)

    def density_at(self, t) -> np.ndarray:
        return self(np.array([t]))[0]


@dataclass(frozen=True)
class CompositeMeasure:
    """Sum of a piecewise-constant/atomic part and a smooth density."""

    discrete: CircleMeasure
    smooth: SmoothDensity

    def __post_init__(self):
        if self.discrete.n != self.smooth.n:
            raise ValueError("parts of a composite measure must share the dimension")

    @property
    def n(self) -> int:
        return self.discrete.n

    @property
    def atoms(self) -> tuple:
        return self.discrete.atoms

    def apply(self, V) -> "CompositeMeasure":
        return CompositeMeasure(self.discrete.apply(V), self.smooth.apply(V))

    def density_at(self, t) -> np.ndarray:
        return self.discrete.density_at(t) + self.smooth.density_at(t)

    def singular_angles(self) -> list[float]:
        return self.discrete.singular_angles()


def _check_disc(lam: np.ndarray):
    if np.any(np.abs(lam) >= 1.0):
        raise DiscError("the Herglotz transform is evaluated in the open unit disc")


def _arc_term(arc: Arc, lam: np.ndarray) -> np.ndarray:
    """``int_arc (zeta + lam)/(zeta - lam) dt`` in closed form."""
    if arc.is_full:
        return np.full(lam.shape, TWO_PI, dtype=complex)
    L = arc.length
    z1 = np.exp(1j * arc.start)
    z2 = np.exp(1j * arc.end)
    ratio = (z2 - lam) / (z1 - lam)
    # The argument increment of zeta - lam along the arc is (L + omega)/2 with
    # omega in (0, 2pi) the Poisson mass of the arc, so it lies in (L/2, L/2 + pi).
    lo = 0.5 * L - 0.5 * np.pi
    darg = lo + np.mod(np.angle(ratio) - lo, TWO_PI)
    return (2.0 * darg - L) - 2j * np.log(np.abs(ratio))


def _arc_term_derivative(arc: Arc, lam: np.ndarray) -> np.ndarray:
    if arc.is_full:
        return np.zeros(lam.shape, dtype=complex)
    z1 = np.exp(1j * arc.start)
    z2 = np.exp(1j * arc.end)
    return -2j * (1.0 / (z1 - lam) - 1.0 / (z2 - lam))


def _atom_kernel(angle: float, lam: np.ndarray) -> np.ndarray:
    z = np.exp(1j * angle)
    return (z + lam) / (z - lam)


def herglotz_transform(mu: CircleMeasure, lam, imaginary_offset=None) -> np.ndarray:
    """``(1/2pi) int (zeta + lam)/(zeta - lam) d mu(zeta) + i offset``.

    Returns an array of shape ``lam.shape + (n,)``.
    """
    lam = np.asarray(lam, dtype=complex)
    _check_disc(lam)
    out = np.zeros(lam.shape + (mu.n,), dtype=complex)
    for arc, w in mu.pieces:
        out += _arc_term(arc, lam)[..., None] * (np.array(w) / TWO_PI)
    for t, m in mu.atoms:
        out += _atom_kernel(t, lam)[..., None] * (np.array(m) / TWO_PI)
    if imaginary_offset is not None:
        out += 1j * np.asarray(imaginary_offset, dtype=float)
    return out


def herglotz_derivative(mu: CircleMeasure, lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    out = np.zeros(lam.shape + (mu.n,), dtype=complex)
    for arc, w in mu.pieces:
        out += _arc_term_derivative(arc, lam)[..., None] * (np.array(w) / TWO_PI)
    for t, m in mu.atoms:
        z = np.exp(1j * t)
        out += (2.0 * z / (z - lam) ** 2)[..., None] * (np.array(m) / TWO_PI)
    return out


# --- quadrature oracle --------------------------------------------------------

_TS_TMAX = 3.2


def _tanh_sinh_rule(level: int) -> tuple[np.ndarray, np.ndarray]:
    h = 2.0 ** (-level)
    k = np.arange(-int(_TS_TMAX / h), int(_TS_TMAX / h) + 1)
    s = k * h
    u = 0.5 * np.pi * np.sinh(s)
    x = np.tanh(u)
    w = h * 0.5 * np.pi * np.cosh(s) / np.cosh(u) ** 2
    return x, w


_TS_RULES = {lvl: _tanh_sinh_rule(lvl) for lvl in range(0, 9)}


def _tanh_sinh(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, tol: float,
               depth: int = 0, max_depth: int = 14):
    """Adaptive tanh-sinh (double exponential trapezoid) rule on ``[a, b]``."""
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    prev = None
    for level in range(2, 7):
        x, w = _TS_RULES[level]
        vals = f(mid + half * x)
        est = half * np.tensordot(w, vals, axes=(0, 0))
        if prev is not None and np.max(np.abs(est - prev)) <= tol * max(1.0, np.max(np.abs(est))):
            return est
        prev = est
    if depth >= max_depth:
        raise QuadratureError(f"tanh-sinh did not converge on [{a:.6g}, {b:.6g}]")
    return (_tanh_sinh(f, a, mid, 0.5 * tol, depth + 1, max_depth)
            + _tanh_sinh(f, mid, b, 0.5 * tol, depth + 1, max_depth))


def _periodic_trapezoid(f: Callable[[np.ndarray], np.ndarray], tol: float,
                        start: int = 64, max_nodes: int = 2**16):
    m = start
    prev = None
    while m <= max_nodes:
        t = TWO_PI * np.arange(m) / m
        est = TWO_PI * np.mean(f(t), axis=0)
        if prev is not None and np.max(np.abs(est - prev)) <= tol * max(1.0, np.max(np.abs(est))):
            return est
        prev = est
        m *= 2
    raise QuadratureError("periodic trapezoid rule did not converge")


def herglotz_quadrature_oracle(mu, lam, imaginary_offset=None, tol: float = 1e-13) -> np.ndarray:
    """Independent evaluation of the Herglotz transform by quadrature.

    Density pieces are integrated with an adaptive tanh-sinh trapezoid rule
    (full-circle pieces and :class:`SmoothDensity` with the periodic trapezoid
    rule); atoms use the closed-form kernel.
    """
    lam = np.asarray(lam, dtype=complex)
    _check_disc(lam)
    flat = lam.reshape(-1)
    out = np.zeros(flat.shape + (mu.n,), dtype=complex)

    def kernel(t):
        z = np.exp(1j * t)[:, None]
        return (z + flat[None, :]) / (z - flat[None, :])

    if isinstance(mu, CompositeMeasure):
        out += herglotz_quadrature_oracle(mu.discrete, flat, tol=tol)
        out += herglotz_quadrature_oracle(mu.smooth, flat, tol=tol)
    elif isinstance(mu, SmoothDensity):
        def integrand(t):
            return kernel(t)[:, :, None] * mu(t)[:, None, :]
        out += _periodic_trapezoid(integrand, tol) / TWO_PI
    else:
        for arc, w in mu.pieces:
            if arc.is_full:
                val = _periodic_trapezoid(kernel, tol)
            else:
                # split so each panel is short compared to the circle
                npan = max(1, int(math.ceil(arc.length / (np.pi / 4))))
                edges = np.linspace(arc.start, arc.end, npan + 1)
                val = sum(_tanh_sinh(kernel, lo, hi, tol / npan) for lo, hi in zip(edges[:-1], edges[1:]))
            out += val[:, None] * (np.array(w) / TWO_PI)
        for t, m in mu.atoms:
            out += _atom_kernel(t, flat)[:, None] * (np.array(m) / TWO_PI)
    out = out.reshape(lam.shape + (mu.n,))
    if imaginary_offset is not None:
        out += 1j * np.asarray(imaginary_offset, dtype=float)
    return out


def pair_with_test_function(mu: CircleMeasure, u: Callable, resolution: int = 64) -> np.ndarray:
    """``int u d mu`` for a bounded function ``u`` of the angle.

    Arc pieces are integrated with ``resolution``-point Gauss-Legendre panels.
    """
    if isinstance(mu, CompositeMeasure):
        return (pair_with_test_function(mu.discrete, u, resolution)
                + pair_with_test_function(mu.smooth, u, resolution))
    if isinstance(mu, SmoothDensity):
        m = 64 * resolution
        t = TWO_PI * np.arange(m) / m
        vals = np.asarray(u(t), dtype=float)[:, None] * mu(t)
        return TWO_PI * np.mean(vals, axis=0)
    x, w = np.polynomial.legendre.leggauss(resolution)
    out = np.zeros(mu.n)
    for arc, wt in mu.pieces:
        npan = max(1, int(math.ceil(arc.length / (np.pi / 8))))
        edges = np.linspace(arc.start, arc.end, npan + 1)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            total += 0.5 * (hi - lo) * float(np.dot(w, np.asarray(u(t), dtype=float)))
        out += total * np.array(wt)
    for t, m in mu.atoms:
        out += float(u(np.array([t]))[0]) * np.array(m)
    return out


@dataclass(frozen=True)
class NegativityResult:
    ok: bool
    witness: Optional[dict] = None

    def __bool__(self):
        return self.ok


def is_negative(mu: CircleMeasure, coordinate: int, tol: float = NEG_TOL) -> NegativityResult:
    """Whether coordinate ``coordinate`` of ``mu`` is a negative measure."""
    for arc, w in mu.density_cells():
        if w[coordinate] > tol:
            return NegativityResult(False, {"kind": "density", "start": arc.start,
                                            "length": arc.length, "value": float(w[coordinate])})
    for t, m in mu.atoms:
        if m[coordinate] > tol:
            return NegativityResult(False, {"kind": "atom", "angle": t, "value": float(m[coordinate])})
    return NegativityResult(True)
