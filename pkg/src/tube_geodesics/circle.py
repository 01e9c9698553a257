"""Unit circle and unit disc geometry.

Angles live in ``[0, 2*pi)``. Arcs are half-open ``[start, start + length)``
and are combined through :class:`ArcSet`, which keeps a normalized list of
disjoint intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi
MERGE_TOL = 1e-12


class DiscError(ValueError):
    """A point was required to lie in the open (or closed) unit disc."""


def wrap_angle(t):
    """Canonical representative of ``t`` in ``[0, 2*pi)``."""
    r = np.mod(t, TWO_PI)
    if np.ndim(r) == 0:
        r = float(r)
        return 0.0 if r >= TWO_PI else r
    return np.where(r >= TWO_PI, 0.0, r)


def angle_of(z) -> float:
    return wrap_angle(np.angle(z))


def mobius(c, lam):
    """Disc automorphism ``(lam - c) / (1 - conj(c) lam)``.

    Vectorized in ``lam``. Raises :class:`DiscError` for ``|c| >= 1``.
    """
    c = complex(c)
    if abs(c) >= 1.0:
        raise DiscError(f"mobius centre must satisfy |c| < 1, got |c| = {abs(c)!r}")
    lam = np.asarray(lam, dtype=complex)
    out = (lam - c) / (1.0 - np.conj(c) * lam)
    return out[()] if out.ndim == 0 else out


def mobius_derivative(c, lam):
    c = complex(c)
    lam = np.asarray(lam, dtype=complex)
    out = (1.0 - abs(c) ** 2) / (1.0 - np.conj(c) * lam) ** 2
    return out[()] if out.ndim == 0 else out


def poincare_distance(sigma, tau) -> float:
    """Poincare distance ``atanh(|s - t| / |1 - conj(s) t|)`` on the unit disc."""
    sigma, tau = complex(sigma), complex(tau)
    if abs(sigma) >= 1.0 or abs(tau) >= 1.0:
        raise DiscError("poincare_distance needs points of the open unit disc")
    if sigma == tau:
        return 0.0
    q = abs(sigma - tau) / abs(1.0 - sigma.conjugate() * tau)
    return float(np.arctanh(min(q, 1.0)))


def strip_map_tau(lam):
    """Biholomorphism of the disc onto the strip ``0 < Re < 1``.

    ``tau(lam) = -(i/pi) log(i (1 + lam) / (1 - lam))`` with the logarithm's
    argument taken in ``[0, 2*pi)``.  On the closed disc the argument of
    ``i (1 + lam) / (1 - lam)`` lies in ``[0, pi]``; the real and imaginary
    parts of that quotient are computed from the exact identities

        Re = -2 Im(lam) / |1 - lam|^2,   Im = (1 - |lam|^2) / |1 - lam|^2

    so that circle points on the lower arc get argument exactly 0 rather than
    a rounding-induced value near ``2*pi``.
    """
    lam = np.asarray(lam, dtype=complex)
    mod2 = lam.real**2 + lam.imag**2
    if np.any(mod2 > 1.0 + 1e-12):
        raise DiscError("strip_map_tau is defined on the closed unit disc only")
    one_minus = 1.0 - lam
    den = one_minus.real**2 + one_minus.imag**2
    hits = (den == 0.0) | ((1.0 + lam).real ** 2 + (1.0 + lam).imag ** 2 == 0.0)
    if np.any(hits):
        raise DiscError("strip_map_tau has branch points at lam = +1 and lam = -1")
    re_w = -2.0 * lam.imag / den
    im_w = np.maximum(1.0 - mod2, 0.0) / den
    arg = np.arctan2(im_w, re_w)
    arg = np.where(arg < 0.0, 0.0, arg)
    out = arg / np.pi - 1j * np.log(np.hypot(re_w, im_w)) / np.pi
    return out[()] if out.ndim == 0 else out


def strip_map_tau_derivative(lam):
    lam = np.asarray(lam, dtype=complex)
    out = -2j / (np.pi * (1.0 - lam**2))
    return out[()] if out.ndim == 0 else out


def strip_map_tau_inverse(w):
    """Inverse of :func:`strip_map_tau` on the open strip."""
    w = np.asarray(w, dtype=complex)
    e = np.exp(1j * np.pi * w)
    out = (-1j * e - 1.0) / (-1j * e + 1.0)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class Arc:
    """Half-open arc ``[start, start + length)`` of the unit circle."""

    start: float
    length: float

    def __post_init__(self):
        length = float(self.length)
        if not (-MERGE_TOL <= length <= TWO_PI + MERGE_TOL):
            raise ValueError(f"arc length must lie in [0, 2pi], got {length!r}")
        length = min(max(length, 0.0), TWO_PI)
        start = 0.0 if length == TWO_PI else wrap_angle(float(self.start))
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "length", length)

    @property
    def end(self) -> float:
        return self.start + self.length

    @property
    def is_empty(self) -> bool:
        return self.length == 0.0

    @property
    def is_full(self) -> bool:
        return self.length == TWO_PI

    def contains(self, t) -> bool:
        if self.is_full:
            return True
        return bool(wrap_angle(float(t) - self.start) < self.length)

    def midpoint(self) -> float:
        return wrap_angle(self.start + 0.5 * self.length)


def _normalize(intervals: Iterable[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    ivs = sorted((lo, hi) for lo, hi in intervals if hi - lo > MERGE_TOL)
    merged: list[list[float]] = []
    for lo, hi in ivs:
        if merged and lo <= merged[-1][1] + MERGE_TOL:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    out = []
    for lo, hi in merged:
        lo = 0.0 if lo < MERGE_TOL else lo
        hi = TWO_PI if hi > TWO_PI - MERGE_TOL else hi
        out.append((lo, hi))
    return tuple(out)


def _split(arc: Arc) -> list[tuple[float, float]]:
    if arc.is_empty:
        return []
    if arc.end <= TWO_PI:
        return [(arc.start, arc.end)]
    return [(arc.start, TWO_PI), (0.0, arc.end - TWO_PI)]


class ArcSet:
    """Finite union of arcs, stored as disjoint sorted intervals of ``[0, 2pi]``."""

    __slots__ = ("_ivs",)

    def __init__(self, arcs: Iterable[Arc] = ()):
        ivs: list[tuple[float, float]] = []
        for a in arcs:
            ivs.extend(_split(a))
        self._ivs = _normalize(ivs)

    @classmethod
    def _from_intervals(cls, ivs) -> "ArcSet":
        s = cls.__new__(cls)
        s._ivs = _normalize(ivs)
        return s

    @classmethod
    def full(cls) -> "ArcSet":
        return cls._from_intervals([(0.0, TWO_PI)])

    @classmethod
    def empty(cls) -> "ArcSet":
        return cls._from_intervals([])

    @property
    def intervals(self) -> tuple[tuple[float, float], ...]:
        return self._ivs

    @property
    def arcs(self) -> list[Arc]:
        ivs = list(self._ivs)
        if not ivs:
            return []
        if len(ivs) == 1 and ivs[0] == (0.0, TWO_PI):
            return [Arc(0.0, TWO_PI)]
        if len(ivs) > 1 and ivs[0][0] == 0.0 and ivs[-1][1] == TWO_PI:
            first = ivs.pop(0)
            last = ivs.pop()
            ivs.append((last[0], TWO_PI + first[1]))
        return sorted((Arc(lo, hi - lo) for lo, hi in ivs), key=lambda a: a.start)

    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self._ivs))

    @property
    def is_empty(self) -> bool:
        return not self._ivs

    @property
    def is_full(self) -> bool:
        return self.measure() >= TWO_PI - MERGE_TOL

    def contains(self, t) -> bool:
        t = wrap_angle(float(t))
        return any(lo <= t < hi for lo, hi in self._ivs)

    def endpoints(self) -> list[float]:
        if self.is_full:
            return []
        return sorted({wrap_angle(x) for a in self.arcs for x in (a.start, a.end)})

    def complement(self) -> "ArcSet":
        out, cur = [], 0.0
        for lo, hi in self._ivs:
            out.append((cur, lo))
            cur = hi
        out.append((cur, TWO_PI))
        return ArcSet._from_intervals(out)

    def union(self, other: "ArcSet") -> "ArcSet":
        return ArcSet._from_intervals(self._ivs + other._ivs)

    def intersection(self, other: "ArcSet") -> "ArcSet":
        out = []
        for a0, a1 in self._ivs:
            for b0, b1 in other._ivs:
                lo, hi = max(a0, b0), min(a1, b1)
                if hi > lo:
                    out.append((lo, hi))
        return ArcSet._from_intervals(out)

    def difference(self, other: "ArcSet") -> "ArcSet":
        return self.intersection(other.complement())

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArcSet) or len(self._ivs) != len(other._ivs):
            return False
        return all(
            abs(a0 - b0) <= 1e-9 and abs(a1 - b1) <= 1e-9
            for (a0, a1), (b0, b1) in zip(self._ivs, other._ivs)
        )

    def __hash__(self):
        return hash(tuple(round(x, 9) for iv in self._ivs for x in iv))

    def __repr__(self) -> str:
        inner = ", ".join(f"Arc({a.start:.6g}, {a.length:.6g})" for a in self.arcs)
        return f"ArcSet([{inner}])"


def breakpoints(sets: Sequence[ArcSet], extra: Iterable[float] = ()) -> np.ndarray:
    """Sorted distinct angles at which any of ``sets`` starts or stops."""
    pts = {0.0}
    for s in sets:
        for lo, hi in s.intervals:
            pts.add(lo)
            pts.add(wrap_angle(hi))
    pts.update(wrap_angle(float(x)) for x in extra)
    arr = np.array(sorted(pts))
    keep = np.concatenate([[True], np.diff(arr) > MERGE_TOL])
    return arr[keep]
