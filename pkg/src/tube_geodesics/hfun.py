"""Quadratic certificates ``h(lam) = conj(a) lam^2 + b lam + a``.

On the circle ``conj(lam) h(lam)`` is real; it equals the trigonometric
symbol ``2 Re(conj(a) e^{it}) + b = 2|a| cos(t - arg a) + b``.  Everything
downstream only depends on the sign pattern of that symbol, so certificates
are compared after dividing by ``max(|a_l|, |b_l|)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .circle import Arc, ArcSet, wrap_angle

ROOT_TOL = 1e-10
NONNEG_TOL = 1e-12


@dataclass(frozen=True)
class QuadCertificate:
    """Per-coordinate coefficients ``a_l`` (complex) and ``b_l`` (real)."""

    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(complex(x) for x in np.atleast_1d(self.a))
        b = tuple(float(x) for x in np.atleast_1d(self.b))
        if len(a) != len(b):
            raise ValueError("a and b must have the same length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def scale(self) -> float:
        return max([abs(x) for x in self.a] + [abs(x) for x in self.b] + [0.0])

    @property
    def is_zero(self) -> bool:
        return self.scale == 0.0

    def normalized(self) -> "QuadCertificate":
        s = self.scale
        if s == 0.0:
            return self
        return QuadCertificate([x / s for x in self.a], [x / s for x in self.b])

    def scaled(self, s: float) -> "QuadCertificate":
        return QuadCertificate([s * x for x in self.a], [s * x for x in self.b])

    def component(self, l: int) -> tuple[complex, float]:
        return self.a[l], self.b[l]

    def __call__(self, lam) -> np.ndarray:
        return eval_h(self, lam)

    def derivative(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)[..., None]
        a = np.array(self.a)
        b = np.array(self.b)
        return 2.0 * np.conj(a) * lam + b

    def symbol(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        a = np.array(self.a)
        b = np.array(self.b)
        return 2.0 * np.real(np.conj(a) * np.exp(1j * t)) + b


def eval_h(h: QuadCertificate, lam) -> np.ndarray:
    """Values ``conj(a_l) lam^2 + b_l lam + a_l``, shape ``lam.shape + (n,)``."""
    lam = np.asarray(lam, dtype=complex)[..., None]
    a = np.array(h.a)
    b = np.array(h.b)
    return np.conj(a) * lam**2 + b * lam + a


def circle_symbol(a, b, t):
    """``2 Re(conj(a) e^{it}) + b``; vectorized in ``t``."""
    out = 2.0 * np.real(np.conj(complex(a)) * np.exp(1j * np.asarray(t, dtype=float))) + float(b)
    return out[()] if np.ndim(out) == 0 else out


def _normalize_pair(a, b) -> tuple[complex, float]:
    a, b = complex(a), float(b)
    s = max(abs(a), abs(b))
    if s == 0.0:
        return a, b
    return a / s, b / s


def positivity_arc(a, b) -> ArcSet:
    """The set ``{t : 2|a| cos(t - arg a) + b > 0}``."""
    a, b = _normalize_pair(a, b)
    if a == 0 and b == 0:
        raise ValueError("positivity_arc needs (a, b) != (0, 0)")
    r = 2.0 * abs(a)
    if a == 0:
        return ArcSet.full() if b > 0 else ArcSet.empty()
    if b <= -r:
        return ArcSet.empty()
    if b >= r:
        return ArcSet.full()
    half = float(np.arccos(-b / r))
    theta = float(np.angle(a))
    return ArcSet([Arc(theta - half, 2.0 * half)])


def is_nonneg_on_circle(a, b) -> bool:
    a, b = _normalize_pair(a, b)
    return b >= 2.0 * abs(a) - NONNEG_TOL


def symbol_zeros(a, b) -> list[float]:
    """All angles where the symbol vanishes (empty when it vanishes identically)."""
    a, b = _normalize_pair(a, b)
    r = 2.0 * abs(a)
    if a == 0:
        return []
    if abs(abs(b) - r) <= ROOT_TOL:
        theta = float(np.angle(a)) + (np.pi if b > 0 else 0.0)
        return [wrap_angle(theta)]
    if abs(b) > r:
        return []
    half = float(np.arccos(-b / r))
    theta = float(np.angle(a))
    return sorted({wrap_angle(theta - half), wrap_angle(theta + half)})


def circle_root(a, b) -> Optional[float]:
    """The unique zero of a nonnegative symbol, or ``None`` if it is positive."""
    a, b = _normalize_pair(a, b)
    if a == 0 and b == 0:
        raise ValueError("circle_root needs (a, b) != (0, 0)")
    if not is_nonneg_on_circle(a, b):
        raise ValueError("symbol changes sign on the circle")
    if a != 0 and abs(b - 2.0 * abs(a)) <= ROOT_TOL:
        return wrap_angle(float(np.angle(a)) + np.pi)
    return None


def combine(v: Sequence[float], h: QuadCertificate) -> tuple[complex, float]:
    """Coefficients of ``v_1 h_2 - v_2 h_1``.

    Its symbol is ``-det[conj(lam) h(lam), v]`` with ``det[w, v] = w_1 v_2 - w_2 v_1``,
    so its positivity arc is ``{det[conj(lam) h(lam), v] < 0}``.
    """
    if h.n != 2:
        raise ValueError("combine is defined for two-dimensional certificates")
    v1, v2 = float(v[0]), float(v[1])
    a = v1 * h.a[1] - v2 * h.a[0]
    b = v1 * h.b[1] - v2 * h.b[0]
    return a, b


def transform_by_mobius(a, b, c) -> tuple[complex, float]:
    """Certificate of ``phi o T`` where ``T(lam) = (lam + c)/(1 + conj(c) lam)``.

    The new symbol is the old one composed with ``T`` times a positive factor,
    so positivity sets are transported by ``T^{-1}``.
    """
    a, b, c = complex(a), float(b), -complex(c)
    a_new = np.conj(a) * c**2 - b * c + a
    b_new = b * (1.0 + abs(c) ** 2) - 4.0 * np.real(np.conj(a) * c)
    return complex(a_new), float(b_new)


def transform_by_rotation(a, b, theta) -> tuple[complex, float]:
    """Certificate of ``phi(e^{i theta} lam)``."""
    return complex(a) * np.exp(-1j * theta), float(b)
