"""Matching of the two ruling families along a singular line.

Write ``v = e^{i a0}`` for the direction of the singular line and take
rulings leaving the line with directions ``Z+ = v e^{i alpha}`` and
``Z- = v e^{i beta}``.  With ``eta(a) = pi_K(J(v e^{ia}))`` the stationarity
condition asks ``eta(alpha) - eta(beta)`` to be parallel to ``v``.  In the
frame where ``v`` is the x-axis this reads ``y(beta) = y(alpha)`` with

    y(a) = <gamma(a0 + a + pi/2), J(v)>,    dy/da = -(h + h'') sin a,

so ``y`` is strictly monotone on each of ``(0, pi)`` and ``(pi, 2 pi)`` and
the matching ``beta`` is found by bisection.  The slopes have the same sign
pattern on both intervals, hence ``d beta / d alpha < 0``.  For the unit disc
the root is ``beta = 2 pi - alpha`` (mirror-image rulings).

Angle profiles ``lambda -> alpha(lambda)`` are non-increasing maps into
``(0, pi)``; the composed ``beta(lambda)`` is then non-decreasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .convex_geometry import TAU, ConvexBody, angle_of, rotate90, unit, wrap_angle

BETA_XTOL = 1e-13


class DomainError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


class DegenerateSectorError(ValueError):
    pass


@dataclass(frozen=True)
class MatchingPair:
    alpha: float
    beta: float
    eta_plus: np.ndarray
    eta_minus: np.ndarray
    v_angle: float

    @property
    def residual(self) -> float:
        return float(np.dot(self.eta_plus - self.eta_minus, rotate90(unit(self.v_angle))))


def _eta(K: ConvexBody, v_angle, a):
    return K.gauss_point(np.asarray(v_angle) + np.asarray(a) + 0.5 * math.pi)


def _y(K: ConvexBody, v_angle, a):
    jv = rotate90(unit(v_angle))
    return np.sum(_eta(K, v_angle, a) * jv, axis=-1)


def _check_alpha(alpha):
    alpha = np.asarray(alpha, dtype=float)
    if not np.all((alpha > 0) & (alpha < math.pi)):
        raise DomainError("alpha must lie in the open interval (0, pi)")
    return alpha


def solve_beta(K: ConvexBody, v_angle, alpha, xtol: float = BETA_XTOL):
    """Vectorised root ``beta(alpha)`` in ``(pi, 2 pi)``."""
    alpha = _check_alpha(alpha)
    v_angle = np.broadcast_to(np.asarray(v_angle, dtype=float), alpha.shape)
    target = _y(K, v_angle, alpha)
    lo = np.full(alpha.shape, math.pi)
    hi = np.full(alpha.shape, TAU)
    f_lo = _y(K, v_angle, lo) - target
    f_hi = _y(K, v_angle, hi) - target
    if not (np.all(f_lo < 0) and np.all(f_hi > 0)):
        raise SolverError("y(beta) - y(alpha) does not change sign on (pi, 2 pi)")
    n_iter = int(math.ceil(math.log2(math.pi / xtol)))
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        f = _y(K, v_angle, mid) - target
        below = f < 0
        lo = np.where(below, mid, lo)
        f_lo = np.where(below, f, f_lo)
        hi = np.where(below, hi, mid)
        f_hi = np.where(below, f_hi, f)
    # one secant step inside the final bracket
    denom = f_hi - f_lo
    frac = np.where(denom > 0, -f_lo / np.where(denom > 0, denom, 1.0), 0.5)
    beta = lo + np.clip(frac, 0.0, 1.0) * (hi - lo)
    return beta if beta.ndim else float(beta)


def beta_of_alpha(K: ConvexBody, v_angle: float, alpha: float) -> MatchingPair:
    """Unique ``beta`` in ``(pi, 2 pi)`` matching ``alpha`` for the line of direction ``v_angle``."""
    alpha = float(_check_alpha(alpha))
    beta = float(solve_beta(K, v_angle, alpha))
    return MatchingPair(
        alpha=alpha,
        beta=beta,
        eta_plus=_eta(K, v_angle, alpha),
        eta_minus=_eta(K, v_angle, beta),
        v_angle=float(v_angle),
    )


def dbeta_dalpha(K: ConvexBody, v_angle, alpha):
    """Implicit derivative ``(dy/dalpha) / (dy/dbeta)``; always negative."""
    alpha = _check_alpha(alpha)
    beta = np.asarray(solve_beta(K, v_angle, alpha))
    base = np.asarray(v_angle) + 0.5 * math.pi
    dy_a = -K.curvature_radius(base + alpha) * np.sin(alpha)
    dy_b = -K.curvature_radius(base + beta) * np.sin(beta)
    out = dy_a / dy_b
    return out if np.ndim(out) else float(out)


def stationarity_residual(K: ConvexBody, v_angle, alpha, beta):
    """``<eta+ - eta-, J(v)>``, zero exactly for matched pairs."""
    jv = rotate90(unit(v_angle))
    d = _eta(K, v_angle, alpha) - _eta(K, v_angle, beta)
    r = np.sum(d * jv, axis=-1)
    return r if np.ndim(r) else float(r)


# ---------------------------------------------------------------------------
# sector splitting


def _normalise(u):
    u = np.asarray(u, dtype=float)
    n = math.hypot(u[0], u[1])
    if n == 0:
        raise DegenerateSectorError("sector edges must be non-zero vectors")
    return u / n


def sector_angle(u, w) -> float:
    """Counter-clockwise angle from ``u`` to ``w`` in ``[0, 2 pi)``."""
    return wrap_angle(float(angle_of(w)) - float(angle_of(u)))


def sector_split(K: ConvexBody, u, w, tol: float = 1e-12):
    """Direction ``v`` strictly inside the sector from ``u`` to ``w`` with
    ``pi_K(J u) - pi_K(J w)`` parallel to ``v``.

    The two boundary points whose support lines are parallel to the chord
    through ``pi_K(J u)`` and ``pi_K(J w)`` have normals ``+-n``; the
    candidates are ``-J(+-n)`` and the one inside the sector is kept.  If
    both qualify, the one farthest from the sector edges wins.
    """
    u = _normalise(u)
    w = _normalise(w)
    theta = sector_angle(u, w)
    if theta <= tol:
        raise DegenerateSectorError("sector angle must be positive")
    eta_u = K.pi_K(rotate90(u))
    eta_w = K.pi_K(rotate90(w))
    chord = eta_w - eta_u
    length = math.hypot(chord[0], chord[1])
    if length == 0:
        raise DegenerateSectorError("sector edges give coincident contact points")
    n = rotate90(chord / length)
    candidates = []
    for normal in (n, -n):
        v = -rotate90(normal)
        phi = sector_angle(u, v)
        if tol < phi < theta - tol:
            candidates.append((min(phi, theta - phi), v))
    if not candidates:
        raise SolverError("no splitting direction found inside the sector")
    candidates.sort(key=lambda c: c[0], reverse=True)
    return candidates[0][1]


def sector_residual(K: ConvexBody, u, w, v) -> float:
    """``<pi_K(J u) - pi_K(J w), J v>`` for a proposed split ``v``."""
    d = K.pi_K(rotate90(np.asarray(u, float))) - K.pi_K(rotate90(np.asarray(w, float)))
    return float(np.dot(d, rotate90(np.asarray(v, float))))


# ---------------------------------------------------------------------------
# angle profiles


class ConstantProfile:
    is_constant = True

    def __init__(self, alpha: float):
        alpha = float(alpha)
        if not 0 < alpha < math.pi:
            raise DomainError("alpha must lie in (0, pi)")
        self.alpha = alpha

    def __call__(self, lam):
        return np.full(np.shape(lam), self.alpha) if np.ndim(lam) else self.alpha

    def derivative(self, lam):
        return np.zeros(np.shape(lam)) if np.ndim(lam) else 0.0

    def bounds(self) -> tuple[float, float]:
        return self.alpha, self.alpha


class PiecewiseLinearProfile:
    """Samples ``(lambda_j, alpha_j)`` joined linearly, constant beyond the ends."""

    is_constant = False

    def __init__(self, lam, alpha):
        lam = np.asarray(lam, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        if lam.ndim != 1 or lam.shape != alpha.shape or lam.size < 2:
            raise DomainError("profile needs at least two (lambda, alpha) samples")
        if np.any(np.diff(lam) <= 0):
            raise DomainError("profile lambda values must be strictly increasing")
        if np.any(np.diff(alpha) > 0):
            raise DomainError("profile alpha values must be non-increasing in lambda")
        if not np.all((alpha > 0) & (alpha < math.pi)):
            raise DomainError("profile alpha values must lie in (0, pi)")
        self.lam = lam
        self.alpha = alpha
        self._slopes = np.diff(alpha) / np.diff(lam)

    def __call__(self, lam):
        out = np.interp(lam, self.lam, self.alpha)
        return out if np.ndim(out) else float(out)

    def derivative(self, lam):
        lam = np.asarray(lam, dtype=float)
        j = np.searchsorted(self.lam, lam, side="right") - 1
        inside = (j >= 0) & (j < self._slopes.size)
        out = np.where(inside, self._slopes[np.clip(j, 0, self._slopes.size - 1)], 0.0)
        return out if out.ndim else float(out)

    def bounds(self) -> tuple[float, float]:
        return float(self.alpha.min()), float(self.alpha.max())


def _bump_rule(n: int):
    """Gauss-Legendre nodes on [-1, 1] weighted by exp(-1/(1-s^2)), unit mass."""
    s, w = np.polynomial.legendre.leggauss(n)
    k = w * np.exp(-1.0 / (1.0 - s**2))
    return s, k / k.sum()


_GL_S, _GL_W = np.polynomial.legendre.leggauss(96)


def _bump(s):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(np.abs(s) < 1, np.exp(-1.0 / np.maximum(1.0 - s * s, 1e-300)), 0.0)


def _bump_moments(t):
    """``F(t) = int_{-1}^t k`` and ``G(t) = int_{-1}^t s k`` for the unit-mass bump ``k``."""
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    half = 0.5 * (t + 1.0)
    s = -1.0 + half[..., None] * (_GL_S + 1.0)
    k = _bump(s) * _GL_W * half[..., None]
    return np.sum(k, axis=-1) / _BUMP_MASS, np.sum(k * s, axis=-1) / _BUMP_MASS


_BUMP_MASS = 1.0
_BUMP_MASS = float(_bump_moments(1.0)[0])


class MollifiedProfile:
    """Convolution of a profile with the bump ``exp(-1/(1-s^2))`` of radius ``eps``.

    Piecewise-linear profiles are convolved exactly: writing the base as a
    constant plus ramps ``c_j (x - lambda_j)_+``, each ramp becomes
    ``c_j (d F(d/eps) - eps G(d/eps))`` with ``d = x - lambda_j``.  Other
    profiles fall back to a Gauss-Legendre rule in the kernel variable.
    """

    is_constant = False

    def __init__(self, base, eps: float, nodes: int = 256):
        if not eps > 0:
            raise DomainError("mollifier radius must be positive")
        self.base = base
        self.eps = float(eps)
        self._s, self._w = _bump_rule(nodes)
        self._ramps = None
        if isinstance(base, PiecewiseLinearProfile):
            slopes = np.concatenate([[0.0], base._slopes, [0.0]])
            self._ramps = (base.lam, np.diff(slopes), float(base.alpha[0]))

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self._ramps is not None:
            knots, jumps, a0 = self._ramps
            d = lam[..., None] - knots
            F, G = _bump_moments(d / self.eps)
            out = a0 + np.sum(jumps * (d * F - self.eps * G), axis=-1)
        else:
            vals = self.base(lam[..., None] - self.eps * self._s)
            out = np.sum(vals * self._w, axis=-1)
        return out if out.ndim else float(out)

    def derivative(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self._ramps is not None:
            knots, jumps, _ = self._ramps
            F, _ = _bump_moments((lam[..., None] - knots) / self.eps)
            out = np.sum(jumps * F, axis=-1)
        else:
            vals = self.base.derivative(lam[..., None] - self.eps * self._s)
            out = np.sum(vals * self._w, axis=-1)
        return out if out.ndim else float(out)

    def bounds(self) -> tuple[float, float]:
        return self.base.bounds()


def mollify_profile(profile, eps: float) -> MollifiedProfile:
    return MollifiedProfile(profile, eps)


def parse_profile(text: str) -> PiecewiseLinearProfile:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise DomainError(f"bad profile line: {raw!r}")
        rows.append([float(p) for p in parts])
    if not rows:
        raise DomainError("empty profile")
    arr = np.asarray(rows)
    return PiecewiseLinearProfile(arr[:, 0], arr[:, 1])


def load_profile(path: str | Path) -> PiecewiseLinearProfile:
    return parse_profile(Path(path).read_text(encoding="utf-8"))


__all__ = [
    "BETA_XTOL",
    "ConstantProfile",
    "DegenerateSectorError",
    "DomainError",
    "MatchingPair",
    "MollifiedProfile",
    "PiecewiseLinearProfile",
    "SolverError",
    "beta_of_alpha",
    "dbeta_dalpha",
    "load_profile",
    "mollify_profile",
    "parse_profile",
    "sector_angle",
    "sector_residual",
    "sector_split",
    "solve_beta",
    "stationarity_residual",
]
