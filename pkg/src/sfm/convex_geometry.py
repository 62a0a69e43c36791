"""Planar convex bodies described by their support function.

A body ``K`` with ``0`` in its interior is stored through

    h(theta) = max { <p, n(theta)> : p in K },   n(theta) = (cos theta, sin theta).

For a C^2_+ body the inverse of the outer Gauss map is explicit,

    gamma(theta) = h(theta) n(theta) + h'(theta) n'(theta),

and the radius of curvature of the boundary at ``gamma(theta)`` is ``h + h''``.
Every map used by the surface constructions (``pi_K``, the dual norm, the
gauge) is expressed through ``gamma``.

Horizontal vectors ``fX + gY`` are plain arrays whose last axis holds
``(f, g)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

TAU = 2.0 * math.pi

BOUNDARY_TOL = 1e-8
MIN_SAMPLE_NODES = 512
_CHECK_NODES = 4096
_RAY_NODES = 1024


class InvalidBodyError(ValueError):
    """The support data does not describe an admissible C^2_+ body."""


class NotOnBoundaryError(ValueError):
    pass


class ZeroVectorError(ValueError):
    pass


def wrap_angle(theta):
    """Reduce angles to ``[0, 2*pi)``.

    This is the only reduction used in the package; ``np.mod`` alone can
    return exactly ``2*pi`` for tiny negative inputs.
    """
    r = np.mod(theta, TAU)
    r = np.where(r >= TAU, 0.0, r)
    if np.ndim(r) == 0:
        return float(r)
    return r


def wrap_signed(theta):
    """Reduce angles to ``[-pi, pi)``."""
    r = wrap_angle(np.asarray(theta) + math.pi) - math.pi
    if np.ndim(r) == 0:
        return float(r)
    return r


def unit(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def angle_of(u):
    u = np.asarray(u, dtype=float)
    return wrap_angle(np.arctan2(u[..., 1], u[..., 0]))


def cross(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def rotate90(u):
    """J(fX + gY) = -gX + fY, i.e. J(X) = Y and J(Y) = -X."""
    u = np.asarray(u, dtype=float)
    return np.stack([-u[..., 1], u[..., 0]], axis=-1)


# ---------------------------------------------------------------------------
# support functions of the built-in shapes (all centred at the origin)


class SupportFunction:
    """Support function of a body before any translation.

    Subclasses implement ``h``, ``dh`` and ``d2h``.  ``normal_angle`` and
    ``gauge`` may return closed forms; ``None`` means "use the generic
    numerical route".
    """

    centrally_symmetric = False

    def h(self, theta):
        raise NotImplementedError

    def dh(self, theta):
        raise NotImplementedError

    def d2h(self, theta):
        raise NotImplementedError

    def normal_angle(self, p):
        return None

    def gauge(self, u):
        return None

    def parametric_boundary(self, t):
        """Boundary points from a primal parametrisation; ``None`` if there is none."""
        return None

    def describe(self) -> str:
        return type(self).__name__.lower()


class Disc(SupportFunction):
    centrally_symmetric = True

    def __init__(self, radius: float = 1.0):
        if not radius > 0:
            raise InvalidBodyError("disc radius must be positive")
        self.radius = float(radius)

    def h(self, theta):
        return np.full(np.shape(theta), self.radius)

    def dh(self, theta):
        return np.zeros(np.shape(theta))

    def d2h(self, theta):
        return np.zeros(np.shape(theta))

    def normal_angle(self, p):
        return angle_of(p)

    def gauge(self, u):
        return np.hypot(u[..., 0], u[..., 1]) / self.radius

    def parametric_boundary(self, t):
        return self.radius * unit(t)

    def describe(self):
        return "disc" if self.radius == 1.0 else f"disc {self.radius!r}"


class Ellipse(SupportFunction):
    """Axis-aligned ellipse with semi-axes ``a`` (x) and ``b`` (y)."""

    centrally_symmetric = True

    def __init__(self, a: float, b: float):
        if not (a > 0 and b > 0):
            raise InvalidBodyError("ellipse semi-axes must be positive")
        self.a = float(a)
        self.b = float(b)

    def h(self, theta):
        c, s = np.cos(theta), np.sin(theta)
        return np.sqrt(self.a**2 * c**2 + self.b**2 * s**2)

    def dh(self, theta):
        c, s = np.cos(theta), np.sin(theta)
        return (self.b**2 - self.a**2) * s * c / self.h(theta)

    def d2h(self, theta):
        c, s = np.cos(theta), np.sin(theta)
        h = self.h(theta)
        k = self.b**2 - self.a**2
        return k * (c**2 - s**2) / h - (k * s * c) ** 2 / h**3

    def normal_angle(self, p):
        return angle_of(np.stack([p[..., 0] / self.a**2, p[..., 1] / self.b**2], axis=-1))

    def gauge(self, u):
        return np.hypot(u[..., 0] / self.a, u[..., 1] / self.b)

    def parametric_boundary(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=-1)

    def describe(self):
        return f"ellipse {self.a!r} {self.b!r}"


class PBall(SupportFunction):
    """Unit ball of the p-norm, ``1 < p < inf``; its support function is the q-norm.

    For ``p != 2`` the radius of curvature vanishes (p < 2) or blows up
    (p > 2) at the four normals along the coordinate axes.  Away from those
    isolated normals the body is C^2_+.
    """

    centrally_symmetric = True

    def __init__(self, p: float):
        if not (1.0 < p < math.inf):
            raise InvalidBodyError("p-ball exponent must satisfy 1 < p < inf")
        self.p = float(p)
        self.q = self.p / (self.p - 1.0)

    def _parts(self, theta):
        c, s = np.cos(theta), np.sin(theta)
        q = self.q
        ac, as_ = np.abs(c), np.abs(s)
        F = ac**q + as_**q
        dF = q * (-np.sign(c) * ac ** (q - 1) * s + np.sign(s) * as_ ** (q - 1) * c)
        return c, s, ac, as_, F, dF

    def h(self, theta):
        _, _, ac, as_, F, _ = self._parts(theta)
        return F ** (1.0 / self.q)

    def dh(self, theta):
        _, _, _, _, F, dF = self._parts(theta)
        return F ** (1.0 / self.q - 1.0) * dF / self.q

    def d2h(self, theta):
        c, s, ac, as_, F, dF = self._parts(theta)
        q = self.q
        with np.errstate(divide="ignore", invalid="ignore"):
            d2F = q * (
                (q - 1) * ac ** (q - 2) * s**2 + (q - 1) * as_ ** (q - 2) * c**2 - F
            )
        return (1.0 / q) * (1.0 / q - 1.0) * F ** (1.0 / q - 2.0) * dF**2 + F ** (
            1.0 / q - 1.0
        ) * d2F / q

    def normal_angle(self, p):
        e = self.p - 1.0
        x, y = p[..., 0], p[..., 1]
        return angle_of(np.stack([np.sign(x) * np.abs(x) ** e, np.sign(y) * np.abs(y) ** e], axis=-1))

    def gauge(self, u):
        return (np.abs(u[..., 0]) ** self.p + np.abs(u[..., 1]) ** self.p) ** (1.0 / self.p)

    def parametric_boundary(self, t):
        # Lame curve: sgn(c) |c|^(2/p) has p-norm one
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        e = 2.0 / self.p
        return np.stack([np.sign(c) * np.abs(c) ** e, np.sign(s) * np.abs(s) ** e], axis=-1)

    def describe(self):
        return f"pball {self.p!r}"


class SampledSupport(SupportFunction):
    """Support function given by periodic samples, interpolated by a periodic cubic spline."""

    def __init__(self, theta, h):
        theta = np.asarray(theta, dtype=float)
        h = np.asarray(h, dtype=float)
        if theta.ndim != 1 or theta.shape != h.shape:
            raise InvalidBodyError("theta and h must be 1-d arrays of equal length")
        if theta.size < MIN_SAMPLE_NODES:
            raise InvalidBodyError(
                f"sampled support needs at least {MIN_SAMPLE_NODES} nodes, got {theta.size}"
            )
        if np.any(np.diff(theta) <= 0) or theta[0] < 0 or theta[-1] >= TAU:
            raise InvalidBodyError("sample angles must be strictly increasing in [0, 2*pi)")
        self.theta = theta
        self.values = h
        knots = np.append(theta, theta[0] + TAU)
        vals = np.append(h, h[0])
        self._spline = CubicSpline(knots, vals, bc_type="periodic")
        self._t0 = theta[0]

    def _arg(self, theta):
        return self._t0 + wrap_angle(np.asarray(theta, dtype=float) - self._t0)

    def h(self, theta):
        return self._spline(self._arg(theta))

    def dh(self, theta):
        return self._spline(self._arg(theta), 1)

    def d2h(self, theta):
        return self._spline(self._arg(theta), 2)

    def describe(self):
        return f"samples ({self.theta.size} nodes)"


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """An admissible body ``support + center_offset``.

    The constructor checks, on a half-offset grid of 4096 normals, that the
    support function is positive (0 interior) and that ``h + h''`` is
    positive (strictly positive curvature).  Instances are immutable.
    """

    support: SupportFunction
    center_offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        c = tuple(float(v) for v in self.center_offset)
        if len(c) != 2 or not all(math.isfinite(v) for v in c):
            raise InvalidBodyError("center_offset must be a finite planar vector")
        object.__setattr__(self, "center_offset", c)
        grid = (np.arange(_CHECK_NODES) + 0.5) * (TAU / _CHECK_NODES)
        h = self.h(grid)
        rho = self.curvature_radius(grid)
        if not np.all(np.isfinite(h)) or np.min(h) <= 0:
            raise InvalidBodyError("the origin is not interior to the body (min h <= 0)")
        if not np.all(rho > 0):
            where = float(grid[np.argmin(np.where(np.isnan(rho), -np.inf, rho))])
            raise InvalidBodyError(
                f"h + h'' must be positive (C^2_+ body); violated near theta={where:.6f}"
            )

    # -- support function and derivatives ---------------------------------

    def h(self, theta):
        theta = np.asarray(theta, dtype=float)
        cx, cy = self.center_offset
        return self.support.h(theta) + cx * np.cos(theta) + cy * np.sin(theta)

    def dh(self, theta):
        theta = np.asarray(theta, dtype=float)
        cx, cy = self.center_offset
        return self.support.dh(theta) - cx * np.sin(theta) + cy * np.cos(theta)

    def d2h(self, theta):
        theta = np.asarray(theta, dtype=float)
        cx, cy = self.center_offset
        return self.support.d2h(theta) - cx * np.cos(theta) - cy * np.sin(theta)

    def curvature_radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        # translation terms cancel in h + h''
        return self.support.h(theta) + self.support.d2h(theta)

    # -- derived quantities ------------------------------------------------

    @property
    def is_translated(self) -> bool:
        return self.center_offset != (0.0, 0.0)

    @property
    def centrally_symmetric(self) -> bool:
        """Symmetric about the origin (not merely about some centre)."""
        return self.support.centrally_symmetric and not self.is_translated

    def translated(self, offset) -> "ConvexBody":
        cx, cy = self.center_offset
        return ConvexBody(self.support, (cx + float(offset[0]), cy + float(offset[1])))

    def describe(self) -> str:
        text = self.support.describe()
        if self.is_translated:
            text += "; translate {!r} {!r}".format(*self.center_offset)
        return text

    def gauss_point(self, theta):
        theta = np.asarray(theta, dtype=float)
        n = unit(theta)
        h = self.h(theta)[..., None]
        dh = self.dh(theta)[..., None]
        return h * n + dh * rotate90(n)

    def boundary(self, n: int = 1024):
        """``n`` boundary points at equally spaced normal angles."""
        return self.gauss_point(np.arange(n) * (TAU / n))

    def sample_boundary(self, n: int = 4096):
        """``n`` boundary points from the primal parametrisation when the shape has one.

        These do not go through the support function, which makes them a
        fair brute-force reference for the duality maps.
        """
        t = np.arange(n) * (TAU / n)
        pts = self.support.parametric_boundary(t)
        if pts is None:
            return self.boundary(n)
        return pts + np.asarray(self.center_offset)

    def _ray_theta(self, psi: float) -> float:
        """Normal angle of the boundary point on the ray of polar angle ``psi``.

        The polar angle of gamma(theta) is strictly increasing in theta
        because its derivative is h (h + h'') / |gamma|^2 > 0.
        """
        grid = np.arange(_RAY_NODES + 1) * (TAU / _RAY_NODES)
        d = wrap_signed(angle_of(self.gauss_point(grid)) - psi)
        hits = np.nonzero((d[:-1] <= 0) & (d[1:] > 0) & (d[1:] - d[:-1] < math.pi))[0]
        if hits.size == 0:
            raise RuntimeError("ray shooting failed to bracket the boundary")
        j = int(hits[0])
        if d[j] == 0:
            return wrap_angle(grid[j])

        def f(t):
            return wrap_signed(float(angle_of(self.gauss_point(t))) - psi)

        return wrap_angle(brentq(f, grid[j], grid[j + 1], xtol=1e-15, rtol=1e-15, maxiter=200))

    def gauge_norm(self, u):
        u = np.asarray(u, dtype=float)
        if not self.is_translated:
            g = self.support.gauge(u)
            if g is not None:
                return g if np.ndim(g) else float(g)
        flat = u.reshape(-1, 2)
        out = np.empty(flat.shape[0])
        for i, w in enumerate(flat):
            r = math.hypot(w[0], w[1])
            if r == 0.0:
                out[i] = 0.0
                continue
            p = self.gauss_point(self._ray_theta(math.atan2(w[1], w[0])))
            out[i] = r / math.hypot(p[0], p[1])
        out = out.reshape(u.shape[:-1])
        return out if out.ndim else float(out)

    def gauss_angle(self, p, tol: float = BOUNDARY_TOL) -> float:
        """Outer normal angle at the boundary point ``p`` (forward Gauss map)."""
        p = np.asarray(p, dtype=float)
        g = self.gauge_norm(p)
        if not abs(g - 1.0) <= tol:
            raise NotOnBoundaryError(f"point {p.tolist()} has gauge {g!r}, not on the boundary")
        base = p - np.asarray(self.center_offset)
        theta = self.support.normal_angle(base)
        if theta is None:
            theta = self._ray_theta(math.atan2(p[1], p[0]))
        return float(theta)

    def pi_K(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(np.hypot(u[..., 0], u[..., 1]) == 0):
            raise ZeroVectorError("pi_K is only defined for non-vanishing vectors")
        return self.gauss_point(np.arctan2(u[..., 1], u[..., 0]))

    def dual_norm(self, u):
        """<u, pi_K(u)>; zero for the zero vector."""
        u = np.asarray(u, dtype=float)
        zero = np.hypot(u[..., 0], u[..., 1]) == 0
        safe = np.where(zero[..., None], 1.0, u)
        val = np.sum(u * self.gauss_point(np.arctan2(safe[..., 1], safe[..., 0])), axis=-1)
        val = np.where(zero, 0.0, val)
        return val if val.ndim else float(val)

    def width(self, theta):
        return self.h(theta) + self.h(np.asarray(theta) + math.pi)

    @cached_property
    def diameter_direction(self) -> float:
        """Normal angle of maximal width.

        At such an angle the chord between the two contact points is parallel
        to the normal, so those points realise the diameter.
        """
        grid = np.arange(_CHECK_NODES) * (TAU / _CHECK_NODES)
        j = int(np.argmax(self.width(grid)))
        step = TAU / _CHECK_NODES

        def dw(t):
            return float(self.dh(t) + self.dh(t + math.pi))

        a, b = grid[j] - step, grid[j] + step
        fa, fb = dw(a), dw(b)
        if fa == 0 or fb == 0 or fa * fb > 0:
            return wrap_angle(grid[j])
        return wrap_angle(brentq(dw, a, b, xtol=1e-15, rtol=1e-15))

    @cached_property
    def diameter(self) -> float:
        return float(self.width(self.diameter_direction))


# -- functional interface -----------------------------------------------------


def gauss_point(K: ConvexBody, theta):
    return K.gauss_point(theta)


def gauss_angle(K: ConvexBody, p, tol: float = BOUNDARY_TOL) -> float:
    return K.gauss_angle(p, tol)


def pi_K(K: ConvexBody, u):
    return K.pi_K(u)


def dual_norm(K: ConvexBody, u):
    return K.dual_norm(u)


def gauge_norm(K: ConvexBody, u):
    return K.gauge_norm(u)


# -- constructors -------------------------------------------------------------


def disc(radius: float = 1.0) -> ConvexBody:
    return ConvexBody(Disc(radius))


def ellipse(a: float, b: float) -> ConvexBody:
    return ConvexBody(Ellipse(a, b))


def pball(p: float) -> ConvexBody:
    return ConvexBody(PBall(p))


def sampled(theta, h) -> ConvexBody:
    return ConvexBody(SampledSupport(theta, h))


def parse_body(text: str) -> ConvexBody:
    """Parse the line-oriented body description.

    Recognised lines, applied top-down: ``disc [r]``, ``ellipse a b``,
    ``pball p``, ``translate cx cy`` and ``samples`` followed by lines
    ``theta h``.  Semicolons act as line breaks; ``#`` starts a comment.
    """
    lines = []
    for raw in text.replace(";", "\n").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line.split())
    base = None
    offset = [0.0, 0.0]
    i = 0
    try:
        while i < len(lines):
            word, args = lines[i][0].lower(), [float(a) for a in lines[i][1:]]
            if word in {"disc", "ellipse", "pball", "samples"} and base is not None:
                raise InvalidBodyError("only one base shape may be given")
            if word == "disc":
                base = Disc(*args)
            elif word == "ellipse":
                if len(args) != 2:
                    raise InvalidBodyError("ellipse needs two semi-axes")
                base = Ellipse(*args)
            elif word == "pball":
                if len(args) != 1:
                    raise InvalidBodyError("pball needs one exponent")
                base = PBall(*args)
            elif word == "translate":
                if len(args) != 2:
                    raise InvalidBodyError("translate needs two components")
                offset[0] += args[0]
                offset[1] += args[1]
            elif word == "samples":
                rows = []
                while i + 1 < len(lines) and lines[i + 1][0].lower() not in {"translate"}:
                    i += 1
                    if len(lines[i]) != 2:
                        raise InvalidBodyError(f"bad sample line: {' '.join(lines[i])}")
                    rows.append([float(v) for v in lines[i]])
                arr = np.array(rows, dtype=float).reshape(-1, 2)
                base = SampledSupport(arr[:, 0], arr[:, 1])
            else:
                raise InvalidBodyError(f"unknown body directive {word!r}")
            i += 1
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidBodyError):
            raise
        raise InvalidBodyError(f"malformed body description: {exc}") from exc
    if base is None:
        raise InvalidBodyError("body description has no base shape")
    return ConvexBody(base, tuple(offset))


def load_body(spec: str | Path) -> ConvexBody:
    """Body from a file path, or from an inline description such as ``"pball 1.5"``."""
    path = Path(spec)
    if path.is_file():
        return parse_body(path.read_text(encoding="utf-8"))
    return parse_body(str(spec))
