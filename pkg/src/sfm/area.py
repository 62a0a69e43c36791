"""Sub-Finsler area of t-graphs and a perturbation harness for minimality.

For a t-graph ``t = u(x, y)`` the K-area over a planar region D is

    A_K(u, D) = integral over D of || grad u + (-y, x) ||_{K,*} dx dy,

the dual norm being the support function of K.  The integrand of the
cones and herringbones built in :mod:`sfm.surfaces` is smooth on each
angular piece between break rays and only Lipschitz across them, so the
quadrature is a polar tensor Gauss-Legendre rule whose angular cells end
exactly at those rays.  The error estimate is ``|Q_2n - Q_n|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .convex_geometry import TAU, ConvexBody, dual_norm, rotate90, unit, wrap_angle
from .stationarity import DomainError

DEFAULT_ORDER = 16
MAX_CELL_ANGLE = math.pi / 8
RADIAL_PANELS = 2
ROUNDOFF_FLOOR = 1e-12


def area_integrand(K: ConvexBody, grad_u, x, y):
    """``|| grad u + (-y, x) ||_{K,*}``, vectorised over leading axes."""
    grad_u = np.asarray(grad_u, dtype=float)
    z = np.stack(np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float)), axis=-1)
    out = dual_norm(K, grad_u + rotate90(z))
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# domains and regions


@dataclass(frozen=True)
class Disc:
    r0: float

    def __post_init__(self):
        if not self.r0 >= 0:
            raise DomainError("disc radius must be non-negative")

    @property
    def measure(self) -> float:
        return math.pi * self.r0**2

    @property
    def scale(self) -> float:
        return self.r0

    def corner_angles(self):
        return ()

    def radius(self, theta):
        return np.full(np.shape(theta), float(self.r0))


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle; it must contain the origin in its interior."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < 0 < self.x1 and self.y0 < 0 < self.y1):
            raise DomainError("rectangle must contain the origin in its interior")

    @property
    def measure(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def scale(self) -> float:
        return max(abs(self.x0), self.x1, abs(self.y0), self.y1)

    def corner_angles(self):
        return tuple(wrap_angle(math.atan2(y, x)) for x in (self.x0, self.x1) for y in (self.y0, self.y1))

    def radius(self, theta):
        c, s = np.cos(theta), np.sin(theta)
        with np.errstate(divide="ignore"):
            rx = np.where(c > 0, self.x1 / c, np.where(c < 0, self.x0 / c, np.inf))
            ry = np.where(s > 0, self.y1 / s, np.where(s < 0, self.y0 / s, np.inf))
        return np.minimum(rx, ry)


@dataclass(frozen=True)
class PolarBox:
    """``r_in <= r <= r_out`` and ``th0 <= theta <= th1`` (``th1 - th0 < 2 pi``)."""

    r_in: float
    r_out: float
    th0: float
    th1: float

    def __post_init__(self):
        if not (0 <= self.r_in < self.r_out and 0 < self.th1 - self.th0 < TAU):
            raise DomainError("invalid polar box")

    @property
    def measure(self) -> float:
        return 0.5 * (self.th1 - self.th0) * (self.r_out**2 - self.r_in**2)

    @property
    def scale(self) -> float:
        return self.r_out

    def corner_angles(self):
        return ()

    def radius(self, theta):
        return np.full(np.shape(theta), float(self.r_out))

    def inner(self, theta):
        return np.full(np.shape(theta), float(self.r_in))


@dataclass(frozen=True, eq=False)
class GraphRegion:
    graph: object
    domain: Disc | Rectangle
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if int(self.order) < 2:
            raise DomainError("quadrature order must be at least 2")


@dataclass(frozen=True)
class AreaResult:
    value: float
    error: float
    nodes: int

    def __float__(self):
        return self.value


def _cell_edges(angles):
    a = sorted({round(wrap_angle(t), 14) for t in angles})
    if not a:
        a = [0.0]
    return [(a[i], a[i + 1] if i + 1 < len(a) else a[0] + TAU) for i in range(len(a))]


def polar_rule(domain, break_angles=(), order: int = DEFAULT_ORDER,
               max_cell_angle: float = MAX_CELL_ANGLE, radial_panels: int = RADIAL_PANELS):
    """Nodes ``(x, y)`` and weights of the polar tensor rule on ``domain``.

    Angular cells end at every break angle (and rectangle corner); cells wider
    than ``max_cell_angle`` are split into equal panels.
    """
    s, w = np.polynomial.legendre.leggauss(int(order))
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    th_nodes, th_weights = [], []
    window = getattr(domain, "th0", None)
    if window is None:
        cells = _cell_edges(tuple(break_angles) + tuple(domain.corner_angles()))
    else:
        lo, hi = domain.th0, domain.th1
        inner = sorted(lo + wrap_angle(t - lo) for t in break_angles if 0 < wrap_angle(t - lo) < hi - lo)
        cuts = [lo] + inner + [hi]
        cells = list(zip(cuts[:-1], cuts[1:]))
    for a, b in cells:
        m = max(1, int(math.ceil((b - a) / max_cell_angle - 1e-12)))
        edges = np.linspace(a, b, m + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            th_nodes.append(lo + (hi - lo) * s)
            th_weights.append((hi - lo) * w)
    theta = np.concatenate(th_nodes)
    wt = np.concatenate(th_weights)
    redges = np.linspace(0.0, 1.0, int(radial_panels) + 1)
    frac = np.concatenate([lo + (hi - lo) * s for lo, hi in zip(redges[:-1], redges[1:])])
    wf = np.concatenate([(hi - lo) * w for lo, hi in zip(redges[:-1], redges[1:])])
    R = domain.radius(theta)
    R0 = domain.inner(theta) if hasattr(domain, "inner") else np.zeros_like(R)
    span = (R - R0)[:, None]
    r = R0[:, None] + frac[None, :] * span
    # r dr dtheta with r = R0 + frac (R - R0)
    weights = wt[:, None] * wf[None, :] * r * span
    x = r * np.cos(theta)[:, None]
    y = r * np.sin(theta)[:, None]
    return x.ravel(), y.ravel(), weights.ravel()


def _breaks_of(graph):
    return tuple(getattr(graph, "break_angles", ()))


def _integrate(fn, domain, breaks, order, **kw):
    if domain.measure == 0:
        return AreaResult(0.0, 0.0, 0)
    vals = []
    nodes = 0
    for n in (order, 2 * order):
        x, y, wts = polar_rule(domain, breaks, n, **kw)
        vals.append(float(np.sum(fn(x, y) * wts)))
        nodes += x.size
    return AreaResult(vals[1], abs(vals[1] - vals[0]), nodes)


def graph_area(K: ConvexBody, region: GraphRegion, **kw) -> AreaResult:
    """K-area of ``region.graph`` over ``region.domain`` with its error estimate."""
    g = region.graph
    return _integrate(lambda x, y: area_integrand(K, g.gradient(x, y), x, y),
                      region.domain, _breaks_of(g), int(region.order), **kw)


def disc_cone_area_closed_form(k: int, r0: float) -> float:
    """Exact disc-norm area of the cone ``C(k)`` over ``D(r0)``."""
    if int(k) != k or k < 3:
        raise DomainError("k must be an integer >= 3")
    if r0 < 0:
        raise DomainError("r0 must be non-negative")
    a = math.pi / k
    return (4.0 * math.pi * r0**3 / 3.0) * (1.0 - math.cos(a)) / (a * math.sin(a))


def disc_cone_area_limit(r0: float) -> float:
    return 2.0 * math.pi * r0**3 / 3.0


# ---------------------------------------------------------------------------
# perturbations


@dataclass(frozen=True)
class TensorBump:
    """``(1 - s^2)^3 (1 - t^2)^3`` in coordinates centred at ``center``, half-width ``scale``."""

    center: tuple
    scale: float
    amplitude: float = 1.0

    def _st(self, x, y):
        return (np.asarray(x) - self.center[0]) / self.scale, (np.asarray(y) - self.center[1]) / self.scale

    def value(self, x, y):
        s, t = self._st(x, y)
        bs = np.where(np.abs(s) < 1, (1 - s * s) ** 3, 0.0)
        bt = np.where(np.abs(t) < 1, (1 - t * t) ** 3, 0.0)
        return self.amplitude * bs * bt

    def gradient(self, x, y):
        s, t = self._st(x, y)
        inside_s, inside_t = np.abs(s) < 1, np.abs(t) < 1
        bs = np.where(inside_s, (1 - s * s) ** 3, 0.0)
        bt = np.where(inside_t, (1 - t * t) ** 3, 0.0)
        ds = np.where(inside_s, -6 * s * (1 - s * s) ** 2, 0.0)
        dt = np.where(inside_t, -6 * t * (1 - t * t) ** 2, 0.0)
        return (self.amplitude / self.scale) * np.stack([ds * bt, bs * dt], axis=-1)

    def support_radius(self) -> float:
        return math.hypot(*self.center) + self.scale * math.sqrt(2.0)

    def line_integral(self, v_angle: float, nodes: int = 16) -> float:
        """Integral of the bump along the line through 0 with direction angle ``v_angle``."""
        v = unit(v_angle)
        lo, hi = -math.inf, math.inf
        # clip the line to the square support; the integrand is a degree-12 polynomial there
        for vi, ci in zip(v, self.center):
            if abs(vi) < 1e-15:
                if abs(ci) >= self.scale:
                    return 0.0
                continue
            a, b = sorted(((ci - self.scale) / vi, (ci + self.scale) / vi))
            lo, hi = max(lo, a), min(hi, b)
        if hi <= lo:
            return 0.0
        s, w = np.polynomial.legendre.leggauss(nodes)
        lam = 0.5 * (lo + hi) + 0.5 * (hi - lo) * s
        p = lam[:, None] * v
        return 0.5 * (hi - lo) * float(np.sum(w * self.value(p[:, 0], p[:, 1])))


@dataclass(frozen=True)
class RadialBump:
    """``(1 - (|z - c| / scale)^2)^3`` supported on a disc."""

    center: tuple
    scale: float
    amplitude: float = 1.0

    def value(self, x, y):
        q = ((np.asarray(x) - self.center[0]) ** 2 + (np.asarray(y) - self.center[1]) ** 2) / self.scale**2
        return self.amplitude * np.where(q < 1, (1 - q) ** 3, 0.0)

    def gradient(self, x, y):
        dx = np.asarray(x) - self.center[0]
        dy = np.asarray(y) - self.center[1]
        q = (dx**2 + dy**2) / self.scale**2
        f = np.where(q < 1, -6 * (1 - q) ** 2 / self.scale**2, 0.0) * self.amplitude
        return np.stack([f * dx, f * dy], axis=-1)

    def support_radius(self) -> float:
        return math.hypot(*self.center) + self.scale


class PerturbedGraph:
    """``base + eps * bump`` with analytic gradient."""

    def __init__(self, base, bump, eps: float):
        self.base, self.bump, self.eps = base, bump, float(eps)

    @property
    def break_angles(self):
        return _breaks_of(self.base)

    def value(self, x, y):
        return self.base.value(x, y) + self.eps * self.bump.value(x, y)

    def gradient(self, x, y):
        return self.base.gradient(x, y) + self.eps * self.bump.gradient(x, y)


def default_bumps(r0: float = 1.0) -> list[TensorBump]:
    """8 centres on the circle of radius 0.4 r0 (angles j pi/4), scales 0.1, 0.2, 0.3 times r0.

    Amplitude is ``r0^2`` so that ``eps`` is relative to the height scale of
    quadratic cones over ``D(r0)``.
    """
    out = []
    for j in range(8):
        c = 0.4 * r0 * unit(j * math.pi / 4)
        for s in (0.1, 0.2, 0.3):
            out.append(TensorBump((float(c[0]), float(c[1])), s * r0, r0**2))
    return out


DEFAULT_EPS = (0.05, 0.1, 0.2)


@dataclass(frozen=True)
class BumpResult:
    bump: object
    eps: float
    delta: float
    error: float

    @property
    def decreases(self) -> bool:
        """True when the area drop exceeds the quadrature error bound."""
        return self.delta < -self.error


@dataclass(frozen=True)
class PerturbationReport:
    results: tuple = field(repr=False)

    @property
    def min_delta(self) -> float:
        return min(r.delta for r in self.results)

    @property
    def failures(self) -> list[BumpResult]:
        return [r for r in self.results if r.decreases]

    @property
    def passed(self) -> bool:
        return not self.failures


def _support_box(bump, domain):
    """Polar box around a bump support lying inside a disc domain; else the domain itself."""
    if bump is None or not isinstance(domain, Disc) or not hasattr(bump, "support_radius"):
        return domain
    c = np.asarray(bump.center, float)
    d = math.hypot(c[0], c[1])
    rho = bump.support_radius() - d
    if d + rho > domain.r0 or rho >= d:
        return domain
    phi = math.atan2(c[1], c[0])
    half = math.asin(rho / d)
    return PolarBox(d - rho, d + rho, phi - half, phi + half)


def area_difference(K: ConvexBody, base, perturbed, domain, order: int = DEFAULT_ORDER, **kw) -> AreaResult:
    """``A(perturbed) - A(base)`` computed as one quadrature of the integrand difference."""

    def diff(x, y):
        return area_integrand(K, perturbed.gradient(x, y), x, y) - area_integrand(K, base.gradient(x, y), x, y)

    box = _support_box(getattr(perturbed, "bump", None), domain)
    res = _integrate(diff, box, _breaks_of(base), order, **kw)
    floor = ROUNDOFF_FLOOR * max(domain.scale, 1e-300) ** 3
    return AreaResult(res.value, max(res.error, floor), res.nodes)


def perturbation_test(K: ConvexBody, base, bumps=None, region: Disc | Rectangle | None = None,
                      eps=DEFAULT_EPS, order: int = DEFAULT_ORDER, signs=(1.0, -1.0)) -> PerturbationReport:
    """Area change for every bump, amplitude and sign; one-sided evidence of minimality."""
    if region is None:
        region = Disc(1.0)
    if bumps is None:
        bumps = default_bumps(region.scale)
    results = []
    for b in bumps:
        for e in eps:
            for sgn in signs:
                ee = sgn * float(e)
                if ee == 0.0:
                    results.append(BumpResult(b, 0.0, 0.0, 0.0))
                    continue
                r = area_difference(K, base, PerturbedGraph(base, b, ee), region, order)
                results.append(BumpResult(b, ee, r.value, r.error))
    return PerturbationReport(tuple(results))


def singular_line_first_variation(K: ConvexBody, v_angle: float, alpha: float, beta: float, bump: TensorBump) -> float:
    """Predicted ``dA/deps`` at 0 for a constant-angle herringbone: ``-res * integral of bump on L_v``."""
    from .stationarity import stationarity_residual

    return -float(stationarity_residual(K, v_angle, alpha, beta)) * bump.line_integral(v_angle)


__all__ = [
    "AreaResult",
    "BumpResult",
    "DEFAULT_EPS",
    "Disc",
    "GraphRegion",
    "PerturbationReport",
    "PerturbedGraph",
    "PolarBox",
    "RadialBump",
    "Rectangle",
    "TensorBump",
    "area_difference",
    "area_integrand",
    "default_bumps",
    "disc_cone_area_closed_form",
    "disc_cone_area_limit",
    "graph_area",
    "perturbation_test",
    "polar_rule",
    "singular_line_first_variation",
]
