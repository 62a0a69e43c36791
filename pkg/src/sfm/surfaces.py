"""Herringbone surfaces, their cones, and meshes of both.

A herringbone surface is the union of horizontal half-lines leaving the
lifted line ``R_v = {(lambda v, 0)}``: above ``L_v`` they leave
``lambda v`` with direction ``v e^{i alpha(lambda)}``, below with
``v e^{i beta(lambda)}``.  The horizontal lift of ``p + s w`` starting at
height ``t0`` is ``t0 + s (p_y w_x - p_x w_y)``, so every surface here is a
t-graph with

    u(z) = -lambda(z) <z, J v>,

``lambda(z)`` being the foot of the ruling through ``z``.

Graph objects share a small protocol: ``value(x, y)``, ``gradient(x, y)``
(planar gradient of ``u``) and ``break_angles``, the polar angles of rays
from the origin across which ``u`` may fail to be smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .convex_geometry import TAU, ConvexBody, angle_of, cross, disc, rotate90, unit, wrap_angle
from .mesh import Tag, TriMesh
from .stationarity import (
    ConstantProfile,
    DomainError,
    SolverError,
    sector_angle,
    sector_residual,
    sector_split,
    solve_beta,
    stationarity_residual,
)

DEFAULT_RESOLUTION = 129
RESIDUAL_TOL = 1e-10


class InvalidSpecError(ValueError):
    pass


def _as_profile(alpha):
    if callable(alpha):
        return alpha
    return ConstantProfile(alpha)


@dataclass(frozen=True, eq=False)
class AlphaProfile:
    """Singular-line data: body, direction angle of ``v`` and ``lambda -> alpha(lambda)``.

    ``alpha`` is a float (constant profile) or any profile object from
    :mod:`sfm.stationarity`.  The profile must be non-increasing; the
    composed ``beta(lambda)`` is derived through the matching solver.
    """

    body: ConvexBody
    v_angle: float
    alpha: object

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_profile(self.alpha))
        object.__setattr__(self, "v_angle", float(self.v_angle))
        lo, hi = self.alpha.bounds()
        if not (0 < lo <= hi < math.pi):
            raise DomainError("profile values must lie in (0, pi)")

    @property
    def is_constant(self) -> bool:
        return bool(getattr(self.alpha, "is_constant", False))

    @property
    def v(self) -> np.ndarray:
        return unit(self.v_angle)

    def alpha_at(self, lam):
        return self.alpha(lam)

    def beta_at(self, lam):
        return solve_beta(self.body, self.v_angle, self.alpha(lam))

    def beta_bounds(self) -> tuple[float, float]:
        lo, hi = self.alpha.bounds()
        b = solve_beta(self.body, self.v_angle, np.array([hi, lo]))
        return float(b[0]), float(b[1])


def psi(profile: AlphaProfile, lam, mu):
    """Parametrisation ``(lambda, mu) -> (x, y, t)`` of the herringbone surface."""
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    lam, mu = np.broadcast_arrays(lam, mu)
    a0 = profile.v_angle
    ang = np.asarray(profile.alpha_at(lam), dtype=float) * np.ones_like(lam)
    lower = mu < 0
    if np.any(lower):
        ang = np.where(lower, profile.beta_at(np.where(lower, lam, 0.0)), ang)
    r = np.abs(mu)
    z = lam[..., None] * unit(a0) + r[..., None] * unit(a0 + ang)
    t = -r * lam * np.sin(ang)
    return np.concatenate([z, t[..., None]], axis=-1)


def lift_halfline(p, w, t0: float = 0.0):
    """Horizontal lift ``s -> (p + s w, t0 + s (p_y w_x - p_x w_y))``."""
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    if not abs(math.hypot(w[0], w[1]) - 1.0) <= 1e-12:
        raise ValueError("ruling direction must be a unit vector")
    slope = p[1] * w[0] - p[0] * w[1]

    def curve(s):
        s = np.asarray(s, dtype=float)
        xy = p + s[..., None] * w
        return np.concatenate([xy, (t0 + s * slope)[..., None]], axis=-1)

    return curve


def contact_form(point, velocity):
    """omega = dt - y dx + x dy evaluated on a tangent vector."""
    point = np.asarray(point, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    x, y = point[..., 0], point[..., 1]
    return velocity[..., 2] - y * velocity[..., 0] + x * velocity[..., 1]


def u_alpha_disc(alpha, x, y):
    """Sub-Riemannian cone ``-xy + cot(alpha) y|y|``."""
    if not 0 < alpha < math.pi:
        raise DomainError("alpha must lie in (0, pi)")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = -x * y + y * np.abs(y) / math.tan(alpha)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class FanPiece:
    """Angular piece where ``u(z) = cross(w, z) cross(v, z) / cross(v, w)``.

    This is the cone ruled by the half-lines ``lambda v + rho w`` (``rho >= 0``);
    ``v`` spans the singular ray/line and ``w`` is the ruling direction.
    """

    start: float
    span: float
    v: np.ndarray
    w: np.ndarray
    start_kind: Tag
    end_kind: Tag

    @property
    def c(self) -> float:
        return float(cross(self.v, self.w))


class QuadraticFan:
    """Graph that is quadratic on each angular piece of a fan of rays from 0.

    Constant-angle herringbone surfaces (two half-plane pieces) and the
    cones ``C_K(theta_0, ..., theta_k)`` (two pieces per sector) are both of
    this form.
    """

    def __init__(self, body: ConvexBody, pieces, label: str = "fan"):
        self.body = body
        self.pieces = tuple(pieces)
        self.label = label
        spans = np.array([p.span for p in self.pieces])
        if not abs(spans.sum() - TAU) <= 1e-9 or np.any(spans <= 0) or np.any(spans >= math.pi + 1e-12):
            raise InvalidSpecError("fan pieces must have spans in (0, pi] summing to 2 pi")
        self._start = self.pieces[0].start
        self._edges = np.concatenate([[0.0], np.cumsum(spans)])
        self._v = np.array([p.v for p in self.pieces])
        self._w = np.array([p.w for p in self.pieces])
        self._c = np.array([p.c for p in self.pieces])

    @property
    def break_angles(self) -> tuple[float, ...]:
        return tuple(wrap_angle(self._start + e) for e in self._edges[:-1])

    @property
    def singular_angles(self) -> tuple[float, ...]:
        return self._edge_angles(Tag.SINGULAR_RAY)

    @property
    def seam_angles(self) -> tuple[float, ...]:
        return self._edge_angles(Tag.SEAM)

    def _edge_angles(self, kind):
        out = []
        for p in self.pieces:
            if p.start_kind == kind:
                out.append(wrap_angle(p.start))
        return tuple(sorted(set(round(a, 15) for a in out)))

    def locate(self, x, y):
        rel = wrap_angle(np.arctan2(y, x) - self._start)
        j = np.searchsorted(self._edges, rel, side="right") - 1
        return np.clip(j, 0, len(self.pieces) - 1)

    def value(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        j = self.locate(x, y)
        z = np.stack([x, y], axis=-1)
        v, w, c = self._v[j], self._w[j], self._c[j]
        out = cross(w, z) * cross(v, z) / c
        return out if out.ndim else float(out)

    def gradient(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        j = self.locate(x, y)
        z = np.stack([x, y], axis=-1)
        v, w, c = self._v[j], self._w[j], self._c[j]
        return (cross(v, z)[..., None] * rotate90(w) + cross(w, z)[..., None] * rotate90(v)) / c[..., None]

    def ruling_direction(self, x, y):
        return self._w[self.locate(np.asarray(x, float), np.asarray(y, float))]

    def eta(self, x, y):
        """pi_K of the horizontal normal ``grad u + J z`` (constant on each piece)."""
        return self.body.pi_K(rotate90(self.ruling_direction(x, y)))

    def residuals(self) -> list[float]:
        """Matching residual ``<eta+ - eta-, J v>`` across every singular ray."""
        out = []
        n = len(self.pieces)
        for i, p in enumerate(self.pieces):
            if p.end_kind == Tag.SINGULAR_RAY:
                q = self.pieces[(i + 1) % n]
                eta_minus = self.body.pi_K(rotate90(p.w))
                eta_plus = self.body.pi_K(rotate90(q.w))
                out.append(float(np.dot(eta_plus - eta_minus, rotate90(q.v))))
        return out


def herringbone(body: ConvexBody, v_angle: float, alpha: float, beta: float | None = None) -> QuadraticFan:
    """Constant-angle surface; ``beta`` defaults to the matched value."""
    if not 0 < alpha < math.pi:
        raise DomainError("alpha must lie in (0, pi)")
    if beta is None:
        beta = float(solve_beta(body, v_angle, alpha))
    if not math.pi < beta < TAU:
        raise DomainError("beta must lie in (pi, 2 pi)")
    v = unit(v_angle)
    s = Tag.SINGULAR_RAY
    pieces = [
        FanPiece(wrap_angle(v_angle), math.pi, v, unit(v_angle + alpha), s, s),
        FanPiece(wrap_angle(v_angle + math.pi), math.pi, v, unit(v_angle + beta), s, s),
    ]
    fan = QuadraticFan(body, pieces, label=f"herringbone(alpha={alpha!r})")
    fan.v_angle, fan.alpha, fan.beta = float(v_angle), float(alpha), float(beta)
    return fan


def disc_cone(alpha: float) -> QuadraticFan:
    """The cone ``u_alpha`` of the unit disc as a fan graph."""
    return herringbone(disc(), 0.0, alpha)


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """Base angle ``theta0`` and sector angles ``theta_1..theta_k`` (sum 2 pi)."""

    body: ConvexBody
    theta0: float
    thetas: tuple
    splits: tuple = field(init=False)

    def __post_init__(self):
        thetas = tuple(float(t) for t in self.thetas)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "theta0", float(self.theta0))
        if len(thetas) < 3:
            raise InvalidSpecError("a cone needs at least three sectors")
        if any(not t > 0 for t in thetas):
            raise InvalidSpecError("sector angles must be positive")
        if not abs(math.fsum(thetas) - TAU) <= 1e-12:
            raise InvalidSpecError(f"sector angles sum to {math.fsum(thetas)!r}, not 2 pi")
        splits = []
        tol = RESIDUAL_TOL * self.body.diameter
        for i in range(len(thetas)):
            u, w = self.edge(i), self.edge(i + 1)
            try:
                v = sector_split(self.body, u, w)
            except (SolverError, ValueError) as exc:
                raise InvalidSpecError(f"sector {i + 1}: {exc}") from exc
            r = sector_residual(self.body, u, w, v)
            if not abs(r) <= tol:
                raise InvalidSpecError(f"sector {i + 1}: residual {r!r} exceeds {tol!r}")
            if sector_angle(u, v) >= math.pi or sector_angle(v, w) >= math.pi:
                raise InvalidSpecError(f"sector {i + 1}: split leaves an angle >= pi")
            splits.append(v)
        object.__setattr__(self, "splits", tuple(splits))

    @classmethod
    def regular(cls, k: int, body: ConvexBody | None = None) -> "ConeSpec":
        """``C(k)``: base angle pi/k and k equal sectors."""
        if k < 3:
            raise InvalidSpecError("k must be at least 3")
        return cls(body if body is not None else disc(), math.pi / k, (TAU / k,) * k)

    @property
    def k(self) -> int:
        return len(self.thetas)

    def edge_angle(self, i: int) -> float:
        return wrap_angle(self.theta0 + math.fsum(self.thetas[: i % self.k]) if i % self.k else self.theta0)

    def edge(self, i: int) -> np.ndarray:
        return unit(self.edge_angle(i))

    def residuals(self) -> list[float]:
        return [sector_residual(self.body, self.edge(i), self.edge(i + 1), v) for i, v in enumerate(self.splits)]


def cone_graph(spec: ConeSpec) -> QuadraticFan:
    pieces = []
    for i, v in enumerate(spec.splits):
        u, w = spec.edge(i), spec.edge(i + 1)
        a_u = spec.edge_angle(i)
        a_v = float(angle_of(v))
        pieces.append(FanPiece(a_u, sector_angle(u, v), v, u, Tag.SEAM, Tag.SINGULAR_RAY))
        pieces.append(FanPiece(a_v, sector_angle(v, w), v, w, Tag.SINGULAR_RAY, Tag.SEAM))
    fan = QuadraticFan(spec.body, pieces, label=f"cone(k={spec.k})")
    fan.spec = spec
    return fan


def _check_non_increasing(alpha, n: int = 4001):
    # rulings of an increasing profile cross, so the foot map is not single valued
    knots = np.asarray(getattr(alpha, "lam", (-10.0, 10.0)), dtype=float)
    span = max(1.0, float(np.ptp(knots)))
    lam = np.linspace(knots.min() - span, knots.max() + span, n)
    if hasattr(alpha, "derivative"):
        bad = np.max(np.asarray(alpha.derivative(lam), dtype=float)) > 1e-12
    else:
        bad = np.max(np.diff(np.asarray(alpha(lam), dtype=float))) > 1e-12
    if bad:
        raise SolverError("the profile must be non-increasing")


class HerringboneGraph:
    """t-graph of the herringbone surface of a (possibly non-constant) profile."""

    def __init__(self, profile: AlphaProfile):
        self.profile = profile
        self.body = profile.body
        a_lo, a_hi = profile.alpha.bounds()
        b_lo, b_hi = profile.beta_bounds()
        # cot over the attainable angles bounds the foot of the ruling
        self._cot_upper = (1.0 / math.tan(a_hi), 1.0 / math.tan(a_lo))
        self._cot_lower = (1.0 / math.tan(b_lo), 1.0 / math.tan(b_hi))
        if not profile.is_constant:
            _check_non_increasing(profile.alpha)

    @property
    def break_angles(self) -> tuple[float, ...]:
        a0 = self.profile.v_angle
        return (wrap_angle(a0), wrap_angle(a0 + math.pi))

    singular_angles = break_angles
    seam_angles = ()

    def _frame(self, x, y):
        a0 = self.profile.v_angle
        c, s = math.cos(a0), math.sin(a0)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return c * x + s * y, -s * x + c * y

    def foot(self, x, y):
        """Foot ``lambda`` of the ruling through each point and the ruling angle."""
        X, Y = self._frame(x, y)
        prof = self.profile
        if prof.is_constant:
            a = prof.alpha.alpha
            b = float(solve_beta(self.body, prof.v_angle, a))
            ang = np.where(Y >= 0, a, b)
            lam = X - Y / np.tan(ang)
            return lam, ang
        up = Y > 0
        c_lo = np.where(up, self._cot_upper[0], self._cot_lower[0])
        c_hi = np.where(up, self._cot_upper[1], self._cot_lower[1])
        ends = np.stack([X - Y * c_lo, X - Y * c_hi])
        pad = 1e-9 * (1.0 + np.abs(X) + np.abs(Y))
        lo = ends.min(axis=0) - pad
        hi = ends.max(axis=0) + pad

        def g(lam):
            ang = self._angle(lam, up)
            return lam + Y / np.tan(ang) - X

        if np.any((g(lo) > 0) | (g(hi) < 0)):
            raise SolverError("rulings fail to cover the point; the profile is not non-increasing")
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            pos = g(mid) > 0
            hi = np.where(pos, mid, hi)
            lo = np.where(pos, lo, mid)
            if np.all(hi - lo <= 4e-16 * (1.0 + np.abs(mid))):
                break
        lam = np.where(Y == 0, X, 0.5 * (lo + hi))
        return lam, self._angle(lam, up)

    def _angle(self, lam, up):
        prof = self.profile
        a = np.asarray(prof.alpha(lam), dtype=float) * np.ones(np.shape(lam))
        if np.all(up):
            return a
        b = solve_beta(self.body, prof.v_angle, a)
        return np.where(up, a, b)

    def value(self, x, y):
        lam, _ = self.foot(x, y)
        _, Y = self._frame(x, y)
        out = -lam * Y
        return out if np.ndim(out) else float(out)

    def gradient(self, x, y):
        X, Y = self._frame(x, y)
        lam, ang = self.foot(x, y)
        prof = self.profile
        up = Y >= 0
        da = np.asarray(prof.alpha.derivative(lam), dtype=float) * np.ones(np.shape(lam))
        if not np.all(up):
            base = prof.v_angle + 0.5 * math.pi
            a = np.asarray(prof.alpha(lam), dtype=float) * np.ones(np.shape(lam))
            rho = self.body.curvature_radius
            dbda = (rho(base + a) * np.sin(a)) / (rho(base + ang) * np.sin(ang))
            da = np.where(up, da, dbda * da)
        cot = 1.0 / np.tan(ang)
        dcot = -da / np.sin(ang) ** 2
        denom = 1.0 + Y * dcot
        lam_x = 1.0 / denom
        lam_y = -cot / denom
        u_x = -Y * lam_x
        u_y = -lam - Y * lam_y
        v = unit(prof.v_angle)
        return u_x[..., None] * v + u_y[..., None] * rotate90(v)

    def eta(self, x, y):
        _, ang = self.foot(x, y)
        return self.body.pi_K(rotate90(unit(self.profile.v_angle + ang)))


def graph_eval(profile: AlphaProfile, x, y):
    """Height of the herringbone surface over ``(x, y)``."""
    return HerringboneGraph(profile).value(x, y)


class SplicedGraph:
    """``upper`` on the side ``<z, J v> >= 0``, ``lower`` (plus ``tilt * <z, J v>``) below.

    With ``tilt != 0`` the normal derivative jumps by ``tilt`` across the line,
    which makes this a non-C^1 control surface.
    """

    def __init__(self, upper, lower, v_angle: float = 0.0, tilt: float = 0.0):
        self.upper, self.lower = upper, lower
        self.v_angle = float(v_angle)
        self.tilt = float(tilt)
        self.body = getattr(upper, "body", None)

    @property
    def break_angles(self):
        return tuple(sorted({wrap_angle(self.v_angle), wrap_angle(self.v_angle + math.pi)}
                            | set(self.upper.break_angles) | set(self.lower.break_angles)))

    def _side(self, x, y):
        jv = rotate90(unit(self.v_angle))
        return jv[0] * np.asarray(x, float) + jv[1] * np.asarray(y, float)

    def value(self, x, y):
        Y = self._side(x, y)
        out = np.where(Y >= 0, self.upper.value(x, y), self.lower.value(x, y) + self.tilt * Y)
        return out if out.ndim else float(out)

    def gradient(self, x, y):
        Y = self._side(x, y)
        jv = rotate90(unit(self.v_angle))
        lower = self.lower.gradient(x, y) + self.tilt * jv
        return np.where((Y >= 0)[..., None], self.upper.gradient(x, y), lower)


def mismatched_splice(alpha: float = math.pi / 4, tilt: float = 0.5) -> SplicedGraph:
    """Negative control: disc-cone upper half glued to a tilted, mismatched lower half."""
    upper = herringbone(disc(), 0.0, alpha)
    lower = herringbone(disc(), 0.0, alpha, beta=alpha + math.pi)
    return SplicedGraph(upper, lower, 0.0, tilt)


# ---------------------------------------------------------------------------
# meshes


def _resolution(resolution):
    if np.ndim(resolution) == 0:
        n_l = n_m = int(resolution)
    else:
        n_l, n_m = (int(r) for r in resolution)
    if n_l < 2 or n_m < 2:
        raise ValueError("resolution must be at least 2 per axis")
    return n_l, n_m


def build_sigma(profile: AlphaProfile, lam_range, mu_range, resolution=DEFAULT_RESOLUTION) -> TriMesh:
    """Structured mesh over the ``(lambda, mu)`` grid, one patch per side of ``L_v``.

    Vertices on ``mu = 0`` are duplicated (one copy per patch) and tagged
    ``singular_ray``.  Each grid row of fixed ``lambda`` is a ruling.
    """
    n_l, n_m = _resolution(resolution)
    l0, l1 = (float(v) for v in lam_range)
    m0, m1 = (float(v) for v in mu_range)
    if not (l1 > l0 and m1 > m0):
        raise ValueError("ranges must be non-empty")
    lam = np.linspace(l0, l1, n_l)
    meshes = []
    for lo, hi in ((max(m0, 0.0), m1), (m0, min(m1, 0.0))):
        if hi <= lo:
            continue
        mu = np.linspace(lo, hi, n_m)
        L, M = np.meshgrid(lam, mu, indexing="ij")
        pts = psi(profile, L, M).reshape(-1, 3)
        params = np.column_stack([L.ravel(), M.ravel()])
        tags = np.where(params[:, 1] == 0.0, Tag.SINGULAR_RAY.value, Tag.REGULAR.value)
        idx = np.arange(n_l * n_m).reshape(n_l, n_m)
        a, b, c, d = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel(), idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
        tris = np.concatenate([np.column_stack([a, b, d]), np.column_stack([a, d, c])])
        meshes.append(TriMesh(pts, tris, tags, params))
    return TriMesh.concat(meshes)


def _piece_mesh(piece: FanPiece, radius: float, n: int, area_tol: float) -> TriMesh:
    v, w = piece.v, piece.w
    cg = float(np.dot(v, w))
    sg = abs(piece.c)
    lam_max = radius if cg >= 0 else radius / sg
    lam = np.linspace(0.0, lam_max, n)
    disc_ = np.sqrt(np.maximum(radius**2 - (lam * sg) ** 2, 0.0))
    rho_a = np.maximum(0.0, -lam * cg - disc_)
    rho_b = np.maximum(rho_a, -lam * cg + disc_)
    frac = np.linspace(0.0, 1.0, n)
    rho = rho_a[:, None] + (rho_b - rho_a)[:, None] * frac[None, :]
    L = np.broadcast_to(lam[:, None], rho.shape)
    xy = L[..., None] * v + rho[..., None] * w
    t = -rho * L * piece.c
    pts = np.concatenate([xy, t[..., None]], axis=-1).reshape(-1, 3)
    params = np.column_stack([L.ravel(), rho.ravel()])
    tags = np.full(len(pts), Tag.REGULAR.value, dtype="<U12")
    tags[(params[:, 0] == 0.0) & (params[:, 1] > 0.0)] = Tag.SEAM.value
    tags[params[:, 1] == 0.0] = Tag.SINGULAR_RAY.value
    idx = np.arange(n * n).reshape(n, n)
    a, b, c, d = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel(), idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
    c_ = piece.c
    first, second = (np.column_stack([a, b, d]), np.column_stack([a, d, c])) if c_ > 0 else (np.column_stack([a, d, b]), np.column_stack([a, c, d]))
    mesh = TriMesh(pts, np.concatenate([first, second]), tags, params)
    keep = mesh.xy_areas() > area_tol
    return TriMesh(pts, mesh.triangles[keep], tags, params)


def build_cone(spec: ConeSpec | QuadraticFan, radius: float = 1.0, resolution: int = DEFAULT_RESOLUTION) -> TriMesh:
    """Mesh of a fan graph over the disc of the given radius.

    Each piece is meshed along its rulings ``lambda v + rho w``.  Vertices
    with ``rho = 0`` lie on a singular ray, those with ``lambda = 0`` on a
    seam (the ruling from the origin where two sectors meet).
    """
    fan = cone_graph(spec) if isinstance(spec, ConeSpec) else spec
    if any(p.span >= math.pi - 1e-12 for p in fan.pieces):
        raise ValueError("half-plane pieces are meshed with build_sigma")
    radius = float(radius)
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if radius == 0:
        return TriMesh.empty()
    n = int(resolution)
    if n < 2:
        raise ValueError("resolution must be at least 2")
    area_tol = 1e-13 * radius**2
    return TriMesh.concat(_piece_mesh(p, radius, n, area_tol) for p in fan.pieces)


# ---------------------------------------------------------------------------
# regularity across rays


def one_sided_gradients(graph, points, direction, step: float):
    """First-order one-sided gradients at ``points`` on a ray of unit ``direction``.

    The ``+`` side is the one ``J(direction)`` points to.  Differences never
    straddle the ray.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    t = np.asarray(direction, dtype=float)
    n = rotate90(t)
    h = float(step)
    f = graph.value
    x0, y0 = points[:, 0], points[:, 1]
    f0 = f(x0, y0)
    out = []
    for sign in (1.0, -1.0):
        q = points + sign * h * n
        fq = f(q[:, 0], q[:, 1])
        d_n = sign * (fq - f0) / h
        qt = q + h * t
        d_t = (f(qt[:, 0], qt[:, 1]) - fq) / h
        out.append(d_n[:, None] * n + d_t[:, None] * t)
    return out[0], out[1]


def c1_seam_check(graph, angle: float, step: float, radii=None) -> float:
    """Largest jump of the one-sided planar gradient along the ray of polar angle ``angle``."""
    if radii is None:
        radii = np.linspace(0.2, 1.0, 17)
    d = unit(angle)
    pts = np.asarray(radii, dtype=float)[:, None] * d
    g_plus, g_minus = one_sided_gradients(graph, pts, d, step)
    return float(np.max(np.hypot(*(g_plus - g_minus).T)))


@dataclass(frozen=True)
class SeamReport:
    angle: float
    steps: tuple
    jumps: tuple
    order: float
    constant: float


def seam_convergence(graph, angle: float, steps=(1e-3, 1e-4, 1e-5), radii=None) -> SeamReport:
    """Jumps at several steps, the fitted power ``jump ~ C step^order`` and ``C = max jump/step``."""
    steps = tuple(float(s) for s in steps)
    jumps = tuple(c1_seam_check(graph, angle, s, radii) for s in steps)
    logs = np.log(steps)
    logj = np.log(np.maximum(jumps, 1e-300))
    order = float(np.polyfit(logs, logj, 1)[0])
    const = float(max(j / s for j, s in zip(jumps, steps)))
    return SeamReport(float(angle), steps, jumps, order, const)


def ruling_points(graph, x, y, lengths):
    """Points along the ruling through each ``(x, y)`` (used by horizontality checks)."""
    if isinstance(graph, QuadraticFan):
        w = graph.ruling_direction(x, y)
    else:
        _, ang = graph.foot(x, y)
        w = unit(graph.profile.v_angle + ang)
    z = np.stack([np.asarray(x, float), np.asarray(y, float)], axis=-1)
    return z[..., None, :] + np.asarray(lengths)[:, None] * w[..., None, :]


__all__ = [
    "AlphaProfile",
    "ConeSpec",
    "FanPiece",
    "HerringboneGraph",
    "InvalidSpecError",
    "QuadraticFan",
    "SeamReport",
    "SplicedGraph",
    "build_cone",
    "build_sigma",
    "c1_seam_check",
    "cone_graph",
    "contact_form",
    "disc_cone",
    "graph_eval",
    "herringbone",
    "lift_halfline",
    "mismatched_splice",
    "one_sided_gradients",
    "psi",
    "ruling_points",
    "seam_convergence",
    "stationarity_residual",
    "u_alpha_disc",
]
