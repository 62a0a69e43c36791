import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfm.convex_geometry import (
    ConvexBody,
    InvalidBodyError,
    NotOnBoundaryError,
    ZeroVectorError,
    disc,
    dual_norm,
    ellipse,
    gauge_norm,
    gauss_angle,
    gauss_point,
    load_body,
    parse_body,
    pball,
    pi_K,
    rotate90,
    sampled,
    wrap_angle,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def dense_boundary(K, n=200_000):
    return K.sample_boundary(n)


def angle_diff(a, b):
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


class TestRotate90:
    def test_examples(self):
        assert rotate90([1.0, 0.0]).tolist() == [0.0, 1.0]
        assert rotate90([0.0, 1.0]).tolist() == [-1.0, 0.0]
        assert rotate90([0.0, 0.0]).tolist() == [0.0, 0.0]

    @given(finite, finite)
    def test_four_quarter_turns_are_identity(self, f, g):
        u = np.array([f, g])
        assert np.array_equal(rotate90(rotate90(rotate90(rotate90(u)))), u)

    def test_vectorised(self):
        u = np.arange(12.0).reshape(2, 3, 2)
        out = rotate90(u)
        assert out.shape == u.shape
        assert np.array_equal(out[..., 0], -u[..., 1])


class TestGaussPoint:
    def test_disc(self):
        assert np.allclose(gauss_point(disc(), 0.0), [1, 0], atol=1e-15)
        assert np.allclose(gauss_point(disc(), math.pi / 2), [0, 1], atol=1e-15)

    def test_ellipse_against_brute_force_maximiser(self):
        K = ellipse(2, 1)
        pts = dense_boundary(K)
        best = pts[np.argmax(pts[:, 0])]
        assert np.allclose(gauss_point(K, 0.0), best, atol=1e-5)
        assert np.allclose(gauss_point(K, 0.0), [2, 0], atol=1e-14)

    @pytest.mark.parametrize("name", ["ellipse(2,1)", "pball(1.5)", "pball(3)", "ellipse(2,1)+(0.3,-0.2)", "sampled"])
    def test_support_value_is_attained(self, bodies, name):
        K = bodies[name]
        th = np.linspace(0.01, 2 * math.pi, 37)
        p = gauss_point(K, th)
        assert np.allclose(np.sum(p * np.column_stack([np.cos(th), np.sin(th)]), axis=1), K.h(th), atol=1e-13)

    @pytest.mark.parametrize("name", ["disc", "ellipse(2,1)", "pball(1.5)", "pball(3)", "ellipse(2,1)+(0.3,-0.2)"])
    def test_points_lie_on_boundary(self, bodies, name):
        K = bodies[name]
        p = gauss_point(K, np.linspace(0.0, 2 * math.pi, 101) + 0.013)
        assert np.allclose(K.gauge_norm(p), 1.0, atol=1e-10)


class TestGaussAngle:
    def test_disc_examples(self):
        assert gauss_angle(disc(), (0.0, -1.0)) == pytest.approx(3 * math.pi / 2, abs=1e-12)
        assert gauss_angle(disc(), (math.sqrt(2) / 2, math.sqrt(2) / 2)) == pytest.approx(math.pi / 4, abs=1e-12)

    def test_ellipse_implicit_normal(self):
        # gradient of x^2/4 + y^2 at (0, 1) is (0, 2)
        assert gauss_angle(ellipse(2, 1), (0.0, 1.0)) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_off_boundary_raises(self):
        with pytest.raises(NotOnBoundaryError):
            gauss_angle(disc(), (0.5, 0.0))
        with pytest.raises(NotOnBoundaryError):
            gauss_angle(ellipse(2, 1).translated((0.1, 0.0)), (3.0, 0.0))

    def test_tolerance_boundary(self):
        assert gauss_angle(disc(), (1.0 + 5e-9, 0.0)) == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize("name", ["disc", "ellipse(2,1)", "pball(1.5)", "pball(3)",
                                      "ellipse(2,1)+(0.3,-0.2)", "pball(1.5)+(-0.2,0.1)", "sampled"])
    def test_roundtrip_on_dense_grid(self, bodies, name):
        K = bodies[name]
        th = (np.arange(720) + 0.37) * (2 * math.pi / 720)
        pts = K.gauss_point(th)
        err = max(angle_diff(K.gauss_angle(p), t) for p, t in zip(pts, th))
        assert err < 1e-8
        assert all(0 <= K.gauss_angle(p) < 2 * math.pi for p in pts[:20])


class TestPiK:
    def test_disc(self):
        assert np.allclose(pi_K(disc(), (3.0, 4.0)), [0.6, 0.8], atol=1e-15)
        assert np.allclose(pi_K(disc(), (0.0, -2.0)), [0.0, -1.0], atol=1e-15)

    def test_pball_rightmost_point(self):
        K = pball(1.5)
        pts = dense_boundary(K)
        best = pts[np.argmax(pts[:, 0])]
        assert np.allclose(pi_K(K, (1.0, 0.0)), best, atol=1e-6)

    def test_zero_vector(self):
        with pytest.raises(ZeroVectorError):
            pi_K(disc(), (0.0, 0.0))

    def test_scale_invariant(self, bodies, rng):
        u = rng.normal(size=(50, 2))
        for K in bodies.values():
            assert np.allclose(pi_K(K, u), pi_K(K, 3.7 * u), atol=1e-14)


class TestDualNorm:
    def test_examples(self):
        assert dual_norm(disc(), (3.0, 4.0)) == pytest.approx(5.0, rel=1e-15)
        for K in (disc(), ellipse(2, 1), pball(3)):
            assert dual_norm(K, (0.0, 0.0)) == 0.0

    def test_ellipse_brute_force(self):
        K = ellipse(2, 1)
        brute = np.max(dense_boundary(K) @ np.array([1.0, 1.0]))
        assert dual_norm(K, (1.0, 1.0)) == pytest.approx(brute, rel=1e-9)
        assert dual_norm(K, (1.0, 1.0)) == pytest.approx(math.sqrt(5), rel=1e-14)

    @pytest.mark.parametrize("name", ["disc", "ellipse(2,1)", "pball(1.5)", "pball(3)",
                                      "ellipse(2,1)+(0.3,-0.2)", "pball(1.5)+(-0.2,0.1)"])
    def test_sup_over_boundary(self, bodies, name, rng):
        K = bodies[name]
        u = rng.normal(size=(300, 2))
        d = K.dual_norm(u)
        brute = np.max(u @ K.sample_boundary(4096).T, axis=1)
        assert np.all(brute <= d * (1 + 1e-12))
        assert np.max((d - brute) / d) < 1e-6

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(1e-3, 1e3))
    def test_positive_homogeneity(self, f, g, t):
        u = np.array([f, g])
        for K in (ellipse(2, 1), pball(1.5), ellipse(2, 1).translated((0.3, -0.2))):
            assert dual_norm(K, t * u) == pytest.approx(t * dual_norm(K, u), rel=1e-12, abs=1e-300)

    def test_central_symmetry(self, bodies, rng):
        u = rng.normal(size=(200, 2))
        for name in ("disc", "ellipse(2,1)", "pball(1.5)", "pball(3)"):
            K = bodies[name]
            assert K.centrally_symmetric
            assert np.allclose(K.dual_norm(-u), K.dual_norm(u), rtol=1e-10, atol=0)
        K = bodies["ellipse(2,1)+(0.3,-0.2)"]
        assert not K.centrally_symmetric
        assert not np.allclose(K.dual_norm(-u), K.dual_norm(u))

    def test_dual_pairing_inequality(self, bodies, rng):
        # <u, w> <= ||u||_* ||w||_K
        u = rng.normal(size=(200, 2))
        w = rng.normal(size=(200, 2))
        for K in bodies.values():
            lhs = np.sum(u * w, axis=1)
            assert np.all(lhs <= K.dual_norm(u) * K.gauge_norm(w) + 1e-12)


class TestGauge:
    def test_examples(self):
        assert gauge_norm(disc(), (3.0, 4.0)) == pytest.approx(5.0)
        assert gauge_norm(ellipse(2, 1), (0.0, 0.0)) == 0.0
        assert gauge_norm(ellipse(2, 1), (2.0, 0.0)) == pytest.approx(1.0)

    def test_ray_shooting_matches_closed_form(self, rng):
        # ray shooting, as used for translated bodies, against the closed form
        K = ellipse(2, 1)
        u = rng.normal(size=(100, 2))
        closed = K.gauge_norm(u)
        numeric = np.array([1.0 / np.linalg.norm(K.gauss_point(K._ray_theta(math.atan2(b, a)))) * math.hypot(a, b)
                            for a, b in u])
        assert np.allclose(numeric, closed, rtol=1e-12)

    def test_translated_boundary_has_unit_gauge(self, bodies):
        for name in ("ellipse(2,1)+(0.3,-0.2)", "pball(1.5)+(-0.2,0.1)", "sampled"):
            K = bodies[name]
            assert np.allclose(K.gauge_norm(K.sample_boundary(257)), 1.0, atol=1e-12)

    def test_homogeneous_and_convex(self, bodies, rng):
        a = rng.normal(size=(100, 2))
        b = rng.normal(size=(100, 2))
        for K in bodies.values():
            assert np.allclose(K.gauge_norm(2.5 * a), 2.5 * K.gauge_norm(a), rtol=1e-12)
            assert np.all(K.gauge_norm(a + b) <= K.gauge_norm(a) + K.gauge_norm(b) + 1e-12)


class TestConstruction:
    @pytest.mark.parametrize("name", ["disc", "ellipse(2,1)", "pball(1.5)", "pball(3)", "sampled"])
    def test_curvature_positive(self, bodies, name):
        th = (np.arange(8192) + 0.5) * (2 * math.pi / 8192)
        assert np.min(bodies[name].curvature_radius(th)) > 0

    def test_rejects_nonpositive_curvature(self):
        th = np.arange(512) * (2 * math.pi / 512)
        with pytest.raises(InvalidBodyError, match="h \\+ h''"):
            sampled(th, 1.0 + 0.5 * np.cos(3 * th))

    def test_rejects_exterior_origin(self):
        with pytest.raises(InvalidBodyError):
            disc().translated((1.5, 0.0))

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidBodyError):
            ellipse(-1, 1)
        with pytest.raises(InvalidBodyError):
            pball(1.0)
        with pytest.raises(InvalidBodyError):
            sampled(np.linspace(0, 1, 10), np.ones(10))

    def test_translation_leaves_curvature_alone(self, rng):
        K = ellipse(2, 1)
        T = K.translated((0.4, 0.1))
        th = rng.uniform(0, 2 * math.pi, 50)
        assert np.allclose(K.curvature_radius(th), T.curvature_radius(th))
        assert np.allclose(T.gauss_point(th), K.gauss_point(th) + [0.4, 0.1], atol=1e-14)

    def test_sampled_spline_matches_closed_form(self):
        K = ellipse(2, 1)
        th = np.arange(2048) * (2 * math.pi / 2048)
        S = sampled(th, K.h(th))
        t = np.linspace(0.1, 6.2, 33)
        assert np.allclose(S.h(t), K.h(t), atol=1e-9)
        assert np.allclose(S.gauss_point(t), K.gauss_point(t), atol=1e-7)

    def test_immutable(self):
        K = disc()
        with pytest.raises(Exception):
            K.center_offset = (1.0, 0.0)

    def test_diameter(self):
        assert ellipse(2, 1).diameter == pytest.approx(4.0, rel=1e-12)
        assert disc(0.5).diameter == pytest.approx(1.0)
        pts = pball(3).sample_boundary(2048)
        brute = max(np.max(np.linalg.norm(pts - p, axis=1)) for p in pts[::4])
        assert pball(3).diameter == pytest.approx(brute, rel=1e-5)


class TestParseBody:
    def test_directives(self):
        assert parse_body("disc").describe() == "disc"
        K = parse_body("ellipse 2 1\ntranslate 0.1 0\ntranslate 0 0.2  # shift")
        assert K.center_offset == pytest.approx((0.1, 0.2))
        assert parse_body("pball 1.5").support.p == 1.5
        assert parse_body("disc; translate 0.2 0").is_translated

    def test_samples(self):
        th = np.arange(600) * (2 * math.pi / 600)
        text = "samples\n" + "\n".join(f"{float(t)!r} {1 + 0.05 * math.cos(2 * t)!r}" for t in th)
        K = parse_body(text)
        assert K.h(0.0) == pytest.approx(1.05, abs=1e-9)

    @pytest.mark.parametrize("text", ["", "cube 1", "ellipse 1", "disc\npball 2", "translate 1", "pball x"])
    def test_errors(self, text):
        with pytest.raises(InvalidBodyError):
            parse_body(text)

    def test_load_file(self, tmp_path):
        f = tmp_path / "k.txt"
        f.write_text("ellipse 2 1\n", encoding="utf-8")
        assert load_body(str(f)).describe() == parse_body("ellipse 2 1").describe()


def test_wrap_angle_canonical():
    assert wrap_angle(-1e-18) < 2 * math.pi
    assert wrap_angle(2 * math.pi) == 0.0
    assert wrap_angle(-math.pi / 2) == pytest.approx(3 * math.pi / 2)


def test_body_is_hashable_and_shared():
    K = disc()
    assert isinstance(K, ConvexBody)
    assert {K: 1}[K] == 1
