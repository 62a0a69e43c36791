import csv
import math

import numpy as np
import pytest

from sfm.convex_geometry import ellipse
from sfm.mesh import Tag, TriMesh, fmt, omega_residual, ruling_edges
from sfm.surfaces import AlphaProfile, ConeSpec, build_cone, build_sigma


@pytest.fixture(scope="module")
def cone_mesh():
    return build_cone(ConeSpec.regular(4, ellipse(2, 1)), 1.0, 9)


def square():
    v = [[0, 0, 0], [1, 0, 1], [1, 1, 2], [0, 1, 3]]
    return TriMesh(v, [[0, 1, 2], [0, 2, 3]], ["regular", "seam", "singular_ray", "regular"],
                   [[0, 0], [0, 1], [1, 1], [1, 0]])


def test_fmt_roundtrips_doubles():
    for x in (math.pi, 1 / 3, -1e-300, 2.0**60 + 1):
        assert float(fmt(x)) == float(x)


def test_obj_roundtrip(tmp_path, cone_mesh):
    path = tmp_path / "m.obj"
    cone_mesh.write_obj(path)
    back = TriMesh.read_obj(path)
    assert np.array_equal(back.vertices, cone_mesh.vertices)
    assert np.array_equal(back.triangles, cone_mesh.triangles)
    assert np.array_equal(back.tags, cone_mesh.tags)
    assert set(back.tags) == {t.value for t in Tag}


def test_obj_layout():
    text = square().obj_text().splitlines()
    assert sum(line.startswith("v ") for line in text) == 4
    assert "f 1 2 3" in text and "f 1 3 4" in text
    assert "# tag 2 seam" in text


def test_csv_columns(tmp_path, cone_mesh):
    path = tmp_path / "m.csv"
    cone_mesh.write_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["lambda", "mu", "x", "y", "t", "tag"]
    assert len(rows) == len(cone_mesh) + 1
    data = np.array([[float(c) for c in r[:5]] for r in rows[1:]])
    assert np.array_equal(data[:, 2:], cone_mesh.vertices)
    assert np.array_equal(data[:, :2], cone_mesh.ruling_params)


def test_export_is_deterministic(tmp_path):
    prof = AlphaProfile(ellipse(2, 1), 0.3, 1.0)
    texts = [build_sigma(prof, (-1, 1), (-1, 1), 17).obj_text() for _ in range(2)]
    assert texts[0] == texts[1]


def test_read_only(cone_mesh):
    with pytest.raises(ValueError):
        cone_mesh.vertices[0, 0] = 1.0


def test_validation():
    with pytest.raises(ValueError):
        TriMesh([[0, 0, 0]], [[0, 1, 2]], ["regular"], [[0, 0]])
    with pytest.raises(ValueError):
        TriMesh([[0, 0, 0]], np.zeros((0, 3), int), ["regular", "seam"], [[0, 0]])
    with pytest.raises(ValueError):
        TriMesh([[0, 0, 0]], np.zeros((0, 3), int), ["bogus"], [[0, 0]])


def test_concat_and_empty():
    m = TriMesh.concat([square(), square()])
    assert len(m) == 8
    assert m.triangles.max() == 7
    assert len(TriMesh.concat([])) == 0
    assert np.all(np.isnan(TriMesh.empty().interpolate([0.0], [0.0])))


def test_areas_and_interpolation():
    m = square()
    assert np.allclose(m.xy_areas(), [0.5, 0.5])
    # the heights are t = x + y below the diagonal and t = 3y - x above it
    assert m.interpolate(0.5, 0.25) == pytest.approx(0.75)
    assert m.interpolate(0.25, 0.75) == pytest.approx(2.0)
    assert np.isnan(m.interpolate(2.0, 0.5))


def test_ruling_edges():
    m = square()
    e = ruling_edges(m)
    lam = m.ruling_params[:, 0]
    assert len(e) == 2
    assert np.all(lam[e[:, 0]] == lam[e[:, 1]])


def test_omega_residual_detects_tilted_edges():
    v = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    flat = TriMesh(v, [[0, 1, 2]], ["regular"] * 3, [[0, 0], [0, 1], [1, 0]])
    assert omega_residual(flat) == 0.0
    tilted = flat.with_vertices(v + [[0, 0, 0], [0, 0, 1], [0, 0, 0]])
    assert omega_residual(tilted) == pytest.approx(1 / math.sqrt(2))
