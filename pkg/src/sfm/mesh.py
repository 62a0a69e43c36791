"""Indexed triangle meshes of t-graphs, with Wavefront OBJ and CSV export."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree


class Tag(str, Enum):
    REGULAR = "regular"
    SINGULAR_RAY = "singular_ray"
    SEAM = "seam"


def fmt(x: float) -> str:
    """Fixed 17-significant-digit formatting used by every numeric output."""
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray  # (n, 3) columns x, y, t
    triangles: np.ndarray  # (m, 3) zero-based
    tags: np.ndarray  # (n,) Tag values
    ruling_params: np.ndarray  # (n, 2) (lambda, mu)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        f = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        tags = np.asarray([Tag(t).value for t in np.asarray(self.tags).ravel()], dtype="<U12")
        rp = np.asarray(self.ruling_params, dtype=float).reshape(-1, 2)
        if not (len(v) == len(tags) == len(rp)):
            raise ValueError("per-vertex arrays must have equal length")
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("triangle references a missing vertex")
        for name, arr in (("vertices", v), ("triangles", f), ("tags", tags), ("ruling_params", rp)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def empty(cls) -> "TriMesh":
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), np.zeros(0, dtype="<U12"), np.zeros((0, 2)))

    @classmethod
    def concat(cls, meshes) -> "TriMesh":
        meshes = list(meshes)
        if not meshes:
            return cls.empty()
        offsets = np.cumsum([0] + [len(m.vertices) for m in meshes[:-1]])
        return cls(
            np.concatenate([m.vertices for m in meshes]),
            np.concatenate([m.triangles + o for m, o in zip(meshes, offsets)]),
            np.concatenate([m.tags for m in meshes]),
            np.concatenate([m.ruling_params for m in meshes]),
        )

    def __len__(self):
        return len(self.vertices)

    def xy_areas(self) -> np.ndarray:
        """Signed planar areas of the triangles (positive for counter-clockwise)."""
        p = self.vertices[:, :2]
        a, b, c = p[self.triangles[:, 0]], p[self.triangles[:, 1]], p[self.triangles[:, 2]]
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def with_vertices(self, vertices) -> "TriMesh":
        return TriMesh(vertices, self.triangles, self.tags, self.ruling_params)

    def interpolate(self, x, y, k: int = 12):
        """Piecewise-linear interpolant of t at planar points (NaN outside the mesh)."""
        pts = np.column_stack([np.ravel(x), np.ravel(y)]).astype(float)
        out = np.full(len(pts), np.nan)
        if not len(self.triangles):
            return out.reshape(np.shape(x))
        p = self.vertices[:, :2]
        tri = self.triangles
        tree = cKDTree(p[tri].mean(axis=1))
        t = self.vertices[:, 2]
        todo = np.arange(len(pts))
        k = min(k, len(tri))
        # thin fan triangles can sit far from their centroids, so widen the search
        while len(todo):
            _, cand = tree.query(pts[todo], k=k)
            cand = np.asarray(cand).reshape(len(todo), -1)
            a, b, c = p[tri[cand, 0]], p[tri[cand, 1]], p[tri[cand, 2]]
            q = pts[todo, None, :]
            det = (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])
            l1 = ((q[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (q[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])) / det
            l2 = ((b[..., 0] - a[..., 0]) * (q[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (q[..., 0] - a[..., 0])) / det
            l0 = 1.0 - l1 - l2
            inside = (l0 >= -1e-12) & (l1 >= -1e-12) & (l2 >= -1e-12)
            first = np.argmax(inside, axis=1)
            found = inside[np.arange(len(todo)), first]
            rows = np.nonzero(found)[0]
            cols = first[found]
            tris = tri[cand[rows, cols]]
            out[todo[rows]] = (l0[rows, cols] * t[tris[:, 0]] + l1[rows, cols] * t[tris[:, 1]]
                               + l2[rows, cols] * t[tris[:, 2]])
            if k >= len(tri):
                break
            todo = todo[~found]
            k = min(4 * k, len(tri))
        return out.reshape(np.shape(x))

    # -- export -----------------------------------------------------------

    def obj_text(self) -> str:
        lines = ["# t-graph mesh: v x y t, 1-based faces, one '# tag' line per vertex"]
        lines += [f"v {fmt(x)} {fmt(y)} {fmt(t)}" for x, y, t in self.vertices]
        lines += [f"# tag {i + 1} {tag}" for i, tag in enumerate(self.tags)]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in self.triangles]
        return "\n".join(lines) + "\n"

    def write_obj(self, path: str | Path) -> None:
        Path(path).write_text(self.obj_text(), encoding="utf-8")

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lambda", "mu", "x", "y", "t", "tag"])
            for (lam, mu), (x, y, t), tag in zip(self.ruling_params, self.vertices, self.tags):
                w.writerow([fmt(lam), fmt(mu), fmt(x), fmt(y), fmt(t), tag])

    @classmethod
    def read_obj(cls, path: str | Path) -> "TriMesh":
        verts, faces, tags = [], [], {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
            elif parts[:2] == ["#", "tag"]:
                tags[int(parts[2]) - 1] = parts[3]
        tag_arr = [tags.get(i, Tag.REGULAR.value) for i in range(len(verts))]
        return cls(np.asarray(verts).reshape(-1, 3), np.asarray(faces, dtype=np.int64).reshape(-1, 3), tag_arr, np.full((len(verts), 2), np.nan))


def heisenberg_translate(mesh: TriMesh, p) -> TriMesh:
    """Left translation ``q -> p * q`` with ``(a,b,c)*(x,y,t) = (a+x, b+y, c+t+x b-a y)``."""
    a, b, c = (float(v) for v in p)
    x, y, t = mesh.vertices.T
    return mesh.with_vertices(np.column_stack([a + x, b + y, c + t + x * b - a * y]))


def ruling_edges(mesh: TriMesh) -> np.ndarray:
    """Triangle edges joining two vertices with the same ruling parameter ``lambda``."""
    f = mesh.triangles
    if not len(f):
        return np.zeros((0, 2), dtype=np.int64)
    e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    e = np.unique(np.sort(e, axis=1), axis=0)
    lam = mesh.ruling_params[:, 0]
    return e[lam[e[:, 0]] == lam[e[:, 1]]]


def omega_residual(mesh: TriMesh) -> float:
    """Largest ``|omega(a, b - a)| / |b - a|`` over ruling edges ``(a, b)``.

    ``omega = dt - y dx + x dy`` vanishes on every segment of a horizontal line.
    """
    e = ruling_edges(mesh)
    if not len(e):
        return 0.0
    a = mesh.vertices[e[:, 0]]
    d = mesh.vertices[e[:, 1]] - a
    w = d[:, 2] - a[:, 1] * d[:, 0] + a[:, 0] * d[:, 1]
    return float(np.max(np.abs(w) / np.linalg.norm(d, axis=1)))
