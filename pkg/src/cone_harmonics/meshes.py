"""Triangle meshes: OFF I/O, validation, icosphere generation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class TriMesh:
    """Closed oriented triangle mesh; vertices (n,3) float, faces (t,3) int."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "faces", np.asarray(self.faces, dtype=np.int64))
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must have shape (n, 3)")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise MeshError("faces must have shape (t, 3)")
        if self.faces.min(initial=0) < 0 or self.faces.max(initial=-1) >= len(self.vertices):
            raise MeshError("face indices out of range")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(
            np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1
        )

    def validate_closed(self) -> None:
        """Reject meshes that are not closed oriented surfaces or degenerate."""
        areas = self.triangle_areas()
        if len(areas) == 0:
            raise MeshError("mesh has no faces")
        if areas.min() < 1e-12 * areas.mean():
            bad = int(np.argmin(areas))
            raise MeshError(f"degenerate triangle {bad} (area {areas[bad]:.3e})")
        directed = {}
        for t, (a, b, c) in enumerate(self.faces):
            for e in ((a, b), (b, c), (c, a)):
                if e in directed:
                    raise MeshError(f"non-orientable or doubled edge {e}")
                directed[e] = t
        for a, b in directed:
            if (b, a) not in directed:
                raise MeshError(f"boundary edge {(a, b)}: mesh is not closed")


def read_off(path) -> TriMesh:
    """Read an ASCII OFF file (triangles only)."""
    tokens = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError(f"{path}: missing OFF header")
    it = iter(tokens[1:])
    nv, nf, _ = (int(next(it)) for _ in range(3))
    verts = np.array([[float(next(it)) for _ in range(3)] for _ in range(nv)])
    faces = []
    for _ in range(nf):
        cnt = int(next(it))
        idx = [int(next(it)) for _ in range(cnt)]
        if cnt != 3:
            raise MeshError("only triangle faces are supported")
        faces.append(idx)
    return TriMesh(verts, np.array(faces))


def write_off(mesh: TriMesh, path) -> None:
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n_vertices} {len(mesh.faces)} 0\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for f in mesh.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


_ICO_R = (1.0 + np.sqrt(5.0)) / 2.0
_ICO_VERTS = np.array(
    [
        [-1, _ICO_R, 0], [1, _ICO_R, 0], [-1, -_ICO_R, 0], [1, -_ICO_R, 0],
        [0, -1, _ICO_R], [0, 1, _ICO_R], [0, -1, -_ICO_R], [0, 1, -_ICO_R],
        [_ICO_R, 0, -1], [_ICO_R, 0, 1], [-_ICO_R, 0, -1], [-_ICO_R, 0, 1],
    ],
    dtype=float,
)
_ICO_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
)


def icosphere(level: int) -> TriMesh:
    """Unit icosphere: icosahedron subdivided `level` times, projected to S^2."""
    if level < 0:
        raise MeshError("level must be >= 0")
    verts = [v / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = [tuple(f) for f in _ICO_FACES]
    for _ in range(level):
        midpoint: dict = {}
        new_faces = []

        def mid(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoint:
                p = verts[a] + verts[b]
                verts.append(p / np.linalg.norm(p))
                midpoint[key] = len(verts) - 1
            return midpoint[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return TriMesh(np.array(verts), np.array(faces))
