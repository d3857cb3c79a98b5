"""Triangle mesh container, adjacency, and the canonical (normalized) frame.

All watermarking operations run in a canonical frame: centroid at the origin,
mean vertex norm equal to one. The frame is recomputed blindly from whatever
mesh is presented, which is what makes embedding and extraction agree without
side information.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


class MeshError(Exception):
    """Structurally invalid mesh or degenerate geometry."""


class MeshParseError(MeshError):
    """Unparseable OFF/OBJ input; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass
class Mesh:
    """Indexed triangle mesh: (n, 3) float64 vertices, (m, 3) int64 faces.

    Vertex and face order are significant and preserved everywhere. The arrays
    are made read-only after validation; operations return new meshes.
    """

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError(f"vertices must have shape (n, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError(f"faces must have shape (m, 3), got {f.shape}")
        if v.shape[0] < 3:
            raise MeshError("mesh needs at least 3 vertices")
        if f.shape[0] < 1:
            raise MeshError("mesh needs at least 1 face")
        if not np.isfinite(v).all():
            raise MeshError("non-finite vertex coordinate")
        if f.min() < 0 or f.max() >= v.shape[0]:
            raise MeshError("face index out of range")
        if ((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])).any():
            raise MeshError("face with repeated vertex index")
        v.setflags(write=False)
        f.setflags(write=False)
        self.vertices = v
        self.faces = f

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    def with_vertices(self, vertices: np.ndarray) -> "Mesh":
        """New mesh with replaced vertex positions, same faces."""
        return Mesh(vertices, self.faces)


@dataclass
class NormalizationTransform:
    """Similarity mapping raw coordinates into the canonical frame.

    canonical = (raw - centroid) / scale
    """

    centroid: np.ndarray
    scale: float


@dataclass
class Adjacency:
    """One-ring structure plus per-vertex area-weighted normals.

    rings[i] and incident_faces[i] are sorted int64 arrays. Isolated vertices
    (empty ring) and boundary vertices are flagged, not rejected; degenerate
    (zero-area) faces are skipped for normal accumulation and recorded.
    """

    rings: list = field(repr=False)
    incident_faces: list = field(repr=False)
    vertex_normals: np.ndarray = field(repr=False)
    isolated: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)
    degenerate_faces: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    edge_face_count: np.ndarray = field(repr=False)


def _csr_split(keys: np.ndarray, values: np.ndarray, n: int) -> list:
    """Group values by key (0..n-1); returns a list of n sorted arrays."""
    order = np.lexsort((values, keys))
    k, v = keys[order], values[order]
    starts = np.searchsorted(k, np.arange(n + 1))
    return [v[starts[i]:starts[i + 1]] for i in range(n)]


def build_adjacency(mesh: Mesh) -> Adjacency:
    """Compute one-rings, incident faces, edges and area-weighted unit normals."""
    v, f = mesh.vertices, mesh.faces
    n = mesh.n_vertices

    directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    und = np.sort(directed, axis=1)
    edges, counts = np.unique(und, axis=0, return_counts=True)

    both = np.concatenate([edges, edges[:, ::-1]])
    rings = _csr_split(both[:, 0], both[:, 1], n)

    face_ids = np.tile(np.arange(mesh.n_faces), 3)
    incident = _csr_split(f.T.ravel(), face_ids, n)

    e0 = v[f[:, 1]] - v[f[:, 0]]
    e1 = v[f[:, 2]] - v[f[:, 0]]
    cross = np.cross(e0, e1)
    cnorm = np.linalg.norm(cross, axis=1)
    longest = np.max(
        np.stack(
            [
                np.linalg.norm(e0, axis=1),
                np.linalg.norm(e1, axis=1),
                np.linalg.norm(v[f[:, 2]] - v[f[:, 1]], axis=1),
            ]
        ),
        axis=0,
    )
    degenerate = cnorm <= 1e-14 * longest**2
    if degenerate.any():
        warnings.warn(
            f"{int(degenerate.sum())} zero-area face(s) skipped for normals",
            stacklevel=2,
        )

    normals = np.zeros((n, 3))
    good = ~degenerate
    # cross product magnitude is twice the face area, so summing raw cross
    # products is the area weighting
    for c in range(3):
        np.add.at(normals, f[good, c], cross[good])
    nlen = np.linalg.norm(normals, axis=1)
    ok = nlen > 0
    normals[ok] /= nlen[ok, None]

    isolated = np.array([len(r) == 0 for r in rings])
    bedges = edges[counts == 1]
    boundary = np.zeros(n, dtype=bool)
    boundary[bedges.ravel()] = True

    return Adjacency(
        rings=rings,
        incident_faces=incident,
        vertex_normals=normals,
        isolated=isolated,
        boundary=boundary,
        degenerate_faces=np.flatnonzero(degenerate),
        edges=edges,
        edge_face_count=counts,
    )


def vertex_norms(mesh: Mesh) -> np.ndarray:
    """Euclidean norm of every vertex position (about the current origin)."""
    return np.linalg.norm(mesh.vertices, axis=1)


def bbox_diagonal(mesh: Mesh) -> float:
    """Length of the axis-aligned bounding box diagonal."""
    return float(np.linalg.norm(mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)))


def normalize(mesh: Mesh) -> tuple[Mesh, NormalizationTransform]:
    """Map the mesh to the canonical frame: centroid 0, mean vertex norm 1.

    Returns the normalized mesh and the transform needed to undo it. Raises
    MeshError when all vertices coincide (scale would be zero).
    """
    centroid = mesh.vertices.mean(axis=0)
    shifted = mesh.vertices - centroid
    scale = float(np.linalg.norm(shifted, axis=1).mean())
    if scale == 0.0:
        raise MeshError("cannot normalize: all vertices coincide")
    return mesh.with_vertices(shifted / scale), NormalizationTransform(centroid, scale)


def denormalize(mesh: Mesh, transform: NormalizationTransform) -> Mesh:
    """Invert normalize(): map canonical coordinates back to the raw frame."""
    return mesh.with_vertices(mesh.vertices * transform.scale + transform.centroid)


def rescale_vertex(v: np.ndarray, new_norm: float) -> tuple[np.ndarray, bool]:
    """Scale a position vector to the requested norm, keeping its direction.

    A zero vector has no direction; it is returned unchanged with a False flag.
    """
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return v.copy(), False
    if new_norm < 0:
        raise ValueError("target norm must be non-negative")
    return v * (new_norm / norm), True
