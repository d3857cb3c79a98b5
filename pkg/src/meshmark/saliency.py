"""Vertex saliency from two-scale Gaussian-weighted mean curvature.

Pipeline: Taubin one-ring mean curvature -> Gaussian-weighted averages at a
fine scale (kernel sigma, window 2*sigma) and a coarse scale (kernel 2*sigma,
window 4*sigma) -> saliency is the absolute difference of the two averages.
High values mark geometry that stands out from its surroundings; the
watermark carriers are the top fraction of this ranking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Adjacency, Mesh, build_adjacency, vertex_norms


@dataclass
class CurvatureField:
    """Per-vertex mean curvature; flagged entries were forced to 0."""

    values: np.ndarray
    flagged: np.ndarray


@dataclass
class SaliencyMap:
    """Per-vertex saliency plus the context select_salient needs."""

    values: np.ndarray
    sigma: float
    vertex_norms: np.ndarray = field(repr=False)
    flagged: np.ndarray = field(repr=False, default=None)


class PointGrid:
    """Uniform spatial hash over points for exact fixed-radius queries.

    Cell size equals the query radius, so all points within the radius of a
    query live in the 27 cells around the query's cell. Candidate gathering is
    exact (a filter, not an approximation).
    """

    def __init__(self, points: np.ndarray, cell: float):
        if cell <= 0:
            raise ValueError("cell size must be positive")
        self.points = points
        # floor the cell size so flattened cell keys stay inside int64
        span = float(np.max(points.max(axis=0) - points.min(axis=0)))
        self.cell = max(float(cell), span / float(2**20))
        self.origin = points.min(axis=0)
        ids = np.floor((points - self.origin) / self.cell).astype(np.int64)
        self.dims = ids.max(axis=0) + 1
        self.cell_ids = ids
        key = (ids[:, 0] * self.dims[1] + ids[:, 1]) * self.dims[2] + ids[:, 2]
        self.order = np.argsort(key, kind="stable")
        self.sorted_keys = key[self.order]

    def _key(self, ids: np.ndarray) -> np.ndarray:
        return (ids[..., 0] * self.dims[1] + ids[..., 1]) * self.dims[2] + ids[..., 2]

    def query(self, center: np.ndarray, radius: float) -> np.ndarray:
        """Indices of points strictly within `radius` of `center`, sorted."""
        if radius > self.cell * (1 + 1e-12):
            raise ValueError("query radius exceeds grid cell size")
        center = np.asarray(center, dtype=np.float64)
        cid = np.floor((center - self.origin) / self.cell).astype(np.int64)
        found = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    c = cid + (dx, dy, dz)
                    if (c < 0).any() or (c >= self.dims).any():
                        continue
                    k = self._key(c)
                    a = np.searchsorted(self.sorted_keys, k, side="left")
                    b = np.searchsorted(self.sorted_keys, k, side="right")
                    if b > a:
                        found.append(self.order[a:b])
        if not found:
            return np.empty(0, dtype=np.int64)
        cand = np.concatenate(found)
        d2 = np.sum((self.points[cand] - center) ** 2, axis=1)
        return np.sort(cand[d2 < radius * radius])

    def all_pairs(self, radius: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All ordered pairs (i, j) with |p_i - p_j| < radius, incl. i == j.

        Returns (i, j, squared distance). Vectorized over the 27 cell offsets.
        """
        if radius > self.cell * (1 + 1e-12):
            raise ValueError("query radius exceeds grid cell size")
        n = len(self.points)
        qidx = np.arange(n)
        out_i, out_j, out_d2 = [], [], []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    c = self.cell_ids + (dx, dy, dz)
                    valid = ((c >= 0) & (c < self.dims)).all(axis=1)
                    if not valid.any():
                        continue
                    keys = self._key(c[valid])
                    a = np.searchsorted(self.sorted_keys, keys, side="left")
                    b = np.searchsorted(self.sorted_keys, keys, side="right")
                    counts = b - a
                    total = int(counts.sum())
                    if total == 0:
                        continue
                    # expand [a_k, b_k) ranges into one flat index array
                    offs = np.repeat(np.cumsum(counts) - counts, counts)
                    flat = np.arange(total) - offs + np.repeat(a, counts)
                    j = self.order[flat]
                    i = np.repeat(qidx[valid], counts)
                    d2 = np.sum((self.points[i] - self.points[j]) ** 2, axis=1)
                    keep = d2 < radius * radius
                    out_i.append(i[keep])
                    out_j.append(j[keep])
                    out_d2.append(d2[keep])
        return (
            np.concatenate(out_i) if out_i else np.empty(0, dtype=np.int64),
            np.concatenate(out_j) if out_j else np.empty(0, dtype=np.int64),
            np.concatenate(out_d2) if out_d2 else np.empty(0),
        )


def neighborhood(mesh: Mesh, vertex: int, radius: float) -> np.ndarray:
    """Indices of vertices strictly within `radius` of vertex `vertex`."""
    grid = PointGrid(mesh.vertices, radius)
    return grid.query(mesh.vertices[vertex], radius)


def _tangent_basis(normals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (e1, e2) spanning the plane orthogonal to each normal."""
    helper = np.where(
        (np.abs(normals[:, 0]) < 0.9)[:, None],
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, 1.0, 0.0]),
    )
    e1 = np.cross(normals, helper)
    l1 = np.linalg.norm(e1, axis=1)
    safe = l1 > 0
    e1[safe] /= l1[safe, None]
    e2 = np.cross(normals, e1)
    return e1, e2


def mean_curvature(mesh: Mesh, adjacency: Adjacency | None = None) -> CurvatureField:
    """Taubin one-ring estimate of per-vertex mean curvature.

    For each neighbor j of vertex v the directional curvature is
    kappa_j = 2 N_v . (v - v_j) / |v_j - v|^2, signed so that convex regions
    with outward normals are positive (unit sphere -> +1). These are folded
    into the 3x3 tensor M_v = sum w_j kappa_j T_j T_j^T with w_j proportional
    to the area of the faces incident to edge (v, v_j); the two tangent-plane
    eigenvalues m1, m2 give principal curvatures 3*m1 - m2 and 3*m2 - m1.

    Boundary vertices, vertices with fewer than two neighbors, and vertices
    without a usable normal are set to 0 and flagged.
    """
    if adjacency is None:
        adjacency = build_adjacency(mesh)
    v = mesh.vertices
    n = mesh.n_vertices
    f = mesh.faces

    # per-edge weight: summed area of incident faces
    e0 = v[f[:, 1]] - v[f[:, 0]]
    e1v = v[f[:, 2]] - v[f[:, 0]]
    areas = 0.5 * np.linalg.norm(np.cross(e0, e1v), axis=1)
    directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    und = np.sort(directed, axis=1)
    edges, inv = np.unique(und, axis=0, return_inverse=True)
    edge_area = np.zeros(len(edges))
    np.add.at(edge_area, inv, np.repeat(areas, 3))

    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    w = np.concatenate([edge_area, edge_area])
    # canonical accumulation order keeps reruns bitwise identical
    order = np.lexsort((dst, src))
    src, dst, w = src[order], dst[order], w[order]

    normals = adjacency.vertex_normals
    d = v[dst] - v[src]
    d2 = np.sum(d * d, axis=1)
    ns = normals[src]
    ndot = np.sum(ns * d, axis=1)
    ok = d2 > 0
    kappa = np.zeros(len(src))
    kappa[ok] = -2.0 * ndot[ok] / d2[ok]

    t = d - ndot[:, None] * ns
    tlen = np.linalg.norm(t, axis=1)
    ok &= tlen > 1e-12 * np.sqrt(np.maximum(d2, 1e-300))
    that = np.zeros_like(t)
    that[ok] = t[ok] / tlen[ok, None]

    e1b, e2b = _tangent_basis(normals)
    alpha = np.sum(that * e1b[src], axis=1)
    beta = np.sum(that * e2b[src], axis=1)

    wk = np.where(ok, w * kappa, 0.0)
    acc = np.zeros((n, 3))
    np.add.at(acc, src, np.stack([wk * alpha * alpha, wk * alpha * beta, wk * beta * beta], axis=1))
    wsum = np.zeros(n)
    np.add.at(wsum, src, np.where(ok, w, 0.0))

    flagged = (
        adjacency.isolated
        | adjacency.boundary
        | (np.array([len(r) for r in adjacency.rings]) < 2)
        | (wsum <= 0)
        | (np.linalg.norm(normals, axis=1) < 0.5)
    )

    good = ~flagged
    b11 = np.zeros(n)
    b12 = np.zeros(n)
    b22 = np.zeros(n)
    b11[good] = acc[good, 0] / wsum[good]
    b12[good] = acc[good, 1] / wsum[good]
    b22[good] = acc[good, 2] / wsum[good]

    half_tr = 0.5 * (b11 + b22)
    disc = np.sqrt(np.maximum(0.25 * (b11 - b22) ** 2 + b12**2, 0.0))
    m1 = half_tr + disc
    m2 = half_tr - disc
    k1 = 3.0 * m1 - m2
    k2 = 3.0 * m2 - m1
    curv = 0.5 * (k1 + k2)
    curv[flagged] = 0.0
    return CurvatureField(values=curv, flagged=flagged)


def gaussian_weighted_average(
    mesh: Mesh, field_values: np.ndarray, vertex: int, sigma: float
) -> float:
    """Gaussian average of a vertex field over the ball of radius 2*sigma.

    Weights are exp(-|x - v|^2 / (2 sigma^2)); the window always contains the
    vertex itself, so the denominator never vanishes.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    idx = neighborhood(mesh, vertex, 2.0 * sigma)
    d2 = np.sum((mesh.vertices[idx] - mesh.vertices[vertex]) ** 2, axis=1)
    w = np.exp(-d2 / (2.0 * sigma * sigma))
    return float(np.sum(w * np.asarray(field_values)[idx]) / np.sum(w))


def _batched_gaussian(points: np.ndarray, values: np.ndarray, sigma: float, window: float):
    """Gaussian-weighted average around every point, window radius `window`."""
    grid = PointGrid(points, window)
    i, j, d2 = grid.all_pairs(window)
    w = np.exp(-d2 / (2.0 * sigma * sigma))
    num = np.zeros(len(points))
    den = np.zeros(len(points))
    # accumulate in canonical (i, then j) order for bitwise reproducibility
    order = np.lexsort((j, i))
    np.add.at(num, i[order], (w * values[j])[order])
    np.add.at(den, i[order], w[order])
    return num / den


def compute_saliency(
    mesh: Mesh,
    sigma: float,
    adjacency: Adjacency | None = None,
    curvature: CurvatureField | None = None,
) -> SaliencyMap:
    """Two-scale saliency: |G(Curv, sigma) - G(Curv, 2*sigma)| per vertex.

    The fine average uses window 2*sigma, the coarse one window 4*sigma.
    Curvature flags propagate into the map (flagged vertices contribute 0
    curvature but still receive a saliency value).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if curvature is None:
        curvature = mean_curvature(mesh, adjacency)
    pts = mesh.vertices
    fine = _batched_gaussian(pts, curvature.values, sigma, 2.0 * sigma)
    coarse = _batched_gaussian(pts, curvature.values, 2.0 * sigma, 4.0 * sigma)
    return SaliencyMap(
        values=np.abs(fine - coarse),
        sigma=float(sigma),
        vertex_norms=vertex_norms(mesh),
        flagged=curvature.flagged,
    )


def select_salient(smap: SaliencyMap, ratio: float) -> np.ndarray:
    """Indices of the ceil(ratio * n) most salient vertices.

    Saliency ties break toward the lower vertex norm, then the lower index.
    The result is ordered by ascending vertex norm (ties by index), which is
    the carrier order used by the watermark layer.
    """
    if not 0 < ratio <= 1:
        raise ValueError("ratio must be in (0, 1]")
    n = len(smap.values)
    k = int(np.ceil(ratio * n))
    idx = np.arange(n)
    # lexsort: last key is primary
    order = np.lexsort((idx, smap.vertex_norms, -smap.values))
    chosen = order[:k]
    out = chosen[np.lexsort((chosen, smap.vertex_norms[chosen]))]
    return out


def saliency_csv(smap: SaliencyMap) -> str:
    """CSV text with one (vertex_index, saliency) row per vertex."""
    lines = ["vertex_index,saliency"]
    for i, s in enumerate(smap.values.tolist()):
        lines.append(f"{i},{s!r}")
    return "\n".join(lines) + "\n"


def colored_off(mesh: Mesh, smap: SaliencyMap) -> str:
    """COFF variant with vertices colored by normalized saliency (blue->red)."""
    s = smap.values
    span = s.max() - s.min()
    t = (s - s.min()) / span if span > 0 else np.zeros_like(s)
    r = np.clip(1.5 * t, 0, 1)
    g = np.clip(1.5 - 3.0 * np.abs(t - 0.5), 0, 1)
    b = np.clip(1.5 * (1 - t), 0, 1)
    out = ["COFF", f"{mesh.n_vertices} {mesh.n_faces} 0"]
    for k, (x, y, z) in enumerate(mesh.vertices.tolist()):
        out.append(f"{x!r} {y!r} {z!r} {r[k]:.4f} {g[k]:.4f} {b[k]:.4f} 1.0")
    for a, b_, c in mesh.faces:
        out.append(f"3 {a} {b_} {c}")
    return "\n".join(out) + "\n"
