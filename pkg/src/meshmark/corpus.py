"""Procedurally generated test meshes.

These stand in for the usual scanned models so the benchmark needs no data
files. All generators are deterministic: randomness flows only through the
explicit seed of numpy's PCG64 stream.

The benchmark roster (`BENCH_CORPUS`) holds shapes whose vertex-norm spread is
wide and whose norm extremes fall in densely sampled regions; that is what the
bin-based payload mapping needs. The icosphere and the flat/bump grids are for
saliency and curvature sanity checks, not for embedding (the icosphere's norms
are all equal, so it has no norm span to carry bins).
"""

from __future__ import annotations

import numpy as np

from .mesh import Mesh


def icosphere(subdivisions: int = 4, radius: float = 1.0) -> Mesh:
    """Icosahedron subdivided `subdivisions` times, projected to a sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    for _ in range(subdivisions):
        verts, faces = _midpoint_split(verts, faces)
        verts /= np.linalg.norm(verts, axis=1)[:, None]
    return Mesh(verts * radius, faces)


def _midpoint_split(verts: np.ndarray, faces: np.ndarray):
    """One midpoint subdivision step on raw arrays (no projection)."""
    edges = np.sort(
        np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]), axis=1
    )
    uniq, inv = np.unique(edges, axis=0, return_inverse=True)
    mid = 0.5 * (verts[uniq[:, 0]] + verts[uniq[:, 1]])
    m = inv.reshape(3, -1).T + len(verts)  # midpoint index per face edge
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    mab, mbc, mca = m[:, 0], m[:, 1], m[:, 2]
    new_faces = np.concatenate(
        [
            np.stack([a, mab, mca], axis=1),
            np.stack([mab, b, mbc], axis=1),
            np.stack([mca, mbc, c], axis=1),
            np.stack([mab, mbc, mca], axis=1),
        ]
    )
    return np.concatenate([verts, mid]), new_faces


def _radial_bumps(directions: np.ndarray, rng: np.random.Generator, bumps: int,
                  amp_lo: float, amp_hi: float, width_lo: float, width_hi: float):
    """Sum of signed Gaussian lobes over the sphere of directions."""
    centers = rng.normal(size=(bumps, 3))
    centers /= np.linalg.norm(centers, axis=1)[:, None]
    amps = rng.uniform(amp_lo, amp_hi, size=bumps)
    amps *= np.where(rng.random(bumps) < 0.5, -1.0, 1.0)
    widths = rng.uniform(width_lo, width_hi, size=bumps)
    angles = np.arccos(np.clip(directions @ centers.T, -1.0, 1.0))  # (n, bumps)
    return np.sum(amps * np.exp(-0.5 * (angles / widths) ** 2), axis=1)


def bumpy_sphere(subdivisions: int = 5, bumps: int = 12, seed: int = 7) -> Mesh:
    """Sphere with smooth radial bumps and dents; the embedding workhorse.

    Bump width/amplitude keep local curvature moderate: sharp lobes erode
    quickly under Laplacian smoothing, which reads as watermark damage out
    of proportion to the visual change.
    """
    base = icosphere(subdivisions)
    rng = np.random.default_rng(seed)
    r = 1.0 + _radial_bumps(base.vertices, rng, bumps, 0.14, 0.28, 0.35, 0.60)
    r = np.maximum(r, 0.35)
    return Mesh(base.vertices * r[:, None], base.faces)


def torus(major_segments: int = 112, minor_segments: int = 90,
          major_radius: float = 1.0, minor_radius: float = 0.42,
          ripple: float = 0.20) -> Mesh:
    """Closed torus whose tube thickness spirals around the major circle.

    Vertex norms concentrate at both span extremes. The ripple breaks the
    rotational symmetry of the ideal torus; a perfectly symmetric one is
    degenerate for norm-based carriers (whole rings share one norm and one
    saliency value, so ranking and binning become knife-edge ties). The
    spiral phase makes the thickness pattern repeat only after a full turn
    of the major circle, the longest wavelength the surface admits, so the
    norm field it induces is nearly invariant under Laplacian smoothing.
    The small second term breaks the remaining mirror degeneracies.
    """
    u = np.arange(major_segments) * (2 * np.pi / major_segments)
    v = np.arange(minor_segments) * (2 * np.pi / minor_segments)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    bump = 1.0 + ripple * np.sin(2 * vv + uu) + 0.03 * np.sin(uu) * np.cos(vv)
    ring = major_radius + minor_radius * bump * np.cos(vv)
    verts = np.stack(
        [ring * np.cos(uu), ring * np.sin(uu), minor_radius * bump * np.sin(vv)], axis=-1
    ).reshape(-1, 3)

    i = np.arange(major_segments)[:, None]
    j = np.arange(minor_segments)[None, :]
    v00 = (i * minor_segments + j).ravel()
    v10 = (((i + 1) % major_segments) * minor_segments + j).ravel()
    v01 = (i * minor_segments + (j + 1) % minor_segments).ravel()
    v11 = (((i + 1) % major_segments) * minor_segments + (j + 1) % minor_segments).ravel()
    faces = np.concatenate(
        [np.stack([v00, v10, v11], axis=1), np.stack([v00, v11, v01], axis=1)]
    )
    return Mesh(verts, faces)


def bumpy_disk(rings: int = 50, radius: float = 1.3) -> Mesh:
    """Nearly flat open disk crossed by broad, gentle swells.

    Built on a polar grid where ring k carries 6k vertices, so triangle
    size and vertex density stay near-uniform across the disk (a fixed
    sector count would concentrate sliver triangles at the center and
    skew density-sensitive statistics such as the mean vertex norm).
    Vertex norms track the in-plane radius, which smoothing barely moves
    on a near-uniform planar grid. Tall localized relief is deliberately
    absent: when a feature of height h erodes by dh, nearby norms shift
    by about h*dh/r, so mid-sized bumps convert smoothing into payload
    damage out of proportion to the visual change. The low-order swells
    supply curvature for saliency and break the sixfold grid symmetry
    without raising that product; the center stays exactly flat, pinning
    the norm minimum to the center vertex.
    """
    rr = [np.array([0.0])]
    tt = [np.array([0.0])]
    start = [0]
    for k in range(1, rings + 1):
        n_k = 6 * k
        start.append(start[-1] + len(tt[-1]))
        tt.append(np.arange(n_k) * (2 * np.pi / n_k))
        rr.append(np.full(n_k, radius * k / rings))
    r = np.concatenate(rr)
    t = np.concatenate(tt)
    x = r * np.cos(t)
    y = r * np.sin(t)

    s = r / radius
    blend = np.clip((s - 0.19) / 0.23, 0.0, 1.0)
    blend = blend * blend * (3.0 - 2.0 * blend)
    swell = (
        0.038 * np.sin(t + 0.4)
        + 0.031 * np.cos(2 * t - 1.1)
        + 0.023 * np.sin(3 * t + 2.2)
        + 0.031 * np.sin(2.4 * s + 1.0)
    )
    z = radius * blend * swell
    verts = np.stack([x, y, z], axis=1)

    faces = []
    for s in range(6):
        faces.append([0, 1 + s, 1 + (s + 1) % 6])
    # annulus between ring k-1 and ring k: merge the two vertex cycles in
    # angular order, emitting one triangle per advance
    for k in range(2, rings + 1):
        n1, n2 = 6 * (k - 1), 6 * k
        inner, outer = start[k - 1], start[k]
        i = j = 0
        while i < n1 or j < n2:
            adv_outer = j < n2 and (i >= n1 or (j + 1) * n1 <= (i + 1) * n2)
            if adv_outer:
                faces.append([outer + j % n2, outer + (j + 1) % n2,
                              inner + i % n1])
                j += 1
            else:
                faces.append([outer + j % n2, inner + (i + 1) % n1,
                              inner + i % n1])
                i += 1
    mesh = Mesh(verts, np.array(faces, dtype=np.int64))
    return mesh


def flat_grid(n: int = 48, size: float = 2.0) -> Mesh:
    """Planar triangulated grid at z = 0 (zero curvature everywhere)."""
    lin = np.linspace(-size / 2, size / 2, n)
    xx, yy = np.meshgrid(lin, lin, indexing="ij")
    verts = np.stack([xx.ravel(), yy.ravel(), np.zeros(n * n)], axis=1)
    i = np.arange(n - 1)[:, None]
    j = np.arange(n - 1)[None, :]
    v00 = (i * n + j).ravel()
    v10 = ((i + 1) * n + j).ravel()
    v01 = (i * n + j + 1).ravel()
    v11 = ((i + 1) * n + j + 1).ravel()
    faces = np.concatenate(
        [np.stack([v00, v10, v11], axis=1), np.stack([v00, v11, v01], axis=1)]
    )
    return Mesh(verts, faces)


def bump_grid(n: int = 48, size: float = 2.0, height: float = 0.35,
              width: float = 0.18) -> Mesh:
    """Flat grid with one central Gaussian bump (saliency should peak there)."""
    base = flat_grid(n, size)
    v = base.vertices.copy()
    r2 = v[:, 0] ** 2 + v[:, 1] ** 2
    v[:, 2] = height * np.exp(-0.5 * r2 / width**2)
    return Mesh(v, base.faces)


GENERATORS = {
    "icosphere": icosphere,
    "bumpy_sphere": bumpy_sphere,
    "torus": torus,
    "bumpy_disk": bumpy_disk,
    "flat_grid": flat_grid,
    "bump_grid": bump_grid,
}

#: meshes with enough norm spread to carry the default payload
BENCH_CORPUS = ("bumpy_sphere", "torus", "bumpy_disk")


def get(name: str) -> Mesh:
    """Generate a corpus mesh by name with its canonical parameters."""
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise KeyError(
            f"unknown corpus mesh {name!r}; available: {', '.join(sorted(GENERATORS))}"
        ) from None
    return gen()
