"""Robustness attack battery and the attack spec mini-grammar.

Every attack is a pure function Mesh -> Mesh; randomness comes only from the
explicit seed, so a given spec string always produces the same mesh.

Spec grammar (kind:params, comma-separated params):

    noise:<amplitude_pct>[,<seed>]
    smooth:<lambda>,<iterations>
    quant:<bits>
    sim:<seed>
    subdiv:<midpoint|loop|sqrt3>,<iterations>
    crop:<ratio_pct>
    reorder:<1|2|3>[,<seed>]
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh, MeshError, bbox_diagonal, build_adjacency, vertex_norms
from .qim import _round_half_away


class AttackSpecError(Exception):
    """Malformed attack spec string."""


@dataclass
class AttackSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def label(self) -> str:
        """Canonical short form, used in report rows."""
        parts = {
            "noise": lambda p: f"{p['amplitude']:g}",
            "smooth": lambda p: f"{p['lam']:g},{p['iterations']}",
            "quant": lambda p: f"{p['bits']}",
            "sim": lambda p: f"{p['seed']}",
            "subdiv": lambda p: f"{p['scheme']},{p['iterations']}",
            "crop": lambda p: f"{p['ratio']:g}",
            "reorder": lambda p: f"{p['kind']}",
        }
        return parts[self.kind](self.params)


def parse_attack_spec(text: str, default_seed: int = 0) -> AttackSpec:
    """Parse one grammar entry; raises AttackSpecError with guidance."""
    text = text.strip()
    if ":" not in text:
        raise AttackSpecError(
            f"bad attack spec {text!r}: expected kind:params, e.g. noise:0.3 or smooth:0.1,30"
        )
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    args = [a.strip() for a in rest.split(",")] if rest.strip() else []

    def _num(i, name, conv=float):
        try:
            return conv(args[i])
        except (IndexError, ValueError):
            raise AttackSpecError(
                f"bad attack spec {text!r}: expected {name} at position {i + 1}"
            ) from None

    if kind == "noise":
        if len(args) not in (1, 2):
            raise AttackSpecError(f"noise takes amplitude[,seed], got {text!r}")
        amp = _num(0, "amplitude (percent)")
        seed = _num(1, "seed", int) if len(args) == 2 else default_seed
        if amp < 0:
            raise AttackSpecError("noise amplitude must be >= 0")
        return AttackSpec("noise", {"amplitude": amp, "seed": seed})
    if kind == "smooth":
        if len(args) != 2:
            raise AttackSpecError(f"smooth takes lambda,iterations, got {text!r}")
        lam = _num(0, "lambda")
        iters = _num(1, "iterations", int)
        if not 0 <= lam <= 1 or iters < 0:
            raise AttackSpecError("smooth needs 0 <= lambda <= 1 and iterations >= 0")
        return AttackSpec("smooth", {"lam": lam, "iterations": iters})
    if kind == "quant":
        if len(args) != 1:
            raise AttackSpecError(f"quant takes bits, got {text!r}")
        bits = _num(0, "bits", int)
        if bits < 1:
            raise AttackSpecError("quant bits must be >= 1")
        return AttackSpec("quant", {"bits": bits})
    if kind == "sim":
        if len(args) != 1:
            raise AttackSpecError(f"sim takes seed, got {text!r}")
        return AttackSpec("sim", {"seed": _num(0, "seed", int)})
    if kind == "subdiv":
        if len(args) != 2:
            raise AttackSpecError(f"subdiv takes scheme,iterations, got {text!r}")
        scheme = args[0]
        if scheme not in ("midpoint", "loop", "sqrt3"):
            raise AttackSpecError(f"unknown subdivision scheme {scheme!r}")
        iters = _num(1, "iterations", int)
        if iters < 0:
            raise AttackSpecError("subdiv iterations must be >= 0")
        return AttackSpec("subdiv", {"scheme": scheme, "iterations": iters})
    if kind == "crop":
        if len(args) != 1:
            raise AttackSpecError(f"crop takes ratio, got {text!r}")
        ratio = _num(0, "ratio (percent)")
        if not 0 <= ratio < 100:
            raise AttackSpecError("crop ratio must be in [0, 100)")
        return AttackSpec("crop", {"ratio": ratio})
    if kind == "reorder":
        if len(args) not in (1, 2):
            raise AttackSpecError(f"reorder takes type[,seed], got {text!r}")
        which = _num(0, "type", int)
        if which not in (1, 2, 3):
            raise AttackSpecError("reorder type must be 1 (vertices), 2 (faces) or 3 (both)")
        seed = _num(1, "seed", int) if len(args) == 2 else default_seed
        return AttackSpec("reorder", {"kind": which, "seed": seed})
    raise AttackSpecError(
        f"unknown attack kind {kind!r}; known: noise, smooth, quant, sim, subdiv, crop, reorder"
    )


def apply_attack(mesh: Mesh, spec: AttackSpec) -> Mesh:
    """Dispatch an AttackSpec to its implementation."""
    p = spec.params
    if spec.kind == "noise":
        return add_noise(mesh, p["amplitude"], p["seed"])
    if spec.kind == "smooth":
        return laplacian_smooth(mesh, p["lam"], p["iterations"])
    if spec.kind == "quant":
        return quantize_coords(mesh, p["bits"])
    if spec.kind == "sim":
        return similarity_transform(mesh, seed=p["seed"])
    if spec.kind == "subdiv":
        fn = {"midpoint": subdivide_midpoint, "loop": subdivide_loop, "sqrt3": subdivide_sqrt3}
        return fn[p["scheme"]](mesh, p["iterations"])
    if spec.kind == "crop":
        return crop(mesh, p["ratio"])
    if spec.kind == "reorder":
        return reorder_elements(mesh, p["kind"], p["seed"])
    raise AttackSpecError(f"unknown attack kind {spec.kind!r}")


def add_noise(mesh: Mesh, amplitude: float, seed: int = 0) -> Mesh:
    """Binary random noise: each vertex moves amplitude% of the mean vertex
    norm along a seeded random unit direction with a random sign."""
    if amplitude < 0:
        raise ValueError("amplitude must be >= 0")
    if amplitude == 0:
        return mesh.with_vertices(mesh.vertices)
    rng = np.random.default_rng(seed)
    n = mesh.n_vertices
    dirs = rng.normal(size=(n, 3))
    lens = np.linalg.norm(dirs, axis=1)
    while (lens == 0).any():  # astronomically unlikely, but keep it exact
        bad = lens == 0
        dirs[bad] = rng.normal(size=(int(bad.sum()), 3))
        lens = np.linalg.norm(dirs, axis=1)
    dirs /= lens[:, None]
    signs = rng.integers(0, 2, size=n) * 2 - 1
    step = amplitude / 100.0 * float(vertex_norms(mesh).mean())
    return mesh.with_vertices(mesh.vertices + step * signs[:, None] * dirs)


def laplacian_smooth(mesh: Mesh, lam: float = 0.1, iterations: int = 1) -> Mesh:
    """Simultaneous Laplacian smoothing: v += lam * (ring mean - v)."""
    if not 0 <= lam <= 1:
        raise ValueError("lambda must be in [0, 1]")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    adj = build_adjacency(mesh)
    n = mesh.n_vertices
    src = np.concatenate([adj.edges[:, 0], adj.edges[:, 1]])
    dst = np.concatenate([adj.edges[:, 1], adj.edges[:, 0]])
    deg = np.bincount(src, minlength=n).astype(np.float64)
    movable = deg > 0
    v = np.array(mesh.vertices)
    for _ in range(iterations):
        acc = np.zeros((n, 3))
        np.add.at(acc, src, v[dst])
        mean = np.where(movable[:, None], acc / np.maximum(deg, 1)[:, None], v)
        v = v + lam * (mean - v)
    return mesh.with_vertices(v)


def quantize_coords(mesh: Mesh, bits: int) -> Mesh:
    """Uniform per-axis coordinate quantization to 2**bits levels.

    Levels include both axis extremes, which are reproduced exactly.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    v = np.array(mesh.vertices)
    levels = 2**bits - 1
    for axis in range(3):
        lo, hi = v[:, axis].min(), v[:, axis].max()
        if hi == lo:
            continue
        step = (hi - lo) / levels
        idx = np.clip(_round_half_away((v[:, axis] - lo) / step), 0, levels)
        col = lo + idx * step
        col[idx == 0] = lo
        col[idx == levels] = hi
        v[:, axis] = col
    return mesh.with_vertices(v)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation matrix from a normalized random quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def similarity_transform(
    mesh: Mesh,
    seed: int | None = None,
    rotation: np.ndarray | None = None,
    scale: float | None = None,
    translation: np.ndarray | None = None,
) -> Mesh:
    """Apply v -> scale * R v + t, either from a seed or explicit parts.

    Seeded mode draws a uniform rotation, a scale in [0.5, 2] and a
    translation within one bounding-box diagonal per axis.
    """
    if seed is not None:
        rng = np.random.default_rng(seed)
        rotation = random_rotation(rng)
        scale = float(rng.uniform(0.5, 2.0))
        d = bbox_diagonal(mesh)
        translation = rng.uniform(-d, d, size=3)
    if rotation is None or scale is None or translation is None:
        raise ValueError("need either a seed or rotation, scale and translation")
    rotation = np.asarray(rotation, dtype=np.float64)
    if rotation.shape != (3, 3) or np.abs(rotation.T @ rotation - np.eye(3)).max() > 1e-9:
        raise ValueError("rotation must be orthonormal")
    if np.linalg.det(rotation) < 0:
        raise ValueError("rotation must be proper (det +1)")
    if scale <= 0:
        raise ValueError("scale must be positive")
    v = mesh.vertices @ rotation.T * scale + np.asarray(translation, dtype=np.float64)
    return mesh.with_vertices(v)


def _unique_edges(faces: np.ndarray):
    directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    und = np.sort(directed, axis=1)
    edges, inv, counts = np.unique(und, axis=0, return_inverse=True, return_counts=True)
    return edges, inv.reshape(3, -1).T, counts  # inv as (n_faces, 3): edges ab, bc, ca


def subdivide_midpoint(mesh: Mesh, iterations: int = 1) -> Mesh:
    """1-to-4 split with new vertices at edge midpoints; geometry unchanged."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    v, f = np.array(mesh.vertices), np.array(mesh.faces)
    for _ in range(iterations):
        edges, einv, _ = _unique_edges(f)
        mid = 0.5 * (v[edges[:, 0]] + v[edges[:, 1]])
        m = einv + len(v)
        a, b, c = f[:, 0], f[:, 1], f[:, 2]
        mab, mbc, mca = m[:, 0], m[:, 1], m[:, 2]
        f = np.concatenate(
            [
                np.stack([a, mab, mca], axis=1),
                np.stack([mab, b, mbc], axis=1),
                np.stack([mca, mbc, c], axis=1),
                np.stack([mab, mbc, mca], axis=1),
            ]
        )
        v = np.concatenate([v, mid])
    return Mesh(v, f)


def _edge_face_table(faces: np.ndarray, edges: np.ndarray, einv: np.ndarray, counts: np.ndarray):
    """For each unique edge: up to two incident faces (-1 when absent)."""
    if (counts > 2).any():
        raise MeshError("non-manifold edge (more than 2 incident faces)")
    ef = np.full((len(edges), 2), -1, dtype=np.int64)
    for corner in range(3):
        for fi, e in enumerate(einv[:, corner]):
            if ef[e, 0] == -1:
                ef[e, 0] = fi
            else:
                ef[e, 1] = fi
    return ef


def subdivide_loop(mesh: Mesh, iterations: int = 1) -> Mesh:
    """Loop subdivision with the standard interior and boundary masks."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    v, f = np.array(mesh.vertices), np.array(mesh.faces)
    for _ in range(iterations):
        edges, einv, counts = _unique_edges(f)
        ef = _edge_face_table(f, edges, einv, counts)
        boundary_edge = counts == 1

        # new edge points
        a, b = edges[:, 0], edges[:, 1]
        epts = np.empty((len(edges), 3))
        interior = ~boundary_edge
        if interior.any():
            f1 = ef[interior, 0]
            f2 = ef[interior, 1]
            opp1 = f[f1].sum(axis=1) - a[interior] - b[interior]
            opp2 = f[f2].sum(axis=1) - a[interior] - b[interior]
            epts[interior] = (
                0.375 * (v[a[interior]] + v[b[interior]]) + 0.125 * (v[opp1] + v[opp2])
            )
        if boundary_edge.any():
            epts[boundary_edge] = 0.5 * (v[a[boundary_edge]] + v[b[boundary_edge]])

        # relaxed old vertices
        n = len(v)
        src = np.concatenate([a, b])
        dst = np.concatenate([b, a])
        deg = np.bincount(src, minlength=n).astype(np.float64)
        ringsum = np.zeros((n, 3))
        np.add.at(ringsum, src, v[dst])

        on_boundary = np.zeros(n, dtype=bool)
        on_boundary[edges[boundary_edge].ravel()] = True

        k = np.maximum(deg, 1)
        beta = (1.0 / k) * (0.625 - (0.375 + 0.25 * np.cos(2 * np.pi / k)) ** 2)
        newv = (1 - k * beta)[:, None] * v + beta[:, None] * ringsum

        # boundary rule: 3/4 v + 1/8 (two boundary neighbours)
        bsrc = np.concatenate([a[boundary_edge], b[boundary_edge]])
        bdst = np.concatenate([b[boundary_edge], a[boundary_edge]])
        bdeg = np.bincount(bsrc, minlength=n).astype(np.float64)
        bsum = np.zeros((n, 3))
        np.add.at(bsum, bsrc, v[bdst])
        two = on_boundary & (bdeg == 2)
        newv[two] = 0.75 * v[two] + 0.125 * bsum[two]
        odd = on_boundary & (bdeg != 2)  # corner of a non-manifold boundary
        newv[odd] = v[odd]

        isolated = deg == 0
        newv[isolated] = v[isolated]

        m = einv + n
        fa, fb, fc = f[:, 0], f[:, 1], f[:, 2]
        mab, mbc, mca = m[:, 0], m[:, 1], m[:, 2]
        f = np.concatenate(
            [
                np.stack([fa, mab, mca], axis=1),
                np.stack([mab, fb, mbc], axis=1),
                np.stack([mca, mbc, fc], axis=1),
                np.stack([mab, mbc, mca], axis=1),
            ]
        )
        v = np.concatenate([newv, epts])
    return Mesh(v, f)


def subdivide_sqrt3(mesh: Mesh, iterations: int = 1) -> Mesh:
    """Kobbelt sqrt(3) subdivision: face centroids inserted, old edges flipped.

    Boundary edges keep a triangle with their face centroid; boundary vertices
    stay fixed.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    v, f = np.array(mesh.vertices), np.array(mesh.faces)
    for _ in range(iterations):
        edges, einv, counts = _unique_edges(f)
        ef = _edge_face_table(f, edges, einv, counts)
        centroids = v[f].mean(axis=1)

        n = len(v)
        a, b = edges[:, 0], edges[:, 1]
        src = np.concatenate([a, b])
        dst = np.concatenate([b, a])
        deg = np.bincount(src, minlength=n).astype(np.float64)
        ringsum = np.zeros((n, 3))
        np.add.at(ringsum, src, v[dst])

        boundary_edge = counts == 1
        on_boundary = np.zeros(n, dtype=bool)
        on_boundary[edges[boundary_edge].ravel()] = True

        k = np.maximum(deg, 1)
        alpha = (4.0 - 2.0 * np.cos(2.0 * np.pi / k)) / 9.0
        newv = (1 - alpha)[:, None] * v + alpha[:, None] * (ringsum / k[:, None])
        fixed = on_boundary | (deg == 0)
        newv[fixed] = v[fixed]

        cid = np.arange(len(f)) + n

        # directed edges of each face, to keep orientation consistent
        new_faces = []
        interior = ~boundary_edge
        f1 = ef[:, 0]
        f2 = ef[:, 1]
        # for the directed edge (a -> b) appearing in face f1 the two flip
        # triangles are (a, c1, c2) and (b, c2, c1)
        dir_in_f1 = _edge_direction_in_face(f, f1, a, b)
        aa = np.where(dir_in_f1, a, b)
        bb = np.where(dir_in_f1, b, a)
        i = interior
        new_faces.append(np.stack([aa[i], cid[f2[i]], cid[f1[i]]], axis=1))
        new_faces.append(np.stack([bb[i], cid[f1[i]], cid[f2[i]]], axis=1))
        be = boundary_edge
        new_faces.append(np.stack([aa[be], bb[be], cid[f1[be]]], axis=1))
        f = np.concatenate(new_faces)
        v = np.concatenate([newv, centroids])
    return Mesh(v, f)


def _edge_direction_in_face(faces: np.ndarray, face_idx: np.ndarray,
                            a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """True where face `face_idx` contains the directed edge a -> b."""
    tri = faces[face_idx]
    return (
        ((tri[:, 0] == a) & (tri[:, 1] == b))
        | ((tri[:, 1] == a) & (tri[:, 2] == b))
        | ((tri[:, 2] == a) & (tri[:, 0] == b))
    )


def crop(mesh: Mesh, ratio: float) -> Mesh:
    """Delete the top ratio% of vertices along the principal axis.

    Faces touching a deleted vertex go with it; remaining vertices are
    reindexed densely in their original order.
    """
    if not 0 <= ratio < 100:
        raise ValueError("ratio must be in [0, 100)")
    n = mesh.n_vertices
    k = int(round(ratio / 100.0 * n))
    if k == 0:
        return mesh.with_vertices(mesh.vertices)
    centered = mesh.vertices - mesh.vertices.mean(axis=0)
    cov = centered.T @ centered
    _, vecs = np.linalg.eigh(cov)
    axis = vecs[:, -1]
    if axis[np.argmax(np.abs(axis))] < 0:  # deterministic orientation
        axis = -axis
    proj = centered @ axis
    order = np.argsort(proj, kind="stable")
    drop = order[n - k:]
    keep_mask = np.ones(n, dtype=bool)
    keep_mask[drop] = False
    if keep_mask.sum() < 3:
        raise MeshError("crop would leave fewer than 3 vertices")
    remap = -np.ones(n, dtype=np.int64)
    remap[keep_mask] = np.arange(int(keep_mask.sum()))
    face_ok = keep_mask[mesh.faces].all(axis=1)
    if not face_ok.any():
        raise MeshError("crop would leave no faces")
    return Mesh(mesh.vertices[keep_mask], remap[mesh.faces[face_ok]])


def reorder_elements(mesh: Mesh, kind: int, seed: int = 0) -> Mesh:
    """Permute storage order: 1 = vertices, 2 = faces, 3 = both.

    Pure renumbering; the surface is untouched.
    """
    if kind not in (1, 2, 3):
        raise ValueError("kind must be 1, 2 or 3")
    rng = np.random.default_rng(seed)
    v, f = mesh.vertices, mesh.faces
    if kind in (1, 3):
        perm = rng.permutation(mesh.n_vertices)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(mesh.n_vertices)
        v = v[perm]
        f = inverse[f]
    if kind in (2, 3):
        fperm = rng.permutation(mesh.n_faces)
        f = f[fperm]
    return Mesh(v, f)
