"""Tests for exact point-to-surface distances and sampled surface metrics.

The reference oracle here deliberately uses a different formulation than the
library (plane projection plus barycentric inside-test, scalar per face) so
both implementations cross-check each other.
"""

import numpy as np
import pytest

from meshmark import corpus
from meshmark.attacks import add_noise, reorder_elements
from meshmark.mesh import Mesh
from meshmark.metrics import (
    DistanceReport,
    TriangleIndex,
    hausdorff,
    mrms,
    point_to_surface_distance,
    sample_surface,
    surface_distance,
)


def ref_segment_distance(p, a, b):
    ab = b - a
    den = float(np.dot(ab, ab))
    t = float(np.clip(np.dot(p - a, ab) / den, 0.0, 1.0)) if den > 0 else 0.0
    return float(np.linalg.norm(p - (a + t * ab)))


def ref_triangle_distance(p, a, b, c):
    n = np.cross(b - a, c - a)
    nn = float(np.dot(n, n))
    if nn > 0:
        t = float(np.dot(p - a, n)) / nn
        q = p - t * n
        v0, v1, v2 = b - a, c - a, q - a
        d00 = float(np.dot(v0, v0))
        d01 = float(np.dot(v0, v1))
        d11 = float(np.dot(v1, v1))
        d20 = float(np.dot(v2, v0))
        d21 = float(np.dot(v2, v1))
        den = d00 * d11 - d01 * d01
        if den > 0:
            v = (d11 * d20 - d01 * d21) / den
            w = (d00 * d21 - d01 * d20) / den
            if v >= 0 and w >= 0 and v + w <= 1:
                return float(np.linalg.norm(p - q))
    return min(
        ref_segment_distance(p, a, b),
        ref_segment_distance(p, b, c),
        ref_segment_distance(p, c, a),
    )


def ref_surface_distance(points, mesh):
    tri = mesh.vertices[mesh.faces]
    out = np.empty(len(points))
    for i, p in enumerate(points):
        out[i] = min(ref_triangle_distance(p, *t) for t in tri)
    return out


def strip_mesh():
    v = np.array([[x, y, 0.0] for x in range(5) for y in range(2)])
    f = []
    for x in range(4):
        a, b, c, d = 2 * x, 2 * x + 1, 2 * x + 2, 2 * x + 3
        f += [[a, c, b], [b, c, d]]
    return Mesh(v, np.array(f))


class TestTriangleIndex:
    def test_matches_reference_on_closed_mesh(self):
        mesh = corpus.icosphere(1)
        rng = np.random.default_rng(21)
        pts = np.concatenate([
            rng.uniform(-2, 2, size=(120, 3)),     # all around
            rng.uniform(-0.1, 0.1, size=(20, 3)),   # deep inside
            mesh.vertices[:10] * 1.0000001,         # grazing the surface
            np.array([[50.0, -30.0, 10.0]]),        # far away
        ])
        got = TriangleIndex(mesh).query(pts)
        want = ref_surface_distance(pts, mesh)
        assert np.abs(got - want).max() < 1e-12

    def test_matches_reference_on_boundary_mesh(self):
        mesh = strip_mesh()
        rng = np.random.default_rng(22)
        pts = rng.uniform([-1, -1, -1], [5, 2, 1], size=(150, 3))
        got = TriangleIndex(mesh).query(pts)
        want = ref_surface_distance(pts, mesh)
        assert np.abs(got - want).max() < 1e-12

    def test_point_on_vertex_is_zero(self):
        mesh = corpus.icosphere(1)
        d = TriangleIndex(mesh).query(mesh.vertices)
        assert d.max() < 1e-12

    def test_height_above_triangle_interior(self):
        tri = Mesh(
            np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0]]),
            np.array([[0, 1, 2]]),
        )
        assert point_to_surface_distance([0.25, 0.25, 0.7], tri) == pytest.approx(0.7, abs=1e-15)
        assert point_to_surface_distance([0.25, 0.25, -0.7], tri) == pytest.approx(0.7, abs=1e-15)

    def test_collinear_face_falls_back_to_segments(self):
        # one degenerate face plus one proper face
        v = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0], [0.0, 3, 5]])
        mesh = Mesh(v, np.array([[0, 1, 2], [0, 1, 3]]))
        rng = np.random.default_rng(23)
        pts = rng.uniform(-1, 3, size=(60, 3))
        got = TriangleIndex(mesh).query(pts)
        want = ref_surface_distance(pts, mesh)
        assert np.abs(got - want).max() < 1e-12

    def test_reorder_invariance(self, small_sphere):
        rng = np.random.default_rng(24)
        pts = rng.uniform(-1.5, 1.5, size=(100, 3))
        base = TriangleIndex(small_sphere).query(pts)
        for kind in (1, 2, 3):
            shuffled = reorder_elements(small_sphere, kind, seed=9)
            assert np.array_equal(TriangleIndex(shuffled).query(pts), base)

    def test_single_point_convenience(self):
        mesh = corpus.icosphere(1)
        index = TriangleIndex(mesh)
        p = np.array([1.7, 0.2, -0.3])
        assert point_to_surface_distance(p, mesh) == index.query(p[None, :])[0]
        assert point_to_surface_distance(p, mesh, index=index) == index.query(p[None, :])[0]

    def test_empty_mesh_rejected(self):
        class Faceless:
            n_faces = 0

        with pytest.raises(ValueError, match="no faces"):
            TriangleIndex(Faceless())


class TestSampleSurface:
    def test_zero_samples_returns_vertices(self, small_sphere):
        pts = sample_surface(small_sphere, 0, seed=0)
        assert np.array_equal(pts, small_sphere.vertices)

    def test_count(self, small_sphere):
        pts = sample_surface(small_sphere, 4, seed=0)
        assert len(pts) == small_sphere.n_vertices + 4 * small_sphere.n_faces

    def test_prefix_extension(self, small_sphere):
        few = sample_surface(small_sphere, 2, seed=5)
        many = sample_surface(small_sphere, 5, seed=5)
        assert np.array_equal(many[: len(few)], few)

    def test_samples_lie_on_surface(self, small_sphere):
        pts = sample_surface(small_sphere, 3, seed=1)
        d = TriangleIndex(small_sphere).query(pts)
        assert d.max() < 1e-12

    def test_deterministic(self, small_sphere):
        a = sample_surface(small_sphere, 3, seed=1)
        b = sample_surface(small_sphere, 3, seed=1)
        c = sample_surface(small_sphere, 3, seed=2)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestSurfaceDistance:
    def test_self_distance_is_zero(self, small_sphere):
        report = surface_distance(small_sphere, small_sphere, samples_per_triangle=2, seed=0)
        assert report.mrms < 1e-12
        assert report.hausdorff < 1e-12

    def test_parallel_planes_offset(self):
        d = 0.01
        a = corpus.flat_grid(16, 2.0)
        b = a.with_vertices(a.vertices + np.array([0.0, 0.0, d]))
        report = surface_distance(a, b, samples_per_triangle=4, seed=0)
        assert report.mrms == pytest.approx(d, rel=1e-9)
        assert report.hausdorff == pytest.approx(d, rel=1e-9)
        assert report.rms_a_to_b == pytest.approx(d, rel=1e-9)

    def test_symmetry(self, small_sphere):
        other = add_noise(small_sphere, 0.5, seed=3)
        ab = surface_distance(small_sphere, other, samples_per_triangle=2, seed=0)
        ba = surface_distance(other, small_sphere, samples_per_triangle=2, seed=0)
        assert ab.mrms == ba.mrms
        assert ab.hausdorff == ba.hausdorff

    def test_hausdorff_dominates_mrms(self, small_sphere):
        other = add_noise(small_sphere, 0.5, seed=3)
        report = surface_distance(small_sphere, other, samples_per_triangle=2, seed=0)
        assert report.hausdorff >= report.mrms > 0

    def test_hausdorff_monotone_in_sampling(self, small_sphere):
        # more samples extend the set, so the max can only grow
        other = add_noise(small_sphere, 0.5, seed=3)
        coarse = hausdorff(small_sphere, other, samples_per_triangle=2, seed=0)
        fine = hausdorff(small_sphere, other, samples_per_triangle=10, seed=0)
        assert fine >= coarse

    def test_sample_count_reported(self, small_sphere):
        other = add_noise(small_sphere, 0.5, seed=3)
        report = surface_distance(small_sphere, other, samples_per_triangle=3, seed=0)
        assert report.sample_count == 2 * (small_sphere.n_vertices + 3 * small_sphere.n_faces)

    def test_scale_linearity_power_of_two(self, small_sphere):
        # doubling is exact in floating point, so the metric doubles exactly
        other = add_noise(small_sphere, 0.5, seed=3)
        base = surface_distance(small_sphere, other, samples_per_triangle=2, seed=0)
        big = surface_distance(
            small_sphere.with_vertices(small_sphere.vertices * 2.0),
            other.with_vertices(other.vertices * 2.0),
            samples_per_triangle=2,
            seed=0,
        )
        assert big.mrms == 2.0 * base.mrms
        assert big.hausdorff == 2.0 * base.hausdorff

    def test_wrapper_functions(self, small_sphere):
        other = add_noise(small_sphere, 0.5, seed=3)
        report = surface_distance(small_sphere, other, samples_per_triangle=2, seed=0)
        assert mrms(small_sphere, other, samples_per_triangle=2, seed=0) == report.mrms
        assert hausdorff(small_sphere, other, samples_per_triangle=2, seed=0) == report.hausdorff
