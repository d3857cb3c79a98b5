"""Where does the watermark go? A tour of the saliency field.

Computes the two-scale saliency map on three reference surfaces and prints
what the carrier selection sees: a sphere has no features (saliency is pure
discretization noise), a flat grid is exactly silent, and a single bump
lights up right where the bump sits. Writes a vertex-colored COFF file per
surface so the fields can be inspected in any mesh viewer.
"""

import os

import numpy as np

from meshmark import corpus
from meshmark.mesh import bbox_diagonal
from meshmark.saliency import colored_off, compute_saliency, select_salient

OUT_DIR = os.path.join(os.path.dirname(__file__), "out")
SIGMA_FRAC = 0.015  # kernel width as a fraction of the bounding-box diagonal
RATIO = 0.70


def describe(name, mesh):
    sigma = SIGMA_FRAC * bbox_diagonal(mesh)
    smap = compute_saliency(mesh, sigma)
    vals = smap.values

    print(f"\n{name}: {mesh.n_vertices} vertices, sigma = {sigma:.4f}")
    print(f"  saliency min/mean/max = {vals.min():.3g} / {vals.mean():.3g} / {vals.max():.3g}")
    if vals.mean() > 0:
        print(f"  spread (std/mean)     = {vals.std() / vals.mean():.3f}")

    peak = mesh.vertices[int(np.argmax(vals))]
    print(f"  peak vertex at        = ({peak[0]:+.3f}, {peak[1]:+.3f}, {peak[2]:+.3f})")

    carriers = select_salient(smap, RATIO)
    print(f"  carriers at ratio {RATIO:.2f} = {len(carriers)} vertices")

    path = os.path.join(OUT_DIR, f"{name}_saliency.off")
    with open(path, "w") as f:
        f.write(colored_off(mesh, smap))
    print(f"  wrote {path}")


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    describe("icosphere", corpus.icosphere(4))
    describe("flat_grid", corpus.flat_grid())
    describe("bump_grid", corpus.bump_grid())
    describe("bumpy_sphere", corpus.bumpy_sphere())
    print("\nThe embedder only touches the top 70% of this field, so featureless")
    print("regions (and the exact span extremes) stay bit-identical to the input.")


if __name__ == "__main__":
    main()
