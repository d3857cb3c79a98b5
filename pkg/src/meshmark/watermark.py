"""Blind watermark embedding and extraction.

Protocol
--------
Embedding normalizes the mesh (centroid 0, mean vertex norm 1), ranks vertices
by two-scale curvature saliency, and takes the top `ratio` as carriers. The
carrier norm range [min, max] is cut into `payload` equal-width bins; bin i
carries payload bit i. Every carrier in a bin has its vertex norm snapped to
the QIM lattice of that bin's bit, bounded to stay strictly inside the bin
(minus a small guard band), and the vertex is rescaled radially. Carriers
sitting exactly at the span's min or max are left untouched (anchors) so a
blind extractor recomputing [min, max] reconstructs the identical bins.

Extraction repeats the same walk on the suspect mesh, lets every carrier vote
the bit of its nearest lattice point, and takes the per-bin majority.
Agreement with the key's reference bit string is summarized by Pearson
correlation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh, bbox_diagonal, normalize, vertex_norms
from .qim import CapacityError, detect_bit, quantize_bits_bounded
from .saliency import compute_saliency, select_salient

__all__ = [
    "WatermarkKey",
    "EmbedReport",
    "CapacityError",
    "generate_watermark",
    "assign_bins",
    "bin_index",
    "embed",
    "extract",
    "correlation",
    "load_key",
    "save_key",
    "DEFAULT_KEY1",
]

DEFAULT_KEY1 = 2718281828


@dataclass(frozen=True)
class WatermarkKey:
    """Everything the blind detector needs.

    key1 seeds the payload bit string; delta is the quantization step in
    canonical (mean-norm-1) units; payload is the bit count; ratio the salient
    fraction used as carriers; sigma_frac the saliency kernel width as a
    fraction of the bounding-box diagonal.
    """

    key1: int = DEFAULT_KEY1
    delta: float = 0.06
    payload: int = 6
    ratio: float = 0.70
    sigma_frac: float = 0.015

    def __post_init__(self):
        if not 0 <= self.key1 < 2**64:
            raise ValueError("key1 must be an unsigned 64-bit integer")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.payload < 1:
            raise ValueError("payload must be at least 1 bit")
        if not 0 < self.ratio <= 1:
            raise ValueError("ratio must be in (0, 1]")
        if self.sigma_frac <= 0:
            raise ValueError("sigma_frac must be positive")


@dataclass
class EmbedReport:
    """What the embedder did: per-bit carrier counts and skip statistics."""

    carriers_per_bit: np.ndarray
    skipped_anchor: int
    skipped_zero_norm: int
    bin_edges: np.ndarray = field(repr=False)
    carrier_count: int = 0
    rebalanced: int = 0


_MASK64 = (1 << 64) - 1


def _splitmix64(seed: int, n: int) -> list[int]:
    """The SplitMix64 sequence; fixed published constants, no numpy involved."""
    state = seed & _MASK64
    out = []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z = z ^ (z >> 31)
        out.append(z)
    return out


def generate_watermark(key1: int, m: int) -> np.ndarray:
    """Deterministic payload: top bit of each SplitMix64 output, m bits.

    The generator is pinned by constant vectors in the test suite so any
    reimplementation must byte-match.
    """
    if not 0 <= key1 < 2**64:
        raise ValueError("key1 must be an unsigned 64-bit integer")
    if m < 1:
        raise ValueError("m must be at least 1")
    return np.array([z >> 63 for z in _splitmix64(key1, m)], dtype=np.uint8)


def assign_bins(norms: np.ndarray, m: int, delta: float) -> np.ndarray:
    """Equal-width bin edges over a norm span padded by delta on each side.

    Returns m+1 edges spanning [min - delta, max + delta] of the norms.
    Raises CapacityError when the bin width would drop below 2*delta (each
    bin must hold at least one point of each QIM lattice).
    """
    x = np.asarray(norms, dtype=np.float64)
    if x.size == 0:
        raise CapacityError("no carrier norms to bin")
    if m < 1:
        raise ValueError("m must be at least 1")
    lo, hi = float(x.min()) - delta, float(x.max()) + delta
    width = (hi - lo) / m
    if width < 2 * delta:
        raise CapacityError(
            f"norm span {hi - lo:.6g} gives bin width {width:.6g} < 2*delta = "
            f"{2 * delta:.6g}; use a smaller payload or a smaller delta"
        )
    return np.linspace(lo, hi, m + 1)


def bin_index(x: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Bin of each value; the last bin is closed so x == max lands in it."""
    idx = np.searchsorted(edges, np.asarray(x, dtype=np.float64), side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def _carrier_norms(mesh: Mesh, key: WatermarkKey):
    """Shared embed/extract walk.

    Returns the normalized mesh, its transform, carrier vertex ids, carrier
    norms, and the zero-norm skip count. The carrier norms themselves fix the
    bin span, so embed and extract must see the same carrier set.
    """
    canonical, transform = normalize(mesh)
    all_norms = vertex_norms(canonical)
    if key.ratio >= 1.0:
        # every vertex carries; the saliency pass cannot change the set
        carriers = np.lexsort((np.arange(canonical.n_vertices), all_norms))
    else:
        sigma = key.sigma_frac * bbox_diagonal(canonical)
        smap = compute_saliency(canonical, sigma)
        carriers = select_salient(smap, key.ratio)
    norms = all_norms[carriers]
    nonzero = norms > 0.0
    return (canonical, transform, carriers[nonzero], norms[nonzero],
            int((~nonzero).sum()))


def embed(mesh: Mesh, key: WatermarkKey) -> tuple[Mesh, EmbedReport]:
    """Embed the key's payload; returns the marked mesh and a report.

    Unmodified vertices (non-salient, anchors, zero norm) are copied bit-exact
    from the input. Raises CapacityError when the norm span cannot hold the
    payload or some bin ends up without a quantizable carrier.

    Extraction recomputes the bin edges blindly from the observed carrier
    norms, so the carrier norm span must survive embedding exactly: carriers
    at the span extremes are left unquantized (anchors) and every quantized
    norm is kept inside [span min, span max] and strictly inside its bin.
    """
    canonical, transform, carriers, x, zero_skipped = _carrier_norms(mesh, key)
    if len(x) == 0:
        raise CapacityError("no usable carriers")
    span_lo, span_hi = float(x.min()), float(x.max())
    edges = assign_bins(x, key.payload, key.delta)
    width = edges[1] - edges[0]
    guard = min(key.delta / 2, (width - 2 * key.delta) / 2)

    anchor = (x == span_lo) | (x == span_hi)
    bits = generate_watermark(key.key1, key.payload)
    idx = bin_index(x, edges)

    counts = np.bincount(idx[~anchor], minlength=key.payload)
    if (counts == 0).any():
        empty = np.flatnonzero(counts == 0)
        raise CapacityError(
            f"bins {empty.tolist()} have no quantizable carrier; "
            "use a smaller payload or a mesh with better norm coverage"
        )

    quantize = ~anchor
    lo = np.maximum(edges[idx[quantize]] + guard, span_lo)
    hi = np.minimum(edges[idx[quantize] + 1] - guard, span_hi)
    q = quantize_bits_bounded(x[quantize], bits[idx[quantize]], key.delta, lo, hi)

    # Cancel the net norm change, else re-normalization at extraction would
    # see a drifted scale and shift every bin edge. Moving a carrier to the
    # next lattice point of its own bit keeps its vote and its bin.
    total = float(q.sum() - x[quantize].sum())
    steps = int(round(abs(total) / key.delta))
    rebalanced = 0
    if steps > 0:
        step = -key.delta if total > 0 else key.delta
        cand = np.flatnonzero((q + step >= lo) & (q + step <= hi))
        if steps < len(cand):
            stride = max(1, len(cand) // steps)
            cand = cand[::stride][:steps]
        q[cand] += step
        rebalanced = len(cand)

    moved = carriers[quantize]
    new_vertices = np.array(mesh.vertices)
    scaled = canonical.vertices[moved] * (q / x[quantize])[:, None]
    new_vertices[moved] = scaled * transform.scale + transform.centroid

    report = EmbedReport(
        carriers_per_bit=counts,
        skipped_anchor=int(anchor.sum()),
        skipped_zero_norm=zero_skipped,
        bin_edges=edges,
        carrier_count=int(len(x)),
        rebalanced=rebalanced,
    )
    return mesh.with_vertices(new_vertices), report


def extract(mesh: Mesh, key: WatermarkKey) -> tuple[np.ndarray, np.ndarray]:
    """Blind extraction: recovered bits and per-bit vote margins.

    The margin is (winner - loser) / votes per bin, in [0, 1]. A bin without
    votes yields bit 0 with margin 0; vote ties also yield bit 0.
    """
    _, _, _, x, _ = _carrier_norms(mesh, key)
    if len(x) == 0:
        raise CapacityError("no usable carriers")
    edges = assign_bins(x, key.payload, key.delta)
    idx = bin_index(x, edges)
    votes = detect_bit(x, key.delta)

    total = np.bincount(idx, minlength=key.payload).astype(np.float64)
    ones = np.bincount(idx, weights=votes.astype(np.float64), minlength=key.payload)
    zeros = total - ones
    bits = (ones > zeros).astype(np.uint8)
    with np.errstate(invalid="ignore", divide="ignore"):
        margins = np.where(total > 0, np.abs(ones - zeros) / np.maximum(total, 1), 0.0)
    return bits, margins


def correlation(a, b) -> float:
    """Pearson correlation between two equal-length bit vectors.

    When either vector is constant the coefficient is undefined; the exact
    match indicator (1.0 identical, 0.0 otherwise) is returned instead.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("bit vectors must be 1-D and of equal length")
    sa, sb = a.std(), b.std()
    if sa == 0.0 or sb == 0.0:
        return 1.0 if np.array_equal(a, b) else 0.0
    # identical (or complementary) vectors correlate at exactly +/-1; computing
    # them through the product form would land a few ulp off
    if np.array_equal(a, b):
        return 1.0
    if np.array_equal(a + b, np.ones_like(a)):
        return -1.0
    r = np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb)
    return float(np.clip(r, -1.0, 1.0))


_KEY_FIELDS = ("key1", "delta", "payload", "ratio", "sigma")


def save_key(key: WatermarkKey, path: str) -> None:
    """Write a key file: one `name = value` line per field."""
    text = (
        f"key1 = {int(key.key1)}\n"
        f"delta = {float(key.delta)!r}\n"
        f"payload = {int(key.payload)}\n"
        f"ratio = {float(key.ratio)!r}\n"
        f"sigma = {float(key.sigma_frac)!r}\n"
    )
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def load_key(path: str) -> WatermarkKey:
    """Read a key file written by save_key (missing fields take defaults)."""
    values = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'name = value'")
            name, _, val = line.partition("=")
            name, val = name.strip(), val.strip()
            if name not in _KEY_FIELDS:
                raise ValueError(f"{path}:{lineno}: unknown key field {name!r}")
            values[name] = val
    kwargs = {}
    try:
        if "key1" in values:
            kwargs["key1"] = int(values["key1"])
        if "delta" in values:
            kwargs["delta"] = float(values["delta"])
        if "payload" in values:
            kwargs["payload"] = int(values["payload"])
        if "ratio" in values:
            kwargs["ratio"] = float(values["ratio"])
        if "sigma" in values:
            kwargs["sigma_frac"] = float(values["sigma"])
    except ValueError as exc:
        raise ValueError(f"{path}: bad key field value: {exc}") from None
    return WatermarkKey(**kwargs)
