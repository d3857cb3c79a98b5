"""Dithered scalar quantization index modulation (QIM).

One bit is hidden in a scalar by snapping it to one of two interleaved
lattices of pitch delta:

    Q_b(x) = delta * round((x - d_b) / delta) + d_b

with dithers d_0 = +delta/4 and d_1 = -delta/4, so points of opposite bits
alternate every delta/2. Detection returns the bit of the nearest lattice
point. round() is half-away-from-zero, pinned so independent implementations
agree on half-integer inputs.
"""

from __future__ import annotations

import numpy as np


class CapacityError(Exception):
    """An interval is too narrow to hold the requested lattice point(s)."""


def _round_half_away(t: np.ndarray) -> np.ndarray:
    # np.round would round halves to even; the contract pins half away from zero
    return np.sign(t) * np.floor(np.abs(t) + 0.5)


def _dither(bit) -> np.ndarray:
    return np.where(np.asarray(bit) == 0, 0.25, -0.25)


def quantize_bit(x, bit, delta: float):
    """Snap x to the nearest point of the lattice carrying `bit`.

    Works elementwise on arrays; `bit` may be a scalar or an array of 0/1.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=np.float64)
    d = _dither(bit) * delta
    q = delta * _round_half_away((x - d) / delta) + d
    if q.ndim == 0:
        return float(q)
    return q


def detect_bit(x, delta: float):
    """Bit of the lattice point nearest to x; exact ties resolve to 0."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=np.float64)
    d0 = np.abs(x - quantize_bit(x, 0, delta))
    d1 = np.abs(x - quantize_bit(x, 1, delta))
    bit = (d1 < d0).astype(np.uint8)
    if bit.ndim == 0:
        return int(bit)
    return bit


def quantize_bit_bounded(x: float, bit: int, delta: float, lo: float, hi: float) -> float:
    """Nearest `bit`-lattice point to x restricted to [lo, hi].

    Requires hi - lo >= 2*delta, which guarantees the interval contains at
    least one point of each lattice.
    """
    if hi - lo < 2 * delta:
        raise CapacityError(f"interval [{lo}, {hi}] narrower than 2*delta = {2 * delta}")
    return float(
        quantize_bits_bounded(
            np.array([x]), np.array([bit]), delta, np.array([lo]), np.array([hi])
        )[0]
    )


def quantize_bits_bounded(
    x: np.ndarray, bits: np.ndarray, delta: float, lo: np.ndarray, hi: np.ndarray
) -> np.ndarray:
    """Vectorized bounded quantization; intervals must each span >= one lattice step.

    Used by the embedder with per-carrier bin bounds. Callers guarantee
    hi - lo >= delta so an in-range point exists; the public scalar wrapper
    enforces the stricter 2*delta contract.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=np.float64)
    q = np.asarray(quantize_bit(x, bits, delta), dtype=np.float64)

    # shift lattice points that fell outside the interval back inside;
    # the small epsilon guards against exact-multiple fp in the ceil
    below = q < lo
    if below.any():
        k = np.ceil((lo[below] - q[below]) / delta - 1e-12)
        q[below] = q[below] + k * delta
        still = q < lo
        q[still] += delta
    above = q > hi
    if above.any():
        k = np.ceil((q[above] - hi[above]) / delta - 1e-12)
        q[above] = q[above] - k * delta
        still = q > hi
        q[still] -= delta

    if (q < lo).any() or (q > hi).any():
        raise CapacityError("no lattice point of the requested bit inside the interval")
    return q
