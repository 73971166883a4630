"""Discrete Fourier transforms for arbitrary lengths.

Thin wrappers over numpy's pocketfft, which handles non-power-of-two and
prime lengths in O(n log n) via mixed-radix splitting plus the Bluestein
chirp-z algorithm.  Kept as a seam so every circulant solve in the
package routes through one place.
"""

from __future__ import annotations

import numpy as np

__all__ = ["dft"]


def dft(v: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Unnormalized forward / 1-over-n inverse DFT of a complex vector.

    forward:  X_j = sum_k v_k exp(-2*pi*i*j*k/n)
    inverse:  x_k = (1/n) sum_j v_j exp(+2*pi*i*j*k/n)
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("dft expects a non-empty 1-D vector")
    if direction == "forward":
        return np.fft.fft(v)
    if direction == "inverse":
        return np.fft.ifft(v)
    raise ValueError(f"unknown direction {direction!r}")
