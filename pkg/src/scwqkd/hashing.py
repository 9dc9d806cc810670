"""2-universal Toeplitz hashing over GF(2)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

__all__ = ["ToeplitzHasher", "bits_to_hex"]

_DIRECT_LIMIT = 1 << 16


@dataclass(frozen=True)
class ToeplitzHasher:
    """rows x cols Toeplitz matrix T[i, j] = diag[i - j + cols - 1]."""

    rows: int
    cols: int
    diag: np.ndarray

    def __post_init__(self):
        if self.rows < 0 or self.cols < 1:
            raise ValueError("need rows >= 0 and cols >= 1")
        if self.diag.shape != (self.rows + self.cols - 1,):
            raise ValueError("diagonal must hold rows + cols - 1 bits")

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> "ToeplitzHasher":
        diag = rng.integers(0, 2, size=rows + cols - 1, dtype=np.uint8)
        return cls(rows, cols, diag)

    def matrix(self) -> np.ndarray:
        i = np.arange(self.rows)[:, None]
        j = np.arange(self.cols)[None, :]
        return self.diag[i - j + self.cols - 1]

    def __call__(self, bits) -> np.ndarray:
        x = np.asarray(bits, dtype=np.uint8)
        if x.shape != (self.cols,):
            raise ValueError(f"input must have {self.cols} bits, got shape {x.shape}")
        if self.rows == 0:
            return np.zeros(0, dtype=np.uint8)
        if self.rows * self.cols <= _DIRECT_LIMIT:
            return ((self.matrix().astype(np.int64) @ x) % 2).astype(np.uint8)
        # y_i = sum_j diag[i + cols - 1 - j] x_j is a slice of the full convolution;
        # integer sums stay far below 2^52, so rounding the FFT result is exact
        conv = fftconvolve(self.diag.astype(np.float64), x.astype(np.float64))
        window = conv[self.cols - 1 : self.cols - 1 + self.rows]
        return (np.rint(window).astype(np.int64) % 2).astype(np.uint8)

    def hash_batch(self, xs) -> np.ndarray:
        """Hash each row of a 2-D bit array (dense matrix product)."""
        xs = np.asarray(xs, dtype=np.int64)
        return ((xs @ self.matrix().T.astype(np.int64)) % 2).astype(np.uint8)


def bits_to_hex(bits) -> str:
    """Lowercase hex of a bit array, MSB first, zero-padded to whole bytes."""
    b = np.asarray(bits, dtype=np.uint8)
    if b.size == 0:
        return ""
    return np.packbits(b).tobytes().hex()
