"""Arbitrary-length DFT, cyclic convolution and deterministic summation.

``dft(x, sign)`` returns ``X[j] = sum_t x[t] * exp(sign * 2*pi*i * j*t / N)``
for any N.  Below ``NAIVE_MAX`` it is a direct matrix product with exact
integer phase indices; above it, Bluestein's chirp transform reduces the
problem to power-of-two FFTs.
"""

from __future__ import annotations

import numpy as np

NAIVE_MAX = 512


def pairwise_sum(x, axis: int = -1):
    """Sum along ``axis`` by a fixed balanced binary tree.

    The association order depends only on the length, so results are
    reproducible bit for bit; rounding error grows like log2(N).
    """
    x = np.moveaxis(np.asarray(x), axis, -1)
    if x.shape[-1] == 0:
        return np.zeros(x.shape[:-1], dtype=x.dtype)[()]
    while x.shape[-1] > 1:
        if x.shape[-1] % 2:
            x = np.concatenate([x, np.zeros(x.shape[:-1] + (1,), dtype=x.dtype)], axis=-1)
        x = x[..., 0::2] + x[..., 1::2]
    return x[..., 0][()]


def unit_roots(n: int, sign: int = 1) -> np.ndarray:
    """exp(sign * 2*pi*i * t/n) for t in [0, n)."""
    return np.exp(sign * 2j * np.pi * np.arange(n) / n)


def _naive(x: np.ndarray, sign: int) -> np.ndarray:
    n = x.shape[-1]
    idx = np.outer(np.arange(n), np.arange(n)) % n
    w = unit_roots(n, sign)[idx]
    return x @ w.T


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


def _bluestein(x: np.ndarray, sign: int) -> np.ndarray:
    n = x.shape[-1]
    m = _next_pow2(2 * n - 1)
    t = np.arange(n, dtype=np.int64)
    # t**2 mod 2n keeps the chirp argument small and exact
    chirp = np.exp(sign * 1j * np.pi * ((t * t) % (2 * n)) / n)
    a = np.zeros(x.shape[:-1] + (m,), dtype=complex)
    a[..., :n] = x * chirp
    b = np.zeros(m, dtype=complex)
    b[:n] = np.conj(chirp)
    b[m - n + 1:] = np.conj(chirp[1:])[::-1]
    conv = np.fft.ifft(np.fft.fft(a, axis=-1) * np.fft.fft(b), axis=-1)
    return conv[..., :n] * chirp


def dft(x, sign: int = -1) -> np.ndarray:
    """Length-N DFT along the last axis with the given exponent sign."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    if n == 0:
        return x.copy()
    if n < NAIVE_MAX:
        return _naive(x, sign)
    return _bluestein(x, sign)


def cyclic_convolve(a, b) -> np.ndarray:
    """c[k] = sum_{i + j = k mod N} a[i] b[j], along the last axis.

    Zero-pads to a power of two >= 2N - 1 and folds the linear convolution.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n = a.shape[-1]
    m = _next_pow2(2 * n - 1)
    lin = np.fft.ifft(np.fft.fft(a, m, axis=-1) * np.fft.fft(b, m, axis=-1), axis=-1)
    out = lin[..., :n].copy()
    out[..., : n - 1] += lin[..., n : 2 * n - 1]
    return out
