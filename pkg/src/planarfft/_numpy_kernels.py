"""Pure-numpy fallbacks with the same signatures as ``_numba_kernels``.

These vectorize over the selected rows instead of looping, so their rounding
differs from the compiled kernels in the last bits; both stay well inside the
oracle tolerances. Every row sees the same sequence of elementwise operations
however many rows are batched, so results do not depend on how a strategy
splits the rows.
"""

import numpy as np


def _leaf_matrix(roots, base):
    k = np.arange(base)
    return roots[np.outer(k, k) % base]


def fft_batch(x, perm, roots, twiddles, base):
    """Transform each row of the 2D array ``x``; returns a new complex array."""
    m, n = x.shape
    y = x[:, perm].astype(np.complex128, copy=False).reshape(m, n // base, base)
    # fixed-order accumulation rather than matmul: BLAS picks different
    # kernels for different batch shapes, which changes the rounding
    w = _leaf_matrix(roots, base)
    leaf = y[..., 0:1] * w[:, 0]
    for j in range(1, base):
        leaf += y[..., j:j + 1] * w[:, j]
    y = leaf
    half = base
    while half < n:
        step = n // (2 * half)
        y = y.reshape(m, n // (2 * half), 2, half)
        u = y[:, :, 0, :]
        t = y[:, :, 1, :] * twiddles[::step][:half]
        y = np.stack((u + t, u - t), axis=2)
        half *= 2
    return y.reshape(m, n)


def fft_rows_c2c(a, lo, hi, perm, roots, twiddles, base):
    if hi > lo:
        a[lo:hi] = fft_batch(a[lo:hi], perm, roots, twiddles, base)


def fft_rows_r2c(src, dst, lo, hi, perm, roots, twiddles, base):
    if hi > lo:
        dst[lo:hi] = fft_batch(src[lo:hi], perm, roots, twiddles, base)[:, : dst.shape[1]]


def fft_cols_c2c(a, lo, hi, perm, roots, twiddles, base):
    if hi > lo:
        a[:, lo:hi] = fft_batch(a[:, lo:hi].T, perm, roots, twiddles, base).T


def transpose_rows_naive(src, dst, lo, hi):
    dst[lo:hi, :] = src[:, lo:hi].T


def transpose_rows_blocked(src, dst, lo, hi, block):
    nsrc = src.shape[0]
    for j0 in range(lo, hi, block):
        j1 = min(j0 + block, hi)
        for i0 in range(0, nsrc, block):
            i1 = min(i0 + block, nsrc)
            dst[j0:j1, i0:i1] = src[i0:i1, j0:j1].T
