"""numba implementations of the hot loops.

Every function here is compiled with ``nogil=True`` so that worker threads of
the parallel engines run them concurrently. Row-range arguments ``lo, hi``
select a half-open slice of rows (or columns for the strided kernel) so that
disjoint ranges can be handed to different workers.
"""

import numpy as np

from ._accel import njit


@njit
def fft_into(src, dst, perm, roots, twiddles, base):
    """Radix-2 DIT transform of ``src`` into ``dst`` (they must not alias).

    Leaves of length ``base`` are evaluated as direct sums on the
    sub-sequences selected by ``perm``; butterflies combine them upwards.
    """
    n = dst.shape[0]
    nblocks = n // base
    for p in range(nblocks):
        off = p * base
        for k in range(base):
            acc = 0j
            for m in range(base):
                acc += src[perm[off + m]] * roots[(k * m) % base]
            dst[off + k] = acc
    half = base
    while half < n:
        step = n // (2 * half)
        for start in range(0, n, 2 * half):
            for k in range(half):
                t = twiddles[k * step] * dst[start + half + k]
                u = dst[start + k]
                dst[start + k] = u + t
                dst[start + half + k] = u - t
        half *= 2


@njit
def fft_rows_c2c(a, lo, hi, perm, roots, twiddles, base):
    n = a.shape[1]
    tmp = np.empty(n, dtype=np.complex128)
    for r in range(lo, hi):
        for i in range(n):
            tmp[i] = a[r, i]
        fft_into(tmp, a[r], perm, roots, twiddles, base)


@njit
def fft_rows_r2c(src, dst, lo, hi, perm, roots, twiddles, base):
    n = src.shape[1]
    nout = dst.shape[1]
    full = np.empty(n, dtype=np.complex128)
    for r in range(lo, hi):
        fft_into(src[r], full, perm, roots, twiddles, base)
        for k in range(nout):
            dst[r, k] = full[k]


@njit
def fft_cols_c2c(a, lo, hi, perm, roots, twiddles, base):
    n = a.shape[0]
    col = np.empty(n, dtype=np.complex128)
    out = np.empty(n, dtype=np.complex128)
    for c in range(lo, hi):
        for i in range(n):
            col[i] = a[i, c]
        fft_into(col, out, perm, roots, twiddles, base)
        for i in range(n):
            a[i, c] = out[i]


@njit
def transpose_rows_naive(src, dst, lo, hi):
    # dst[lo:hi, :] = src[:, lo:hi].T
    nsrc = src.shape[0]
    for j in range(lo, hi):
        for i in range(nsrc):
            dst[j, i] = src[i, j]


@njit
def transpose_rows_blocked(src, dst, lo, hi, block):
    nsrc = src.shape[0]
    for j0 in range(lo, hi, block):
        j1 = min(j0 + block, hi)
        for i0 in range(0, nsrc, block):
            i1 = min(i0 + block, nsrc)
            for j in range(j0, j1):
                for i in range(i0, i1):
                    dst[j, i] = src[i, j]
