"""Sequential 1D FFT primitives and the brute-force DFT oracle.

All transforms are unnormalized in both directions, so a forward transform
followed by an inverse one scales the input by ``N``.
"""

from __future__ import annotations

import enum
import functools
from typing import NamedTuple

import numpy as np

from . import _accel
from .errors import InvalidArgumentError, UnsupportedSizeError

if _accel.USE_NUMBA:
    from . import _numba_kernels as backend
else:
    from . import _numpy_kernels as backend

BACKEND_NAME = "numba" if _accel.USE_NUMBA else "numpy"
DEFAULT_BASE_CASE = 8


class Direction(enum.IntEnum):
    """Sign of the exponent in the transform kernel."""

    FORWARD = -1
    INVERSE = 1


def is_power_of_two(n) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def check_length(n: int) -> None:
    if n < 1:
        raise InvalidArgumentError("transform length must be >= 1")
    if not is_power_of_two(n):
        raise UnsupportedSizeError(f"length {n} is not a power of two")


def _readonly(a):
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=None)
def unit_roots(n: int, direction: Direction) -> np.ndarray:
    """All ``n`` roots ``exp(sign * 2*pi*i * j / n)``, quarter turns snapped exactly."""
    sign = int(direction)
    theta = 2.0 * np.pi * np.arange(n) / n
    w = np.cos(theta) + 1j * sign * np.sin(theta)
    w[0] = 1.0
    if n % 2 == 0:
        w[n // 2] = -1.0
    if n % 4 == 0:
        w[n // 4] = complex(0.0, sign)
        w[3 * n // 4] = complex(0.0, -sign)
    return _readonly(w)


def twiddle_table(n: int, direction: Direction = Direction.FORWARD) -> np.ndarray:
    """First ``n/2`` twiddle factors ``exp(sign * 2*pi*i * j / n)``.

    The returned array is shared and read-only.
    """
    check_length(n)
    return _cached_twiddles(n, Direction(direction))


@functools.lru_cache(maxsize=None)
def _cached_twiddles(n, direction):
    return _readonly(unit_roots(n, direction)[: n // 2].copy())


def _bit_reverse(values: np.ndarray, bits: int) -> np.ndarray:
    out = np.zeros_like(values)
    v = values.copy()
    for _ in range(bits):
        out = (out << 1) | (v & 1)
        v >>= 1
    return out


@functools.lru_cache(maxsize=None)
def leaf_permutation(n: int, base: int) -> np.ndarray:
    """Input index for each slot of the leaf layout.

    Block ``p`` of length ``base`` holds the sub-sequence ``x[rev(p)::n//base]``
    in natural order, where ``rev`` reverses ``log2(n // base)`` bits.
    """
    nblocks = n // base
    bits = nblocks.bit_length() - 1
    starts = _bit_reverse(np.arange(nblocks, dtype=np.int64), bits)
    perm = (starts[:, None] + nblocks * np.arange(base, dtype=np.int64)[None, :]).ravel()
    return _readonly(perm)


class FFTTables(NamedTuple):
    """Precomputed arrays for one (length, base case, direction) triple."""

    n: int
    base: int
    perm: np.ndarray
    roots: np.ndarray
    twiddles: np.ndarray


def effective_base(n: int, base_case: int) -> int:
    if not is_power_of_two(base_case):
        raise InvalidArgumentError(f"base_case {base_case} must be a power of two >= 1")
    return min(base_case, n)


@functools.lru_cache(maxsize=None)
def fft_tables(n: int, base_case: int = DEFAULT_BASE_CASE,
               direction: Direction = Direction.FORWARD) -> FFTTables:
    """Tables for transforms of length ``n``; a base case above ``n`` is clamped to ``n``."""
    check_length(n)
    base = effective_base(n, base_case)
    direction = Direction(direction)
    # twiddle_table(1) is empty; numba still wants a typed array
    tw = _cached_twiddles(n, direction) if n > 1 else _readonly(np.ones(1, dtype=np.complex128))
    return FFTTables(n, base, leaf_permutation(n, base), unit_roots(base, direction), tw)


def _as_signal(x, dtype) -> np.ndarray:
    a = np.asarray(x)
    if a.ndim != 1:
        raise InvalidArgumentError(f"expected a 1D signal, got shape {a.shape}")
    if a.size == 0:
        raise InvalidArgumentError("signal is empty")
    return np.ascontiguousarray(a, dtype=dtype)


def dft_oracle(x, direction: Direction = Direction.FORWARD) -> np.ndarray:
    """Direct O(N^2) evaluation of the DFT sum, for any length ``N >= 1``.

    ``x`` may be a single signal of shape ``(N,)`` or a batch ``(m, N)``;
    each row is transformed independently.
    """
    a = np.asarray(x)
    if a.ndim not in (1, 2):
        raise InvalidArgumentError(f"expected shape (N,) or (m, N), got {a.shape}")
    if a.size == 0:
        raise InvalidArgumentError("signal is empty")
    n = a.shape[-1]
    k = np.arange(n)
    w = unit_roots(n, Direction(direction))[np.outer(k, k) % n]
    return a.astype(np.complex128) @ w.T


def dft2_oracle(grid, direction: Direction = Direction.FORWARD) -> np.ndarray:
    """Full 2D DFT by applying :func:`dft_oracle` along rows, then columns."""
    a = np.asarray(grid)
    rows_done = dft_oracle(a, direction)
    return dft_oracle(rows_done.T, direction).T


def fft_c2c(x, direction: Direction = Direction.FORWARD,
            base_case: int = DEFAULT_BASE_CASE) -> np.ndarray:
    """Complex-to-complex FFT of a power-of-two length signal.

    When ``base_case >= len(x)`` the recursion never splits and the result is
    the direct sum computed by :func:`dft_oracle`.
    """
    a = _as_signal(x, np.complex128)
    n = a.shape[0]
    check_length(n)
    if effective_base(n, base_case) == n:
        return dft_oracle(a, direction)
    t = fft_tables(n, base_case, Direction(direction))
    out = a.reshape(1, n).copy()
    backend.fft_rows_c2c(out, 0, 1, t.perm, t.roots, t.twiddles, t.base)
    return out[0]


def fft_r2c(x, base_case: int = DEFAULT_BASE_CASE) -> np.ndarray:
    """Forward real-to-complex FFT returning the ``N/2 + 1`` non-redundant bins."""
    a = _as_signal(x, np.float64)
    n = a.shape[0]
    check_length(n)
    if n < 2:
        raise UnsupportedSizeError("real-to-complex transform needs N >= 2")
    t = fft_tables(n, base_case, Direction.FORWARD)
    out = np.empty((1, n // 2 + 1), dtype=np.complex128)
    backend.fft_rows_r2c(a.reshape(1, n), out, 0, 1, t.perm, t.roots, t.twiddles, t.base)
    return out[0]


def fft_rows_c2c(a: np.ndarray, lo: int, hi: int, tables: FFTTables) -> None:
    """In-place c2c transform of rows ``lo:hi`` of the 2D complex array ``a``."""
    backend.fft_rows_c2c(a, lo, hi, tables.perm, tables.roots, tables.twiddles, tables.base)


def fft_rows_r2c(src: np.ndarray, dst: np.ndarray, lo: int, hi: int, tables: FFTTables) -> None:
    """r2c transform of rows ``lo:hi`` of real ``src`` into complex ``dst``."""
    backend.fft_rows_r2c(src, dst, lo, hi, tables.perm, tables.roots, tables.twiddles, tables.base)


def fft_cols_c2c(a: np.ndarray, lo: int, hi: int, tables: FFTTables) -> None:
    """In-place c2c transform of columns ``lo:hi`` of ``a``, read with the row stride."""
    backend.fft_cols_c2c(a, lo, hi, tables.perm, tables.roots, tables.twiddles, tables.base)
