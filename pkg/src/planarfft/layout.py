"""Row-major 2D grids and the transpose / strided-column kernels.

A grid owns a flat buffer of ``rows * row_stride`` elements; only the first
``cols`` entries of each row are meaningful. ``row_stride`` lets the
``N2/2 + 1`` wide r2c output be padded without changing indexing code.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .kernel import DEFAULT_BASE_CASE, Direction, backend, fft_cols_c2c, fft_rows_c2c, fft_tables, is_power_of_two
from .errors import InvalidArgumentError, UnsupportedSizeError

DEFAULT_TRANSPOSE_BLOCK = 64


class SecondPass(enum.Enum):
    """How the column transforms of a 2D FFT reach their data."""

    TRANSPOSE = "transpose"
    STRIDED = "strided"


@dataclass(eq=False)
class _Grid:
    rows: int
    cols: int
    data: np.ndarray = field(repr=False)
    row_stride: int | None = None

    dtype = np.complex128

    def __post_init__(self):
        if self.row_stride is None:
            self.row_stride = self.cols
        if self.rows < 1 or self.cols < 1:
            raise InvalidArgumentError(f"grid extents must be positive, got {self.rows}x{self.cols}")
        if self.row_stride < self.cols:
            raise InvalidArgumentError(f"row_stride {self.row_stride} < cols {self.cols}")
        self.data = np.asarray(self.data)
        if self.data.ndim != 1 or self.data.shape[0] != self.rows * self.row_stride:
            raise InvalidArgumentError(
                f"data must be flat with {self.rows * self.row_stride} elements, got shape {self.data.shape}"
            )
        if self.data.dtype != self.dtype:
            raise InvalidArgumentError(f"expected dtype {np.dtype(self.dtype)}, got {self.data.dtype}")

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def array(self) -> np.ndarray:
        """Writable ``(rows, cols)`` view onto ``data``."""
        return self.data.reshape(self.rows, self.row_stride)[:, : self.cols]

    @classmethod
    def zeros(cls, rows, cols, row_stride=None):
        stride = cols if row_stride is None else row_stride
        return cls(rows, cols, np.zeros(rows * stride, dtype=cls.dtype), stride)

    @classmethod
    def empty(cls, rows, cols, row_stride=None):
        stride = cols if row_stride is None else row_stride
        return cls(rows, cols, np.empty(rows * stride, dtype=cls.dtype), stride)

    @classmethod
    def from_array(cls, a, row_stride=None):
        a = np.asarray(a)
        if a.ndim != 2:
            raise InvalidArgumentError(f"expected a 2D array, got shape {a.shape}")
        g = cls.zeros(a.shape[0], a.shape[1], row_stride)
        g.array[...] = a
        return g

    def copy(self):
        return type(self)(self.rows, self.cols, self.data.copy(), self.row_stride)

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.shape == other.shape
            and np.array_equal(self.array, other.array)
        )


class RealGrid(_Grid):
    """Real-valued input grid; both extents must be powers of two."""

    dtype = np.float64

    def __post_init__(self):
        super().__post_init__()
        if not (is_power_of_two(self.rows) and is_power_of_two(self.cols)):
            raise UnsupportedSizeError(f"grid {self.rows}x{self.cols} is not power-of-two sized")


class ComplexGrid(_Grid):
    """Complex grid; the r2c pipeline makes one extent ``N2/2 + 1``."""

    dtype = np.complex128


def transpose_rows(src: np.ndarray, dst: np.ndarray, lo: int, hi: int, block: int | None = None) -> None:
    """Fill rows ``lo:hi`` of ``dst`` with columns ``lo:hi`` of ``src``.

    ``block=None`` walks row by row; otherwise the copy proceeds in
    ``block x block`` tiles (edge tiles partial).
    """
    if block is None:
        backend.transpose_rows_naive(src, dst, lo, hi)
    else:
        if block < 1:
            raise InvalidArgumentError(f"transpose block must be >= 1, got {block}")
        backend.transpose_rows_blocked(src, dst, lo, hi, block)


def _transposed_like(src):
    return type(src).empty(src.cols, src.rows)


def transpose_naive(src):
    """Out-of-place transpose; the result has swapped extents and no padding."""
    out = _transposed_like(src)
    transpose_rows(src.array, out.array, 0, src.cols)
    return out


def transpose_blocked(src, block: int = DEFAULT_TRANSPOSE_BLOCK):
    """Tiled out-of-place transpose, element-for-element equal to :func:`transpose_naive`."""
    out = _transposed_like(src)
    transpose_rows(src.array, out.array, 0, src.cols, block)
    return out


def row_fft(grid: ComplexGrid, direction=Direction.FORWARD, base_case=DEFAULT_BASE_CASE) -> ComplexGrid:
    """Transform every row of ``grid``; returns a new grid."""
    out = grid.copy()
    fft_rows_c2c(out.array, 0, out.rows, fft_tables(out.cols, base_case, Direction(direction)))
    return out


def strided_column_fft(grid: ComplexGrid, direction=Direction.FORWARD,
                       base_case=DEFAULT_BASE_CASE) -> ComplexGrid:
    """Transform every column of ``grid`` without transposing; returns a new grid."""
    out = grid.copy()
    fft_cols_c2c(out.array, 0, out.cols, fft_tables(out.rows, base_case, Direction(direction)))
    return out
