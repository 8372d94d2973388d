"""2D real-to-complex FFT pipeline, sequential and under four parallel strategies.

The pipeline has four phases: r2c FFT of every row, transpose, c2c FFT of
every row of the transposed grid, transpose back. With
``SecondPass.STRIDED`` the two transposes are replaced by column FFTs read
with the row stride, and the transpose phases take no time.

Strategies differ only in scheduling. Every output element is written by
exactly one task with a fixed operation order, so all strategies produce
bit-identical results.

``NAIVE``
    One task per row per phase, connected by dependencies only. A transpose
    task waits for every producer of the column span it reads (all tasks of
    the previous phase); a c2c row waits only for the transpose task that
    wrote it. No global barriers.
``OPT``
    Like ``NAIVE`` with row chunks of ``ceil(rows / workers)``. The r2c of a
    chunk and the scatter of that chunk into the transposed grid are fused
    into a single task, and all transposes are cache blocked.
``SYNC``
    One task per row, with a global barrier after each phase.
``FOR_LOOP``
    Fork-join: each phase is a static partition of the rows into
    ``workers`` contiguous chunks, followed by an implicit join.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np

from ._pool import Task, TaskGraphTrace, WorkerPool, chunks
from .errors import InvalidArgumentError
from .kernel import Direction, fft_cols_c2c, fft_rows_c2c, fft_rows_r2c, fft_tables
from .layout import ComplexGrid, RealGrid, SecondPass, transpose_rows
from .timing import MonotonicTimer, TimerSource

__all__ = [
    "Phase",
    "StrategyId",
    "TaskGraphTrace",
    "TimingBreakdown",
    "fft2d",
    "fft2d_parallel",
    "fft2d_sequential",
]


class StrategyId(enum.Enum):
    SEQUENTIAL = "seq"
    NAIVE = "naive"
    OPT = "opt"
    SYNC = "sync"
    FOR_LOOP = "for_loop"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        for s in cls:
            if key in (s.value, s.name.lower()):
                return s
        raise InvalidArgumentError(f"unknown strategy {text!r}")


PARALLEL_STRATEGIES = (StrategyId.NAIVE, StrategyId.OPT, StrategyId.SYNC, StrategyId.FOR_LOOP)


class Phase(enum.IntEnum):
    R2C = 1
    TRANSPOSE = 2
    C2C = 3
    TRANSPOSE_BACK = 4


@dataclass(frozen=True)
class TimingBreakdown:
    r2c_seconds: float
    first_transpose_seconds: float
    c2c_seconds: float
    second_transpose_seconds: float
    total_seconds: float

    @property
    def fft_seconds(self):
        return self.r2c_seconds + self.c2c_seconds

    @property
    def transpose_seconds(self):
        return self.first_transpose_seconds + self.second_transpose_seconds

    @property
    def phase_sum(self):
        return self.fft_seconds + self.transpose_seconds

    @property
    def fft_fraction(self):
        return self.fft_seconds / self.total_seconds if self.total_seconds > 0 else 0.0

    @property
    def transpose_fraction(self):
        return self.transpose_seconds / self.total_seconds if self.total_seconds > 0 else 0.0


class _Buffers:
    """Working grids and tables for one execution of the pipeline."""

    def __init__(self, grid: RealGrid, plan):
        n1, n2 = grid.rows, grid.cols
        self.n1, self.n2 = n1, n2
        self.half = n2 // 2 + 1
        self.src = grid.array
        self.strided = plan.second_pass is SecondPass.STRIDED
        self.block = plan.transpose_block
        self.row_tables = fft_tables(n2, plan.base_case, Direction.FORWARD)
        self.col_tables = fft_tables(n1, plan.base_case, Direction.FORWARD)
        self.spec = ComplexGrid.empty(n1, self.half)
        if self.strided:
            self.work = None
            self.out = self.spec
        else:
            self.work = ComplexGrid.empty(self.half, n1)
            self.out = ComplexGrid.empty(n1, self.half)

    # row-range steps, one per phase
    def r2c(self, lo, hi):
        fft_rows_r2c(self.src, self.spec.array, lo, hi, self.row_tables)

    def transpose(self, lo, hi, block=None):
        transpose_rows(self.spec.array, self.work.array, lo, hi, block)

    def c2c(self, lo, hi):
        if self.strided:
            fft_cols_c2c(self.spec.array, lo, hi, self.col_tables)
        else:
            fft_rows_c2c(self.work.array, lo, hi, self.col_tables)

    def transpose_back(self, lo, hi, block=None):
        transpose_rows(self.work.array, self.out.array, lo, hi, block)

    def scatter(self, lo, hi, block):
        # spec rows lo:hi -> work columns lo:hi
        transpose_rows(self.spec.array[lo:hi], self.work.array[:, lo:hi], 0, self.half, block)


def _check(grid, plan):
    if not isinstance(grid, RealGrid):
        raise InvalidArgumentError(f"expected a RealGrid, got {type(grid).__name__}")
    if (grid.rows, grid.cols) != (plan.rows, plan.cols):
        raise InvalidArgumentError(
            f"grid is {grid.rows}x{grid.cols} but the plan was made for {plan.rows}x{plan.cols}"
        )


def fft2d_sequential(grid: RealGrid, plan, timer: TimerSource | None = None):
    """Run the four-phase pipeline on the calling thread.

    Returns ``(ComplexGrid of shape (N1, N2/2+1), TimingBreakdown)``.
    """
    _check(grid, plan)
    timer = timer or MonotonicTimer()
    b = _Buffers(grid, plan)
    t0 = timer.now()
    b.r2c(0, b.n1)
    t1 = timer.now()
    if b.strided:
        t2 = t1
        b.c2c(0, b.half)
        t3 = t4 = timer.now()
    else:
        b.transpose(0, b.half, b.block)
        t2 = timer.now()
        b.c2c(0, b.half)
        t3 = timer.now()
        b.transpose_back(0, b.n1, b.block)
        t4 = timer.now()
    return b.out, TimingBreakdown(t1 - t0, t2 - t1, t3 - t2, t4 - t3, t4 - t0)


def _phase_plan(b: _Buffers):
    """Phases actually executed, with the row count each one writes."""
    if b.strided:
        return [(Phase.R2C, b.n1), (Phase.C2C, b.half)]
    return [(Phase.R2C, b.n1), (Phase.TRANSPOSE, b.half), (Phase.C2C, b.half), (Phase.TRANSPOSE_BACK, b.n1)]


def _step(b: _Buffers, phase: Phase, block=None):
    if phase is Phase.R2C:
        return b.r2c
    if phase is Phase.TRANSPOSE:
        return lambda lo, hi: b.transpose(lo, hi, block)
    if phase is Phase.C2C:
        return b.c2c
    return lambda lo, hi: b.transpose_back(lo, hi, block)


def _bind(fn, lo, hi):
    return lambda: fn(lo, hi)


def _naive_graph(b: _Buffers):
    tasks = []
    prev: list[int] = []
    for phase, n in _phase_plan(b):
        step = _step(b, phase)
        if prev and not (phase is Phase.C2C and not b.strided):
            # join node: each task of this phase waits for the whole previous phase
            join = len(tasks)
            tasks.append(Task(join, int(phase), 0, 0, None, tuple(prev), "join"))
        cur = []
        for r in range(n):
            if not prev:
                deps = ()
            elif phase is Phase.C2C and not b.strided:
                deps = (prev[r],)
            else:
                deps = (join,)
            tid = len(tasks)
            tasks.append(Task(tid, int(phase), r, r + 1, _bind(step, r, r + 1), deps, phase.name.lower()))
            cur.append(tid)
        prev = cur
    return tasks


def _fused_r2c_scatter(b: _Buffers, lo, hi):
    def run():
        t0 = time.perf_counter()
        b.r2c(lo, hi)
        t1 = time.perf_counter()
        b.scatter(lo, hi, b.block)
        return {int(Phase.R2C): t1 - t0, int(Phase.TRANSPOSE): time.perf_counter() - t1}
    return run


def _opt_graph(b: _Buffers, workers: int):
    tasks = []
    next_id = 0
    prev_ids: list[int] = []
    phases = [(Phase.R2C, b.n1), (Phase.C2C, b.half)]
    if not b.strided:
        phases.append((Phase.TRANSPOSE_BACK, b.n1))
    for phase, n in phases:
        cur = []
        for lo, hi in chunks(n, workers):
            if phase is Phase.R2C:
                fn, label = (_bind(b.r2c, lo, hi), "r2c") if b.strided else (_fused_r2c_scatter(b, lo, hi), "r2c+scatter")
            else:
                fn, label = _bind(_step(b, phase, b.block), lo, hi), phase.name.lower()
            tasks.append(Task(next_id, int(phase), lo, hi, fn, tuple(prev_ids), label))
            cur.append(next_id)
            next_id += 1
        prev_ids = cur
    return tasks


def _busy_breakdown(busy, total):
    """Split ``total`` over phases in proportion to summed task time."""
    spent = sum(busy.values())
    if spent <= 0:
        return TimingBreakdown(0.0, 0.0, 0.0, 0.0, total)
    parts = [total * busy.get(int(p), 0.0) / spent for p in Phase]
    return TimingBreakdown(*parts, total)


def fft2d_parallel(grid: RealGrid, plan, workers: int | None = None,
                   timer: TimerSource | None = None, trace: TaskGraphTrace | None = None,
                   before_task=None):
    """Run the pipeline with ``plan.strategy`` on a pool of ``workers`` threads.

    For barriered strategies (``SYNC``, ``FOR_LOOP``) the breakdown is read
    from ``timer`` at each barrier. ``NAIVE`` and ``OPT`` have no phase
    boundaries, so their total is split by the task time spent in each phase.
    ``trace`` and ``before_task`` are passed to the worker pool.
    """
    _check(grid, plan)
    strategy = StrategyId.parse(plan.strategy)
    if strategy is StrategyId.SEQUENTIAL:
        raise InvalidArgumentError("fft2d_parallel needs a parallel strategy; use fft2d_sequential")
    workers = plan.workers if workers is None else workers
    if workers < 1:
        raise InvalidArgumentError(f"workers must be >= 1, got {workers}")
    timer = timer or MonotonicTimer()
    b = _Buffers(grid, plan)

    with WorkerPool(workers, trace, before_task) as pool:
        if strategy in (StrategyId.NAIVE, StrategyId.OPT):
            tasks = _naive_graph(b) if strategy is StrategyId.NAIVE else _opt_graph(b, workers)
            t0 = timer.now()
            pool.run_graph(tasks)
            total = timer.now() - t0
            return b.out, _busy_breakdown(pool.busy, total)

        seconds = dict.fromkeys(Phase, 0.0)
        next_id = 0
        t_start = t_prev = timer.now()
        for phase, n in _phase_plan(b):
            step = _step(b, phase)
            ranges = [(r, r + 1) for r in range(n)] if strategy is StrategyId.SYNC else chunks(n, workers)
            tasks = []
            for lo, hi in ranges:
                tasks.append(Task(next_id, int(phase), lo, hi, _bind(step, lo, hi), (), phase.name.lower()))
                next_id += 1
            if strategy is StrategyId.SYNC:
                pool.run_graph(tasks)
            else:
                pool.parallel_for(tasks)
            t = timer.now()
            seconds[phase] = t - t_prev
            t_prev = t
        breakdown = TimingBreakdown(*(seconds[p] for p in Phase), t_prev - t_start)
    return b.out, breakdown


def fft2d(grid: RealGrid, plan, workers: int | None = None, timer: TimerSource | None = None):
    """Dispatch on ``plan.strategy``."""
    if StrategyId.parse(plan.strategy) is StrategyId.SEQUENTIAL:
        return fft2d_sequential(grid, plan, timer)
    return fft2d_parallel(grid, plan, workers, timer)


def random_grid(rows: int, cols: int, seed: int = 0) -> RealGrid:
    """Uniform ``[-1, 1)`` test input."""
    rng = np.random.default_rng(seed)
    return RealGrid.from_array(rng.uniform(-1.0, 1.0, size=(rows, cols)))
