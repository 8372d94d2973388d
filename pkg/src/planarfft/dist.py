"""Slab-distributed 2D FFT over in-process ranks.

Each rank is a thread holding a :class:`RankEndpoint`. Ranks exchange data
only through :meth:`RankEndpoint.all_to_all`, which moves copies of the
payloads through per-rank mailboxes, so no rank ever reads another rank's
memory directly.
"""

from __future__ import annotations

import queue
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np

from ._pool import Task, WorkerPool, chunks
from .engine import Phase, TimingBreakdown
from .errors import InvalidArgumentError, ProtocolError, UnsupportedDecompositionError
from .kernel import Direction, fft_rows_c2c, fft_rows_r2c, fft_tables
from .layout import ComplexGrid, RealGrid, transpose_rows
from .timing import MonotonicTimer

DEFAULT_TIMEOUT = 60.0


def local_slab(global_rows: int, rank: int, nranks: int) -> tuple[int, int]:
    """Block distribution: the first ``global_rows % nranks`` ranks get one extra row."""
    if nranks < 1 or not 0 <= rank < nranks:
        raise InvalidArgumentError(f"rank {rank} outside communicator of size {nranks}")
    if nranks > global_rows:
        raise UnsupportedDecompositionError(f"cannot split {global_rows} rows over {nranks} ranks")
    q, r = divmod(global_rows, nranks)
    start = rank * q + min(rank, r)
    return start, q + (1 if rank < r else 0)


class _Message(NamedTuple):
    src: int
    epoch: int
    payload: Any
    abort: str | None = None


class Communicator:
    """A group of ``nranks`` in-process ranks with one mailbox each."""

    def __init__(self, nranks: int, timeout: float = DEFAULT_TIMEOUT):
        if nranks < 1:
            raise InvalidArgumentError(f"communicator needs >= 1 rank, got {nranks}")
        self.size = nranks
        self.timeout = timeout
        self._mailboxes = [queue.Queue() for _ in range(nranks)]
        self._endpoints = [RankEndpoint(self, r) for r in range(nranks)]

    def endpoint(self, rank: int) -> "RankEndpoint":
        return self._endpoints[rank]

    def _post(self, dest: int, message: _Message) -> None:
        self._mailboxes[dest].put(message)

    def _receive(self, rank: int, timeout: float) -> _Message:
        return self._mailboxes[rank].get(timeout=timeout)


def _owned(payload):
    # a real transport would serialize; copying arrays gives the same isolation
    if isinstance(payload, np.ndarray):
        return payload.copy()
    return payload


class RankEndpoint:
    """One rank's handle on a :class:`Communicator`. Use it from one thread at a time."""

    def __init__(self, comm: Communicator, rank: int):
        self.comm = comm
        self.rank = rank
        self.size = comm.size
        self._epoch = 0
        self._early: dict[tuple[int, int], _Message] = {}

    def all_to_all(self, send: Sequence[Any]) -> list[Any]:
        """Send ``send[j]`` to rank ``j``; return ``recv`` with ``recv[i]`` from rank ``i``.

        Blocks until every rank has contributed. A rank passing the wrong
        number of buffers aborts the collective on all ranks.
        """
        epoch = self._epoch
        self._epoch += 1
        if len(send) != self.size:
            reason = f"rank {self.rank} supplied {len(send)} buffers, expected {self.size}"
            for dest in range(self.size):
                if dest != self.rank:
                    self.comm._post(dest, _Message(self.rank, epoch, None, reason))
            raise ProtocolError(f"all_to_all aborted: {reason}", offender=self.rank)
        for dest in range(self.size):
            self.comm._post(dest, _Message(self.rank, epoch, _owned(send[dest])))

        recv: list[Any] = [None] * self.size
        missing = set(range(self.size))
        for src in list(missing):
            msg = self._early.pop((epoch, src), None)
            if msg is not None:
                self._accept(msg, recv, missing)
        deadline = time.monotonic() + self.comm.timeout
        while missing:
            remaining = deadline - time.monotonic()
            try:
                msg = self.comm._receive(self.rank, max(remaining, 0.0))
            except queue.Empty:
                raise ProtocolError(
                    f"rank {self.rank}: all_to_all timed out waiting for ranks {sorted(missing)}"
                ) from None
            if msg.epoch > epoch:
                self._early[(msg.epoch, msg.src)] = msg
            elif msg.epoch == epoch:
                self._accept(msg, recv, missing)
            # stale messages from an aborted collective are dropped
        return recv

    def _accept(self, msg, recv, missing):
        if msg.abort is not None:
            raise ProtocolError(f"all_to_all aborted: {msg.abort}", offender=msg.src)
        recv[msg.src] = msg.payload
        missing.discard(msg.src)


def all_to_all(endpoint: RankEndpoint, send: Sequence[Any]) -> list[Any]:
    return endpoint.all_to_all(send)


def run_ranks(comm: Communicator, fn: Callable[[RankEndpoint], Any]) -> list[Any]:
    """Run ``fn(endpoint)`` on every rank concurrently and return the results by rank.

    If any rank raises, the exception of the lowest failing rank is re-raised
    after all ranks have finished.
    """
    with ThreadPoolExecutor(max_workers=comm.size, thread_name_prefix="planarfft-rank") as ex:
        futures = [ex.submit(fn, comm.endpoint(r)) for r in range(comm.size)]
        errors = [f.exception() for f in futures]
    for err in errors:
        if err is not None:
            raise err
    return [f.result() for f in futures]


@dataclass
class Slab:
    """Rows ``global_row_start : global_row_start + local_rows`` of a distributed grid."""

    owner_rank: int
    global_row_start: int
    local_rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.local_rows, self.cols):
            raise InvalidArgumentError(
                f"slab data shape {self.data.shape} != ({self.local_rows}, {self.cols})"
            )


def scatter_grid(a: np.ndarray, nranks: int) -> list[Slab]:
    """Cut a global array into the row slabs each rank owns."""
    rows, cols = a.shape
    slabs = []
    for r in range(nranks):
        start, n = local_slab(rows, r, nranks)
        slabs.append(Slab(r, start, n, cols, np.ascontiguousarray(a[start:start + n])))
    return slabs


def _gather(slabs: Sequence[Slab]) -> np.ndarray:
    ordered = sorted(slabs, key=lambda s: s.global_row_start)
    return np.concatenate([s.data for s in ordered], axis=0)


def distributed_transpose(endpoint: RankEndpoint, slab: Slab, global_rows: int, global_cols: int,
                          block: int | None = None) -> Slab:
    """Return this rank's row slab of the transposed ``global_rows x global_cols`` grid.

    Block ``p`` sent to rank ``p`` is the locally transposed column range
    that rank ``p`` owns after transposition; received blocks are stitched
    side by side at their source rank's row offset.
    """
    nranks, rank = endpoint.size, endpoint.rank
    start, nrows = local_slab(global_rows, rank, nranks)
    if (slab.global_row_start, slab.local_rows, slab.cols) != (start, nrows, global_cols):
        raise InvalidArgumentError(
            f"rank {rank}: slab rows {slab.global_row_start}+{slab.local_rows}x{slab.cols} do not match "
            f"the distribution {start}+{nrows}x{global_cols}"
        )
    out_start, out_rows = local_slab(global_cols, rank, nranks)

    send = []
    for p in range(nranks):
        c0, nc = local_slab(global_cols, p, nranks)
        packed = np.empty((nc, nrows), dtype=slab.data.dtype)
        transpose_rows(slab.data[:, c0:c0 + nc], packed, 0, nc, block)
        send.append(packed)
    recv = endpoint.all_to_all(send)

    out = np.empty((out_rows, global_rows), dtype=slab.data.dtype)
    for q in range(nranks):
        q0, nq = local_slab(global_rows, q, nranks)
        out[:, q0:q0 + nq] = recv[q]
    return Slab(rank, out_start, out_rows, global_rows, out)


def _row_phase(pool, fn, n, phase):
    if pool is None:
        fn(0, n)
        return
    tasks = [Task(i, int(phase), lo, hi, (lambda lo=lo, hi=hi: fn(lo, hi)))
             for i, (lo, hi) in enumerate(chunks(n, pool.workers))]
    pool.parallel_for(tasks)


def fft2d_distributed(endpoint: RankEndpoint, local_input: Slab, plan, threads_per_rank: int = 1,
                      timings: dict | None = None) -> Slab:
    """Four-phase 2D r2c FFT of a slab-distributed real grid.

    Row FFTs run locally (fork-join over ``threads_per_rank`` threads when
    more than one); both transposes go through :func:`distributed_transpose`.
    The returned slab holds this rank's rows of the ``N1 x (N2/2+1)`` result.
    Per-phase seconds for this rank are stored in ``timings`` when given.
    """
    if threads_per_rank < 1:
        raise InvalidArgumentError(f"threads_per_rank must be >= 1, got {threads_per_rank}")
    n1, n2 = plan.rows, plan.cols
    half = n2 // 2 + 1
    if local_input.cols != n2:
        raise InvalidArgumentError(f"slab has {local_input.cols} columns, plan expects {n2}")
    start, nrows = local_slab(n1, endpoint.rank, endpoint.size)
    if (local_input.global_row_start, local_input.local_rows) != (start, nrows):
        raise InvalidArgumentError(f"rank {endpoint.rank}: input slab does not match the row distribution")
    if endpoint.size > half:
        raise UnsupportedDecompositionError(f"cannot split {half} spectrum rows over {endpoint.size} ranks")
    row_tables = fft_tables(n2, plan.base_case, Direction.FORWARD)
    col_tables = fft_tables(n1, plan.base_case, Direction.FORWARD)
    src = np.ascontiguousarray(local_input.data, dtype=np.float64)
    clock = time.perf_counter
    marks = [clock()]

    def body(pool):
        spec = np.empty((nrows, half), dtype=np.complex128)
        _row_phase(pool, lambda lo, hi: fft_rows_r2c(src, spec, lo, hi, row_tables), nrows, Phase.R2C)
        marks.append(clock())
        t = distributed_transpose(endpoint, Slab(endpoint.rank, start, nrows, half, spec), n1, half,
                                  plan.transpose_block)
        marks.append(clock())
        _row_phase(pool, lambda lo, hi: fft_rows_c2c(t.data, lo, hi, col_tables), t.local_rows, Phase.C2C)
        marks.append(clock())
        back = distributed_transpose(endpoint, t, half, n1, plan.transpose_block)
        marks.append(clock())
        return back

    if threads_per_rank > 1:
        with WorkerPool(threads_per_rank) as pool:
            result = body(pool)
    else:
        result = body(None)
    if timings is not None:
        for phase, (a, b) in zip(Phase, zip(marks, marks[1:])):
            timings[phase] = b - a
        timings["total"] = marks[-1] - marks[0]
    return result


def run_distributed(grid: RealGrid, plan, nranks: int, threads_per_rank: int = 1, timer=None,
                    timeout: float = DEFAULT_TIMEOUT):
    """Scatter ``grid`` over ``nranks`` ranks, transform, gather.

    Returns ``(ComplexGrid, TimingBreakdown)``. The total comes from
    ``timer`` around the whole collective run. Phase seconds are the per-rank
    maxima, rescaled so they add up to the total.
    """
    if (grid.rows, grid.cols) != (plan.rows, plan.cols):
        raise InvalidArgumentError(
            f"grid is {grid.rows}x{grid.cols} but the plan was made for {plan.rows}x{plan.cols}"
        )
    timer = timer or MonotonicTimer()
    comm = Communicator(nranks, timeout)
    slabs = scatter_grid(grid.array, nranks)
    per_rank = [dict() for _ in range(nranks)]

    def rank_main(ep):
        return fft2d_distributed(ep, slabs[ep.rank], plan, threads_per_rank, per_rank[ep.rank])

    t0 = timer.now()
    out_slabs = run_ranks(comm, rank_main)
    total = timer.now() - t0
    phase_max = [max(t[p] for t in per_rank) for p in Phase]
    scale = total / sum(phase_max) if sum(phase_max) > 0 else 0.0
    return ComplexGrid.from_array(_gather(out_slabs)), TimingBreakdown(*(s * scale for s in phase_max), total)
