"""Thread pool executing dependency graphs of row tasks.

Two scheduling modes:

* ``run_graph`` - work stealing. Each worker pops its own deque LIFO and
  steals FIFO from the others; a task released by a finishing task is
  pushed onto the finishing worker's deque, so dependents tend to run
  right after their producers.
  A task whose ``fn`` is ``None`` is a join node: it does no work, is not
  traced, and completes inline as soon as its dependencies have finished.
  It lets "wait for all of phase k" be one edge per consumer.
* ``parallel_for`` - static fork-join. Chunk ``i`` runs on worker ``i`` and
  the call returns once every chunk has finished.
"""

from __future__ import annotations

import itertools
import threading
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Callable


@dataclass
class Task:
    id: int
    phase: int
    lo: int
    hi: int
    fn: Callable[[], dict | None] | None
    deps: tuple = ()
    label: str = ""
    # filled in by the pool
    dependents: list = field(default_factory=list, repr=False)
    remaining: int = 0
    trace_deps: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class TraceEvent:
    task_id: int
    phase: int
    lo: int
    hi: int
    worker: int
    start: int
    end: int
    deps: tuple = ()
    label: str = ""


class TaskGraphTrace:
    """Ordered log of executed tasks.

    ``start``/``end`` come from one logical clock shared by all workers, so
    ``a.end < b.start`` means ``a`` finished before ``b`` began.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._clock = itertools.count()
        self.events: list[TraceEvent] = []

    def tick(self) -> int:
        with self._lock:
            return next(self._clock)

    def record(self, event: TraceEvent) -> None:
        with self._lock:
            self.events.append(event)

    def by_phase(self, phase: int) -> list[TraceEvent]:
        return [e for e in self.events if e.phase == phase]

    def phase_monotone(self) -> bool:
        """True when no task of a later phase started before an earlier phase ended."""
        phases = sorted({e.phase for e in self.events})
        for p, q in zip(phases, phases[1:]):
            if min(e.start for e in self.by_phase(q)) < max(e.end for e in self.by_phase(p)):
                return False
        return True

    def cross_phase_overlaps(self) -> int:
        """Count (earlier-phase, later-phase) task pairs whose execution intervals interleave."""
        phases = sorted({e.phase for e in self.events})
        count = 0
        for p, q in zip(phases, phases[1:]):
            for b in self.by_phase(q):
                count += sum(1 for a in self.by_phase(p) if b.start < a.end)
        return count

    def dependency_violations(self) -> list[tuple[int, int]]:
        ends = {e.task_id: e.end for e in self.events}
        return [(e.task_id, d) for e in self.events for d in e.deps if e.start < ends[d]]


class WorkerPool:
    """Exactly ``workers`` threads, alive for the duration of a ``with`` block.

    ``before_task(task, worker)`` is called on the worker thread after a task
    is logged as started and before it runs; tests use it to force
    interleavings.
    """

    def __init__(self, workers: int, trace: TaskGraphTrace | None = None,
                 before_task: Callable[[Task, int], None] | None = None):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.workers = workers
        self.trace = trace
        self.before_task = before_task
        self.busy = defaultdict(float)  # phase -> summed task seconds
        self._cv = threading.Condition()
        self._deques = [deque() for _ in range(workers)]
        self._threads: list[threading.Thread] = []
        self._closed = False
        self._steal = True
        self._pending = 0
        self._error: BaseException | None = None

    def __enter__(self):
        for w in range(self.workers):
            t = threading.Thread(target=self._loop, args=(w,), name=f"planarfft-worker-{w}", daemon=True)
            t.start()
            self._threads.append(t)
        return self

    def __exit__(self, *exc):
        with self._cv:
            self._closed = True
            self._cv.notify_all()
        for t in self._threads:
            t.join()
        self._threads.clear()
        return False

    def _take(self, w):
        own = self._deques[w]
        if own:
            return own.pop()
        if self._steal:
            for v in itertools.chain(range(w + 1, self.workers), range(w)):
                if self._deques[v]:
                    return self._deques[v].popleft()
        return None

    def _loop(self, w):
        while True:
            with self._cv:
                while True:
                    if self._closed:
                        return
                    task = self._take(w)
                    if task is not None:
                        break
                    self._cv.wait()
                skip = self._error is not None
            error = None
            if not skip:
                start = self.trace.tick() if self.trace else 0
                t0 = time.perf_counter()
                try:
                    if self.before_task is not None:
                        self.before_task(task, w)
                    parts = task.fn()
                except BaseException as exc:  # re-raised by the submitting thread
                    error, parts = exc, None
                elapsed = time.perf_counter() - t0
                if self.trace:
                    self.trace.record(TraceEvent(task.id, task.phase, task.lo, task.hi, w,
                                                 start, self.trace.tick(), task.trace_deps, task.label))
            with self._cv:
                if not skip:
                    if parts:
                        for phase, secs in parts.items():
                            self.busy[phase] += secs
                    else:
                        self.busy[task.phase] += elapsed
                if error is not None and self._error is None:
                    self._error = error
                self._release(task, w)
                self._pending -= 1
                self._cv.notify_all()

    def _release(self, task, w):
        # caller holds the lock
        stack = [task]
        while stack:
            done = stack.pop()
            for d in done.dependents:
                d.remaining -= 1
                if d.remaining == 0:
                    if d.fn is None:
                        self._pending -= 1
                        stack.append(d)
                    else:
                        self._deques[w].append(d)

    def _wait(self):
        with self._cv:
            while self._pending:
                self._cv.wait()
            error, self._error = self._error, None
        if error is not None:
            raise error

    def run_graph(self, tasks: list[Task]) -> None:
        """Run ``tasks`` respecting ``deps`` (ids within the same list)."""
        by_id = {t.id: t for t in tasks}
        for t in tasks:
            t.dependents = []
        for t in tasks:
            t.remaining = len(t.deps)
            for d in t.deps:
                by_id[d].dependents.append(t)
        if self.trace is not None:
            _expand_trace_deps(tasks, by_id)
        if any(t.fn is None and not t.deps for t in tasks):
            raise ValueError("join tasks need at least one dependency")
        ready = [t for t in tasks if not t.deps]
        with self._cv:
            self._steal = True
            self._pending = len(tasks)
            # reversed so that each worker's LIFO pop starts with the lowest rows
            for i, t in reversed(list(enumerate(ready))):
                self._deques[i % self.workers].append(t)
            self._cv.notify_all()
        self._wait()

    def parallel_for(self, tasks: list[Task]) -> None:
        """Run independent tasks, task ``i`` pinned to worker ``i % workers``; implicit join."""
        with self._cv:
            self._steal = False
            self._pending = len(tasks)
            for i, t in enumerate(tasks):
                t.dependents = []
                t.remaining = 0
                self._deques[i % self.workers].appendleft(t)
            self._cv.notify_all()
        self._wait()


def _expand_trace_deps(tasks, by_id):
    """Resolve join nodes so traced tasks list the real tasks they waited for."""
    memo = {}

    def real(tid):
        if tid not in memo:
            t = by_id[tid]
            if t.fn is None:
                memo[tid] = tuple(sorted({x for d in t.deps for x in real(d)}))
            else:
                memo[tid] = (tid,)
        return memo[tid]

    for t in tasks:
        t.trace_deps = tuple(sorted({x for d in t.deps for x in real(d)}))


def chunks(n: int, parts: int) -> list[tuple[int, int]]:
    """Split ``range(n)`` into at most ``parts`` contiguous chunks of ``ceil(n/parts)``."""
    size = -(-n // max(parts, 1))
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]
