"""Plan construction: heuristic estimates, timed candidate search, and wisdom.

ESTIMATE picks parameters without running anything. MEASURE times a reduced
cross product of base case, transpose block and second-pass handling, and
keeps the candidate with the smallest median. Winners can be persisted in a
wisdom file and are then reused without measuring.
"""

from __future__ import annotations

import enum
import logging
import os
import statistics
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable

from .engine import StrategyId, fft2d, random_grid
from .errors import InvalidArgumentError, PlanningFailedError, UnsupportedSizeError, WisdomParseError
from .kernel import DEFAULT_BASE_CASE, is_power_of_two
from .layout import DEFAULT_TRANSPOSE_BLOCK, SecondPass
from .timing import MonotonicTimer, TimerSource

log = logging.getLogger(__name__)

VERSION_TAG = "v1"
WISDOM_HEADER = f"planarfft-wisdom {VERSION_TAG}"
DEFAULT_CACHE_KB = 32
BASE_CASES = (4, 8, 16, 32, 64)
TRANSPOSE_BLOCKS = (16, 32, 64, 128)
PROXY_ELEMENTS = 2**22
COMPLEX_BYTES = 16


class PlanningMode(enum.Enum):
    ESTIMATE = "estimate"
    MEASURE = "measure"


class TimerResolutionWarning(UserWarning):
    """A measured runtime is too close to the timer's resolution to be trusted."""


@dataclass(frozen=True)
class Candidate:
    base_case: int
    transpose_block: int
    second_pass: SecondPass = SecondPass.TRANSPOSE

    def __str__(self):
        return f"base={self.base_case} block={self.transpose_block} {self.second_pass.value}"


@dataclass(frozen=True)
class Plan:
    rows: int
    cols: int
    workers: int
    strategy: StrategyId
    base_case: int = DEFAULT_BASE_CASE
    transpose_block: int = DEFAULT_TRANSPOSE_BLOCK
    second_pass: SecondPass = SecondPass.TRANSPOSE
    mode: PlanningMode = PlanningMode.ESTIMATE
    measurements: tuple = ()  # ((Candidate, median_seconds), ...)

    @property
    def candidate(self) -> Candidate:
        return Candidate(self.base_case, self.transpose_block, self.second_pass)

    @property
    def key(self):
        return (self.rows, self.cols, self.workers, self.strategy)

    def describe(self) -> str:
        lines = [
            f"plan {self.rows}x{self.cols} strategy={self.strategy.value} workers={self.workers} mode={self.mode.value}",
            f"  base_case={self.base_case} transpose_block={self.transpose_block} second_pass={self.second_pass.value}",
        ]
        for cand, median in self.measurements:
            mark = "*" if cand == self.candidate else " "
            lines.append(f"  {mark} {cand}: {median:.6e} s")
        return "\n".join(lines)


def cache_budget_bytes() -> int:
    """Per-worker cache budget; ``PLANARFFT_CACHE_KB`` overrides the 32 KiB default."""
    raw = os.environ.get("PLANARFFT_CACHE_KB")
    if raw is None or not raw.strip():
        return DEFAULT_CACHE_KB * 1024
    try:
        kb = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"PLANARFFT_CACHE_KB must be an integer, got {raw!r}") from None
    if kb < 1:
        raise InvalidArgumentError("PLANARFFT_CACHE_KB must be >= 1")
    return kb * 1024


def _validate(rows, cols, workers):
    if not (is_power_of_two(rows) and is_power_of_two(cols)):
        raise UnsupportedSizeError(f"grid {rows}x{cols} is not power-of-two sized")
    if rows < 2 or cols < 2:
        raise UnsupportedSizeError("both grid extents must be >= 2")
    if not isinstance(workers, int) or workers < 1:
        raise InvalidArgumentError(f"workers must be a positive integer, got {workers!r}")


def plan_estimate(rows: int, cols: int, workers: int, strategy, cache_bytes: int | None = None) -> Plan:
    """Heuristic plan: strided columns while a row fits the cache budget, transposes otherwise."""
    _validate(rows, cols, workers)
    budget = cache_budget_bytes() if cache_bytes is None else cache_bytes
    second = SecondPass.STRIDED if cols * COMPLEX_BYTES <= budget else SecondPass.TRANSPOSE
    return Plan(rows, cols, workers, StrategyId.parse(strategy), DEFAULT_BASE_CASE,
                DEFAULT_TRANSPOSE_BLOCK, second, PlanningMode.ESTIMATE)


def candidate_space(cols: int, cache_bytes: int | None = None) -> list[Candidate]:
    """Candidates in enumeration order; strided ones are dropped for rows far beyond the cache."""
    budget = cache_budget_bytes() if cache_bytes is None else cache_bytes
    passes = [SecondPass.TRANSPOSE]
    if cols * COMPLEX_BYTES <= 4 * budget:
        passes.append(SecondPass.STRIDED)
    return [Candidate(b, t, p) for p in passes for b in BASE_CASES for t in TRANSPOSE_BLOCKS]


def proxy_rows(rows: int, cols: int) -> int:
    """Rows of the grid actually timed; large problems are timed on a row-clamped proxy."""
    if rows * cols <= PROXY_ELEMENTS:
        return rows
    return max(2, min(rows, PROXY_ELEMENTS // cols))


class WisdomStore:
    """Winning candidates keyed by ``(rows, cols, workers, strategy)``.

    Only entries carrying the current version tag are ever stored.
    """

    def __init__(self, entries: dict | None = None, version: str = VERSION_TAG):
        self.version = version
        self.entries: dict[tuple, tuple[Candidate, int]] = dict(entries or {})

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, WisdomStore) and self.version == other.version and self.entries == other.entries

    def lookup(self, rows, cols, workers, strategy):
        return self.entries.get((rows, cols, workers, StrategyId.parse(strategy)))

    def record(self, plan: Plan) -> None:
        median = dict(plan.measurements).get(plan.candidate)
        median_ns = int(round(median * 1e9)) if median is not None else 0
        self.entries[plan.key] = (plan.candidate, median_ns)


def plan_measure(rows: int, cols: int, workers: int, strategy, reps: int = 3,
                 timer: TimerSource | None = None, *, wisdom: WisdomStore | None = None,
                 candidates: Iterable[Candidate] | None = None,
                 runner: Callable[[Plan], object] | None = None,
                 cache_bytes: int | None = None, seed: int = 0) -> Plan:
    """Time every candidate ``reps`` times and return the plan with the least median.

    ``runner`` executes one candidate plan (default: the real engine on a
    random grid of the proxy size). ``timer`` brackets each run. A wisdom hit
    returns immediately without running anything; a fresh result is recorded
    into ``wisdom`` when one is given.
    """
    _validate(rows, cols, workers)
    if reps < 1:
        raise InvalidArgumentError(f"reps must be >= 1, got {reps}")
    strategy = StrategyId.parse(strategy)
    if wisdom is not None:
        hit = wisdom.lookup(rows, cols, workers, strategy)
        if hit is not None:
            cand, median_ns = hit
            log.info("wisdom hit for %dx%d %s x%d", rows, cols, strategy.value, workers)
            return Plan(rows, cols, workers, strategy, cand.base_case, cand.transpose_block,
                        cand.second_pass, PlanningMode.MEASURE, ((cand, median_ns * 1e-9),))

    timer = timer or MonotonicTimer()
    cands = list(candidates) if candidates is not None else candidate_space(cols, cache_bytes)
    if not cands:
        raise InvalidArgumentError("empty candidate set")
    timed_rows = proxy_rows(rows, cols)
    if runner is None:
        grid = random_grid(timed_rows, cols, seed)

        def runner(p):
            return fft2d(grid, p, p.workers)

    measurements = []
    for cand in cands:
        trial = Plan(timed_rows, cols, workers, strategy, cand.base_case, cand.transpose_block,
                     cand.second_pass, PlanningMode.MEASURE)
        times = []
        try:
            for _ in range(reps):
                t0 = timer.now()
                runner(trial)
                t1 = timer.now()
                elapsed = t1 - t0
                if not elapsed >= 0:
                    raise RuntimeError(f"timer went backwards ({t0} -> {t1})")
                times.append(elapsed)
        except PlanningFailedError:
            raise
        except Exception as exc:
            raise PlanningFailedError(f"timing candidate [{cand}] failed: {exc}", cand) from exc
        median = statistics.median(times)
        if median < 100 * timer.resolution:
            warnings.warn(
                f"candidate [{cand}] ran for {median:.3e} s, below 100x the timer resolution "
                f"({timer.resolution:.1e} s)",
                TimerResolutionWarning,
                stacklevel=2,
            )
        if timed_rows != rows:
            median *= rows / timed_rows
        measurements.append((cand, median))

    best_index = min(range(len(measurements)), key=lambda i: (measurements[i][1], i))
    best = measurements[best_index][0]
    plan = Plan(rows, cols, workers, strategy, best.base_case, best.transpose_block, best.second_pass,
                PlanningMode.MEASURE, tuple(measurements))
    if wisdom is not None:
        wisdom.record(plan)
    return plan


def make_plan(rows, cols, workers, strategy, mode=PlanningMode.ESTIMATE, **kwargs) -> Plan:
    mode = PlanningMode(mode)
    if mode is PlanningMode.ESTIMATE:
        return plan_estimate(rows, cols, workers, strategy, kwargs.get("cache_bytes"))
    return plan_measure(rows, cols, workers, strategy, **kwargs)


# wisdom file: header line, then one
# v1|rows|cols|workers|strategy|base_case|transpose_block|second_pass|median_ns
# line per entry, sorted by key

def _format_entry(version, key, cand, median_ns):
    rows, cols, workers, strategy = key
    return "|".join(map(str, (version, rows, cols, workers, strategy.value, cand.base_case,
                              cand.transpose_block, cand.second_pass.value, median_ns)))


def _sort_key(key):
    rows, cols, workers, strategy = key
    return (rows, cols, workers, strategy.value)


def wisdom_dumps(store: WisdomStore) -> str:
    lines = [f"planarfft-wisdom {store.version}"]
    for key in sorted(store.entries, key=_sort_key):
        cand, median_ns = store.entries[key]
        lines.append(_format_entry(store.version, key, cand, median_ns))
    return "\n".join(lines) + "\n"


def wisdom_save(store: WisdomStore, path) -> None:
    Path(path).write_text(wisdom_dumps(store), encoding="utf-8")


def _parse_int(text, what, lineno, minimum=0):
    try:
        value = int(text)
    except ValueError:
        raise WisdomParseError(f"{what} {text!r} is not an integer", lineno) from None
    if value < minimum:
        raise WisdomParseError(f"{what} {value} is below {minimum}", lineno)
    return value


def wisdom_loads(text: str) -> WisdomStore:
    lines = text.splitlines()
    if not lines:
        raise WisdomParseError("missing header", 1)
    head = lines[0].split(" ")
    if len(head) != 2 or head[0] != "planarfft-wisdom":
        raise WisdomParseError(f"bad header {lines[0]!r}", 1)
    if head[1] != VERSION_TAG:
        warnings.warn(f"wisdom version {head[1]!r} does not match {VERSION_TAG!r}; ignoring file", stacklevel=3)
        return WisdomStore()
    store = WisdomStore()
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("|")
        if len(fields) != 9:
            raise WisdomParseError(f"expected 9 '|'-separated fields, got {len(fields)}", lineno)
        version, rows, cols, workers, strategy, base, block, second, median_ns = fields
        if version != VERSION_TAG:
            warnings.warn(f"wisdom entry on line {lineno} has version {version!r}; ignoring file", stacklevel=3)
            return WisdomStore()
        try:
            strategy_id = StrategyId(strategy)
            second_pass = SecondPass(second)
        except ValueError as exc:
            raise WisdomParseError(str(exc), lineno) from None
        key = (_parse_int(rows, "rows", lineno, 1), _parse_int(cols, "cols", lineno, 1),
               _parse_int(workers, "workers", lineno, 1), strategy_id)
        cand = Candidate(_parse_int(base, "base_case", lineno, 1), _parse_int(block, "transpose_block", lineno, 1),
                         second_pass)
        store.entries[key] = (cand, _parse_int(median_ns, "median_ns", lineno))
    return store


def wisdom_load(path) -> WisdomStore:
    """Read a wisdom file; a missing file yields an empty store."""
    p = Path(path)
    if not p.exists():
        return WisdomStore()
    return wisdom_loads(p.read_text(encoding="utf-8"))


def with_workers(plan: Plan, workers: int) -> Plan:
    return replace(plan, workers=workers)
