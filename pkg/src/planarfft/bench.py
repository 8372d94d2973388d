"""Strong-scaling benchmark harness.

Each configuration point is planned once, run once untimed as a warm-up,
then timed ``reps`` times. The timer brackets the whole engine call. The
record keeps the median with min/max as error bars, and the mean split of
runtime between FFT phases and transpose phases.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import os
import statistics
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .dist import run_distributed
from .engine import StrategyId, fft2d, random_grid
from .errors import ConfigError, PlanarFFTError
from .kernel import dft2_oracle, is_power_of_two
from .planner import PlanningMode, WisdomStore, make_plan, wisdom_load, wisdom_save
from .timing import MonotonicTimer, TimerSource

log = logging.getLogger(__name__)

CSV_HEADER = ("strategy", "ranks", "threads", "median_s", "min_s", "max_s", "fft_frac", "transpose_frac")
DIST = "dist"
STRATEGY_NAMES = tuple(s.value for s in StrategyId) + (DIST,)
VERIFY_SIZE = 32
VERIFY_TOLERANCE = 1e-9


@dataclass
class BenchConfig:
    rows: int = 4096
    cols: int = 4096
    strategies: Sequence[str] = ("for_loop",)
    workers: Sequence[int] = (1, 2, 4, 8)
    ranks: Sequence[int] = (1,)
    threads: Sequence[int] = (1,)
    reps: int = 10
    plan: PlanningMode = PlanningMode.ESTIMATE
    seed: int = 0
    out: str | None = None
    wisdom: str | None = None
    force: bool = False
    measure_reps: int = 3

    def validate(self) -> "BenchConfig":
        for name in ("rows", "cols"):
            v = getattr(self, name)
            if not is_power_of_two(v) or v < 2:
                raise ConfigError(name, f"must be a power of two >= 2, got {v}")
        if not self.strategies:
            raise ConfigError("strategy", "at least one strategy is required")
        for s in self.strategies:
            if s not in STRATEGY_NAMES:
                raise ConfigError("strategy", f"unknown strategy {s!r}; choose from {', '.join(STRATEGY_NAMES)}")
        for name in ("workers", "ranks", "threads"):
            values = list(getattr(self, name))
            if not values or any(not isinstance(v, int) or v < 1 for v in values):
                raise ConfigError(name, f"must be a non-empty list of positive integers, got {values}")
            if values != sorted(values):
                raise ConfigError(name, f"must be sorted ascending, got {values}")
        if self.reps < 1:
            raise ConfigError("reps", f"must be >= 1, got {self.reps}")
        if self.measure_reps < 1:
            raise ConfigError("measure_reps", f"must be >= 1, got {self.measure_reps}")
        try:
            self.plan = PlanningMode(self.plan)
        except ValueError:
            raise ConfigError("plan", f"must be 'estimate' or 'measure', got {self.plan!r}") from None
        return self

    def points(self) -> list[tuple[str, int, int]]:
        """``(strategy, ranks, threads)`` in sweep order."""
        pts = []
        for s in self.strategies:
            if s == StrategyId.SEQUENTIAL.value:
                pts.append((s, 1, 1))
            elif s == DIST:
                pts += [(s, r, t) for r in self.ranks for t in self.threads]
            else:
                pts += [(s, 1, w) for w in self.workers]
        return pts


@dataclass
class ScalingRecord:
    strategy: str
    ranks: int
    threads: int
    median_s: float
    min_s: float
    max_s: float
    fft_frac: float
    transpose_frac: float
    checksum: str = field(default="", compare=False)
    error: str | None = field(default=None, compare=False)

    @property
    def failed(self) -> bool:
        return self.error is not None


def _fmt(x) -> str:
    return format(x, ".9g")


def emit_csv(records: Sequence[ScalingRecord], path) -> None:
    """Write records with the fixed header, one row per record, in the given order."""
    try:
        with open(path, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in records:
                w.writerow([r.strategy, r.ranks, r.threads, _fmt(r.median_s), _fmt(r.min_s), _fmt(r.max_s),
                            _fmt(r.fft_frac), _fmt(r.transpose_frac)])
    except OSError as exc:
        raise OSError(f"cannot write benchmark CSV {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> list[ScalingRecord]:
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: unexpected CSV header {rows[0] if rows else None}")
    out = []
    for row in rows[1:]:
        s, ranks, threads, *vals = row
        out.append(ScalingRecord(s, int(ranks), int(threads), *map(float, vals)))
    return out


def checksum(grid) -> str:
    return hashlib.sha256(np.ascontiguousarray(grid.array).tobytes()).hexdigest()[:16]


def _plan_for(cfg: BenchConfig, strategy: str, ranks: int, threads: int, wisdom, grid):
    if strategy == DIST:
        # local rows of each rank run fork-join; plan and time that shape
        kwargs = {}
        if cfg.plan is PlanningMode.MEASURE:
            def runner(p):
                proxy = random_grid(p.rows, p.cols, cfg.seed)
                return run_distributed(proxy, p, min(ranks, p.rows), threads)
            kwargs = dict(reps=cfg.measure_reps, wisdom=wisdom, runner=runner, seed=cfg.seed)
        return make_plan(cfg.rows, cfg.cols, threads, StrategyId.FOR_LOOP, cfg.plan, **kwargs)
    kwargs = dict(reps=cfg.measure_reps, wisdom=wisdom, seed=cfg.seed) if cfg.plan is PlanningMode.MEASURE else {}
    return make_plan(cfg.rows, cfg.cols, threads, strategy, cfg.plan, **kwargs)


def _executor(strategy, ranks, threads, plan, grid, engine_timer):
    if strategy == DIST:
        return lambda: run_distributed(grid, plan, ranks, threads, engine_timer)
    return lambda: fft2d(grid, plan, threads, engine_timer)


def run_strong_scaling(cfg: BenchConfig, timer: TimerSource | None = None,
                       engine_timer: TimerSource | None = None) -> list[ScalingRecord]:
    """Sweep every configured point and return one record per point.

    ``timer`` brackets each timed engine call (the warm-up is not timed);
    ``engine_timer`` is handed to the engine for its phase breakdown.
    Points that raise are recorded with NaN statistics and ``error`` set.
    """
    cfg.validate()
    timer = timer or MonotonicTimer()
    grid = random_grid(cfg.rows, cfg.cols, cfg.seed)
    wisdom = wisdom_load(cfg.wisdom) if cfg.wisdom else (WisdomStore() if cfg.plan is PlanningMode.MEASURE else None)
    available = os.cpu_count() or 1
    records = []
    for strategy, ranks, threads in cfg.points():
        if ranks * threads > available:
            warnings.warn(f"{strategy} ({ranks}/{threads}) asks for {ranks * threads} workers "
                          f"but only {available} CPUs are available", RuntimeWarning, stacklevel=2)
        try:
            plan = _plan_for(cfg, strategy, ranks, threads, wisdom, grid)
            run = _executor(strategy, ranks, threads, plan, grid, engine_timer)
            out, _ = run()  # warm-up
            digest = checksum(out)
            times, fft_fracs, tr_fracs = [], [], []
            for _ in range(cfg.reps):
                t0 = timer.now()
                out, breakdown = run()
                times.append(timer.now() - t0)
                fft_fracs.append(breakdown.fft_fraction)
                tr_fracs.append(breakdown.transpose_fraction)
            rec = ScalingRecord(strategy, ranks, threads, statistics.median(times), min(times), max(times),
                                statistics.fmean(fft_fracs), statistics.fmean(tr_fracs), digest)
            log.info("%s (%d/%d): median %.4g s [%.4g, %.4g] checksum %s", strategy, ranks, threads,
                     rec.median_s, rec.min_s, rec.max_s, digest)
        except (PlanarFFTError, MemoryError, RuntimeError) as exc:
            log.error("%s (%d/%d) failed: %s", strategy, ranks, threads, exc)
            nan = math.nan
            rec = ScalingRecord(strategy, ranks, threads, nan, nan, nan, nan, nan, error=str(exc))
        records.append(rec)
    if cfg.wisdom and wisdom is not None:
        wisdom_save(wisdom, cfg.wisdom)
    if cfg.out:
        emit_csv(records, cfg.out)
    return records


@dataclass
class VerifyReport:
    errors: dict  # (strategy, ranks, threads) -> max abs error
    tolerance: float = VERIFY_TOLERANCE

    @property
    def max_abs_error(self) -> float:
        return max(self.errors.values())

    @property
    def passed(self) -> bool:
        return all(e <= self.tolerance for e in self.errors.values())

    def summary(self) -> str:
        lines = [f"{s} ({r}/{t}): max abs error {e:.3e}" for (s, r, t), e in self.errors.items()]
        lines.append(f"{'PASS' if self.passed else 'FAIL'}: max abs error {self.max_abs_error:.3e} "
                     f"(tolerance {self.tolerance:.0e})")
        return "\n".join(lines)


def default_engine(grid, strategy: str, ranks: int, threads: int):
    if strategy == DIST:
        plan = make_plan(grid.rows, grid.cols, threads, StrategyId.FOR_LOOP)
        return run_distributed(grid, plan, ranks, threads)[0]
    plan = make_plan(grid.rows, grid.cols, threads, strategy)
    return fft2d(grid, plan, threads)[0]


def verify_mode(cfg: BenchConfig, engine: Callable | None = None) -> VerifyReport:
    """Check each configured strategy against the 2D brute-force DFT on a 32x32 grid.

    Each strategy runs at its largest configured worker / rank / thread count.
    """
    cfg.validate()
    engine = engine or default_engine
    grid = random_grid(VERIFY_SIZE, VERIFY_SIZE, cfg.seed)
    expected = dft2_oracle(grid.array)[:, : VERIFY_SIZE // 2 + 1]
    errors = {}
    for s in cfg.strategies:
        if s == DIST:
            point = (s, min(cfg.ranks[-1], VERIFY_SIZE // 2), cfg.threads[-1])
        elif s == StrategyId.SEQUENTIAL.value:
            point = (s, 1, 1)
        else:
            point = (s, 1, cfg.workers[-1])
        out = engine(grid, *point)
        errors[point] = float(np.max(np.abs(np.asarray(out.array) - expected)))
    return VerifyReport(errors)
