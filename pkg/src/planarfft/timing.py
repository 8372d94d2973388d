"""Timer sources used by the planner, engines and benchmark harness."""

from __future__ import annotations

import time
from typing import Iterable, Protocol


class TimerSource(Protocol):
    resolution: float

    def now(self) -> float:
        ...


class MonotonicTimer:
    """Wall-clock timer backed by ``time.perf_counter``."""

    def __init__(self):
        self.resolution = time.get_clock_info("perf_counter").resolution

    def now(self) -> float:
        return time.perf_counter()


class FakeTimer:
    """Scripted timer for tests.

    Returns ``readings`` in order. Once the script runs out it keeps
    advancing by ``step`` if one was given, otherwise it raises
    ``RuntimeError`` (which the planner reports as a planning failure).
    """

    def __init__(self, readings: Iterable[float] = (), *, step: float | None = None,
                 resolution: float = 1e-9):
        self._readings = list(readings)
        self._pos = 0
        self._last = None
        self.step = step
        self.resolution = resolution

    @classmethod
    def from_durations(cls, durations, start=0.0, **kwargs):
        """Script that makes consecutive ``(now(), now())`` pairs measure ``durations``."""
        readings = []
        t = start
        for d in durations:
            readings += [t, t + d]
            t += d
        return cls(readings, **kwargs)

    @property
    def reads(self) -> int:
        return self._pos

    def now(self) -> float:
        if self._pos < len(self._readings):
            value = self._readings[self._pos]
        elif self.step is not None:
            value = (self._last if self._last is not None else 0.0) + self.step
        else:
            raise RuntimeError(f"fake timer script exhausted after {self._pos} reads")
        self._pos += 1
        self._last = value
        return value


def timer_source(kind: str = "monotonic") -> TimerSource:
    if kind == "monotonic":
        return MonotonicTimer()
    if kind == "fake":
        return FakeTimer(step=1.0)
    raise ValueError(f"unknown timer kind {kind!r}")
