"""Parallel 2D real-to-complex FFT.

Radix-2 kernels, a four-phase 2D pipeline under several shared-memory
scheduling strategies, a slab-distributed variant over in-process ranks, an
estimate/measure planner with wisdom files, and a benchmark harness.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    InvalidArgumentError,
    PlanarFFTError,
    PlanningFailedError,
    ProtocolError,
    UnsupportedDecompositionError,
    UnsupportedSizeError,
    WisdomParseError,
)
from .kernel import BACKEND_NAME, Direction, dft_oracle, fft_c2c, fft_r2c, twiddle_table
from .layout import ComplexGrid, RealGrid, SecondPass, strided_column_fft, transpose_blocked, transpose_naive
from .engine import StrategyId, TaskGraphTrace, TimingBreakdown, fft2d, fft2d_parallel, fft2d_sequential
from .planner import Plan, PlanningMode, WisdomStore, plan_estimate, plan_measure, wisdom_load, wisdom_save
from .timing import FakeTimer, MonotonicTimer, timer_source
from .dist import (
    Communicator,
    Slab,
    all_to_all,
    distributed_transpose,
    fft2d_distributed,
    local_slab,
    run_distributed,
)
