"""Compare the numba and pure-numpy kernel backends on the hot loops.

    python3 benchmarks/bench_backends.py [--rows 1024] [--cols 1024] [--reps 5]

Both modules are imported directly, so PLANARFFT_NUMBA does not matter here.
Each kernel runs once untimed (numba compiles on first call) and then
``--reps`` times; the table shows the median wall time per call.
"""

import argparse
import statistics
import time

import numpy as np

from planarfft import _numpy_kernels
from planarfft._accel import HAVE_NUMBA
from planarfft.kernel import Direction, fft_tables


def median_time(fn, reps):
    fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def cases(mod, rows, cols, base, block):
    rng = np.random.default_rng(0)
    real = rng.standard_normal((rows, cols))
    cplx = real + 1j * rng.standard_normal((rows, cols))
    half = cols // 2 + 1
    spec = np.empty((rows, half), dtype=np.complex128)
    work = np.empty((half, rows), dtype=np.complex128)
    rt = fft_tables(cols, base, Direction.FORWARD)
    ct = fft_tables(rows, base, Direction.FORWARD)
    a = cplx.copy()
    return {
        "r2c rows": lambda: mod.fft_rows_r2c(real, spec, 0, rows, rt.perm, rt.roots, rt.twiddles, rt.base),
        "c2c rows": lambda: mod.fft_rows_c2c(a, 0, rows, rt.perm, rt.roots, rt.twiddles, rt.base),
        "c2c cols": lambda: mod.fft_cols_c2c(a, 0, cols, ct.perm, ct.roots, ct.twiddles, ct.base),
        "transpose naive": lambda: mod.transpose_rows_naive(spec, work, 0, half),
        f"transpose blocked({block})": lambda: mod.transpose_rows_blocked(spec, work, 0, half, block),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--rows", type=int, default=1024)
    p.add_argument("--cols", type=int, default=1024)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--base-case", type=int, default=8)
    p.add_argument("--block", type=int, default=64)
    args = p.parse_args(argv)

    backends = {"numpy": _numpy_kernels}
    if HAVE_NUMBA:
        from planarfft import _numba_kernels
        backends["numba"] = _numba_kernels
    else:
        print("numba is not installed; timing the numpy backend only")

    results = {}
    for name, mod in backends.items():
        for label, fn in cases(mod, args.rows, args.cols, args.base_case, args.block).items():
            results[label, name] = median_time(fn, args.reps)

    labels = list(dict.fromkeys(label for label, _ in results))
    print(f"{args.rows}x{args.cols}, base case {args.base_case}, median of {args.reps}")
    header = f"{'kernel':<24}" + "".join(f"{n + ' (ms)':>14}" for n in backends)
    if len(backends) == 2:
        header += f"{'numpy/numba':>14}"
    print(header)
    for label in labels:
        row = f"{label:<24}" + "".join(f"{results[label, n] * 1e3:>14.2f}" for n in backends)
        if len(backends) == 2:
            row += f"{results[label, 'numpy'] / results[label, 'numba']:>14.2f}"
        print(row)


if __name__ == "__main__":
    main()
