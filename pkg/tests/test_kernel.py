import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planarfft import InvalidArgumentError, UnsupportedSizeError
from planarfft.kernel import (
    Direction,
    dft2_oracle,
    dft_oracle,
    fft_c2c,
    fft_r2c,
    fft_tables,
    leaf_permutation,
    twiddle_table,
)

FWD, INV = Direction.FORWARD, Direction.INVERSE


def brute_force_dft(x, sign=-1):
    """Textbook double loop in plain Python; independent of the numpy oracle."""
    n = len(x)
    return [sum(x[j] * cmath.exp(sign * 2j * math.pi * k * j / n) for j in range(n)) for k in range(n)]


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = max(np.max(np.abs(b)), 1e-300)
    return np.max(np.abs(a - b)) / scale


def complex_signal(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# -- dft_oracle --------------------------------------------------------------

def test_oracle_constant_signal():
    np.testing.assert_allclose(dft_oracle([1, 1, 1, 1]), [4, 0, 0, 0], atol=1e-12)


def test_oracle_impulse():
    np.testing.assert_allclose(dft_oracle([1, 0, 0, 0]), [1, 1, 1, 1], atol=1e-12)


def test_oracle_hand_computed():
    # X1 = 1 - 2i - 3 + 4i, X2 = 1 - 2 + 3 - 4, X3 = 1 + 2i - 3 - 4i
    np.testing.assert_allclose(dft_oracle([1, 2, 3, 4]), [10, -2 + 2j, -2, -2 - 2j], atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 6, 7, 8, 12, 16])
def test_oracle_matches_python_double_loop(rng, n):
    x = complex_signal(rng, n)
    assert rel_err(dft_oracle(x), brute_force_dft(list(x))) < 1e-12
    assert rel_err(dft_oracle(x, INV), brute_force_dft(list(x), +1)) < 1e-12


def test_oracle_rejects_empty():
    with pytest.raises(InvalidArgumentError):
        dft_oracle([])


def test_oracle_batch_rows_independent(rng):
    x = rng.standard_normal((5, 8))
    batch = dft_oracle(x)
    for i in range(5):
        assert rel_err(batch[i], dft_oracle(x[i])) < 1e-14


def test_dft2_oracle_matches_numpy(rng):
    x = rng.standard_normal((8, 16))
    assert rel_err(dft2_oracle(x), np.fft.fft2(x)) < 1e-12


# -- twiddle_table -----------------------------------------------------------

def test_twiddles_quarter_roots():
    np.testing.assert_allclose(twiddle_table(4, FWD), [1, -1j], atol=1e-15)


def test_twiddles_n2():
    np.testing.assert_array_equal(twiddle_table(2, FWD), [1])


def test_twiddles_eighth_root():
    w = twiddle_table(8, FWD)[1]
    assert w.real == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert w.imag == pytest.approx(-math.sqrt(2) / 2, abs=1e-15)


@pytest.mark.parametrize("n", [2, 4, 64, 1024, 2**14])
def test_twiddles_unit_modulus(n):
    for d in (FWD, INV):
        w = twiddle_table(n, d)
        assert w.shape == (n // 2,)
        np.testing.assert_allclose(np.abs(w), 1.0, atol=1e-15)


def test_twiddles_inverse_is_conjugate():
    np.testing.assert_array_equal(twiddle_table(32, INV), np.conj(twiddle_table(32, FWD)))


def test_twiddles_cached_and_readonly():
    a = twiddle_table(16)
    assert a is twiddle_table(16)
    with pytest.raises(ValueError):
        a[0] = 2


def test_twiddles_size_check():
    with pytest.raises(UnsupportedSizeError):
        twiddle_table(12)


# -- fft_c2c -----------------------------------------------------------------

def test_c2c_impulse_base2():
    np.testing.assert_allclose(fft_c2c([1, 0, 0, 0, 0, 0, 0, 0], FWD, base_case=2), np.ones(8), atol=1e-15)


def test_c2c_hand_computed():
    np.testing.assert_allclose(fft_c2c([1, 2, 3, 4], FWD, base_case=2), [10, -2 + 2j, -2, -2 - 2j], atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 4, 8, 32])
def test_c2c_full_base_case_is_direct_sum(rng, n):
    x = complex_signal(rng, n)
    for d in (FWD, INV):
        np.testing.assert_array_equal(fft_c2c(x, d, base_case=n), dft_oracle(x, d))


@pytest.mark.parametrize("n", [12, 3, 1000])
def test_c2c_unsupported_size(n):
    with pytest.raises(UnsupportedSizeError):
        fft_c2c(np.ones(n))


def test_c2c_empty_is_invalid_not_unsupported():
    with pytest.raises(InvalidArgumentError) as info:
        fft_c2c([])
    assert not isinstance(info.value, UnsupportedSizeError)


def test_c2c_bad_base_case():
    with pytest.raises(InvalidArgumentError):
        fft_c2c(np.ones(8), base_case=3)


def test_c2c_base_case_above_length_clamps(rng):
    x = complex_signal(rng, 8)
    np.testing.assert_array_equal(fft_c2c(x, base_case=64), dft_oracle(x))


def test_c2c_does_not_modify_input(rng):
    x = complex_signal(rng, 64)
    keep = x.copy()
    fft_c2c(x)
    np.testing.assert_array_equal(x, keep)


@pytest.mark.parametrize("n", [2**k for k in range(0, 11)])
@pytest.mark.parametrize("base", [1, 2, 4, 8, 64])
def test_c2c_against_oracle_all_base_cases(rng, n, base):
    x = complex_signal(rng, n)
    for d in (FWD, INV):
        assert rel_err(fft_c2c(x, d, base), dft_oracle(x, d)) <= 1e-9


# -- both backends through the table interface -------------------------------

@pytest.mark.parametrize("n", [1, 2, 8, 64, 512])
@pytest.mark.parametrize("base", [1, 4, 8, 32])
def test_backend_rows_c2c(kernels, rng, n, base):
    t = fft_tables(n, base, FWD)
    x = rng.standard_normal((3, n)) + 1j * rng.standard_normal((3, n))
    a = x.copy()
    kernels.fft_rows_c2c(a, 0, 3, t.perm, t.roots, t.twiddles, t.base)
    assert rel_err(a, dft_oracle(x)) <= 1e-9


@pytest.mark.parametrize("n", [2, 16, 256])
def test_backend_rows_r2c_partial_range(kernels, rng, n):
    t = fft_tables(n, 8, FWD)
    x = rng.standard_normal((6, n))
    out = np.full((6, n // 2 + 1), np.nan + 0j)
    kernels.fft_rows_r2c(x, out, 2, 5, t.perm, t.roots, t.twiddles, t.base)
    assert np.isnan(out[[0, 1, 5]]).all()
    assert rel_err(out[2:5], dft_oracle(x[2:5])[:, : n // 2 + 1]) <= 1e-9


def test_backend_cols(kernels, rng):
    t = fft_tables(16, 4, FWD)
    x = rng.standard_normal((16, 6)) + 1j * rng.standard_normal((16, 6))
    a = x.copy()
    kernels.fft_cols_c2c(a, 1, 4, t.perm, t.roots, t.twiddles, t.base)
    np.testing.assert_array_equal(a[:, [0, 4, 5]], x[:, [0, 4, 5]])
    assert rel_err(a[:, 1:4], dft_oracle(x[:, 1:4].T).T) <= 1e-9


@pytest.mark.parametrize("base", [1, 8, 64])
def test_backend_rows_independent_of_batching(kernels, rng, base):
    # strategies split rows differently; each row must round identically
    t = fft_tables(256, base, FWD)
    x = rng.standard_normal((7, 256)) + 1j * rng.standard_normal((7, 256))
    whole = x.copy()
    kernels.fft_rows_c2c(whole, 0, 7, t.perm, t.roots, t.twiddles, t.base)
    pieces = x.copy()
    for lo, hi in [(0, 1), (1, 4), (4, 7)]:
        kernels.fft_rows_c2c(pieces, lo, hi, t.perm, t.roots, t.twiddles, t.base)
    np.testing.assert_array_equal(whole, pieces)
    cols = np.ascontiguousarray(x.T)
    kernels.fft_cols_c2c(cols, 0, 7, t.perm, t.roots, t.twiddles, t.base)
    np.testing.assert_array_equal(cols.T, whole)


def test_leaf_permutation_is_permutation():
    for n, b in [(8, 1), (8, 2), (64, 8), (1024, 64), (16, 16)]:
        p = leaf_permutation(n, b)
        assert sorted(p.tolist()) == list(range(n))
    # base 1 is the classic bit reversal
    assert leaf_permutation(8, 1).tolist() == [0, 4, 2, 6, 1, 5, 3, 7]


# -- fft_r2c -----------------------------------------------------------------

def test_r2c_hand_computed():
    np.testing.assert_allclose(fft_r2c([1, 2, 3, 4]), [10, -2 + 2j, -2], atol=1e-12)


@pytest.mark.parametrize("c", [1.0, -2.5, 1e3])
def test_r2c_constant(c):
    np.testing.assert_allclose(fft_r2c(np.full(8, c)), [8 * c, 0, 0, 0, 0], atol=1e-12 * abs(c))


def test_r2c_random_64_vs_oracle(rng):
    x = rng.standard_normal(64)
    y = fft_r2c(x)
    assert y.shape == (33,)
    assert rel_err(y, dft_oracle(x)[:33]) <= 1e-9


@pytest.mark.parametrize("n", [2, 4, 16, 256, 1024])
def test_r2c_edge_bins_real(rng, n):
    y = fft_r2c(rng.standard_normal(n))
    assert abs(y[0].imag) <= 1e-12
    assert abs(y[n // 2].imag) <= 1e-12


def test_r2c_errors():
    with pytest.raises(UnsupportedSizeError):
        fft_r2c(np.ones(6))
    with pytest.raises(UnsupportedSizeError):
        fft_r2c(np.ones(1))
    with pytest.raises(InvalidArgumentError):
        fft_r2c([])


# -- properties --------------------------------------------------------------

sizes = st.sampled_from([2**k for k in range(0, 10)])
bases = st.sampled_from([1, 2, 4, 8, 16])
seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(n=sizes, base=bases, seed=seeds, a=st.complex_numbers(max_magnitude=10, allow_nan=False),
       b=st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_linearity(n, base, seed, a, b):
    r = np.random.default_rng(seed)
    x, y = complex_signal(r, n), complex_signal(r, n)
    lhs = fft_c2c(a * x + b * y, FWD, base)
    rhs = a * fft_c2c(x, FWD, base) + b * fft_c2c(y, FWD, base)
    scale = (abs(a) + abs(b)) * max(np.max(np.abs(fft_c2c(x))), np.max(np.abs(fft_c2c(y))), 1e-300)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(n=sizes, base=bases, seed=seeds)
def test_round_trip_scales_by_n(n, base, seed):
    x = complex_signal(np.random.default_rng(seed), n)
    back = fft_c2c(fft_c2c(x, FWD, base), INV, base)
    assert rel_err(back, n * x) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(n=sizes, base=bases, seed=seeds)
def test_parseval(n, base, seed):
    x = complex_signal(np.random.default_rng(seed), n)
    energy = np.sum(np.abs(x) ** 2)
    spectral = np.sum(np.abs(fft_c2c(x, FWD, base)) ** 2) / n
    assert abs(energy - spectral) <= 1e-9 * energy


@settings(max_examples=60, deadline=None)
@given(n=sizes.filter(lambda v: v >= 2), base=bases, seed=seeds)
def test_hermitian_symmetry_and_truncation(n, base, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    full = fft_c2c(x.astype(complex), FWD, base)
    k = np.arange(n)
    np.testing.assert_allclose(full[k], np.conj(full[(n - k) % n]), atol=1e-9 * np.max(np.abs(full)))
    np.testing.assert_allclose(fft_r2c(x, base), full[: n // 2 + 1], rtol=0, atol=1e-12 * np.max(np.abs(full)))


@settings(max_examples=40, deadline=None)
@given(n=sizes, seed=seeds)
def test_outputs_finite(n, seed):
    x = complex_signal(np.random.default_rng(seed), n) * 1e6
    assert np.isfinite(fft_c2c(x)).all()
