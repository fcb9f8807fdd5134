import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobisums.dft import NAIVE_MAX, cyclic_convolve, dft, pairwise_sum


@pytest.mark.parametrize("n", [1, 2, 3, 7, 100, NAIVE_MAX - 1, NAIVE_MAX, 1008, 4092, 10006])
@pytest.mark.parametrize("sign", [-1, 1])
def test_dft_matches_numpy(n, sign):
    rng = np.random.default_rng(n)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    want = np.fft.fft(x) if sign == -1 else np.fft.ifft(x) * n
    got = dft(x, sign)
    assert np.max(np.abs(got - want)) <= 1e-10 * n


def test_dft_batched_rows_match_single():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(3, 700)) + 0j
    got = dft(x, +1)
    for i in range(3):
        assert np.allclose(got[i], dft(x[i], +1), atol=1e-9)


def test_dft_empty():
    assert dft(np.zeros(0)).shape == (0,)


def test_dft_inverse_round_trip():
    x = np.exp(2j * np.pi * np.arange(997) ** 2 / 997)
    assert np.max(np.abs(dft(dft(x, -1), +1) / 997 - x)) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=0, max_size=300))
def test_pairwise_sum_close_to_fsum(xs):
    got = float(pairwise_sum(np.array(xs, dtype=float)))
    want = math.fsum(xs)
    assert abs(got - want) <= 1e-12 * max(1.0, sum(abs(v) for v in xs))


def test_pairwise_sum_axis_and_determinism():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(4, 1001))
    rows = pairwise_sum(x, axis=-1)
    cols = pairwise_sum(x.T, axis=0)
    assert np.array_equal(rows, cols)
    assert np.array_equal(rows, pairwise_sum(x.copy(), axis=-1))


@pytest.mark.parametrize("n", [1, 5, 16, 101, 1000])
def test_cyclic_convolve_matches_brute_force(n):
    rng = np.random.default_rng(n)
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    want = np.zeros(n, dtype=complex)
    for i in range(n):
        want += a[i] * np.roll(b, i)
    assert np.max(np.abs(cyclic_convolve(a, b) - want)) <= 1e-9 * n
