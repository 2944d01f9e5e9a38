"""Numba and numpy kernel paths must agree exactly on the same inputs."""

import numpy as np
import pytest

from dsproto import _kernels


def _random_focal_arrays(rng, frame_bits=6, max_focals=8):
    n = int(rng.integers(1, max_focals + 1))
    keys = rng.choice(
        np.arange(1, 2**frame_bits, dtype=np.uint64), size=n, replace=False
    )
    keys.sort()
    masses = rng.random(n) + 0.01
    return keys, masses / masses.sum()


numba_available = _kernels.BACKEND == "numba" or _kernels._ENV_FLAG == "0"


@pytest.fixture(scope="module")
def numba_kernels():
    try:
        return _kernels._load_numba()
    except ImportError:
        pytest.skip("numba not installed")


def test_backend_selected():
    assert _kernels.BACKEND in ("numba", "numpy")


def test_paths_agree_on_combination(numba_kernels):
    combine_nb, conflict_nb = numba_kernels
    rng = np.random.default_rng(7)
    for _ in range(200):
        k1, m1 = _random_focal_arrays(rng)
        k2, m2 = _random_focal_arrays(rng)
        keys_np, masses_np, c_np = _kernels.numpy_combine(k1, m1, k2, m2)
        keys_nb, masses_nb, c_nb = combine_nb(k1, m1, k2, m2)
        assert np.array_equal(keys_np, keys_nb)
        np.testing.assert_allclose(masses_np, masses_nb, rtol=0, atol=1e-15)
        assert c_np == pytest.approx(c_nb, abs=1e-15)
        assert conflict_nb(k1, m1, k2, m2) == pytest.approx(c_np, abs=1e-15)


def test_conflict_only_matches_combine():
    rng = np.random.default_rng(8)
    for _ in range(100):
        k1, m1 = _random_focal_arrays(rng)
        k2, m2 = _random_focal_arrays(rng)
        _, _, c = _kernels.numpy_combine(k1, m1, k2, m2)
        assert _kernels.numpy_conflict(k1, m1, k2, m2) == pytest.approx(c, abs=1e-15)


def test_high_bit_masks(numba_kernels):
    # bit 63 exercises the uint64 sign-bit position
    combine_nb, _ = numba_kernels
    k1 = np.array([1 << 63, (1 << 64) - 1], dtype=np.uint64)
    m1 = np.array([0.5, 0.5])
    k2 = np.array([1 << 62, (1 << 64) - 1], dtype=np.uint64)
    m2 = np.array([0.25, 0.75])
    keys_np, masses_np, c_np = _kernels.numpy_combine(k1, m1, k2, m2)
    keys_nb, masses_nb, c_nb = combine_nb(k1, m1, k2, m2)
    assert np.array_equal(keys_np, keys_nb)
    np.testing.assert_allclose(masses_np, masses_nb)
    assert c_np == pytest.approx(0.125) == pytest.approx(c_nb)
