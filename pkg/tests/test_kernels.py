import os
import subprocess
import sys

import numpy as np
import pytest

from firmmono import kernels
from firmmono.kernels import numba_backend, numpy_backend

pytestmark = pytest.mark.skipif(numba_backend is None, reason="numba not installed")


def _brute_pairs(X, U):
    out = []
    n = len(X)
    for i in range(n):
        for j in range(i + 1, n):
            dx, du = X[i] - X[j], U[i] - U[j]
            out.append((dx @ dx, du @ du, dx @ du))
    return np.array(out).T


@pytest.fixture
def data():
    rng = np.random.default_rng(7)
    return rng.standard_normal((37, 3)), rng.standard_normal((37, 3))


def test_pair_stats_backends_match_brute_force(data):
    X, U = data
    ref = _brute_pairs(X, U)
    for backend in (numpy_backend, numba_backend):
        got = np.array(backend.pair_stats(X, U))
        assert np.allclose(got, ref, atol=1e-13)


def test_pair_stats_tiny_inputs():
    for backend in (numpy_backend, numba_backend):
        dxx, duu, dxu = backend.pair_stats(np.zeros((1, 2)), np.zeros((1, 2)))
        assert dxx.size == duu.size == dxu.size == 0


def test_cyclic_sums_backends_match_loop():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((20, 4, 2))
    TX = 0.3 * X + rng.standard_normal((20, 4, 2))
    ref_s, ref_c = [], []
    for x, t in zip(X, TX):
        s = sum((x[i] - t[i]) @ (t[i] - t[(i + 1) % 4]) for i in range(4))
        c = sum((x[i] - x[(i + 1) % 4]) @ (x[i] - x[(i + 1) % 4]) for i in range(4))
        ref_s.append(s)
        ref_c.append(c)
    for backend in (numpy_backend, numba_backend):
        s, c = backend.cyclic_sums(X, TX)
        assert np.allclose(s, ref_s, atol=1e-12)
        assert np.allclose(c, ref_c, atol=1e-12)


def test_min_cross_inner_backends_match_brute_force():
    rng = np.random.default_rng(4)
    P, V = rng.standard_normal((6, 2)), rng.standard_normal((6, 2))
    Z, W = rng.standard_normal((40, 2)), rng.standard_normal((40, 2))
    vals = np.array([[(p - z) @ (v - w) for z, w in zip(Z, W)] for p, v in zip(P, V)])
    for backend in (numpy_backend, numba_backend):
        best, arg = backend.min_cross_inner(P, V, Z, W)
        assert np.allclose(best, vals.min(axis=1), atol=1e-13)
        assert np.array_equal(arg, vals.argmin(axis=1))


@pytest.mark.parametrize("M", [np.diag([1.0, 4.0, 2.0]), np.array([[2.0, 1.0], [1.0, 2.0]]), np.eye(3)])
def test_power_iteration_backends_agree(M):
    G = M.T @ M
    ref = np.linalg.eigvalsh(G).max()
    for backend in (numpy_backend, numba_backend):
        val, iters, ok = backend.power_iteration(G, 10_000, 1e-12, 16)
        assert ok
        assert val == pytest.approx(ref, rel=1e-12)


def test_environment_flag_selects_numpy_backend():
    code = "from firmmono import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, FIRMMONO_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["FIRMMONO_DISABLE_NUMBA"] = ""
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"


def test_dispatch_casts_inputs():
    X = np.arange(6).reshape(3, 2)  # integer, as a user might pass
    dxx, _, _ = kernels.pair_stats(X, X)
    assert dxx.dtype == np.float64
    assert np.allclose(dxx, [8.0, 32.0, 8.0])
