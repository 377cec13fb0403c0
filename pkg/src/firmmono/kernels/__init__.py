"""Hot numeric loops, numba-compiled when available.

Set ``FIRMMONO_DISABLE_NUMBA=1`` before import to force the pure-numpy path.
Both backends stay importable as ``kernels.numpy_backend`` and
``kernels.numba_backend`` (the latter is ``None`` without numba) so tests and
benchmarks can compare them directly.
"""

import os

import numpy as np

from . import _numpy as numpy_backend

_FLAG = os.environ.get("FIRMMONO_DISABLE_NUMBA", "").strip().lower()

try:
    from . import _numba as numba_backend
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_backend = None

USE_NUMBA = numba_backend is not None and _FLAG not in ("1", "true", "yes", "on")
BACKEND = "numba" if USE_NUMBA else "numpy"
_impl = numba_backend if USE_NUMBA else numpy_backend


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def pair_stats(X, U):
    return _impl.pair_stats(_f64(X), _f64(U))


def cyclic_sums(X, TX):
    return _impl.cyclic_sums(_f64(X), _f64(TX))


def min_cross_inner(P, V, Z, W):
    return _impl.min_cross_inner(_f64(P), _f64(V), _f64(Z), _f64(W))


def power_iteration(G, max_iter, rtol, squarings):
    value, iters, ok = _impl.power_iteration(_f64(G), int(max_iter), float(rtol), int(squarings))
    return float(value), int(iters), bool(ok)


def warmup():
    """Trigger JIT compilation (or cache load) of every kernel."""
    X = np.zeros((3, 2))
    pair_stats(X, X)
    cyclic_sums(np.zeros((1, 3, 2)), np.zeros((1, 3, 2)))
    min_cross_inner(X, X, X, X)
    power_iteration(np.eye(2), 10, 1e-12, 2)


__all__ = [
    "BACKEND", "USE_NUMBA", "numpy_backend", "numba_backend",
    "pair_stats", "cyclic_sums", "min_cross_inner", "power_iteration", "warmup",
]
