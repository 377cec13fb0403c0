"""Dense linear algebra, seeded sampling and tolerances used across the package."""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, DimensionError, SingularMatrixError

# equality of linear-algebra results
EQ_TOL = 1e-10
# slack allowed when deciding an inequality verdict
INEQ_TOL = 1e-8
# sampled pairs closer than this are dropped before forming ratios
DEGENERATE = 1e-12

POWER_MAX_ITER = 10_000
POWER_RTOL = 1e-12
# power iteration runs on (M^T M)^(2^POWER_SQUARINGS); see spectral_norm
POWER_SQUARINGS = 16
COND_LIMIT = 1e12


def as_vector(x, dim=None):
    """Return ``x`` as a finite 1-D float array, optionally checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def as_matrix(M, square=False):
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


@dataclass(frozen=True)
class SampleConfig:
    """Seeded Gaussian sampling request: ``count`` points in R^dim with std ``scale``."""

    seed: int
    count: int
    dim: int
    scale: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not isinstance(self.count, (int, np.integer)) or self.count < 1:
            raise ValueError(f"count must be a positive integer, got {self.count!r}")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"scale must be positive, got {self.scale!r}")

    def replace(self, **changes):
        fields = dict(seed=self.seed, count=self.count, dim=self.dim, scale=self.scale)
        fields.update(changes)
        return SampleConfig(**fields)


def sample_points(cfg, stream=0):
    """Draw ``cfg.count`` i.i.d. N(0, scale^2 I) points as rows of an array.

    Each ``(seed, stream)`` pair has its own independent generator, so checkers
    that need several batches ask for streams 0, 1, 2, ...  Rows are generated
    in order, hence a smaller ``count`` yields a prefix of a larger one.
    """
    seq = np.random.SeedSequence(int(cfg.seed), spawn_key=(int(stream),))
    rng = np.random.default_rng(seq)
    return rng.standard_normal((cfg.count, cfg.dim)) * cfg.scale


def sample_uniform(cfg, stream, low, high, size=None):
    """Uniform draws on [low, high) from the ``(seed, stream)`` generator."""
    seq = np.random.SeedSequence(int(cfg.seed), spawn_key=(int(stream),))
    rng = np.random.default_rng(seq)
    return rng.uniform(low, high, cfg.count if size is None else size)


def spectral_norm(M):
    """Largest singular value of ``M`` by power iteration on ``M^T M``.

    The iteration is accelerated by repeated squaring: the operator iterated
    is ``(M^T M)^(2^k)``, which keeps nearly-degenerate top singular values
    (e.g. ``100/101`` vs ``99/100``) within the iteration cap.
    """
    A = as_matrix(M)
    G = A.T @ A
    scale = float(np.abs(G).max())
    if scale == 0.0:
        return 0.0
    value, iters, ok = kernels.power_iteration(G / scale, POWER_MAX_ITER, POWER_RTOL, POWER_SQUARINGS)
    if not ok:
        raise ConvergenceError("power iteration did not converge", float("nan"), iters)
    return math.sqrt(max(value, 0.0) * scale)


def solve_linear(M, b):
    """Solve ``M x = b`` for square ``M``.

    ``b`` may be a vector or a stack of vectors with shape (n, dim); the
    stacked case solves each row.  Raises :class:`SingularMatrixError` when
    ``M`` is singular or its condition number exceeds ``COND_LIMIT``.
    """
    A = as_matrix(M, square=True)
    B = np.asarray(b, dtype=float)
    n = A.shape[0]
    if B.shape[-1] != n or B.ndim not in (1, 2):
        raise DimensionError(f"right-hand side shape {B.shape} incompatible with {A.shape}")
    cond = float(np.linalg.cond(A))
    if not math.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError("matrix is singular or ill-conditioned", cond)
    try:
        x = np.linalg.solve(A, B.T).T if B.ndim == 2 else np.linalg.solve(A, B)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc), cond) from exc
    resid = np.linalg.norm(np.atleast_2d(x @ A.T - B), axis=1)
    bound = EQ_TOL * (np.linalg.norm(A, 2) * np.linalg.norm(np.atleast_2d(x), axis=1)
                      + np.linalg.norm(np.atleast_2d(B), axis=1))
    if np.any(resid > bound):
        raise SingularMatrixError("residual check failed", cond)
    return x
