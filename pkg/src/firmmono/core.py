"""Resolvents, the Minty parametrization, and the three duality transforms.

Operators are never evaluated as sets.  A maximally monotone operator is
carried by its resolvent ``J_A = (Id + A)^{-1}``; its graph is reached
through ``x -> (J_A x, x - J_A x)``.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, DimensionError
from .numeric import solve_linear

NEWTON_MAX_STEPS = 100
DAMPED_MAX_STEPS = 10_000
SOLVER_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FirmMap:
    """A single-valued map R^dim -> R^dim with a record of how it was built.

    ``evaluator`` takes an (n, dim) array and returns an (n, dim) array.
    ``kind`` is ``"firm"`` when firm nonexpansiveness follows from the
    construction, ``"nonexpansive"`` for reflections and compositions, and
    ``"map"`` when nothing is known.  If the map is affine and its linear part
    is known, ``matrix`` and ``offset`` hold it: ``T x = matrix @ x + offset``.
    """

    dim: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    provenance: dict
    kind: str = "firm"
    matrix: Optional[np.ndarray] = None
    offset: Optional[np.ndarray] = None

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if arr.shape[-1] != self.dim or arr.ndim not in (1, 2):
            raise DimensionError(f"map on R^{self.dim} applied to array of shape {arr.shape}")
        if arr.ndim == 1:
            return np.asarray(self.evaluator(arr[None, :]))[0]
        return np.asarray(self.evaluator(arr))

    @property
    def is_affine_known(self):
        return self.matrix is not None

    @classmethod
    def from_matrix(cls, M, provenance, offset=None, kind="firm"):
        M = np.asarray(M, dtype=float)
        c = None if offset is None else np.asarray(offset, dtype=float)
        if c is None:
            ev = lambda X: X @ M.T
        else:
            ev = lambda X: X @ M.T + c
        return cls(M.shape[0], ev, provenance, kind, M, np.zeros(M.shape[0]) if c is None else c)


@dataclass(frozen=True)
class Flags:
    """Structural facts about an operator; ``None`` means unknown."""

    is_linear: Optional[bool] = None
    is_affine: Optional[bool] = None
    is_subdifferential: Optional[bool] = None
    at_most_single_valued: Optional[bool] = None
    disjointly_injective: Optional[bool] = None

    def dual(self):
        # A^{-1} is single-valued iff A is disjointly injective, and vice versa
        return replace(
            self,
            at_most_single_valued=self.disjointly_injective,
            disjointly_injective=self.at_most_single_valued,
        )

    def as_dict(self):
        return {
            "is_linear": self.is_linear,
            "is_affine": self.is_affine,
            "is_subdifferential": self.is_subdifferential,
            "at_most_single_valued": self.at_most_single_valued,
            "disjointly_injective": self.disjointly_injective,
        }


@dataclass(frozen=True, eq=False)
class MonotoneOperator:
    dim: int
    resolvent: FirmMap
    direct_eval: Optional[Callable[[np.ndarray], np.ndarray]] = None
    flags: Flags = field(default_factory=Flags)
    spec: object = None
    provenance: dict = field(default_factory=dict)
    # set when A is single-valued affine: A x = matrix @ x + offset
    matrix: Optional[np.ndarray] = None
    offset: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class GraphSample:
    """Points ``(x_k, u_k)`` of a graph, stored as two (n, dim) arrays."""

    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        if self.x.shape != self.u.shape or self.x.ndim != 2:
            raise DimensionError(f"graph sample arrays must match: {self.x.shape} vs {self.u.shape}")

    def __len__(self):
        return self.x.shape[0]

    @property
    def dim(self):
        return self.x.shape[1]

    @property
    def pairs(self):
        return list(zip(self.x, self.u))

    def swap(self):
        """The same points read as a sample of the inverse's graph."""
        return GraphSample(self.u, self.x)


def _solve_point(direct_eval, y):
    """Find x with x + A(x) = y: Newton with a forward-difference Jacobian,
    then damped iteration x <- x/2 + (y - A x)/2 if Newton stalls."""
    d = y.shape[0]

    def A(v):
        return np.asarray(direct_eval(v[None, :]))[0]

    def resid(v):
        return v + A(v) - y

    x = y.copy()
    F = resid(x)
    r = np.linalg.norm(F)
    for _ in range(NEWTON_MAX_STEPS):
        if r <= SOLVER_TOL:
            return x
        h = 1e-6 * (1.0 + np.linalg.norm(x))
        Ax = A(x)
        J = np.eye(d)
        for k in range(d):
            e = np.zeros(d)
            e[k] = h
            J[:, k] += (A(x + e) - Ax) / h
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        while t > 1e-4:
            cand = x + t * step
            Fc = resid(cand)
            rc = np.linalg.norm(Fc)
            if rc < r:
                x, F, r = cand, Fc, rc
                break
            t *= 0.5
        else:
            break
    for _ in range(DAMPED_MAX_STEPS):
        if r <= SOLVER_TOL:
            return x
        x = 0.5 * x + 0.5 * (y - A(x))
        r = np.linalg.norm(resid(x))
    if r <= SOLVER_TOL:
        return x
    raise ConvergenceError("resolvent solve x + A(x) = y failed", float(r),
                           NEWTON_MAX_STEPS + DAMPED_MAX_STEPS)


def operator_from_direct(dim, direct_eval, flags=None, name="direct"):
    """Wrap a single-valued monotone map; its resolvent is solver-backed."""

    def ev(Y):
        return np.stack([_solve_point(direct_eval, y) for y in Y])

    prov = {"op": "direct", "name": name}
    T = FirmMap(dim, ev, {"op": "resolvent", "of": prov}, "firm")
    return MonotoneOperator(dim, T, direct_eval, flags or Flags(at_most_single_valued=True), None, prov)


def resolvent(A):
    """The resolvent ``J_A`` of ``A``."""
    return A.resolvent


def complement(T):
    """``Id - T``; firmly nonexpansive whenever ``T`` is."""
    kind = "firm" if T.kind == "firm" else "map"
    prov = {"op": "complement", "of": T.provenance}
    if T.matrix is not None:
        return FirmMap.from_matrix(np.eye(T.dim) - T.matrix, prov, -T.offset, kind)
    return FirmMap(T.dim, lambda X: X - T.evaluator(X), prov, kind)


def reflect(T):
    """The reflected map ``2T - Id``; nonexpansive whenever ``T`` is firm."""
    kind = "nonexpansive" if T.kind == "firm" else "map"
    prov = {"op": "reflect", "of": T.provenance}
    if T.matrix is not None:
        return FirmMap.from_matrix(2.0 * T.matrix - np.eye(T.dim), prov, 2.0 * T.offset, kind)
    return FirmMap(T.dim, lambda X: 2.0 * T.evaluator(X) - X, prov, kind)


def inverse(A):
    """The inverse operator, carried by ``J_{A^{-1}} = Id - J_A``."""
    prov = {"op": "inverse", "of": A.provenance}
    Tc = complement(A.resolvent)
    T = replace(Tc, provenance={"op": "resolvent", "of": prov})
    if A.matrix is not None and np.linalg.cond(A.matrix) < 1e12:
        Minv = solve_linear(A.matrix, np.eye(A.dim)).T
        c = -Minv @ A.offset
        return MonotoneOperator(A.dim, T, lambda X: X @ Minv.T + c, A.flags.dual(),
                                None, prov, Minv, c)
    return MonotoneOperator(A.dim, T, None, A.flags.dual(), None, prov)


def minty_sample(A, probes):
    """Graph points ``(J_A p, p - J_A p)`` for each probe row ``p``."""
    P = np.atleast_2d(np.asarray(probes, dtype=float))
    if P.shape[1] != A.dim:
        raise DimensionError(f"probes of dimension {P.shape[1]} for operator on R^{A.dim}")
    if not np.all(np.isfinite(P)):
        raise ValueError("probes must be finite")
    X = A.resolvent(P)
    return GraphSample(X, P - X)


def from_firm(T):
    """The operator ``T^{-1} - Id``, whose resolvent is ``T``."""
    prov = {"op": "from_firm", "of": T.provenance}
    R = replace(T, provenance={"op": "resolvent", "of": prov})
    linear = None
    if T.matrix is not None:
        linear = bool(np.all(T.offset == 0.0))
    flags = Flags(is_linear=linear, is_affine=True if T.matrix is not None else None)
    return MonotoneOperator(T.dim, R, None, flags, None, prov)


def identity_map(dim):
    return FirmMap.from_matrix(np.eye(dim), {"op": "identity", "dim": dim})
