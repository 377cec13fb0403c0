"""Concrete maximally monotone operators with closed-form resolvents.

Two spec families live here.  Convex functions (``Quadratic``, ``L1`` and the
indicator functions) know their proximal maps.  Operator specs (``Linear``,
``Affine``, ``Constant``, ``DiagHarmonic``, ``Subdifferential``,
``NormalCone``, ``ScaledIdentityPlus``) are turned into
:class:`~firmmono.core.MonotoneOperator` handles by :func:`make_operator`.
Both serialize to plain dicts (the JSON schema used by the CLI).
"""

from dataclasses import dataclass

import numpy as np

from .core import Flags, FirmMap, MonotoneOperator
from .errors import DimensionError, MonotonicityError
from .numeric import EQ_TOL, as_matrix, as_vector, solve_linear

# --------------------------------------------------------------------------
# convex functions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Quadratic:
    """(lam/2) |x|^2 on R^dim."""

    lam: float
    dim: int

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"Quadratic needs lam > 0, got {self.lam}")
        _check_dim(self.dim)

    def prox(self, X):
        return X / (1.0 + self.lam)

    def scaled(self, c):
        return Quadratic(self.lam * c, self.dim)


@dataclass(frozen=True, eq=False)
class L1:
    """lam * |x|_1 on R^dim."""

    lam: float
    dim: int

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"L1 needs lam >= 0, got {self.lam}")
        _check_dim(self.dim)

    def prox(self, X):
        return np.sign(X) * np.maximum(np.abs(X) - self.lam, 0.0)

    def scaled(self, c):
        return L1(self.lam * c, self.dim)


class _Indicator:
    # scaling an indicator leaves it unchanged
    def scaled(self, c):
        return self


@dataclass(frozen=True, eq=False)
class IndicatorBall(_Indicator):
    """Indicator of the closed ball of the given radius about the origin."""

    radius: float
    dim: int

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"IndicatorBall needs radius > 0, got {self.radius}")
        _check_dim(self.dim)

    def prox(self, X):
        nrm = np.linalg.norm(X, axis=-1, keepdims=True)
        factor = np.minimum(1.0, self.radius / np.maximum(nrm, np.finfo(float).tiny))
        return X * factor


@dataclass(frozen=True, eq=False)
class IndicatorBox(_Indicator):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower)
        hi = as_vector(self.upper, lo.shape[0])
        if np.any(lo > hi):
            raise ValueError("IndicatorBox needs lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.shape[0]

    def prox(self, X):
        return np.clip(X, self.lower, self.upper)


@dataclass(frozen=True, eq=False)
class IndicatorSingleton(_Indicator):
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_vector(self.point))

    @property
    def dim(self):
        return self.point.shape[0]

    def prox(self, X):
        return np.broadcast_to(self.point, X.shape).copy()


@dataclass(frozen=True, eq=False)
class IndicatorAffine(_Indicator):
    """Indicator of ``anchor + span(basis)``; basis columns must be orthonormal."""

    anchor: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        p = as_vector(self.anchor)
        B = np.asarray(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if B.ndim != 2 or B.shape[0] != p.shape[0]:
            raise DimensionError(f"basis shape {B.shape} does not match anchor dimension {p.shape[0]}")
        if B.shape[1] and np.abs(B.T @ B - np.eye(B.shape[1])).max() > EQ_TOL:
            raise ValueError("IndicatorAffine basis columns must be orthonormal")
        object.__setattr__(self, "anchor", p)
        object.__setattr__(self, "basis", B)

    @property
    def dim(self):
        return self.anchor.shape[0]

    @property
    def projector(self):
        return self.basis @ self.basis.T

    def prox(self, X):
        return self.anchor + (X - self.anchor) @ self.projector.T


FUNCTION_TYPES = (Quadratic, L1, IndicatorBall, IndicatorBox, IndicatorSingleton, IndicatorAffine)
INDICATOR_TYPES = (IndicatorBall, IndicatorBox, IndicatorSingleton, IndicatorAffine)


def prox(f, x):
    """Proximal map ``argmin_y f(y) + |y - x|^2 / 2`` for one vector or a stack."""
    X = np.asarray(x, dtype=float)
    if X.shape[-1] != f.dim:
        raise DimensionError(f"prox of a function on R^{f.dim} applied to shape {X.shape}")
    return f.prox(X)


def diag_harmonic_resolvent(d, x):
    """Resolvent of ``x -> (x_n / n)``: componentwise ``n/(n+1) * x_n``."""
    v = as_vector(x, d)
    n = np.arange(1, d + 1, dtype=float)
    return n / (n + 1.0) * v


def _check_dim(d):
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"dim must be a positive integer, got {d!r}")


# --------------------------------------------------------------------------
# operator specs
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Linear:
    M: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "M", as_matrix(self.M, square=True))

    @property
    def dim(self):
        return self.M.shape[0]

    def scaled(self, c):
        return Linear(c * self.M)


@dataclass(frozen=True, eq=False)
class Affine:
    M: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        M = as_matrix(self.M, square=True)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", as_vector(self.b, M.shape[0]))

    @property
    def dim(self):
        return self.M.shape[0]

    def scaled(self, c):
        return Affine(c * self.M, c * self.b)


@dataclass(frozen=True, eq=False)
class Constant:
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", as_vector(self.z))

    @property
    def dim(self):
        return self.z.shape[0]

    def scaled(self, c):
        return Constant(c * self.z)


@dataclass(frozen=True, eq=False)
class DiagHarmonic:
    """``(x_n) -> (x_n / n)`` on the first ``d`` coordinates."""

    d: int

    def __post_init__(self):
        _check_dim(self.d)

    @property
    def dim(self):
        return self.d

    def scaled(self, c):
        return Linear(np.diag(c / np.arange(1, self.d + 1, dtype=float)))


@dataclass(frozen=True, eq=False)
class Subdifferential:
    f: object

    def __post_init__(self):
        if not isinstance(self.f, FUNCTION_TYPES):
            raise TypeError(f"unsupported function spec {type(self.f).__name__}")

    @property
    def dim(self):
        return self.f.dim

    def scaled(self, c):
        return Subdifferential(self.f.scaled(c))


@dataclass(frozen=True, eq=False)
class NormalCone:
    set: object

    def __post_init__(self):
        if not isinstance(self.set, INDICATOR_TYPES):
            raise TypeError("NormalCone needs an indicator function spec")

    @property
    def dim(self):
        return self.set.dim

    def scaled(self, c):
        return self


@dataclass(frozen=True, eq=False)
class ScaledIdentityPlus:
    """``eps * Id + inner``."""

    eps: float
    inner: object

    def __post_init__(self):
        if not self.eps >= 0:
            raise ValueError(f"ScaledIdentityPlus needs eps >= 0, got {self.eps}")
        if not isinstance(self.inner, OPERATOR_TYPES):
            raise TypeError(f"unsupported inner operator {type(self.inner).__name__}")

    @property
    def dim(self):
        return self.inner.dim

    def scaled(self, c):
        return ScaledIdentityPlus(self.eps * c, self.inner.scaled(c))


OPERATOR_TYPES = (Linear, Affine, Constant, DiagHarmonic, Subdifferential, NormalCone, ScaledIdentityPlus)


def _check_monotone(M):
    lam = float(np.linalg.eigvalsh(M + M.T).min())
    if lam < -EQ_TOL:
        raise MonotonicityError(lam)


def _resolvent_parts(spec):
    """(evaluator, matrix, offset) of the resolvent; matrix/offset None if not affine."""
    d = spec.dim
    if isinstance(spec, (Linear, Affine)):
        _check_monotone(spec.M)
        IM = np.eye(d) + spec.M
        R = solve_linear(IM, np.eye(d)).T
        if isinstance(spec, Linear):
            return (lambda Y: solve_linear(IM, Y)), R, np.zeros(d)
        b = spec.b
        return (lambda Y: solve_linear(IM, Y - b)), R, -R @ b
    if isinstance(spec, Constant):
        z = spec.z
        return (lambda Y: Y - z), np.eye(d), -z
    if isinstance(spec, DiagHarmonic):
        w = np.arange(1, d + 1, dtype=float)
        w = w / (w + 1.0)
        return (lambda Y: Y * w), np.diag(w), np.zeros(d)
    if isinstance(spec, (Subdifferential, NormalCone)):
        f = spec.f if isinstance(spec, Subdifferential) else spec.set
        M, c = _prox_affine_part(f)
        return f.prox, M, c
    if isinstance(spec, ScaledIdentityPlus):
        s = 1.0 + spec.eps
        ev, M, c = _resolvent_parts(spec.inner.scaled(1.0 / s))
        return (lambda Y: ev(Y / s)), (None if M is None else M / s), c
    raise TypeError(f"unknown operator spec {type(spec).__name__}")


def _prox_affine_part(f):
    d = f.dim
    if isinstance(f, Quadratic):
        return np.eye(d) / (1.0 + f.lam), np.zeros(d)
    if isinstance(f, L1) and f.lam == 0:
        return np.eye(d), np.zeros(d)
    if isinstance(f, IndicatorSingleton):
        return np.zeros((d, d)), f.point.copy()
    if isinstance(f, IndicatorAffine):
        P = f.projector
        return P, f.anchor - P @ f.anchor
    return None, None


def _direct_parts(spec):
    """(evaluator, matrix, offset) of A itself when A is single-valued, else Nones."""
    d = spec.dim
    if isinstance(spec, Linear):
        M = spec.M
        return (lambda X: X @ M.T), M, np.zeros(d)
    if isinstance(spec, Affine):
        M, b = spec.M, spec.b
        return (lambda X: X @ M.T + b), M, b
    if isinstance(spec, Constant):
        z = spec.z
        return (lambda X: np.broadcast_to(z, X.shape).copy()), np.zeros((d, d)), z
    if isinstance(spec, DiagHarmonic):
        w = 1.0 / np.arange(1, d + 1, dtype=float)
        return (lambda X: X * w), np.diag(w), np.zeros(d)
    if isinstance(spec, Subdifferential) and isinstance(spec.f, Quadratic):
        lam = spec.f.lam
        return (lambda X: lam * X), lam * np.eye(d), np.zeros(d)
    if isinstance(spec, Subdifferential) and isinstance(spec.f, L1) and spec.f.lam == 0:
        return (lambda X: np.zeros_like(X)), np.zeros((d, d)), np.zeros(d)
    if isinstance(spec, ScaledIdentityPlus):
        ev, M, c = _direct_parts(spec.inner)
        if ev is None:
            return None, None, None
        eps = spec.eps
        return (lambda X: eps * X + ev(X)), eps * np.eye(d) + M, c
    return None, None, None


def _flags(spec):
    if isinstance(spec, (Linear, Affine)):
        M = spec.M
        nonsingular = bool(np.linalg.cond(M) < 1e12)
        linear = isinstance(spec, Linear) or not np.any(spec.b)
        return Flags(linear, True, bool(np.abs(M - M.T).max() <= EQ_TOL), True, nonsingular)
    if isinstance(spec, Constant):
        return Flags(not np.any(spec.z), True, True, True, False)
    if isinstance(spec, DiagHarmonic):
        return Flags(True, True, True, True, True)
    if isinstance(spec, (Subdifferential, NormalCone)):
        return _function_flags(spec.f if isinstance(spec, Subdifferential) else spec.set)
    if isinstance(spec, ScaledIdentityPlus):
        inner = _flags(spec.inner)
        if spec.eps == 0:
            return inner
        return Flags(inner.is_linear, inner.is_affine, inner.is_subdifferential,
                     inner.at_most_single_valued, True)
    raise TypeError(f"unknown operator spec {type(spec).__name__}")


def _function_flags(f):
    if isinstance(f, Quadratic):
        return Flags(True, True, True, True, True)
    if isinstance(f, L1):
        zero = f.lam == 0
        return Flags(zero, zero, True, True if zero else False, False)
    if isinstance(f, IndicatorBall):
        return Flags(False, False, True, False, False)
    if isinstance(f, IndicatorBox):
        degenerate = bool(np.all(f.lower == f.upper))
        return Flags(False, degenerate, True, False, degenerate)
    if isinstance(f, IndicatorSingleton):
        # domain is a single point, so disjoint injectivity holds trivially
        return Flags(not np.any(f.point), True, True, False, True)
    if isinstance(f, IndicatorAffine):
        k = f.basis.shape[1]
        through_origin = not np.any(f.anchor - f.projector @ f.anchor)
        return Flags(through_origin, True, True, k == f.dim, k == 0)
    raise TypeError(f"unknown function spec {type(f).__name__}")


def make_operator(spec):
    """Build the operator handle for a catalog spec.

    Linear and affine specs are rejected with :class:`MonotonicityError` when
    ``M + M^T`` has a negative eigenvalue.
    """
    if not isinstance(spec, OPERATOR_TYPES):
        raise TypeError(f"unknown operator spec {type(spec).__name__}")
    prov = {"op": "catalog", "spec": spec_to_dict(spec)}
    ev, R, c = _resolvent_parts(spec)
    T = FirmMap(spec.dim, ev, {"op": "resolvent", "of": prov}, "firm", R, c)
    direct, M, b = _direct_parts(spec)
    return MonotoneOperator(spec.dim, T, direct, _flags(spec), spec, prov, M, b)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def _lst(a):
    return np.asarray(a, dtype=float).tolist()


def spec_to_dict(spec):
    """Canonical dict form of a function or operator spec."""
    if isinstance(spec, Quadratic):
        return {"type": "quadratic", "lam": float(spec.lam), "dim": int(spec.dim)}
    if isinstance(spec, L1):
        return {"type": "l1", "lam": float(spec.lam), "dim": int(spec.dim)}
    if isinstance(spec, IndicatorBall):
        return {"type": "ball", "radius": float(spec.radius), "dim": int(spec.dim)}
    if isinstance(spec, IndicatorBox):
        return {"type": "box", "lower": _lst(spec.lower), "upper": _lst(spec.upper)}
    if isinstance(spec, IndicatorSingleton):
        return {"type": "singleton", "point": _lst(spec.point)}
    if isinstance(spec, IndicatorAffine):
        return {"type": "affine_set", "anchor": _lst(spec.anchor), "basis": _lst(spec.basis)}
    if isinstance(spec, Linear):
        return {"type": "linear", "matrix": _lst(spec.M)}
    if isinstance(spec, Affine):
        return {"type": "affine", "matrix": _lst(spec.M), "offset": _lst(spec.b)}
    if isinstance(spec, Constant):
        return {"type": "constant", "value": _lst(spec.z)}
    if isinstance(spec, DiagHarmonic):
        return {"type": "diag_harmonic", "dim": int(spec.d)}
    if isinstance(spec, Subdifferential):
        return {"type": "subdifferential", "function": spec_to_dict(spec.f)}
    if isinstance(spec, NormalCone):
        return {"type": "normal_cone", "set": spec_to_dict(spec.set)}
    if isinstance(spec, ScaledIdentityPlus):
        return {"type": "scaled_identity_plus", "eps": float(spec.eps), "inner": spec_to_dict(spec.inner)}
    raise TypeError(f"cannot serialize {type(spec).__name__}")


def _req(d, key):
    if key not in d:
        raise KeyError(f"spec of type {d.get('type')!r} is missing field {key!r}")
    return d[key]


def spec_from_dict(d):
    """Inverse of :func:`spec_to_dict`."""
    if not isinstance(d, dict) or "type" not in d:
        raise ValueError(f"spec must be an object with a 'type' field, got {d!r}")
    t = d["type"]
    if t == "quadratic":
        return Quadratic(float(_req(d, "lam")), int(_req(d, "dim")))
    if t == "l1":
        return L1(float(_req(d, "lam")), int(_req(d, "dim")))
    if t == "ball":
        return IndicatorBall(float(_req(d, "radius")), int(_req(d, "dim")))
    if t == "box":
        return IndicatorBox(_req(d, "lower"), _req(d, "upper"))
    if t == "singleton":
        return IndicatorSingleton(_req(d, "point"))
    if t == "affine_set":
        return IndicatorAffine(_req(d, "anchor"), _req(d, "basis"))
    if t == "linear":
        return Linear(_req(d, "matrix"))
    if t == "affine":
        return Affine(_req(d, "matrix"), _req(d, "offset"))
    if t == "constant":
        return Constant(_req(d, "value"))
    if t == "diag_harmonic":
        return DiagHarmonic(int(_req(d, "dim")))
    if t == "subdifferential":
        return Subdifferential(spec_from_dict(_req(d, "function")))
    if t == "normal_cone":
        return NormalCone(spec_from_dict(_req(d, "set")))
    if t == "scaled_identity_plus":
        return ScaledIdentityPlus(float(_req(d, "eps")), spec_from_dict(_req(d, "inner")))
    raise ValueError(f"unknown spec type {t!r}")


# --------------------------------------------------------------------------
# named instances
# --------------------------------------------------------------------------

SKEW = np.array([[0.0, -1.0], [1.0, 0.0]])


def catalog_instances():
    """Named operator specs covering every variant, used by tests and the suite."""
    line = np.array([[1.0], [1.0]]) / np.sqrt(2.0)
    return {
        "skew": Linear(SKEW),
        "zero": Linear(np.zeros((2, 2))),
        "identity": Linear(np.eye(2)),
        "twice_identity": Linear(2.0 * np.eye(2)),
        "spd": Linear(np.array([[2.0, 0.5], [0.5, 1.0]])),
        "affine_skew": Affine(SKEW, np.array([1.0, -1.0])),
        "constant": Constant(np.array([1.0, 2.0])),
        "diag_harmonic_3": DiagHarmonic(3),
        "diag_harmonic_10": DiagHarmonic(10),
        "quadratic": Subdifferential(Quadratic(1.0, 2)),
        "l1": Subdifferential(L1(1.0, 2)),
        "ball": Subdifferential(IndicatorBall(1.0, 2)),
        "box": Subdifferential(IndicatorBox([-1.0, -0.5], [1.0, 2.0])),
        "singleton": Subdifferential(IndicatorSingleton([0.5, -1.0])),
        "line": Subdifferential(IndicatorAffine([0.0, 1.0], line)),
        "normal_cone_ball": NormalCone(IndicatorBall(2.0, 3)),
        "eps_skew": ScaledIdentityPlus(0.5, Linear(SKEW)),
        "eps_l1": ScaledIdentityPlus(1.0, Subdifferential(L1(0.5, 2))),
    }
