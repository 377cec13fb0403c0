"""Compositions, averages, backward-backward and Douglas-Rachford maps, and Picard iteration."""

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import checks
from .checks import PropertyReport, Verdict, Witness
from .core import FirmMap, identity_map, minty_sample, reflect
from .errors import DimensionError
from .numeric import DEGENERATE, INEQ_TOL, as_vector, sample_points, spectral_norm

DIVERGENCE_NORM = 1e12
WEIGHT_SUM_TOL = 1e-12
CLUSTER_DIAMETER = 1e-6
# a below-estimate probe of the reflected-contraction conditions uses beta * (1 - PROBE_SHRINK)
PROBE_SHRINK = 1e-3

_NONEXPANSIVE_KINDS = ("firm", "nonexpansive")


def _same_dim(maps):
    if not maps:
        raise ValueError("need at least one map")
    dim = maps[0].dim
    for m in maps[1:]:
        if m.dim != dim:
            raise DimensionError(f"maps on R^{dim} and R^{m.dim} cannot be combined")
    return dim


def compose(maps):
    """``T1 T2 ... Tn``: the last map is applied first."""
    maps = list(maps)
    dim = _same_dim(maps)
    kind = "nonexpansive" if all(m.kind in _NONEXPANSIVE_KINDS for m in maps) else "map"
    if len(maps) == 1 and maps[0].kind == "firm":
        kind = "firm"
    prov = {"op": "compose", "of": [m.provenance for m in maps]}
    if all(m.matrix is not None for m in maps):
        M, c = np.eye(dim), np.zeros(dim)
        for m in reversed(maps):
            M, c = m.matrix @ M, m.matrix @ c + m.offset
        return FirmMap.from_matrix(M, prov, c, kind)

    def ev(X):
        for m in reversed(maps):
            X = m.evaluator(X)
        return X

    return FirmMap(dim, ev, prov, kind)


def convex_combine(maps, weights):
    """``sum_i w_i T_i`` with weights in (0, 1] summing to one."""
    maps = list(maps)
    w = np.asarray(weights, dtype=float)
    dim = _same_dim(maps)
    if w.shape != (len(maps),):
        raise ValueError(f"{len(maps)} maps but {w.size} weights")
    if np.any(w <= 0.0) or np.any(w > 1.0):
        raise ValueError("weights must lie in (0, 1]")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights sum to {w.sum()!r}, not 1")
    if all(m.kind == "firm" for m in maps):
        kind = "firm"
    elif all(m.kind in _NONEXPANSIVE_KINDS for m in maps):
        kind = "nonexpansive"
    else:
        kind = "map"
    prov = {"op": "combine", "weights": w.tolist(), "of": [m.provenance for m in maps]}
    if all(m.matrix is not None for m in maps):
        M = sum(wi * m.matrix for wi, m in zip(w, maps))
        c = sum(wi * m.offset for wi, m in zip(w, maps))
        return FirmMap.from_matrix(M, prov, c, kind)
    return FirmMap(dim, lambda X: sum(wi * m.evaluator(X) for wi, m in zip(w, maps)), prov, kind)


def backward_backward(A1, A2):
    """``J_{A1} J_{A2}``."""
    return compose([A1.resolvent, A2.resolvent])


def douglas_rachford_operator(A1, A2):
    """``(1/2)(2 J_{A1} - Id)(2 J_{A2} - Id) + (1/2) Id``, which is firmly nonexpansive."""
    if A1.dim != A2.dim:
        raise DimensionError(f"operators on R^{A1.dim} and R^{A2.dim}")
    inner = compose([reflect(A1.resolvent), reflect(A2.resolvent)])
    T = convex_combine([inner, identity_map(A1.dim)], [0.5, 0.5])
    prov = {"op": "douglas_rachford", "of": [A1.provenance, A2.provenance]}
    if T.matrix is not None:
        return FirmMap.from_matrix(T.matrix, prov, T.offset, "firm")
    return FirmMap(T.dim, T.evaluator, prov, "firm")


# --------------------------------------------------------------------------
# Picard iteration
# --------------------------------------------------------------------------


@dataclass
class IterationTrace:
    iterates: list
    residuals: list
    converged: bool
    iterations_used: int
    limit_point: Optional[np.ndarray] = None
    diverged: bool = False
    stop_tol: float = 0.0

    def summary(self):
        return {
            "converged": self.converged,
            "diverged": self.diverged,
            "iterations_used": self.iterations_used,
            "final_residual": self.residuals[-1] if self.residuals else None,
            "limit_point": None if self.limit_point is None else self.limit_point.tolist(),
            "stop_tol": self.stop_tol,
        }

    def residual_ratios(self):
        r = np.asarray(self.residuals)
        with np.errstate(divide="ignore", invalid="ignore"):
            return r[1:] / r[:-1]

    def write_csv(self, fh):
        """One row per iterate: index, residual leading to it, coordinates."""
        dim = len(self.iterates[0])
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "residual"] + [f"x{i}" for i in range(dim)])
        for k, x in enumerate(self.iterates):
            res = "" if k == 0 else repr(float(self.residuals[k - 1]))
            w.writerow([k, res] + [repr(float(v)) for v in x])


def picard_iterate(T, x0, max_iter=1000, stop_tol=1e-9):
    """Iterate ``x_{k+1} = T x_k`` until a step is at most ``stop_tol`` or the cap is hit.

    A run whose iterate norm passes 1e12 stops with ``diverged=True``.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x = as_vector(x0, T.dim)
    iterates, residuals = [x], []
    for _ in range(max_iter):
        y = T(x)
        res = float(np.linalg.norm(y - x))
        iterates.append(y)
        residuals.append(res)
        x = y
        if not np.all(np.isfinite(y)) or np.linalg.norm(y) > DIVERGENCE_NORM:
            return IterationTrace(iterates, residuals, False, len(residuals), None, True, stop_tol)
        if res <= stop_tol:
            return IterationTrace(iterates, residuals, True, len(residuals), y, False, stop_tol)
    return IterationTrace(iterates, residuals, False, len(residuals), None, False, stop_tol)


@dataclass
class FixedPointEvidence:
    label: str
    traces: list
    diameter: Optional[float]

    def to_dict(self):
        return {
            "label": self.label,
            "diameter": self.diameter,
            "starts": len(self.traces),
            "converged": [t.converged for t in self.traces],
            "iterations_used": [t.iterations_used for t in self.traces],
            "limits": [None if t.limit_point is None else t.limit_point.tolist() for t in self.traces],
        }


def multistart_fixed_points(T, cfg, starts=10, max_iter=1000, stop_tol=1e-9):
    """Picard runs from ``starts`` random points, labelled by how their limits cluster.

    ``singleton_evidence``: every run converged and the limits lie within a
    1e-6 diameter.  ``empty_or_nonattracting``: no run converged.  Anything
    else is ``mixed``.
    """
    X0 = sample_points(cfg.replace(count=starts, dim=T.dim), stream=400)
    traces = [picard_iterate(T, x0, max_iter, stop_tol) for x0 in X0]
    limits = np.array([t.limit_point for t in traces if t.converged])
    diameter = None
    if len(limits):
        diff = limits[:, None, :] - limits[None, :, :]
        diameter = float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))
    if len(limits) == len(traces) and diameter <= CLUSTER_DIAMETER:
        label = "singleton_evidence"
    elif not len(limits):
        label = "empty_or_nonattracting"
    else:
        label = "mixed"
    return FixedPointEvidence(label, traces, diameter)


# --------------------------------------------------------------------------
# reflected resolvent as a Banach contraction
# --------------------------------------------------------------------------

REFLECTED_CONDITIONS = ("i", "ii", "iii")


@dataclass
class ContractionAnalysis:
    """The three equivalent contraction statements evaluated at ``beta_estimate``.

    ``below`` holds the same three verdicts at a slightly smaller beta; they
    must agree too, and are ``violated`` whenever beta is attained on the
    sample.
    """

    beta_estimate: float
    condition_i_verdict: Verdict
    condition_ii_verdict: Verdict
    condition_iii_verdict: Verdict
    exact: bool
    below: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    sample_count: int = 0
    seed: Optional[int] = None

    @property
    def verdicts(self):
        return (self.condition_i_verdict, self.condition_ii_verdict, self.condition_iii_verdict)

    @property
    def agree(self):
        ok = len(set(self.verdicts)) == 1
        return ok and len(set(self.below.get("verdicts", {}).values())) <= 1

    @property
    def is_banach_contraction(self):
        return self.beta_estimate < 1.0 - INEQ_TOL

    def to_dict(self):
        return {
            "beta_estimate": self.beta_estimate,
            "exact": self.exact,
            "condition_i_verdict": self.condition_i_verdict.value,
            "condition_ii_verdict": self.condition_ii_verdict.value,
            "condition_iii_verdict": self.condition_iii_verdict.value,
            "agree": self.agree,
            "is_banach_contraction": self.is_banach_contraction,
            "below": {
                "beta": self.below.get("beta"),
                "verdicts": {k: v.value for k, v in self.below.get("verdicts", {}).items()},
            },
            "witnesses": {k: w.to_dict() for k, w in self.witnesses.items()},
            "sample_count": self.sample_count,
            "seed": self.seed,
        }


def _reflected_excess(T, X, Y, beta):
    """Per-pair excess of each condition; positive excess is a violation."""
    d = X - Y
    t = T(X) - T(Y)
    r = d - t
    n = t - r
    # graph differences of the Minty points (Tx, x - Tx) and (Ty, y - Ty)
    dx, du = t, r
    dot = lambda a, b: np.einsum("ij,ij->i", a, b)
    b2 = beta * beta
    dd = dot(d, d)
    m = INEQ_TOL * (1.0 + dd)
    return {
        "i": (1 - b2) * (dot(dx, dx) + dot(du, du)) - 2 * (1 + b2) * dot(dx, du) - m,
        "ii": (1 - b2) * dd - 4 * dot(t, r) - m,
        "iii": dot(n, n) - b2 * dd - m,
    }


def _reflected_sides(T, kind, p):
    cond = kind[len("reflected_"):]
    e = _reflected_excess(T, p["x"][None, :], p["y"][None, :], p["beta"])[cond][0]
    return float(e), 0.0


def _verdicts_at(T, X, Y, beta):
    excess = _reflected_excess(T, X, Y, beta)
    verdicts, witnesses = {}, {}
    for c in REFLECTED_CONDITIONS:
        e = excess[c]
        if np.any(e > 0.0):
            k = int(np.argmax(e))
            verdicts[c] = Verdict.VIOLATED
            witnesses[c] = Witness("reflected_" + c, {"x": X[k], "y": Y[k], "beta": beta}, float(e[k]), 0.0)
        else:
            verdicts[c] = Verdict.HOLDS
    return verdicts, witnesses


def analyze_reflected_contraction(A, cfg):
    """Estimate the contraction constant of ``N = 2 J_A - Id`` and test the three conditions at it.

    With a known linear part the constant is the exact spectral norm;
    otherwise it is the largest sampled ratio.
    """
    T = A.resolvent
    N = reflect(T)
    X, Y = sample_points(cfg, 0), sample_points(cfg, 1)
    exact = N.matrix is not None
    if exact:
        beta = spectral_norm(N.matrix)
    else:
        beta = checks.estimate_lipschitz(N, cfg).constants["lipschitz"]
    beta = float(min(max(beta, 0.0), 1.0))
    verdicts, witnesses = _verdicts_at(T, X, Y, beta)
    below = {}
    if beta > DEGENERATE:
        b = beta * (1.0 - PROBE_SHRINK)
        if exact:
            # make sure the probe sees the extremal direction
            v = np.linalg.svd(N.matrix)[2][0]
            X = np.vstack([X, v])
            Y = np.vstack([Y, np.zeros_like(v)])
        bv, bw = _verdicts_at(T, X, Y, b)
        below = {"beta": b, "verdicts": bv}
        witnesses.update({"below_" + k: w for k, w in bw.items()})
    return ContractionAnalysis(beta, verdicts["i"], verdicts["ii"], verdicts["iii"], exact,
                               below, witnesses, cfg.count, cfg.seed)


def strong_mono_test_map(A, eps):
    """``eps Id + (1 + eps) N`` with ``N = 2 J_A - Id``."""
    N = reflect(A.resolvent)
    prov = {"op": "strong_mono_test", "eps": eps, "of": N.provenance}
    if N.matrix is not None:
        return FirmMap.from_matrix(eps * np.eye(A.dim) + (1 + eps) * N.matrix, prov,
                                   (1 + eps) * N.offset, "map")
    return FirmMap(A.dim, lambda X: eps * X + (1 + eps) * N.evaluator(X), prov, "map")


def check_strong_mono_via_reflected(A, eps, cfg):
    """Strong monotonicity of ``A`` with constant ``eps`` read off a nonexpansiveness test.

    The graph-level estimate of the strong monotonicity constant is run on a
    Minty sample of the same size as a cross-check; if the two disagree the
    verdict is ``inconclusive``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    M = strong_mono_test_map(A, eps)
    lip = checks.estimate_lipschitz(M, cfg)
    G = minty_sample(A, sample_points(cfg, stream=500))
    graph = checks.estimate_strong_monotonicity(G, eps)
    agree = lip.verdict == graph.verdict
    verdict = lip.verdict if agree else Verdict.INCONCLUSIVE
    constants = dict(lip.constants)
    constants.update(graph.constants)
    return PropertyReport("strong_monotonicity_via_reflected", verdict, lip.witness, constants,
                          cfg.count, cfg.seed,
                          {"eps": eps, "graph_verdict": graph.verdict, "map_verdict": lip.verdict,
                           "agree": agree})
