"""Randomized and exact checkers for properties of firm maps and monotone operators.

Every checker returns a :class:`PropertyReport`.  ``holds_on_samples`` only
means no sampled pair (or tuple) broke the property; the one exception is
the exact spectral-norm route for maps whose affine part is known.  A
``violated`` report always carries a witness that :func:`replay_witness`
re-evaluates from scratch.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import kernels
from .core import complement, reflect
from .numeric import (
    DEGENERATE,
    INEQ_TOL,
    sample_points,
    sample_uniform,
    spectral_norm,
)

STRUCTURE_TOL = 1e-8
PARAMONOTONE_MATCH_TOL = 1e-6


class Verdict(str, Enum):
    HOLDS = "holds_on_samples"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(a) for a in v.tolist()] if v.ndim else _jsonable(v.item())
    if isinstance(v, (list, tuple)):
        return [_jsonable(a) for a in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(a) for k, a in v.items()}
    if isinstance(v, Enum):
        return v.value
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if np.isfinite(f) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if hasattr(v, "to_dict"):
        return v.to_dict()
    return v


@dataclass
class Witness:
    """Points that break an inequality, plus its two sides (``lhs > rhs`` is the violation)."""

    kind: str
    points: dict
    lhs: float
    rhs: float

    def to_dict(self):
        return {"kind": self.kind, "points": _jsonable(self.points),
                "lhs": _jsonable(self.lhs), "rhs": _jsonable(self.rhs)}


@dataclass
class PropertyReport:
    property_id: str
    verdict: Verdict
    witness: Optional[Witness] = None
    constants: dict = field(default_factory=dict)
    sample_count: int = 0
    seed: Optional[int] = None
    details: dict = field(default_factory=dict)

    def flag(self, name):
        """Verdict of one sub-property (``check_strict``, ``classify_structure``)."""
        return Verdict(self.details["flags"][name])

    def flag_witness(self, name):
        return self.details.get("witnesses", {}).get(name)

    def to_dict(self):
        return {
            "property_id": self.property_id,
            "verdict": self.verdict.value,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "constants": _jsonable(self.constants),
            "sample_count": int(self.sample_count),
            "seed": self.seed,
            "details": _jsonable(self.details),
        }


def _rows_dot(A, B):
    return np.einsum("ij,ij->i", A, B)


def _sample_pairs(cfg):
    return sample_points(cfg, 0), sample_points(cfg, 1)


def _margin(scale):
    return INEQ_TOL * (1.0 + scale)


class _PairIndex:
    """Maps flat pair positions from ``kernels.pair_stats`` back to (i, j)."""

    def __init__(self, n):
        self.i, self.j = np.triu_indices(n, 1)

    def __call__(self, k):
        return int(self.i[k]), int(self.j[k])


# --------------------------------------------------------------------------
# firm nonexpansiveness and Lipschitz constants
# --------------------------------------------------------------------------

FIRM_FORMS = ("sum_of_squares", "complement_firm", "reflection_nonexpansive",
              "inner_product", "symmetric")


def _firm_slacks(T, X, Y):
    """Slack of each of the five equivalent firmness inequalities on pairs (x, y).

    Nonnegative slack means the inequality holds for that pair.
    """
    TX, TY = T(X), T(Y)
    S = complement(T)
    SX, SY = S(X), S(Y)
    N = reflect(T)
    NX, NY = N(X), N(Y)
    d = X - Y
    t = TX - TY
    r = (X - TX) - (Y - TY)
    dd = _rows_dot(d, d)
    s = SX - SY
    q = (X - SX) - (Y - SY)
    n = NX - NY
    slacks = np.column_stack([
        dd - _rows_dot(t, t) - _rows_dot(r, r),
        dd - _rows_dot(s, s) - _rows_dot(q, q),
        dd - _rows_dot(n, n),
        _rows_dot(d, t) - _rows_dot(t, t),
        _rows_dot(t, r),
    ])
    return slacks, dd


def check_firm(T, cfg):
    """Test all five equivalent forms of firm nonexpansiveness on sampled pairs."""
    X, Y = _sample_pairs(cfg)
    slacks, dd = _firm_slacks(T, X, Y)
    ok = slacks >= -_margin(dd)[:, None]
    agree = np.all(ok, axis=1) | ~np.any(ok, axis=1)
    normalized = slacks / np.maximum(dd, DEGENERATE)[:, None]
    per_form = {
        name: {"passed": bool(ok[:, k].all()), "min_normalized_slack": float(normalized[:, k].min())}
        for k, name in enumerate(FIRM_FORMS)
    }
    details = {"forms": per_form, "disagreements": int((~agree).sum())}
    constants = {"min_normalized_slack": float(normalized[:, 3].min())}
    if ok.all():
        verdict, witness = Verdict.HOLDS, None
    else:
        k = int(np.argmin(normalized.min(axis=1)))
        t = T(X[k]) - T(Y[k])
        # reported as the inner-product form: |Tx-Ty|^2 > <x-y, Tx-Ty>
        witness = Witness("firm", {"x": X[k], "y": Y[k]}, float(t @ t), float((X[k] - Y[k]) @ t))
        verdict = Verdict.VIOLATED if agree.all() else Verdict.INCONCLUSIVE
    return PropertyReport("firm", verdict, witness, constants, cfg.count, cfg.seed, details)


def estimate_lipschitz(T, cfg, threshold=1.0):
    """Largest sampled ratio |Tx - Ty| / |x - y|, plus the exact value for affine maps.

    The verdict is whether the Lipschitz constant is at most ``threshold``
    (nonexpansiveness by default).  When ``T.matrix`` is known the exact
    spectral norm decides; otherwise the sampled maximum does.
    """
    X, Y = _sample_pairs(cfg)
    d = X - Y
    t = T(X) - T(Y)
    nd = np.sqrt(_rows_dot(d, d))
    nt = np.sqrt(_rows_dot(t, t))
    keep = nd > DEGENERATE
    ratios = np.where(keep, nt / np.where(keep, nd, 1.0), -np.inf)
    k = int(np.argmax(ratios))
    sampled = float(ratios[k]) if keep.any() else 0.0
    constants = {"lipschitz": sampled}
    details = {"threshold": threshold, "exact": T.matrix is not None}
    L = sampled
    if T.matrix is not None:
        L = spectral_norm(T.matrix)
        constants["exact_lipschitz"] = L
    if L <= threshold + INEQ_TOL:
        return PropertyReport("lipschitz", Verdict.HOLDS, None, constants, cfg.count, cfg.seed, details)
    x, y = X[k], Y[k]
    if sampled <= threshold + INEQ_TOL:
        # exact route found what sampling missed: use the top right singular vector
        v = np.linalg.svd(T.matrix)[2][0]
        x, y = v, np.zeros_like(v)
    w = _lipschitz_sides(T, x, y, threshold)
    return PropertyReport("lipschitz", Verdict.VIOLATED,
                          Witness("lipschitz", {"x": x, "y": y, "threshold": threshold}, *w),
                          constants, cfg.count, cfg.seed, details)


def _lipschitz_sides(T, x, y, threshold):
    t = T(x) - T(y)
    return float(np.linalg.norm(t)), float((threshold + INEQ_TOL) * np.linalg.norm(x - y))


# --------------------------------------------------------------------------
# graph-level inequalities
# --------------------------------------------------------------------------


def _graph_pair(G, idx, k):
    i, j = idx(k)
    return {"x": G.x[i], "u": G.u[i], "y": G.x[j], "v": G.u[j]}


def _banach_sides(p, beta):
    dx, du = p["x"] - p["y"], p["u"] - p["v"]
    c = (1.0 - beta * beta) / (beta * beta)
    dxx, duu = dx @ dx, du @ du
    return float(c * dxx), float(2.0 * (dx @ du) + duu + _margin(dxx + duu))


def check_banach_graph_inequality(G, beta):
    """Test ((1-b^2)/b^2)|x-y|^2 <= 2<x-y, u-v> + |u-v|^2 on every pair of ``G``."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if len(G) == 0:
        raise ValueError("graph sample is empty")
    dxx, duu, dxu = kernels.pair_stats(G.x, G.u)
    c = (1.0 - beta * beta) / (beta * beta)
    excess = c * dxx - (2.0 * dxu + duu) - _margin(dxx + duu)
    constants = {"beta": beta}
    keep = dxx > DEGENERATE**2
    if keep.any():
        # smallest beta the sample allows: c <= min (2<dx,du> + |du|^2) / |dx|^2
        cmin = float(np.min((2.0 * dxu[keep] + duu[keep]) / dxx[keep]))
        constants["beta_sample"] = 1.0 / np.sqrt(1.0 + cmin) if cmin > -1.0 else 1.0
    n_pairs = excess.shape[0]
    if n_pairs == 0 or excess.max() <= 0.0:
        return PropertyReport("banach_graph", Verdict.HOLDS, None, constants, n_pairs, None,
                              {"pairs": n_pairs})
    k = int(np.argmax(excess))
    p = _graph_pair(G, _PairIndex(len(G)), k)
    lhs, rhs = _banach_sides(p, beta)
    return PropertyReport("banach_graph", Verdict.VIOLATED,
                          Witness("banach_graph", dict(p, beta=beta), lhs, rhs),
                          constants, n_pairs, None, {"pairs": n_pairs})


def _ratio_report(G, pid, num_key, den_key, level, label):
    dxx, duu, dxu = kernels.pair_stats(G.x, G.u)
    den = dxx if den_key == "dxx" else duu
    keep = den > DEGENERATE**2
    n_pairs = int(keep.sum())
    details = {"pairs": n_pairs, "level": level}
    if n_pairs == 0:
        if den_key == "duu" and dxx.size:
            # u constant on the sample: the inequality holds for every constant
            details["vacuous"] = True
            return PropertyReport(pid, Verdict.HOLDS, None, {}, 0, None, details)
        return PropertyReport(pid, Verdict.INCONCLUSIVE, None, {}, 0, None, details)
    ratios = np.full(den.shape, np.inf)
    ratios[keep] = dxu[keep] / den[keep]
    k = int(np.argmin(ratios))
    inf = float(ratios[k])
    constants = {label: inf}
    if inf >= level - INEQ_TOL:
        return PropertyReport(pid, Verdict.HOLDS, None, constants, n_pairs, None, details)
    p = _graph_pair(G, _PairIndex(len(G)), k)
    lhs, rhs = _ratio_sides(p, level, den_key)
    return PropertyReport(pid, Verdict.VIOLATED,
                          Witness(pid, dict(p, level=level), lhs, rhs),
                          constants, n_pairs, None, details)


def _ratio_sides(p, level, den_key):
    dx, du = p["x"] - p["y"], p["u"] - p["v"]
    den = dx @ dx if den_key == "dxx" else du @ du
    # violation: level * den - tol * den > <dx, du>
    return float((level - INEQ_TOL) * den), float(dx @ du)


def estimate_strong_monotonicity(G, eps=0.0):
    """inf of <x-y, u-v> / |x-y|^2 over distinct sampled graph pairs.

    Holds when the infimum reaches ``eps`` (so ``eps=0`` tests monotonicity).
    """
    return _ratio_report(G, "strong_monotonicity", "dxu", "dxx", eps, "strong_mono")


def estimate_cocoercivity(G, gamma=0.0):
    """inf of <x-y, u-v> / |u-v|^2 over sampled graph pairs with u != v."""
    return _ratio_report(G, "cocoercivity", "dxu", "duu", gamma, "cocoercivity")


# --------------------------------------------------------------------------
# strictness
# --------------------------------------------------------------------------

STRICT_FLAGS = ("strict_nonexpansive", "injective_on_samples", "strict_firm")


def _strict_quantities(T, x, y):
    d = np.atleast_2d(x - y)
    t = np.atleast_2d(T(x) - T(y))
    dd, tt, dt = _rows_dot(d, d), _rows_dot(t, t), _rows_dot(d, t)
    m = _margin(dd)
    # each flag holds on a pair when value > 0
    return {
        "strict_nonexpansive": (tt + m, dd),
        "injective_on_samples": (m, tt),
        "strict_firm": (tt + m, dt),
    }, dd


def check_strict(T, cfg):
    """Classify strict nonexpansiveness, injectivity and strict firmness on sampled pairs.

    Each flag's "strictly less than" is asserted with the margin
    ``INEQ_TOL * (1 + |x - y|^2)``.
    """
    X, Y = _sample_pairs(cfg)
    sides, dd = _strict_quantities(T, X, Y)
    keep = dd > DEGENERATE**2
    flags, witnesses = {}, {}
    for name in STRICT_FLAGS:
        lhs, rhs = sides[name]
        bad = keep & (lhs >= rhs)
        if bad.any():
            k = int(np.argmax(np.where(bad, (lhs - rhs) / (1.0 + dd), -np.inf)))
            flags[name] = Verdict.VIOLATED
            witnesses[name] = Witness(name, {"x": X[k], "y": Y[k]}, float(lhs[k]), float(rhs[k]))
        else:
            flags[name] = Verdict.HOLDS
    witness = next((witnesses[n] for n in STRICT_FLAGS if n in witnesses), None)
    verdict = Verdict.HOLDS if witness is None else Verdict.VIOLATED
    return PropertyReport("strict", verdict, witness, {}, int(keep.sum()), cfg.seed,
                          {"flags": flags, "witnesses": witnesses})


# --------------------------------------------------------------------------
# paramonotonicity, cyclic firmness, rectangularity
# --------------------------------------------------------------------------


def check_paramonotone(A, G, tol=INEQ_TOL):
    """For graph pairs with <x-y, u-v> = 0, check that (x, v) and (y, u) are in the graph.

    A pair counts as orthogonal when ``|<x-y, u-v>| <= tol * |x-y| |u-v|``.

    Membership is read off the resolvent: (x, v) is in gr A iff J_A(x + v) = x.
    """
    T = A.resolvent
    dxx, duu, dxu = kernels.pair_stats(G.x, G.u)
    # orthogonality is judged by the cosine: near-coincident pairs have a tiny
    # inner product without being orthogonal
    cand = np.flatnonzero(np.abs(dxu) <= tol * np.sqrt(dxx * duu))
    details = {"pairs": int(dxu.size), "orthogonal_pairs": int(cand.size)}
    if cand.size == 0:
        details["vacuous"] = True
        return PropertyReport("paramonotone", Verdict.HOLDS, None, {}, int(dxu.size), None, details)
    idx = _PairIndex(len(G))
    I, J = idx.i[cand], idx.j[cand]
    e1 = np.linalg.norm(T(G.x[I] + G.u[J]) - G.x[I], axis=1)
    e2 = np.linalg.norm(T(G.x[J] + G.u[I]) - G.x[J], axis=1)
    err = np.maximum(e1, e2)
    constants = {"max_cross_error": float(err.max())}
    if err.max() <= PARAMONOTONE_MATCH_TOL:
        return PropertyReport("paramonotone", Verdict.HOLDS, None, constants, int(dxu.size), None, details)
    k = int(cand[np.argmax(err)])
    p = _graph_pair(G, idx, k)
    return PropertyReport("paramonotone", Verdict.VIOLATED,
                          Witness("paramonotone", p, float(err.max()), PARAMONOTONE_MATCH_TOL),
                          constants, int(dxu.size), None, details)


def _paramonotone_error(T, p):
    e1 = np.linalg.norm(T(p["x"] + p["v"]) - p["x"])
    e2 = np.linalg.norm(T(p["y"] + p["u"]) - p["y"])
    return float(max(e1, e2))


def check_cyclic_firm(T, n_max, tuples_per_n, cfg):
    """Sign of sum_i <x_i - T x_i, T x_i - T x_{i+1}> on random cycles of length 2..n_max."""
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    d = T.dim
    worst, worst_val = None, np.inf
    per_n = {}
    for n in range(2, n_max + 1):
        c = cfg.replace(count=tuples_per_n * n)
        P = sample_points(c, stream=100 + n).reshape(tuples_per_n, n, d)
        TP = T(P.reshape(-1, d)).reshape(tuples_per_n, n, d)
        sums, scale = kernels.cyclic_sums(P, TP)
        norm = sums / (1.0 + scale)
        bad = sums < -_margin(scale)
        per_n[str(n)] = {"min_normalized_sum": float(norm.min()), "violations": int(bad.sum())}
        if bad.any():
            k = int(np.argmin(np.where(bad, norm, np.inf)))
            if norm[k] < worst_val:
                worst_val, worst = norm[k], P[k]
    constants = {"min_normalized_sum": float(min(v["min_normalized_sum"] for v in per_n.values()))}
    count = tuples_per_n * (n_max - 1)
    if worst is None:
        return PropertyReport("cyclic_firm", Verdict.HOLDS, None, constants, count, cfg.seed, {"per_n": per_n})
    lhs, rhs = _cyclic_sides(T, worst)
    return PropertyReport("cyclic_firm", Verdict.VIOLATED, Witness("cyclic_firm", {"cycle": worst}, lhs, rhs),
                          constants, count, cfg.seed, {"per_n": per_n})


def _cyclic_sides(T, cycle):
    cycle = np.asarray(cycle, dtype=float)
    TC = T(cycle)
    total = 0.0
    scale = 0.0
    n = cycle.shape[0]
    for i in range(n):
        j = (i + 1) % n
        total += float((cycle[i] - TC[i]) @ (TC[i] - TC[j]))
        scale += float((cycle[i] - cycle[j]) @ (cycle[i] - cycle[j]))
    # violation: 0 > sum + margin
    return 0.0, total + _margin(scale)


def check_rectangular(G, probes_x, probes_v):
    """Empirical inf over ``G`` of <x - z, v - w> for every probe combination.

    Always inconclusive: a finite sample cannot bound an infimum over an
    unbounded graph.  See :func:`rectangular_sweep` for the scale trend.
    """
    px = np.atleast_2d(np.asarray(probes_x, dtype=float))
    pv = np.atleast_2d(np.asarray(probes_v, dtype=float))
    P = np.repeat(px, pv.shape[0], axis=0)
    V = np.tile(pv, (px.shape[0], 1))
    best, arg = kernels.min_cross_inner(P, V, G.x, G.u)
    return PropertyReport("rectangular", Verdict.INCONCLUSIVE, None,
                          {"min_inf": float(best.min())}, len(G), None,
                          {"inf": best.reshape(px.shape[0], pv.shape[0]), "argmin": arg})


def rectangular_sweep(A, cfg, scales=(1.0, 10.0, 100.0), n_probes=8):
    """Empirical rectangularity infima for graph samples drawn at growing scales.

    Probes are graph points at scale 1.  The trend is ``"decreasing"`` when
    every step down the scale list lowers the minimum by more than
    ``max(1, |previous|) / 2``, which is what a linear-in-z inner product
    does; a bounded-below one stays put or rises.
    """
    from .core import minty_sample

    probes = minty_sample(A, sample_points(cfg.replace(count=n_probes, scale=1.0), stream=200))
    values = []
    for s in scales:
        G = minty_sample(A, sample_points(cfg.replace(scale=float(s)), stream=201))
        values.append(check_rectangular(G, probes.x, probes.u).constants["min_inf"])
    decreasing = all(b < a - 0.5 * max(1.0, abs(a)) for a, b in zip(values, values[1:]))
    trend = "decreasing" if decreasing else "bounded"
    return PropertyReport("rectangular", Verdict.INCONCLUSIVE, None,
                          {"min_inf_at_largest_scale": values[-1]}, cfg.count, cfg.seed,
                          {"scales": list(scales), "min_inf": values, "trend": trend})


# --------------------------------------------------------------------------
# structure
# --------------------------------------------------------------------------

STRUCTURE_FLAGS = ("linear", "affine", "isometry", "projection")


def _structure_sides(T, name, p):
    x, y = p["x"], p["y"]
    if name == "linear":
        a, b = p["alpha"], p["beta"]
        lhs_v, Tx, Ty = T(a * x + b * y), T(x), T(y)
        err = np.linalg.norm(lhs_v - a * Tx - b * Ty)
        size = np.linalg.norm(lhs_v) + abs(a) * np.linalg.norm(Tx) + abs(b) * np.linalg.norm(Ty)
    elif name == "affine":
        lam = p["lam"]
        lhs_v, Tx, Ty = T(lam * x + (1 - lam) * y), T(x), T(y)
        err = np.linalg.norm(lhs_v - lam * Tx - (1 - lam) * Ty)
        size = np.linalg.norm(lhs_v) + abs(lam) * np.linalg.norm(Tx) + abs(1 - lam) * np.linalg.norm(Ty)
    elif name == "isometry":
        nd = np.linalg.norm(x - y)
        err = abs(np.linalg.norm(T(x) - T(y)) - nd)
        size = nd
    else:
        Tx = T(x)
        err = np.linalg.norm(T(Tx) - Tx)
        size = np.linalg.norm(Tx)
    return float(err), float(STRUCTURE_TOL * (1.0 + size))


def classify_structure(T, cfg):
    """Sampled flags: linear, affine, isometry, projection (idempotent and firm)."""
    X, Y = _sample_pairs(cfg)
    coef = sample_points(cfg.replace(dim=2), 2)
    lams = sample_uniform(cfg, 3, -2.0, 3.0)
    TX, TY = T(X), T(Y)
    a, b = coef[:, :1], coef[:, 1:]
    lm = lams[:, None]
    nrm = lambda Z: np.linalg.norm(Z, axis=1)
    errors = {}
    L = T(a * X + b * Y)
    errors["linear"] = (nrm(L - a * TX - b * TY),
                        STRUCTURE_TOL * (1 + nrm(L) + np.abs(a[:, 0]) * nrm(TX) + np.abs(b[:, 0]) * nrm(TY)))
    F = T(lm * X + (1 - lm) * Y)
    errors["affine"] = (nrm(F - lm * TX - (1 - lm) * TY),
                        STRUCTURE_TOL * (1 + nrm(F) + np.abs(lm[:, 0]) * nrm(TX) + np.abs(1 - lm[:, 0]) * nrm(TY)))
    errors["isometry"] = (np.abs(nrm(TX - TY) - nrm(X - Y)), STRUCTURE_TOL * (1 + nrm(X - Y)))
    errors["projection"] = (nrm(T(TX) - TX), STRUCTURE_TOL * (1 + nrm(TX)))
    flags, witnesses = {}, {}
    for name in STRUCTURE_FLAGS:
        err, bound = errors[name]
        bad = err > bound
        if bad.any():
            k = int(np.argmax(err - bound))
            p = {"x": X[k], "y": Y[k]}
            if name == "linear":
                p.update(alpha=float(a[k, 0]), beta=float(b[k, 0]))
            elif name == "affine":
                p["lam"] = float(lams[k])
            flags[name] = Verdict.VIOLATED
            witnesses[name] = Witness("structure_" + name, p, *_structure_sides(T, name, p))
        else:
            flags[name] = Verdict.HOLDS
    firm = None
    if flags["projection"] is Verdict.HOLDS:
        firm = check_firm(T, cfg)
        if firm.verdict is not Verdict.HOLDS:
            flags["projection"] = Verdict.VIOLATED
            witnesses["projection"] = firm.witness
    witness = next((witnesses[n] for n in STRUCTURE_FLAGS if n in witnesses), None)
    verdict = Verdict.HOLDS if witness is None else Verdict.VIOLATED
    return PropertyReport("structure", verdict, witness, {}, cfg.count, cfg.seed,
                          {"flags": flags, "witnesses": witnesses})


# --------------------------------------------------------------------------
# uniform monotonicity
# --------------------------------------------------------------------------


@dataclass
class ModulusEstimate:
    """Binned lower envelope of <x-y, u-v> as a function of t = |x-y|.

    ``bin_inf`` is the pointwise infimum per bin (NaN when the bin is empty).
    ``increasing_envelope`` is the largest nondecreasing sequence below it,
    which is the shape an actual modulus must have; the two coincide exactly
    when ``nondecreasing`` is True.
    """

    bin_edges: np.ndarray
    bin_inf: np.ndarray
    counts: np.ndarray
    nondecreasing: bool
    increasing_envelope: np.ndarray

    @property
    def empty(self):
        return self.counts == 0

    def to_dict(self):
        return {
            "bin_edges": _jsonable(self.bin_edges),
            "bin_inf": _jsonable(self.bin_inf),
            "counts": _jsonable(self.counts),
            "empty": _jsonable(self.empty),
            "nondecreasing": self.nondecreasing,
            "increasing_envelope": _jsonable(self.increasing_envelope),
        }


def estimate_uniform_modulus(G, bins, edges=None):
    dxx, duu, dxu = kernels.pair_stats(G.x, G.u)
    t = np.sqrt(dxx)
    keep = t > DEGENERATE
    t, vals = t[keep], dxu[keep]
    if edges is None:
        top = float(t.max()) if t.size else 1.0
        edges = np.linspace(0.0, top, bins + 1)
    edges = np.asarray(edges, dtype=float)
    nb = edges.shape[0] - 1
    which = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, nb - 1)
    inside = (t >= edges[0]) & (t <= edges[-1])
    counts = np.bincount(which[inside], minlength=nb)
    bin_inf = np.full(nb, np.nan)
    np.fmin.at(bin_inf, which[inside], vals[inside])
    filled = bin_inf[counts > 0]
    nondecreasing = bool(np.all(np.diff(filled) >= -INEQ_TOL)) if filled.size else True
    env = np.full(nb, np.nan)
    running = np.inf
    for k in range(nb - 1, -1, -1):
        if counts[k]:
            running = min(running, bin_inf[k])
            env[k] = running
    return ModulusEstimate(edges, bin_inf, counts, nondecreasing, env)


# --------------------------------------------------------------------------
# witness replay
# --------------------------------------------------------------------------


def replay_witness(report, target=None):
    """Re-evaluate a stored witness; True when the violation reproduces.

    ``target`` is the map (or operator, for paramonotonicity) the report was
    computed on.  Graph-level witnesses need no target.
    """
    w = report.witness
    if w is None:
        return False
    return _replay(w, target)


def _replay(w, target):
    p = w.points
    kind = w.kind
    if kind == "firm":
        slacks, dd = _firm_slacks(target, p["x"][None, :], p["y"][None, :])
        return bool(np.any(slacks < -_margin(dd)[:, None]))
    if kind == "lipschitz":
        lhs, rhs = _lipschitz_sides(target, p["x"], p["y"], p["threshold"])
    elif kind == "banach_graph":
        lhs, rhs = _banach_sides(p, p["beta"])
    elif kind in ("strong_monotonicity", "cocoercivity"):
        lhs, rhs = _ratio_sides(p, p["level"], "dxx" if kind == "strong_monotonicity" else "duu")
    elif kind in STRICT_FLAGS:
        sides, _ = _strict_quantities(target, p["x"], p["y"])
        lhs, rhs = (float(s[0]) for s in sides[kind])
        return lhs >= rhs
    elif kind == "paramonotone":
        T = target.resolvent if hasattr(target, "resolvent") else target
        lhs, rhs = _paramonotone_error(T, p), PARAMONOTONE_MATCH_TOL
    elif kind == "cyclic_firm":
        lhs, rhs = _cyclic_sides(target, p["cycle"])
    elif kind.startswith("structure_"):
        lhs, rhs = _structure_sides(target, kind[len("structure_"):], p)
    elif kind.startswith("reflected_"):
        from .splitting import _reflected_sides

        lhs, rhs = _reflected_sides(target, kind, p)
    else:
        raise ValueError(f"no replay rule for witness kind {kind!r}")
    return lhs > rhs
