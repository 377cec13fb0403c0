"""Paired checker runs on ``(A, J_A)`` and ``(A^{-1}, Id - J_A)``.

Each row of a suite applies one checker to the primal side and the same (or
the partner) checker to the dual side, with the same seed, and records
whether the two verdicts relate the way the duality table predicts.
"""

from dataclasses import dataclass, field

import numpy as np

from . import checks
from .checks import PropertyReport, Verdict
from .core import FirmMap, MonotoneOperator, complement, inverse, minty_sample
from .numeric import EQ_TOL, sample_points

SURJECTIVITY_TOL = 1e-8
SURJECTIVITY_STEPS = 500

SELF_DUAL = "self_dual"


def dual_pair(partner):
    return f"dual_pair({partner})"


@dataclass
class DualityRow:
    property_id: str
    verdict_primal: str
    verdict_dual: str
    expected_relation: str
    consistent: bool
    partner: str = None
    reports: dict = None

    def to_dict(self):
        d = {
            "property_id": self.property_id,
            "verdict_primal": self.verdict_primal,
            "verdict_dual": self.verdict_dual,
            "expected_relation": self.expected_relation,
            "consistent": self.consistent,
        }
        if self.partner is not None:
            d["partner"] = self.partner
        if self.reports is not None:
            d["reports"] = {k: v.to_dict() for k, v in self.reports.items()}
        return d


@dataclass
class DualitySuiteResult:
    rows: list
    seed: int
    details: dict = field(default_factory=dict)

    @property
    def consistent(self):
        return all(r.consistent for r in self.rows)

    def row(self, property_id):
        return next(r for r in self.rows if r.property_id == property_id)

    def to_dict(self):
        return {
            "seed": self.seed,
            "consistent": self.consistent,
            "rows": [r.to_dict() for r in self.rows],
            "details": self.details,
        }


def _row(pid, primal, dual, relation, partner=None, primal_report=None, dual_report=None):
    p, q = str(primal), str(dual)
    ok = p == q
    reports = None
    if not ok and primal_report is not None:
        reports = {"primal": primal_report, "dual": dual_report}
    return DualityRow(pid, p, q, relation, ok, partner, reports)


def run_duality_suite(A, cfg, n_max=4, tuples_per_n=200, graph_count=None):
    """Run the duality table on ``A``; every report on both sides shares ``cfg.seed``.

    Rows:

    - ``strict_firm``: self-dual
    - ``strict_nonexpansive`` of T against ``injective`` of Id - T, and the reverse
    - ``strict_nonexpansive_and_injective``: self-dual
    - ``paramonotone`` on a Minty sample of A and its swap: self-dual
    - ``cyclic_firm``: self-dual
    - ``rectangular``: the scale-sweep trend label, self-dual
    - ``linear`` and ``affine`` structure flags: self-dual
    """
    T = A.resolvent
    Tc = complement(T)
    Ainv = inverse(A)
    rows = []

    sp, sd = checks.check_strict(T, cfg), checks.check_strict(Tc, cfg)
    f = lambda r, name: r.flag(name)
    rows.append(_row("strict_firm", f(sp, "strict_firm"), f(sd, "strict_firm"), SELF_DUAL,
                     primal_report=sp, dual_report=sd))
    rows.append(_row("strict_nonexpansive", f(sp, "strict_nonexpansive"), f(sd, "injective_on_samples"),
                     dual_pair("injective_on_samples"), "injective_on_samples", sp, sd))
    rows.append(_row("injective_on_samples", f(sp, "injective_on_samples"), f(sd, "strict_nonexpansive"),
                     dual_pair("strict_nonexpansive"), "strict_nonexpansive", sp, sd))
    both = lambda r: Verdict.HOLDS if (f(r, "strict_nonexpansive") is Verdict.HOLDS
                                       and f(r, "injective_on_samples") is Verdict.HOLDS) else Verdict.VIOLATED
    rows.append(_row("strict_nonexpansive_and_injective", both(sp), both(sd), SELF_DUAL,
                     primal_report=sp, dual_report=sd))

    gcfg = cfg if graph_count is None else cfg.replace(count=graph_count)
    G = minty_sample(A, sample_points(gcfg, stream=50))
    # the swapped sample is exactly the Minty sample of A^{-1} at the same probes
    pp, pd = checks.check_paramonotone(A, G), checks.check_paramonotone(Ainv, G.swap())
    rows.append(_row("paramonotone", pp.verdict, pd.verdict, SELF_DUAL, primal_report=pp, dual_report=pd))

    cp = checks.check_cyclic_firm(T, n_max, tuples_per_n, cfg)
    cd = checks.check_cyclic_firm(Tc, n_max, tuples_per_n, cfg)
    rows.append(_row("cyclic_firm", cp.verdict, cd.verdict, SELF_DUAL, primal_report=cp, dual_report=cd))

    rp, rd = checks.rectangular_sweep(A, gcfg), checks.rectangular_sweep(Ainv, gcfg)
    rows.append(_row("rectangular", rp.details["trend"], rd.details["trend"], SELF_DUAL,
                     primal_report=rp, dual_report=rd))

    kp, kd = checks.classify_structure(T, cfg), checks.classify_structure(Tc, cfg)
    for name in ("linear", "affine"):
        rows.append(_row(name, f(kp, name), f(kd, name), SELF_DUAL, primal_report=kp, dual_report=kd))

    return DualitySuiteResult(rows, cfg.seed, {"n_max": n_max, "tuples_per_n": tuples_per_n,
                                               "graph_count": gcfg.count})


def dual_prox(prox_map):
    """``Id - Prox_f``, which is ``Prox_{f*}`` by the resolvent identity applied to ``A = df``."""
    return complement(prox_map)


def commuting_square_error(A, points):
    """Largest gap between ``Id - J_A`` and ``J_{A^{-1}}`` on ``points``."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    return float(np.max(np.linalg.norm(complement(A.resolvent)(X) - inverse(A).resolvent(X), axis=1)))


def resolvent_identity_error(A, points, Ainv=None):
    """Largest ``|J_A x + J_{A^{-1}} x - x|`` on ``points``."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    Ainv = inverse(A) if Ainv is None else Ainv
    return float(np.max(np.linalg.norm(A.resolvent(X) + Ainv.resolvent(X) - X, axis=1)))


def surjectivity_probe(target, points, cfg, starts=16, steps=SURJECTIVITY_STEPS):
    """Search for ``x`` with ``T x = y`` for each ``y`` in ``points``.

    ``target`` is a firm map or an operator (its resolvent is probed; the
    range of J_A is dom A).  Each search runs ``x <- x + (y - T x)`` from
    several starts; that map is firmly nonexpansive and its fixed points
    solve ``T x = y``.  Residuals at or below tolerance give
    ``holds_on_samples``; anything else stays ``inconclusive``, since a
    finite search cannot show a point lies outside the range.
    """
    T = target.resolvent if isinstance(target, MonotoneOperator) else target
    if not isinstance(T, FirmMap):
        raise TypeError("surjectivity_probe needs a FirmMap or a MonotoneOperator")
    Y = np.atleast_2d(np.asarray(points, dtype=float))
    residuals, best_x = [], []
    for k, y in enumerate(Y):
        X = y + sample_points(cfg.replace(count=starts, dim=T.dim), stream=300 + k)
        X[0] = y
        for _ in range(steps):
            R = y - T(X)
            if np.min(np.linalg.norm(R, axis=1)) <= EQ_TOL * (1.0 + np.linalg.norm(y)):
                break
            X = X + R
        res = np.linalg.norm(T(X) - y, axis=1)
        j = int(np.argmin(res))
        residuals.append(float(res[j]))
        best_x.append(X[j])
    reached = [r <= SURJECTIVITY_TOL * (1.0 + np.linalg.norm(y)) for r, y in zip(residuals, Y)]
    verdict = Verdict.HOLDS if all(reached) else Verdict.INCONCLUSIVE
    return PropertyReport("surjectivity", verdict, None,
                          {"max_best_residual": max(residuals)}, len(Y) * starts, cfg.seed,
                          {"targets": Y, "best_residual": residuals, "best_x": np.array(best_x),
                           "reached": reached, "tol": SURJECTIVITY_TOL})
