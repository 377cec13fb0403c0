import numpy as np
import pytest

from firmmono import catalog as cat
from firmmono.checks import (
    FIRM_FORMS,
    PropertyReport,
    Verdict,
    check_banach_graph_inequality,
    check_cyclic_firm,
    check_firm,
    check_paramonotone,
    check_rectangular,
    check_strict,
    classify_structure,
    estimate_cocoercivity,
    estimate_lipschitz,
    estimate_strong_monotonicity,
    estimate_uniform_modulus,
    rectangular_sweep,
    replay_witness,
)
from firmmono.core import FirmMap, GraphSample, minty_sample
from firmmono.numeric import SampleConfig, sample_points

HOLDS, VIOLATED, INCONCLUSIVE = Verdict.HOLDS, Verdict.VIOLATED, Verdict.INCONCLUSIVE
SKEW = np.array([[0.0, -1.0], [1.0, 0.0]])


def cfg(count=500, dim=2, seed=31, scale=1.0):
    return SampleConfig(seed=seed, count=count, dim=dim, scale=scale)


def matrix_map(M, name="m"):
    return FirmMap.from_matrix(np.asarray(M, dtype=float), {"op": name})


def opaque(M):
    """Same linear map with its matrix hidden from the checkers."""
    M = np.asarray(M, dtype=float)
    return FirmMap(M.shape[0], lambda X: X @ M.T, {"op": "opaque"}, "map")


def graph(spec, count=300, seed=32, scale=2.0):
    A = cat.make_operator(spec)
    return A, minty_sample(A, sample_points(cfg(count, A.dim, seed, scale)))


# ---------------------------------------------------------------- firmness

def test_firm_examples(ops):
    assert check_firm(matrix_map(0.5 * np.eye(2)), cfg()).verdict is HOLDS
    assert check_firm(ops["skew"].resolvent, cfg()).verdict is HOLDS
    rep = check_firm(matrix_map(-np.eye(2)), cfg())
    assert rep.verdict is VIOLATED
    assert rep.witness is not None and replay_witness(rep, matrix_map(-np.eye(2)))
    assert all(not rep.details["forms"][f]["passed"] for f in FIRM_FORMS)


def test_firm_holds_for_every_catalog_resolvent(ops):
    for name, A in ops.items():
        rep = check_firm(A.resolvent, cfg(1000, A.dim, scale=3.0))
        assert rep.verdict is HOLDS, name
        assert rep.details["disagreements"] == 0


def test_firm_forms_agree_on_nonexpansive_but_not_firm_map():
    rep = check_firm(opaque(np.array([[0.0, 1.0], [-1.0, 0.0]])), cfg())
    assert rep.verdict is VIOLATED
    assert rep.details["disagreements"] == 0


# ---------------------------------------------------------------- lipschitz

@pytest.mark.parametrize("name, exact", [("skew", 1 / np.sqrt(2)), ("diag_harmonic_3", 0.75), ("zero", 1.0)])
def test_lipschitz_exact_values(ops, name, exact):
    rep = estimate_lipschitz(ops[name].resolvent, cfg(dim=ops[name].dim))
    assert rep.constants["exact_lipschitz"] == pytest.approx(exact, abs=1e-12)
    assert rep.constants["lipschitz"] <= exact + 1e-8
    assert rep.verdict is HOLDS


def test_lipschitz_violation_found_and_replayed():
    T = opaque(np.diag([1.5, 0.2]))
    rep = estimate_lipschitz(T, cfg())
    assert rep.verdict is VIOLATED and replay_witness(rep, T)


def test_lipschitz_exact_route_catches_narrow_violation():
    # expansion in a direction random pairs essentially never align with
    M = np.eye(3)
    M[2, 2] = 1.0 + 1e-6
    rep = estimate_lipschitz(matrix_map(M), cfg(20, 3))
    assert rep.verdict is VIOLATED
    assert replay_witness(rep, matrix_map(M))


def test_lipschitz_sampled_estimate_monotone_in_nested_count():
    M = np.array([[0.9, 0.4, 0.0], [-0.2, 0.3, 0.1], [0.0, 0.5, 0.6]])
    exact = np.linalg.norm(M, 2)
    seq = [estimate_lipschitz(matrix_map(M), cfg(n, 3, seed=33)).constants["lipschitz"] for n in (10, 100, 1000, 5000)]
    assert all(b >= a for a, b in zip(seq, seq[1:]))
    assert seq[-1] <= exact + 1e-8
    assert exact - seq[-1] < 0.05 * exact


# ---------------------------------------------------------------- banach graph inequality

def test_banach_graph_examples():
    _, G = graph(cat.Linear(SKEW))
    assert check_banach_graph_inequality(G, 1 / np.sqrt(2)).verdict is HOLDS
    rep = check_banach_graph_inequality(G, 0.5)
    assert rep.verdict is VIOLATED and replay_witness(rep)
    p = rep.witness.points
    dx, du = p["x"] - p["y"], p["u"] - p["v"]
    assert abs(dx @ du) <= 1e-12 * (dx @ dx) and du @ du == pytest.approx(dx @ dx)
    _, G0 = graph(cat.Linear(np.zeros((2, 2))))
    for beta in (0.1, 0.5, 0.99):
        assert check_banach_graph_inequality(G0, beta).verdict is VIOLATED


def test_banach_graph_at_exact_beta_and_below(ops):
    for name in ("spd", "diag_harmonic_10", "eps_skew"):
        A = ops[name]
        beta = np.linalg.norm(A.resolvent.matrix, 2)
        # top right singular vector and the origin are in the probe set
        _, _, Vt = np.linalg.svd(A.resolvent.matrix)
        probes = np.vstack([sample_points(cfg(200, A.dim)), Vt[0], np.zeros(A.dim)])
        G = minty_sample(A, probes)
        assert check_banach_graph_inequality(G, beta).verdict is HOLDS, name
        assert check_banach_graph_inequality(G, beta * (1 - 1e-3)).verdict is VIOLATED, name


def test_banach_graph_rejects_bad_beta():
    _, G = graph(cat.Linear(SKEW), count=5)
    with pytest.raises(ValueError):
        check_banach_graph_inequality(G, 1.0)


# ---------------------------------------------------------------- strong monotonicity / cocoercivity

@pytest.mark.parametrize("spec, eps, gamma", [
    (cat.Linear(2 * np.eye(2)), 2.0, 0.5),
    (cat.Linear(np.eye(2)), 1.0, 1.0),
    (cat.Linear(SKEW), 0.0, 0.0),
])
def test_ratio_estimates(spec, eps, gamma):
    _, G = graph(spec)
    assert estimate_strong_monotonicity(G).constants["strong_mono"] == pytest.approx(eps, abs=1e-10)
    assert estimate_cocoercivity(G).constants["cocoercivity"] == pytest.approx(gamma, abs=1e-10)


def test_constant_operator_not_strongly_monotone():
    _, G = graph(cat.Constant([1.0, 2.0]))
    rep = estimate_strong_monotonicity(G, eps=0.1)
    assert rep.constants["strong_mono"] == pytest.approx(0.0, abs=1e-12)
    assert rep.verdict is VIOLATED and replay_witness(rep)


def test_cocoercivity_equals_strong_monotonicity_of_swap(ops):
    for name, A in ops.items():
        G = minty_sample(A, sample_points(cfg(200, A.dim, scale=2.0)))
        # both are absent when u never varies (constant operator)
        c = estimate_cocoercivity(G).constants.get("cocoercivity")
        s = estimate_strong_monotonicity(G.swap()).constants.get("strong_mono")
        assert c == s, name


def test_requested_level_violations_replay():
    _, G = graph(cat.Linear(np.array([[1.0, 0.0], [0.0, 3.0]])))
    rep = estimate_cocoercivity(G, gamma=0.5)
    assert rep.verdict is VIOLATED and replay_witness(rep)
    assert estimate_strong_monotonicity(G, eps=0.99).verdict is HOLDS


# ---------------------------------------------------------------- strictness

def test_strict_flags(ops):
    rep = check_strict(ops["skew"].resolvent, cfg())
    assert rep.flag("strict_nonexpansive") is HOLDS
    assert rep.flag("injective_on_samples") is HOLDS
    assert rep.flag("strict_firm") is VIOLATED
    zero = matrix_map(np.zeros((2, 2)))
    rep = check_strict(zero, cfg())
    assert rep.flag("strict_nonexpansive") is HOLDS
    assert rep.flag("injective_on_samples") is VIOLATED
    rep = check_strict(ops["identity"].resolvent, cfg())
    assert all(rep.flag(f) is HOLDS for f in ("strict_nonexpansive", "injective_on_samples", "strict_firm"))


def test_strict_witnesses_replay(ops):
    for T in (ops["skew"].resolvent, matrix_map(np.zeros((2, 2))), matrix_map(np.eye(2))):
        rep = check_strict(T, cfg())
        for w in rep.details["witnesses"].values():
            assert replay_witness(PropertyReport("strict", VIOLATED, w), T)


# ---------------------------------------------------------------- paramonotone

def test_paramonotone_skew_counterexample():
    A = cat.make_operator(cat.Linear(SKEW))
    G = minty_sample(A, [[1.0, 0.0], [0.0, 0.0]])
    rep = check_paramonotone(A, G)
    assert rep.verdict is VIOLATED and replay_witness(rep, A)
    pts = rep.witness.points
    assert {tuple(np.round(pts["x"], 12)), tuple(np.round(pts["y"], 12))} == {(0.5, -0.5), (0.0, 0.0)}


@pytest.mark.parametrize("name", ["l1", "identity", "ball", "box", "eps_l1"])
def test_paramonotone_holds(ops, name):
    A = ops[name]
    G = minty_sample(A, sample_points(cfg(300, A.dim, scale=3.0)))
    assert check_paramonotone(A, G).verdict is HOLDS


# ---------------------------------------------------------------- cyclic firmness

def test_cyclic_firm_examples(ops):
    assert check_cyclic_firm(ops["l1"].resolvent, 5, 200, cfg()).verdict is HOLDS
    T = ops["skew"].resolvent
    rep = check_cyclic_firm(T, 3, 1000, cfg())
    assert rep.verdict is VIOLATED
    assert len(rep.witness.points["cycle"]) == 3
    assert replay_witness(rep, T)


def test_cyclic_length_two_matches_firm_check():
    for M in (0.5 * np.eye(2), -np.eye(2), SKEW):
        T = opaque(M)
        assert (check_cyclic_firm(T, 2, 500, cfg()).verdict is HOLDS) == (check_firm(T, cfg()).verdict is HOLDS)


def test_cyclic_rejects_short_cycles(ops):
    with pytest.raises(ValueError):
        check_cyclic_firm(ops["l1"].resolvent, 1, 10, cfg())


# ---------------------------------------------------------------- rectangularity

def test_rectangular_matches_brute_force():
    _, G = graph(cat.Linear(np.eye(2)), count=60)
    rng = np.random.default_rng(0)
    px, pv = rng.standard_normal((3, 2)), rng.standard_normal((4, 2))
    rep = check_rectangular(G, px, pv)
    assert rep.verdict is INCONCLUSIVE
    brute = np.array([[min((x - z) @ (v - w) for z, w in zip(G.x, G.u)) for v in pv] for x in px])
    assert np.allclose(rep.details["inf"], brute, atol=1e-12)
    zero = check_rectangular(G, np.zeros(2), np.zeros(2))
    assert zero.constants["min_inf"] == pytest.approx(min(z @ w for z, w in zip(G.x, G.u)))


def test_rectangular_singleton_graph():
    G = GraphSample(np.array([[1.0, 2.0]]), np.array([[3.0, -1.0]]))
    rep = check_rectangular(G, [0.0, 0.0], [1.0, 1.0])
    assert rep.constants["min_inf"] == pytest.approx((0 - 1) * (1 - 3) + (0 - 2) * (1 + 1))


def test_rectangular_sweep_trends(ops):
    assert rectangular_sweep(ops["skew"], cfg(400)).details["trend"] == "decreasing"
    for name in ("l1", "identity", "ball"):
        rep = rectangular_sweep(ops[name], cfg(400, ops[name].dim))
        assert rep.details["trend"] == "bounded", name
        assert rep.verdict is INCONCLUSIVE


# ---------------------------------------------------------------- structure

def test_structure_examples(ops):
    rep = classify_structure(ops["skew"].resolvent, cfg())
    assert [rep.flag(f) for f in ("linear", "affine", "isometry", "projection")] == [HOLDS, HOLDS, VIOLATED, VIOLATED]
    T = ops["constant"].resolvent
    rep = classify_structure(T, cfg())
    assert rep.flag("affine") is HOLDS and rep.flag("isometry") is HOLDS
    assert rep.flag("linear") is VIOLATED
    assert replay_witness(rep, T)
    assert classify_structure(ops["box"].resolvent, cfg()).flag("projection") is HOLDS


def test_structure_nonlinear_prox(ops):
    rep = classify_structure(ops["l1"].resolvent, cfg(scale=3.0))
    assert rep.flag("affine") is VIOLATED and rep.flag("projection") is VIOLATED


def test_structure_projection_needs_firmness():
    # idempotent but not firm: oblique projection onto the x-axis
    T = opaque([[1.0, 2.0], [0.0, 0.0]])
    rep = classify_structure(T, cfg())
    assert rep.flag("projection") is VIOLATED


# ---------------------------------------------------------------- uniform modulus

def test_modulus_identity_tracks_square():
    _, G = graph(cat.Linear(np.eye(2)), count=200)
    m = estimate_uniform_modulus(G, 8)
    filled = ~m.empty
    lower = m.bin_edges[:-1][filled]
    assert np.all(m.bin_inf[filled] >= lower**2 - 1e-12)
    assert m.nondecreasing


def test_modulus_skew_is_zero():
    _, G = graph(cat.Linear(SKEW), count=200)
    m = estimate_uniform_modulus(G, 6)
    assert np.allclose(m.bin_inf[~m.empty], 0.0, atol=1e-12)


def test_modulus_marks_empty_bins():
    G = GraphSample(np.array([[0.0], [1.0], [1.1]]), np.array([[0.0], [1.0], [1.1]]))
    m = estimate_uniform_modulus(G, 4, edges=[0.0, 0.5, 1.0, 2.0, 3.0])
    assert m.counts.tolist() == [1, 0, 2, 0]
    assert np.isnan(m.bin_inf[1]) and np.isnan(m.bin_inf[3])
    assert m.bin_inf[2] == pytest.approx(1.0)
    assert m.to_dict()["empty"] == [False, True, False, True]


def test_modulus_envelope_is_below_and_nondecreasing():
    A, G = graph(cat.Subdifferential(cat.L1(1.0, 2)), count=200)
    m = estimate_uniform_modulus(G, 10)
    env = m.increasing_envelope[~m.empty]
    assert np.all(np.diff(env) >= 0)
    assert np.all(env <= m.bin_inf[~m.empty])


def test_reports_serialize(ops):
    import json

    rep = check_strict(ops["skew"].resolvent, cfg())
    assert json.loads(json.dumps(rep.to_dict()))["property_id"] == "strict"
