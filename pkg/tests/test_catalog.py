import numpy as np
import pytest

import oracles
from firmmono import catalog as cat
from firmmono.checks import check_firm
from firmmono.errors import DimensionError, MonotonicityError
from firmmono.numeric import SampleConfig, sample_points, solve_linear

FUNCTIONS = {
    "quadratic": cat.Quadratic(1.5, 2),
    "l1": cat.L1(0.7, 3),
    "ball": cat.IndicatorBall(1.0, 2),
    "box": cat.IndicatorBox([-1.0, 0.0], [0.5, 2.0]),
    "singleton": cat.IndicatorSingleton([0.5, -1.0]),
    "affine_set": cat.IndicatorAffine([1.0, 0.0, 0.0], np.array([[0.0], [0.6], [0.8]])),
}


def test_skew_accepted_and_not_a_subdifferential():
    A = cat.make_operator(cat.Linear([[0.0, -1.0], [1.0, 0.0]]))
    assert A.flags.is_subdifferential is False
    assert A.flags.is_linear is True


def test_negative_identity_rejected_with_eigenvalue():
    with pytest.raises(MonotonicityError) as exc:
        cat.make_operator(cat.Linear(-np.eye(2)))
    assert exc.value.eigenvalue == pytest.approx(-2.0)


def test_constant_resolvent_is_shift():
    A = cat.make_operator(cat.Constant([1.0, 2.0]))
    assert np.allclose(A.resolvent([3.0, 3.0]), [2.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("f, x, expected", [
    (cat.Quadratic(1.0, 2), [2.0, 2.0], [1.0, 1.0]),
    (cat.L1(1.0, 2), [2.0, -0.5], [1.0, 0.0]),
    (cat.IndicatorBall(1.0, 2), [3.0, 4.0], [0.6, 0.8]),
])
def test_prox_examples(f, x, expected):
    assert np.allclose(cat.prox(f, np.array(x)), expected, atol=1e-12)


def test_l1_prox_against_grid():
    t = np.linspace(-3, 3, 600_001)
    for x in (2.0, -0.5, 0.3, -1.7):
        obj = np.abs(t) + 0.5 * (t - x) ** 2
        assert cat.prox(cat.L1(1.0, 1), np.array([x]))[0] == pytest.approx(t[obj.argmin()], abs=1e-5)


def test_ball_prox_against_sphere_grid():
    th = np.linspace(0, 2 * np.pi, 200_001)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    best = pts[np.linalg.norm(pts - [3.0, 4.0], axis=1).argmin()]
    assert np.allclose(cat.prox(cat.IndicatorBall(1.0, 2), np.array([3.0, 4.0])), best, atol=1e-5)


@pytest.mark.parametrize("name", ["quadratic", "l1", "ball", "box"])
def test_prox_matches_numerical_minimization(name):
    f = FUNCTIONS[name]
    X = np.random.default_rng(11).normal(scale=2.0, size=(50, f.dim))
    for x in X:
        assert np.allclose(cat.prox(f, x), oracles.prox_by_minimization(f, x), atol=1e-5)


@pytest.mark.parametrize("name", sorted(FUNCTIONS))
def test_prox_matches_closed_form_oracle(name):
    f = FUNCTIONS[name]
    X = np.random.default_rng(12).normal(scale=2.0, size=(50, f.dim))
    assert np.allclose(cat.prox(f, X), oracles.prox(f, X), atol=1e-12)


@pytest.mark.parametrize("name", sorted(FUNCTIONS))
def test_prox_is_firm(name):
    A = cat.make_operator(cat.Subdifferential(FUNCTIONS[name]))
    rep = check_firm(A.resolvent, SampleConfig(seed=3, count=1000, dim=A.dim))
    assert rep.verdict.value == "holds_on_samples"


@pytest.mark.parametrize("f", [cat.L1(0.8, 3), cat.IndicatorBall(1.5, 3)])
def test_moreau_decomposition(f):
    X = sample_points(SampleConfig(seed=9, count=200, dim=3, scale=3.0))
    assert np.abs(cat.prox(f, X) + oracles.conjugate_prox(f, X) - X).max() <= 1e-10


def test_prox_dimension_mismatch():
    with pytest.raises(DimensionError):
        cat.prox(cat.L1(1.0, 2), np.ones(3))


@pytest.mark.parametrize("x, expected", [
    ([1.0, 0.0, 0.0], [0.5, 0.0, 0.0]),
    ([0.0, 0.0, 1.0], [0.0, 0.0, 0.75]),
    ([0.0, 0.0, 0.0], [0.0, 0.0, 0.0]),
])
def test_diag_harmonic_resolvent(x, expected):
    assert np.allclose(cat.diag_harmonic_resolvent(3, np.array(x)), expected, atol=1e-15)
    with pytest.raises(DimensionError):
        cat.diag_harmonic_resolvent(2, np.array(x))


def test_linear_resolvent_equals_linear_solve():
    M = np.array([[2.0, 0.5], [0.5, 1.0]])
    X = sample_points(SampleConfig(seed=2, count=30, dim=2))
    T = cat.make_operator(cat.Linear(M)).resolvent
    assert np.array_equal(T(X), solve_linear(np.eye(2) + M, X))


def test_every_catalog_resolvent_matches_oracle(instances, ops):
    X = sample_points(SampleConfig(seed=4, count=100, dim=10, scale=2.0))
    for name, spec in instances.items():
        P = X[:, : spec.dim]
        assert np.abs(ops[name].resolvent(P) - oracles.resolvent(spec, P)).max() <= 1e-12, name


def test_direct_eval_consistent_with_resolvent(ops):
    for name, A in ops.items():
        if A.direct_eval is None:
            continue
        Y = sample_points(SampleConfig(seed=5, count=100, dim=A.dim))
        X = A.resolvent(Y)
        assert np.abs(X + A.direct_eval(X) - Y).max() <= 1e-8, name


@pytest.mark.parametrize("bad", [
    lambda: cat.Quadratic(0.0, 2),
    lambda: cat.L1(-1.0, 2),
    lambda: cat.IndicatorBall(0.0, 2),
    lambda: cat.IndicatorBox([1.0, 0.0], [0.0, 1.0]),
    lambda: cat.IndicatorAffine([0.0, 0.0], np.array([[1.0], [1.0]])),
    lambda: cat.ScaledIdentityPlus(-0.1, cat.Linear(np.eye(2))),
    lambda: cat.NormalCone(cat.L1(1.0, 2)),
])
def test_invalid_specs_rejected(bad):
    with pytest.raises((ValueError, TypeError)):
        bad()


def test_serialization_round_trip(instances):
    for name, spec in instances.items():
        d = cat.spec_to_dict(spec)
        assert cat.spec_to_dict(cat.spec_from_dict(d)) == d, name


def test_spec_from_dict_errors():
    with pytest.raises(ValueError):
        cat.spec_from_dict({"type": "nope"})
    with pytest.raises(KeyError):
        cat.spec_from_dict({"type": "l1", "dim": 2})


def test_diag_harmonic_contraction_factor_tends_to_one():
    factors = [np.linalg.norm(cat.make_operator(cat.DiagHarmonic(d)).resolvent.matrix, 2) for d in (1, 10, 100)]
    assert factors == pytest.approx([0.5, 10 / 11, 100 / 101], abs=1e-12)
