import math

import numpy as np
import pytest

from gcpc.core import GcpcParams, sample
from gcpc.errors import DegenerateError, ParameterError
from gcpc.inference import fit_gcpc, loglik_gcpc
from gcpc.regression import (
    Predictor,
    build_design,
    compare_regressions,
    fit_regression,
    loglik_gcpc_regression,
    loglik_regression_full_form,
    parse_predictor,
    predict,
    quadratic_form,
)
from gcpc.simulation import rate_design, simulate_regression


def test_parse_predictor():
    assert parse_predictor("continuous:speed") == Predictor("continuous", ("speed",))
    assert parse_predictor("alr:a, b,c") == Predictor("simplex", ("a", "b", "c"))
    for bad in ("speed", "circular:", "wavelet:x", "circular:a,b", "simplex:a"):
        with pytest.raises(ParameterError):
            parse_predictor(bad)


def test_build_design_blocks():
    rows = {
        "x": [0.1, 0.2, 0.3],
        "d": [0.0, math.pi / 2, math.pi],
        "a": [0.2, 0.5, 0.25],
        "b": [0.3, 0.25, 0.25],
        "c": [0.5, 0.25, 0.5],
    }
    preds = [parse_predictor(s) for s in ("continuous:x", "circular:d", "simplex:a,b,c")]
    d = build_design(preds, rows)
    assert d.names == ("(intercept)", "x", "cos(d)", "sin(d)", "alr(a/c)", "alr(b/c)")
    assert d.matrix.shape == (3, 6)
    np.testing.assert_allclose(d.matrix[:, 0], 1)
    np.testing.assert_allclose(d.matrix[:, 2], [1, 0, -1], atol=1e-15)
    np.testing.assert_allclose(d.matrix[:, 4], np.log(np.array(rows["a"]) / rows["c"]))
    assert build_design([], {}, n=5).matrix.shape == (5, 1)


def test_build_design_rejects_bad_compositions():
    with pytest.raises(ParameterError, match="alpha-transformation"):
        build_design([parse_predictor("simplex:a,b")], {"a": [0.0, 0.5], "b": [1.0, 0.5]})
    with pytest.raises(ParameterError, match="sum to 1"):
        build_design([parse_predictor("simplex:a,b")], {"a": [0.2, 0.5], "b": [0.2, 0.5]})
    with pytest.raises(ParameterError, match="unknown column"):
        build_design([parse_predictor("continuous:z")], {"x": [1.0]})
    with pytest.raises(ParameterError):
        build_design([], {})


def test_quadratic_form_identity():
    rng = np.random.default_rng(13)
    th = rng.uniform(-math.pi, math.pi, 10_000)
    mu = rng.normal(size=(10_000, 2)) * rng.uniform(0.01, 10, (10_000, 1))
    lam = np.exp(rng.uniform(-3, 3, 10_000))
    q = np.array([quadratic_form(t, m, l)[0] for t, m, l in zip(th, mu, lam)])
    ref = np.empty_like(q)
    for i in range(th.size):
        e2 = mu[i] / np.linalg.norm(mu[i])
        e1 = np.array([-e2[1], e2[0]])
        y = np.array([math.cos(th[i]), math.sin(th[i])])
        ref[i] = y @ (np.outer(e1, e1) / lam[i] + np.outer(e2, e2)) @ y
    assert np.max(np.abs(q - ref) / np.maximum(1.0, ref)) < 1e-14


def test_loglik_forms_agree():
    rng = np.random.default_rng(14)
    for _ in range(200):
        p = int(rng.integers(1, 4))
        X = np.column_stack([np.ones(20), rng.normal(size=(20, p - 1))])
        B = rng.normal(size=(p, 2)) * rng.uniform(0.1, 5)
        lam = float(np.exp(rng.uniform(-3, 3)))
        th = rng.uniform(-math.pi, math.pi, 20)
        a = loglik_gcpc_regression(X, th, B, lam)
        assert a == pytest.approx(loglik_regression_full_form(X, th, B, lam), rel=1e-12)


def test_intercept_only_loglik_is_marginal():
    x = sample(GcpcParams(1.0, 2.0, 3.0), 60, seed=3)
    B = np.array([[2 * math.cos(1.0), 2 * math.sin(1.0)]])
    ones = np.ones((60, 1))
    assert loglik_gcpc_regression(ones, x, B, 3.0) == pytest.approx(
        loglik_gcpc(x, GcpcParams(1.0, 2.0, 3.0)), abs=1e-10
    )


def test_intercept_only_fit_collapses_to_iid_fit():
    x = sample(GcpcParams(2.0, 3.0, 2.0), 300, seed=8)
    reg = fit_regression(build_design([], {}, n=x.size), x)
    iid = fit_gcpc(x)
    assert reg.loglik == pytest.approx(iid.loglik, abs=1e-6)
    b = reg.coef[0]
    assert math.atan2(b[1], b[0]) == pytest.approx(iid.params.omega, abs=1e-4)
    assert math.hypot(*b) == pytest.approx(iid.params.gamma, rel=1e-4)
    assert reg.lam == pytest.approx(iid.params.lam, rel=1e-4)


@pytest.fixture(scope="module")
def continuous_data():
    rng = np.random.default_rng(77)
    d = rate_design("continuous", 800, rng)
    coef = np.array([[1.0, 2.0], [-1.5, 0.5]])
    y = simulate_regression(coef, 5.0, d, rng)
    return d, y, coef


def test_recovers_coefficients(continuous_data):
    d, y, coef = continuous_data
    f = fit_regression(d, y)
    assert np.linalg.norm(f.coef - coef) < 0.5
    assert abs(f.lam - 5) < 3 * f.lam_se
    assert f.coef_se.shape == coef.shape and np.all(f.coef_se > 0)
    assert f.loglik >= loglik_gcpc_regression(d, y, coef, 5.0)


def test_stage_logliks_monotone(continuous_data):
    d, y, _ = continuous_data
    l1, l2, l3 = fit_regression(d, y, compute_se=False).stage_logliks
    assert l1 <= l2 + 1e-9 <= l3 + 2e-9


def test_cipc_family_pins_lambda(continuous_data):
    d, y, _ = continuous_data
    c = fit_regression(d, y, family="cipc")
    g = fit_regression(d, y)
    assert c.lam == 1.0 and c.lam_se is None
    assert g.loglik >= c.loglik - 1e-8
    r = compare_regressions(g, c)
    assert r.df == 1 and r.p_value < 1e-3
    with pytest.raises(ParameterError):
        compare_regressions(c, g)


def test_lambda_one_reduces_to_cipc_likelihood(continuous_data):
    d, y, coef = continuous_data
    mu = d.matrix @ coef
    total = sum(
        loglik_gcpc(np.array([t]), GcpcParams(math.atan2(m[1], m[0]), math.hypot(*m), 1.0))
        for t, m in zip(y, mu)
    )
    assert loglik_gcpc_regression(d, y, coef, 1.0) == pytest.approx(total, abs=1e-8)


def test_rotation_equivariance(continuous_data):
    d, y, _ = continuous_data
    a = 0.7
    f = fit_regression(d, y, compute_se=False)
    g = fit_regression(d, y + a, compute_se=False)
    R = np.array([[math.cos(a), math.sin(a)], [-math.sin(a), math.cos(a)]])
    np.testing.assert_allclose(g.coef, f.coef @ R, atol=1e-4)
    assert g.loglik == pytest.approx(f.loglik, abs=1e-6)


def test_predict(continuous_data):
    d, y, _ = continuous_data
    f = fit_regression(d, y, compute_se=False)
    mu = d.matrix @ f.coef
    np.testing.assert_allclose(predict(f, d), np.arctan2(mu[:, 1], mu[:, 0]))
    with pytest.raises(ParameterError):
        predict(f, np.ones((3, 1)))


def test_circular_covariate_fit_is_global():
    rng = np.random.default_rng(5)
    d = rate_design("circular", 600, rng)
    coef = np.array([[1.0, 0.5], [2.0, -1.0], [-0.5, 1.5]])
    y = simulate_regression(coef, 5.0, d, rng)
    f = fit_regression(d, y, compute_se=False)
    assert f.loglik >= loglik_gcpc_regression(d, y, coef, 5.0)
    single = fit_regression(d, y, compute_se=False, multistart=False)
    assert f.loglik >= single.loglik - 1e-9


def test_rejects_bad_inputs():
    d = build_design([], {}, n=3)
    with pytest.raises(ParameterError):
        fit_regression(d, [0.0, 1.0, 2.0])
    d = build_design([parse_predictor("continuous:x")], {"x": [1.0] * 10})
    with pytest.raises(DegenerateError):
        fit_regression(d, np.linspace(0, 1, 10))
    with pytest.raises(ParameterError):
        fit_regression(build_design([], {}, n=10), np.linspace(0, 1, 10), family="spml")
    with pytest.raises(DegenerateError):
        loglik_gcpc_regression(np.ones((2, 1)), [0.0, 1.0], np.zeros((1, 2)), 1.0)
