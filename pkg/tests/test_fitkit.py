import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kspace_ent.fitkit import MODELS, fit_model, levenberg_marquardt, luttinger, model_function, r_squared

from conftest import xxz_summary


def test_luttinger_values():
    assert luttinger(0.0) == pytest.approx((1.0, 0.0))
    assert luttinger(1.0) == pytest.approx((0.5, 0.25))
    # Delta = 0.5: arccos = pi/3, K = 3/4
    K, a = luttinger(0.5)
    assert K == pytest.approx(0.75) and a == pytest.approx((0.75 + 4 / 3) / 2 - 1)
    for bad in (-1.0, -2.0, 1.01):
        with pytest.raises(ValueError):
            luttinger(bad)


@given(st.floats(-0.999, 1.0))
def test_luttinger_alpha_nonnegative(d):
    _, a = luttinger(d)
    assert a >= 0
    if abs(d) > 1e-3:
        assert a > 0


def test_power_exact_recovery():
    x = np.linspace(1, 5, 8)
    r = fit_model(list(zip(x, 3 * x**1.5)), "power")
    assert r.params["b"] == pytest.approx(1.5, abs=1e-8)
    assert r.params["a"] == pytest.approx(3.0, abs=1e-8)
    assert r.converged and r.extra["space"] == "loglog"


def test_power_with_negative_values_uses_direct_fit():
    x = np.linspace(1, 4, 10)
    y = -2 * x**0.7
    r = fit_model(list(zip(x, y)), "power")
    assert r.params["b"] == pytest.approx(0.7, abs=1e-6)
    assert r.converged


def test_log_correction_exact_recovery():
    x = np.array([8, 12, 16, 20, 24, 28.0])
    y = 0.3 * np.log(x) + 1 + 2 / x**2
    r = fit_model(list(zip(x, y)), "log_correction")
    assert r.params["Theta"] == pytest.approx(0.3, abs=1e-6)
    assert r.converged


def test_exp_offset_recovery():
    x = np.linspace(0, 2, 9)
    y = 0.4 * np.exp(-x / 0.35) + 0.05
    r = fit_model(list(zip(x, y)), "exp_offset")
    assert r.params["sigma"] == pytest.approx(0.35, abs=1e-6)
    assert r.params["S0"] == pytest.approx(0.05, abs=1e-6)
    assert r.converged


def test_linear_and_r2():
    pts = [(1, 1.0), (2, 3.0), (3, 5.0), (4, 7.0)]
    r = fit_model(pts, "linear")
    assert r.params == pytest.approx({"a": 2.0, "b": -1.0})
    assert r_squared(r, pts) == pytest.approx(1.0)
    np.testing.assert_allclose(r.predict([5]), [9.0])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 100), st.integers(0, 2**31))
def test_power_scale_equivariance(c, seed):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0.5, 3, 6))
    y = 2 * x**1.3 * np.exp(0.05 * rng.standard_normal(6))
    a = fit_model(list(zip(x, y)), "power")
    b = fit_model(list(zip(x, c * y)), "power")
    assert b.params["b"] == pytest.approx(a.params["b"], abs=1e-8)
    assert b.params["a"] == pytest.approx(c * a.params["a"], rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["exp_offset", "log_correction", "linear"]), st.integers(0, 2**31))
def test_objective_never_above_init(model, seed):
    rng = np.random.default_rng(seed)
    x = np.linspace(1, 4, 7)
    y = rng.standard_normal(7)
    init = dict(zip(MODELS[model], rng.uniform(0.2, 2, len(MODELS[model]))))
    r = fit_model(list(zip(x, y)), model, init=init)
    f = model_function(model)
    p0 = np.array([init[k] for k in MODELS[model]])
    assert r.extra["objective_rss"] <= float(np.sum((f(x, p0) - y) ** 2)) + 1e-12
    if r.converged:
        assert r.gradient_norm <= 1e-10 * (1 + abs(r.rss))


def test_input_validation():
    with pytest.raises(ValueError, match="at least"):
        fit_model([(1, 1), (2, 2)], "power")
    with pytest.raises(ValueError, match="distinct"):
        fit_model([(1, 1), (1, 2), (2, 3), (3, 3)], "linear")
    with pytest.raises(ValueError, match="x > 0"):
        fit_model([(0, 1), (1, 2), (2, 3), (3, 4)], "log_correction")
    with pytest.raises(ValueError, match="unknown"):
        fit_model([(1, 1), (2, 2), (3, 3)], "cubic")


def test_non_convergence_returns_best_so_far():
    x = np.linspace(0, 1, 6)
    y = np.array([0, 1, 0, 1, 0, 1.0])
    f = model_function("exp_offset")
    p, rss, ok, it, g = levenberg_marquardt(f, x, y, np.array([1.0, 0.5, 0.0]), max_iter=2)
    assert not ok and it == 2
    assert rss <= float(np.sum((f(x, np.array([1.0, 0.5, 0.0])) - y) ** 2))


def test_serialisation():
    r = fit_model([(1, 2.0), (2, 4.0), (3, 6.0)], "linear")
    d = r.to_dict()
    assert set(d) == {"model", "params", "rss", "converged", "iterations"}


def _smax_points(delta):
    return [(N, float(np.max(xxz_summary(N, delta)["E"][:-1]))) for N in (8, 12, 16, 20)]


@pytest.mark.slow
@pytest.mark.parametrize("delta", [1.2, 1.5, 2.0, -1.0])
def test_model_selection_outside_critical_region(delta):
    # outside (-1, 1) the power law should describe S_max(N) better than the logarithm
    pts = _smax_points(delta)
    log_fit = fit_model(pts, "log_correction")
    pow_fit = fit_model(pts, "power")
    assert pow_fit.rss < log_fit.rss, (pow_fit.rss, log_fit.rss)
