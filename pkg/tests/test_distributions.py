import numpy as np
import pytest
from scipy.integrate import quad

from tourney import distributions as dists

ALL_FAMILIES = [
    dists.exponential(1.0),
    dists.exponential(0.5),
    dists.gumbel(),
    dists.normal(),
    dists.logistic(),
    dists.uniform(0.0, 1.0),
    dists.pareto(2.0),
    dists.erf_exponential(),
    dists.trimodal_example("red"),
    dists.trimodal_example("green"),
    dists.trimodal_example("blue"),
]


@pytest.mark.parametrize("d", ALL_FAMILIES, ids=lambda d: d.family + str(d.params.get("variant", "")))
def test_pdf_integrates_to_one(d):
    lo, hi = d.truncated_support()
    pts = [k for k in d.knots if lo < k < hi]
    total, _ = quad(lambda x: float(d.pdf(x)), lo, hi, points=pts or None, limit=200)
    assert abs(total - 1.0) < 1e-6


@pytest.mark.parametrize("d", ALL_FAMILIES, ids=lambda d: d.family + str(d.params.get("variant", "")))
def test_cdf_endpoints_and_monotonicity(d):
    lo, hi = d.truncated_support()
    assert d.cdf(lo) < 1e-8 or np.isfinite(d.support[0]) and d.cdf(d.support[0]) == 0.0
    assert abs(d.cdf(hi) - 1.0) < 1e-8
    x = np.linspace(lo, hi, 999)
    c = np.asarray(d.cdf(x))
    assert np.all(np.diff(c) >= -1e-13)
    assert np.allclose(c + np.asarray(d.sf(x)), 1.0, atol=1e-12)


@pytest.mark.parametrize("d", ALL_FAMILIES, ids=lambda d: d.family + str(d.params.get("variant", "")))
def test_pdf_matches_cdf_derivative(d):
    lo, hi = d.truncated_support()
    h = 1e-6 * (hi - lo)
    rng = np.random.default_rng(1)
    x = rng.uniform(lo + 10 * h, hi - 10 * h, 40)
    # keep clear of density kinks where the derivative is one-sided
    for k in d.knots:
        x = x[np.abs(x - k) > 10 * h]
    fd = (np.asarray(d.cdf(x + h)) - np.asarray(d.cdf(x - h))) / (2 * h)
    assert np.allclose(fd, np.asarray(d.pdf(x)), atol=1e-5)


def test_outside_support_is_zero():
    red = dists.trimodal_example("red")
    assert red.pdf(-0.5) == 0.0
    assert red.pdf(2.0) == 0.0
    assert red.cdf(-0.5) == 0.0 and red.cdf(2.0) == 1.0


def test_red_density_values():
    red = dists.trimodal_example("red")
    # raw piecewise values before renormalization
    assert red.normalization == pytest.approx(1.65625, abs=1e-12)
    assert red.pdf(0.5) * red.normalization == pytest.approx(1.3125, abs=1e-12)
    assert red.pdf(0.5) == pytest.approx(1.3125 / 1.65625, abs=1e-12)
    assert red.cdf(1.0) == pytest.approx(0.6839622641509434, abs=1e-12)


def test_hazards():
    e = dists.exponential(1.0)
    assert e.hazard(0.0) == pytest.approx(1.0, abs=1e-12)
    assert e.hazard(5.0) == pytest.approx(1.0, abs=1e-12)
    fe = dists.erf_exponential()
    assert fe.hazard(0.0) == pytest.approx(2.0, abs=1e-12)
    assert fe.hazard(30.0) == pytest.approx(1.0, abs=1e-12)
    red = dists.trimodal_example("red")
    with pytest.raises(dists.SurvivalUnderflow):
        red.hazard(1.75)


def test_likelihood_ratios():
    lam = 0.7
    e = dists.exponential(lam)
    assert e.likelihood_ratio(2.0) == pytest.approx(lam, abs=1e-12)
    g = dists.gumbel()
    assert g.likelihood_ratio(0.0) == pytest.approx(0.0, abs=1e-12)
    red = dists.trimodal_example("red")
    # first linear segment: slope -16/16 and f = 18.4/16; scale cancels
    assert red.likelihood_ratio(0.1) == pytest.approx(16.0 / 18.4, rel=1e-9)
    with pytest.raises(dists.ZeroDensity):
        red.likelihood_ratio(1.75)


def test_right_derivative_at_kinks():
    red = dists.trimodal_example("red")
    # at the kink 0.25 the raw slope switches from -16/16 to +20/16 while the
    # raw density is 16/16; the normalization cancels in the ratio
    assert red.likelihood_ratio(0.25) == pytest.approx(-20.0 / 16.0, rel=1e-9)


def test_find_modes_red():
    shape = dists.trimodal_example("red").find_modes()
    assert shape.modes == (1.0, 0.5)
    assert shape.global_mode == 0.5
    # the boundary bump at 0 sits below the global max and is not listed
    assert 0.0 not in shape.modes


def test_find_modes_families():
    assert dists.gumbel().find_modes().global_mode == pytest.approx(0.0, abs=1e-8)
    assert dists.erf_exponential().find_modes().modes == (0.0,)
    assert dists.exponential(2.0).find_modes().modes == (0.0,)
    assert dists.pareto(2.0).find_modes().global_mode == 1.0
    assert dists.uniform(0, 1).find_modes().global_mode == 1.0  # largest maximizer


def test_mode_scale_invariance():
    raw = [(0, 2.5), (0.25, 2.0), (0.5, 2.625), (0.75, 2.0), (1.0, 2.375), (1.25, 2.0), (1.75, 0)]
    scaled = dists.piecewise_linear(raw)
    assert scaled.find_modes().modes == dists.trimodal_example("red").find_modes().modes


def test_too_many_modes():
    xs = np.linspace(0, 1, 42)
    ys = np.where(np.arange(42) % 2 == 0, 0.1, 1.0)
    ys[-1] = 0.0
    zig = dists.piecewise_linear(list(zip(xs, ys)))
    with pytest.raises(dists.TooManyModes):
        zig.find_modes(max_modes=4)
    assert len(zig.find_modes(max_modes=64).modes) == 20


def test_classify_hazard():
    assert dists.exponential(1.3).classify_hazard() == "constant"
    assert dists.erf_exponential().classify_hazard() == "DFR"
    assert dists.pareto(2.0).classify_hazard() == "DFR"
    red = dists.trimodal_example("red")
    assert red.classify_hazard() == "mixed"
    assert red.classify_hazard(above=1.0) == "IFR"
    assert dists.normal().classify_hazard() == "IFR"


def test_log_class_and_ifr_consistency():
    for d in (dists.gumbel(), dists.normal(), dists.logistic()):
        assert d.log_concavity() == "log-concave"
        assert d.classify_hazard() == "IFR"
    assert dists.pareto(2.0).log_concavity() == "log-convex"
    assert dists.erf_exponential().log_concavity() == "neither"
    assert dists.exponential(1.0).log_concavity() == "neither"  # log-linear boundary case


def test_ifr_above_report():
    shape = dists.trimodal_example("red").find_modes()
    assert 1.0 in shape.ifr_above


def test_order_statistics():
    u = dists.uniform(0, 1)
    x = 0.37
    # top statistic is an exact power of the cdf
    assert u.order_statistic_cdf(2, 2, x) == (u.cdf(x)) ** 2
    assert dists.gumbel().order_statistic_cdf(3, 3, 0.1) == dists.gumbel().cdf(0.1) ** 3
    # degenerate rank-0 convention
    assert u.order_statistic_cdf(0, 5, -10.0) == 1.0
    # minimum of two uniforms
    assert u.order_statistic_cdf(1, 2, 0.5) == pytest.approx(0.75, abs=1e-12)
    with pytest.raises(dists.RankOutOfRange):
        u.order_statistic_cdf(6, 5, 0.5)
    with pytest.raises(dists.RankOutOfRange):
        u.order_statistic_cdf(-1, 5, 0.5)


@pytest.mark.parametrize("d", [dists.gumbel(), dists.uniform(0, 1), dists.trimodal_example("red")])
def test_order_statistic_cdf_decreasing_in_rank(d):
    n = 5
    for x in np.linspace(*d.truncated_support(), 11)[1:-1]:
        vals = [d.order_statistic_cdf(j, n, x) for j in range(0, n + 1)]
        assert all(a >= b - 1e-13 for a, b in zip(vals, vals[1:]))


def test_order_statistic_pdf_integrates():
    g = dists.gumbel()
    lo, hi = g.truncated_support()
    for j, n in [(1, 3), (2, 3), (3, 3)]:
        total, _ = quad(lambda x: float(g.order_statistic_pdf(j, n, x)), lo, hi, limit=200)
        assert total == pytest.approx(1.0, abs=1e-7)


def test_sampling_matches_cdf():
    fe = dists.erf_exponential()
    rng = np.random.default_rng(0)
    draws = fe.sample(200000, rng)
    for q in (0.1, 0.5, 0.9):
        assert np.mean(draws <= fe.ppf(q)) == pytest.approx(q, abs=5e-3)


def test_from_spec():
    d = dists.from_spec({"family": "exponential", "params": {"rate": 2.0}})
    assert d.family == "exponential" and d.params["rate"] == 2.0
    pw = dists.from_spec({"family": "piecewise_linear", "knots": [[0, 1], [1, 1], [2, 0]]})
    assert pw.support == (0.0, 2.0)
    d2 = dists.from_spec('{"family": "gumbel", "params": {"loc": 0.5}}')
    assert d2.params["loc"] == 0.5
    with pytest.raises(ValueError, match="unknown keys"):
        dists.from_spec({"family": "gumbel", "mean": 0.0})
    with pytest.raises(ValueError, match="unknown family"):
        dists.from_spec({"family": "cauchy"})


def test_unnormalized_inputs_warn_when_top_density_positive():
    with pytest.warns(UserWarning, match="vanish"):
        dists.piecewise_linear([(0, 1.0), (1, 1.0)])
