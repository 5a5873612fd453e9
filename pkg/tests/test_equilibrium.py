import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tourney import distributions as dists
from tourney import equilibrium as eq

RED = dists.trimodal_example("red")
GREEN = dists.trimodal_example("green")
BLUE = dists.trimodal_example("blue")
EXPO = dists.exponential(1.0)
UNIF = dists.uniform(0.0, 1.0)
GUMBEL = dists.gumbel()
HEAVY = dists.erf_exponential()
QUAD_COST = eq.CostFunction.quadratic()


# -- prize schedules ---------------------------------------------------------


def test_schedule_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        eq.PrizeSchedule((0.5, 0.3, 0.1))
    with pytest.raises(ValueError, match="decreasing"):
        eq.PrizeSchedule((0.3, 0.7))
    with pytest.raises(ValueError, match="nonnegative"):
        eq.PrizeSchedule((1.5, -0.5))


@given(st.integers(min_value=1, max_value=10), st.integers(min_value=1, max_value=10))
def test_equal_top_budget_identity(s, n):
    if s > n:
        s, n = n, s
    v = eq.PrizeSchedule.equal_top(s, n)
    d = v.differentials
    assert np.all(d >= 0)
    assert float(np.dot(np.arange(1, n + 1), d)) == 1.0


@given(st.integers(min_value=2, max_value=8), st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_random_schedule_valid(n, seed):
    v = eq.random_schedule(n, np.random.default_rng(seed))
    d = v.differentials
    assert np.all(np.asarray(v.prizes) >= 0)
    assert np.all(np.diff(v.prizes) <= 1e-12)
    assert abs(np.dot(np.arange(1, n + 1), d) - 1.0) < 1e-9


# -- marginal benefit coefficients -------------------------------------------


@pytest.mark.parametrize("d", [RED, GUMBEL, HEAVY, EXPO])
@pytest.mark.parametrize("t", [-0.3, 0.0, 0.6, 1.2])
def test_bottom_rank_equals_density(d, t):
    for n in (2, 4):
        assert eq.marginal_benefit_rank(d, n, n, t) == float(d.pdf(t))


def test_uniform_top_rank_is_constant():
    for t in (0.0, 0.25, 0.5, 0.9, 1.0):
        assert eq.marginal_benefit_rank(UNIF, 2, 1, t) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_exponential_rank_coefficients_at_zero(n):
    for r in range(1, n + 1):
        assert eq.marginal_benefit_rank(EXPO, n, r, 0.0) == pytest.approx(r / n, abs=1e-9)


def test_eps_identity():
    for d in (RED, GUMBEL, HEAVY):
        v = eq.PrizeSchedule.equal_sharing(3)
        for t in (0.1, 0.5, 1.3):
            assert abs(eq.total_marginal_benefit(d, 3, v, t) - float(d.pdf(t)) / 3) < 1e-10


def test_linearity_in_schedule():
    rng = np.random.default_rng(5)
    for _ in range(5):
        v1 = eq.random_schedule(4, rng)
        v2 = eq.random_schedule(4, rng)
        a = rng.random()
        mix = a * np.asarray(v1.prizes) + (1 - a) * np.asarray(v2.prizes)
        mix[0] += 1.0 - mix.sum()
        vm = eq.PrizeSchedule(tuple(mix))
        t = rng.uniform(0.0, 1.5)
        lhs = eq.total_marginal_benefit(RED, 4, vm, t)
        rhs = a * eq.total_marginal_benefit(RED, 4, v1, t) + (1 - a) * eq.total_marginal_benefit(
            RED, 4, v2, t
        )
        assert abs(lhs - rhs) < 1e-10


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", [2, 3, 5])
def test_exponential_invariance(lam, n):
    d = dists.exponential(lam)
    rng = np.random.default_rng(17)
    for _ in range(5):
        v = eq.random_schedule(n, rng)
        assert abs(eq.total_marginal_benefit(d, n, v, 0.0) - lam / n) < 1e-8


def test_curve_matches_pointwise_quadrature():
    grid = RED.grid()
    for r in (1, 2):
        curve = eq.marginal_benefit_curve(RED, 3, r, grid)
        for i in np.linspace(10, len(grid) - 10, 7, dtype=int):
            assert curve[i] == pytest.approx(eq.marginal_benefit_rank(RED, 3, r, float(grid[i])), abs=2e-6)


# -- prize probabilities ------------------------------------------------------


def test_prize_probability_examples():
    # bottom rank: passing the standard is all that matters
    assert eq.prize_probability(UNIF, 2, 2, 0.3, 0.9, 0.8) == float(UNIF.sf(0.5))
    # closed form for the uniform top rank
    assert eq.prize_probability(UNIF, 2, 1, 0.3, 0.3, 0.8) == pytest.approx(0.375, abs=1e-9)
    # without a standard, symmetric play gives uniform ranks
    for d in (GUMBEL, EXPO):
        for r in (1, 2, 3):
            p = eq.prize_probability(d, 3, r, 0.4, 0.4, -np.inf)
            assert p == pytest.approx(r / 3, abs=1e-6)


def test_prize_probability_monotone_in_rank():
    for rho in (-np.inf, 0.7, 1.4):
        vals = [eq.prize_probability(RED, 3, r, 0.2, 0.25, rho) for r in (1, 2, 3)]
        assert vals[0] <= vals[1] <= vals[2] + 1e-12


def test_finite_difference_matches_rank_coefficient():
    # interior threshold, away from the support boundary kink
    e_star, rho = 0.3, 0.3 + 0.8
    h = 1e-5
    for r in (1, 2, 3):
        up = eq.prize_probability(RED, 3, r, e_star + h, e_star, rho)
        dn = eq.prize_probability(RED, 3, r, e_star - h, e_star, rho)
        fd = (up - dn) / (2 * h)
        assert fd == pytest.approx(eq.marginal_benefit_rank(RED, 3, r, 0.8), abs=1e-4)


# -- efforts and thresholds ---------------------------------------------------


def test_equilibrium_effort():
    v = eq.random_schedule(2, np.random.default_rng(0))
    assert eq.equilibrium_effort(EXPO, 2, v, 0.0, QUAD_COST) == pytest.approx(0.5, abs=1e-9)
    eps = eq.PrizeSchedule.equal_sharing(3)
    assert eq.equilibrium_effort(HEAVY, 3, eps, 0.0, QUAD_COST) == pytest.approx(2 / 3, abs=1e-12)
    # zero marginal benefit means zero effort
    assert eq.equilibrium_effort(UNIF, 2, eq.PrizeSchedule.equal_sharing(2), 2.5, QUAD_COST) == 0.0


def test_effort_out_of_range():
    weak = eq.CostFunction.power(kappa=0.01, beta=2.0)  # c'(max_effort) ~ 0.14
    with pytest.raises(eq.EffortOutOfRange):
        eq.equilibrium_effort(EXPO, 2, eq.PrizeSchedule.winner_take_all(2), 0.0, weak)


def test_optimal_threshold_red_by_schedule():
    expected = {1: 1.0, 2: 0.5, 3: 0.5}
    for s, t_exp in expected.items():
        thr = eq.optimal_threshold(RED, 3, eq.PrizeSchedule.equal_top(s, 3))
        assert thr.threshold == pytest.approx(t_exp, abs=thr.grid_step)
        # mode-restricted optimum must agree with the full grid scan
        assert abs(thr.grid_threshold - thr.threshold) <= thr.grid_step
        assert thr.grid_marginal_benefit <= thr.marginal_benefit + 1e-6


def test_optimal_threshold_unimodal_is_global_mode():
    for d in (GUMBEL, HEAVY):
        thr = eq.optimal_threshold(d, 3, eq.PrizeSchedule.winner_take_all(3))
        assert thr.threshold == d.find_modes().global_mode


def test_monotone_rank_argmax_on_trimodal_trio():
    for d in (RED, GREEN, BLUE):
        modes = d.find_modes().modes
        argmaxes = []
        for r in (1, 2, 3):
            vals = {m: eq.marginal_benefit_rank(d, 3, r, m) for m in modes}
            best = max(vals.values())
            argmaxes.append(max(m for m, g in vals.items() if g >= best - 1e-9))
        assert all(a >= b for a, b in zip(argmaxes, argmaxes[1:]))


def test_global_mode_sufficiency():
    red = eq.global_mode_sufficiency(RED, 3)
    assert not red.holds and red.witness == 1.0
    green = eq.global_mode_sufficiency(GREEN, 3)
    assert green.holds and green.witness == 0.5
    # unimodal noise holds trivially
    assert eq.global_mode_sufficiency(GUMBEL, 4).holds


def test_solve_design_examples():
    sol = eq.solve_design(EXPO, 2, eq.PrizeSchedule.winner_take_all(2), QUAD_COST)
    assert (sol.threshold, sol.effort, sol.standard) == (0.0, 0.5, 0.5)
    assert sol.pass_probability == 1.0 and sol.concavity_ok

    sol2 = eq.solve_design(HEAVY, 3, eq.PrizeSchedule.equal_sharing(3), QUAD_COST)
    assert sol2.effort == pytest.approx(2 / 3, abs=1e-12)
    assert sol2.pass_probability == 1.0
    assert sol2.standard == sol2.effort + sol2.threshold

    sol3 = eq.solve_design(RED, 3, eq.PrizeSchedule.winner_take_all(3), QUAD_COST)
    assert sol3.threshold == pytest.approx(1.0, abs=1e-9)
    assert sol3.pass_probability == pytest.approx(0.3160377358490566, abs=1e-9)
    assert sol3.standard == sol3.effort + sol3.threshold


def test_solve_design_with_threshold_override():
    sol = eq.solve_design(RED, 3, eq.PrizeSchedule.winner_take_all(3), QUAD_COST, threshold=0.5)
    assert sol.threshold == 0.5
    assert sol.marginal_benefit == pytest.approx(
        eq.marginal_benefit_rank(RED, 3, 1, 0.5), abs=1e-12
    )


def test_deviation_payoff_peaks_at_equilibrium():
    v = eq.PrizeSchedule.winner_take_all(2)
    sol = eq.solve_design(EXPO, 2, v, QUAD_COST)
    design = eq.TournamentDesign(sol.standard, v, QUAD_COST)
    grid = np.linspace(0.0, QUAD_COST.max_effort, 301)
    pi = eq.deviation_payoff_curve(EXPO, design, sol.effort, grid)
    assert abs(grid[int(np.argmax(pi))] - sol.effort) < 2 * (grid[1] - grid[0])


def test_unimodality_detector():
    assert eq._is_unimodal(np.array([0.0, 1.0, 2.0, 1.5, 0.5]))
    assert eq._is_unimodal(np.array([3.0, 2.0, 1.0]))
    assert not eq._is_unimodal(np.array([0.0, 1.0, 0.5, 1.2, 0.2]))


def test_cost_function_contract():
    c = eq.CostFunction.power(2.0, 3.0)
    assert c.c(0.0) == 0.0 and c.cprime(0.0) == 0.0
    assert c.c(c.max_effort) == pytest.approx(1.0, abs=1e-9)
    assert c.cprime_inv(c.cprime(0.4)) == pytest.approx(0.4, abs=1e-12)
    with pytest.raises(ValueError):
        eq.CostFunction.power(kappa=-1.0)
    with pytest.raises(ValueError):
        eq.CostFunction(c=lambda e: e, cprime=lambda e: 1.0, cprime_inv=lambda y: y)
