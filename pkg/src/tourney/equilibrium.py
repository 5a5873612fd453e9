"""Symmetric equilibrium of rank-order tournaments with a standard.

A pay scheme is a standard (minimum performance all prize winners must
reach) plus a weakly decreasing prize schedule over ranks.  In the symmetric
equilibrium a player's marginal benefit of effort decomposes over prize
differentials: for each rank r there is a coefficient giving the marginal
effect of effort on the probability of finishing rank r or better among the
qualifiers.  Equating the differential-weighted sum of those coefficients to
marginal cost pins down effort, and scanning the threshold over the modes of
the noise density pins down the optimal standard.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .distributions import NoiseDistribution, order_statistic_cdf, order_statistic_pdf

__all__ = [
    "PrizeSchedule",
    "CostFunction",
    "TournamentDesign",
    "EquilibriumSolution",
    "ThresholdResult",
    "SufficiencyResult",
    "QuadratureFailure",
    "EffortOutOfRange",
    "ConcavityWarning",
    "marginal_benefit_rank",
    "marginal_benefit_curve",
    "total_marginal_benefit",
    "total_marginal_benefit_curve",
    "prize_probability",
    "deviation_payoff_curve",
    "equilibrium_effort",
    "optimal_threshold",
    "solve_design",
    "global_mode_sufficiency",
    "random_schedule",
]

QUAD_TARGET = 1e-9  # absolute error target for marginal-benefit integrals
THRESHOLD_TIE_TOL = 1e-9


class QuadratureFailure(RuntimeError):
    """Adaptive quadrature could not reach the requested error target."""


class EffortOutOfRange(ValueError):
    """Marginal benefit exceeds marginal cost at the largest undominated effort."""


class ConcavityWarning(UserWarning):
    """Deviation payoff failed the unimodality diagnostic; the first-order
    condition may not characterize an equilibrium."""


@dataclass(frozen=True)
class PrizeSchedule:
    """Weakly decreasing nonnegative prizes summing to one."""

    prizes: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.prizes, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("need a flat, nonempty prize vector")
        if np.any(v < -1e-15):
            raise ValueError("prizes must be nonnegative")
        if np.any(np.diff(v) > 1e-12):
            raise ValueError("prizes must be weakly decreasing in rank")
        total = float(v.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(
                f"prize budget must sum to 1 (got {total!r}); rescale the schedule"
            )
        object.__setattr__(self, "prizes", tuple(float(p) for p in v))

    @property
    def n(self) -> int:
        return len(self.prizes)

    @property
    def differentials(self) -> np.ndarray:
        """d_r = v_r - v_{r+1} with v_{n+1} = 0; satisfies sum(r * d_r) = 1."""
        v = np.asarray(self.prizes)
        return np.append(v[:-1] - v[1:], v[-1])

    @classmethod
    def winner_take_all(cls, n: int) -> "PrizeSchedule":
        return cls((1.0,) + (0.0,) * (n - 1))

    @classmethod
    def equal_sharing(cls, n: int) -> "PrizeSchedule":
        return cls.equal_top(n, n)

    @classmethod
    def equal_top(cls, s: int, n: int) -> "PrizeSchedule":
        """s equal positive prizes at the top, n-s zeros below."""
        if not 1 <= s <= n:
            raise ValueError("need 1 <= s <= n")
        return cls((1.0 / s,) * s + (0.0,) * (n - s))


def random_schedule(n: int, rng: np.random.Generator) -> PrizeSchedule:
    """Uniform draw from the feasible set: sorted Dirichlet(1, ..., 1)."""
    v = rng.dirichlet(np.ones(n))
    v = np.sort(v)[::-1]
    v[0] += 1.0 - v.sum()  # exact budget
    return PrizeSchedule(tuple(v))


class CostFunction:
    """Strictly convex effort cost with analytic derivative and inverse.

    ``max_effort`` is the largest undominated effort level, i.e. the effort
    whose cost equals the entire unit prize budget.
    """

    def __init__(self, c, cprime, cprime_inv, max_effort: float | None = None, label: str = "custom"):
        self.c = c
        self.cprime = cprime
        self.cprime_inv = cprime_inv
        self.label = label
        if max_effort is None:
            max_effort = float(optimize.brentq(lambda e: c(e) - 1.0, 1e-12, 1e12, xtol=1e-14))
        self.max_effort = float(max_effort)
        if abs(c(0.0)) > 1e-12 or abs(cprime(0.0)) > 1e-9:
            raise ValueError("cost must satisfy c(0) = 0 and c'(0) = 0")

    @classmethod
    def power(cls, kappa: float = 1.0, beta: float = 2.0) -> "CostFunction":
        """c(e) = kappa * e**beta / beta with kappa > 0, beta > 1."""
        if kappa <= 0 or beta <= 1:
            raise ValueError("need kappa > 0 and beta > 1")
        return cls(
            c=lambda e: kappa * e**beta / beta,
            cprime=lambda e: kappa * e ** (beta - 1.0),
            cprime_inv=lambda y: (y / kappa) ** (1.0 / (beta - 1.0)),
            max_effort=(beta / kappa) ** (1.0 / beta),
            label=f"power(kappa={kappa:g}, beta={beta:g})",
        )

    @classmethod
    def quadratic(cls) -> "CostFunction":
        return cls.power(1.0, 2.0)

    def __repr__(self):
        return f"CostFunction({self.label}, max_effort={self.max_effort:.6g})"


@dataclass(frozen=True)
class TournamentDesign:
    """A standard plus a prize schedule, with the effort cost attached."""

    standard: float
    schedule: PrizeSchedule
    cost: CostFunction

    @property
    def n(self) -> int:
        return self.schedule.n


@dataclass(frozen=True)
class EquilibriumSolution:
    threshold: float          # standard in noise units: standard - effort
    effort: float
    standard: float           # threshold + effort
    marginal_benefit: float
    pass_probability: float
    concavity_ok: bool


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    marginal_benefit: float
    candidates: tuple[tuple[float, float], ...]  # (mode, marginal benefit there)
    grid_threshold: float
    grid_marginal_benefit: float
    grid_step: float


@dataclass(frozen=True)
class SufficiencyResult:
    holds: bool
    witness: float  # mode maximizing the top-rank coefficient


# ---------------------------------------------------------------------------
# marginal benefit coefficients
# ---------------------------------------------------------------------------


def _quad(fn, a, b, knots=(), epsabs=QUAD_TARGET * 1e-2) -> float:
    if b <= a:
        return 0.0
    pts = sorted(k for k in knots if a < k < b)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            fn, a, b, points=pts or None, epsabs=epsabs, epsrel=1e-11, limit=400
        )
    if err > QUAD_TARGET:
        raise QuadratureFailure(
            f"integral error estimate {err:.2e} above target {QUAD_TARGET:.0e}"
        )
    return float(val)


@lru_cache(maxsize=65536)
def _rank_coefficient(dist: NoiseDistribution, n: int, r: int, t: float) -> float:
    if not 1 <= r <= n:
        raise ValueError(f"rank {r} outside 1..{n}")
    ft = float(dist.pdf(t))
    j = n - r
    if j == 0:
        return ft  # bottom rank: only the standard binds
    lo, hi = dist.truncated_support()
    a = max(t, lo)
    integral = _quad(
        lambda x: float(dist.pdf(x)) * float(order_statistic_pdf(dist, j, n - 1, x)),
        a,
        hi,
        knots=dist.knots,
    )
    return ft * float(order_statistic_cdf(dist, j, n - 1, t)) + integral


def marginal_benefit_rank(dist: NoiseDistribution, n: int, r: int, t: float) -> float:
    """Marginal effect of effort on the chance of finishing rank r or better.

    At threshold t this equals ``f(t) * F_{(n-r:n-1)}(t)`` plus the integral
    of f against the rival order statistic above t; for the last rank it
    collapses to ``f(t)``.  A threshold below the support means the standard
    never binds.
    """
    return _rank_coefficient(dist, int(n), int(r), float(t))


def marginal_benefit_curve(dist: NoiseDistribution, n: int, r: int, x: np.ndarray) -> np.ndarray:
    """Vectorized rank coefficient on an ascending grid (trapezoid tails)."""
    x = np.asarray(x, dtype=float)
    fx = np.asarray(dist.pdf(x))
    j = n - r
    if j == 0:
        return fx.copy()
    w = fx * np.asarray(order_statistic_pdf(dist, j, n - 1, x))
    seg = 0.5 * (w[1:] + w[:-1]) * np.diff(x)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    tail = cum[-1] - cum
    return fx * np.asarray(order_statistic_cdf(dist, j, n - 1, x)) + tail


def total_marginal_benefit(dist: NoiseDistribution, n: int, v: PrizeSchedule, t: float) -> float:
    """Differential-weighted sum of rank coefficients at threshold t."""
    if v.n != n:
        raise ValueError(f"schedule is for {v.n} players, not {n}")
    d = v.differentials
    return float(
        sum(d[r - 1] * marginal_benefit_rank(dist, n, r, t) for r in range(1, n + 1) if d[r - 1] != 0.0)
    )


def total_marginal_benefit_curve(
    dist: NoiseDistribution, n: int, v: PrizeSchedule, x: np.ndarray
) -> np.ndarray:
    d = v.differentials
    out = np.zeros_like(np.asarray(x, dtype=float))
    for r in range(1, n + 1):
        if d[r - 1] != 0.0:
            out += d[r - 1] * marginal_benefit_curve(dist, n, r, x)
    return out


# ---------------------------------------------------------------------------
# prize probabilities and deviation payoffs
# ---------------------------------------------------------------------------


def prize_probability(
    dist: NoiseDistribution, n: int, r: int, e: float, e_star: float, rho: float
) -> float:
    """Probability of winning a prize of at least rank r.

    The deviating player exerts ``e`` against n-1 rivals at ``e_star`` under
    standard ``rho``: either the rank-r rival misses the standard and passing
    suffices, or the player must also outperform that rival.
    """
    if not 1 <= r <= n:
        raise ValueError(f"rank {r} outside 1..{n}")
    j = n - r
    own_pass = float(dist.sf(rho - e))
    if j == 0:
        return own_pass
    lo, hi = dist.truncated_support()
    a = max(rho - e_star, lo)
    first = own_pass * float(order_statistic_cdf(dist, j, n - 1, rho - e_star))
    shift = e_star - e
    shifted_knots = tuple(k - shift for k in dist.knots)
    integral = _quad(
        lambda x: float(dist.sf(shift + x)) * float(order_statistic_pdf(dist, j, n - 1, x)),
        a,
        hi,
        knots=dist.knots + shifted_knots,
    )
    return first + integral


def deviation_payoff_curve(
    dist: NoiseDistribution,
    design: TournamentDesign,
    e_star: float,
    e_grid: np.ndarray,
    x_points: int = 4001,
) -> np.ndarray:
    """Expected payoff of a single deviator at each effort in ``e_grid``.

    Rivals play ``e_star`` under the design's standard.  Evaluated on a
    shared noise grid so the whole curve costs one pass; used by the
    concavity diagnostic and by figure rendering, while the Monte-Carlo
    module provides the independent estimate.
    """
    n = design.n
    rho = design.standard
    e_grid = np.asarray(e_grid, dtype=float)
    lo, hi = dist.truncated_support()
    a = max(rho - e_star, lo)
    d = design.schedule.differentials
    payoff = np.zeros_like(e_grid)
    own_pass = np.asarray(dist.sf(rho - e_grid))
    if a < hi:
        xs = np.linspace(a, hi, x_points)
        interior = [k for k in dist.knots if a < k < hi]
        if interior:
            xs = np.unique(np.concatenate([xs, np.asarray(interior)]))
        surv = np.asarray(dist.sf((e_star - e_grid)[:, None] + xs[None, :]))
        dx = np.diff(xs)
    for r in range(1, n + 1):
        if d[r - 1] == 0.0:
            continue
        j = n - r
        if j == 0:
            payoff += d[r - 1] * own_pass
            continue
        first = own_pass * float(order_statistic_cdf(dist, j, n - 1, rho - e_star))
        if a >= hi:
            payoff += d[r - 1] * first
            continue
        fos = np.asarray(order_statistic_pdf(dist, j, n - 1, xs))
        w = surv * fos[None, :]
        integral = np.sum(0.5 * (w[:, 1:] + w[:, :-1]) * dx[None, :], axis=1)
        payoff += d[r - 1] * (first + integral)
    return payoff - np.asarray(design.cost.c(e_grid))


def _is_unimodal(values: np.ndarray, atol: float | None = None) -> bool:
    diffs = np.diff(np.asarray(values, dtype=float))
    if atol is None:
        atol = 1e-12 * max(1.0, float(np.max(np.abs(values))))
    signs = np.sign(diffs[np.abs(diffs) > atol])
    if signs.size == 0:
        return True
    flips = np.nonzero(np.diff(signs) != 0)[0]
    return flips.size == 0 or (flips.size == 1 and signs[0] > 0)


# ---------------------------------------------------------------------------
# equilibrium and optimal standard
# ---------------------------------------------------------------------------


def equilibrium_effort(
    dist: NoiseDistribution, n: int, v: PrizeSchedule, t: float, cost: CostFunction
) -> float:
    """Effort solving marginal benefit = marginal cost at threshold t."""
    g = total_marginal_benefit(dist, n, v, t)
    top = cost.cprime(cost.max_effort)
    if g > top * (1.0 + 1e-12):
        raise EffortOutOfRange(
            f"marginal benefit {g:.6g} exceeds marginal cost {top:.6g} at the "
            f"largest undominated effort"
        )
    return float(cost.cprime_inv(min(g, top)))


def optimal_threshold(
    dist: NoiseDistribution, n: int, v: PrizeSchedule, resolution: float = 2e-4
) -> ThresholdResult:
    """Best threshold among the modes weakly above the global mode.

    Candidates are evaluated with adaptive quadrature; a full-support grid
    scan cross-validates that no off-mode threshold does better (up to grid
    tolerance).  Ties within 1e-9 resolve to the smallest threshold, which
    maximizes the pass probability.
    """
    shape = dist.find_modes(resolution)
    cand = [m for m in shape.modes if m >= shape.global_mode - 1e-12]
    values = [(m, total_marginal_benefit(dist, n, v, m)) for m in sorted(cand)]
    best_val = max(g for _, g in values)
    t_star, g_star = next((m, g) for m, g in values if g >= best_val - THRESHOLD_TIE_TOL)

    grid = dist.grid(resolution)
    curve = total_marginal_benefit_curve(dist, n, v, grid)
    i = int(np.argmax(curve))
    return ThresholdResult(
        threshold=float(t_star),
        marginal_benefit=float(g_star),
        candidates=tuple(values),
        grid_threshold=float(grid[i]),
        grid_marginal_benefit=float(curve[i]),
        grid_step=float((grid[-1] - grid[0]) * resolution),
    )


def solve_design(
    dist: NoiseDistribution,
    n: int,
    v: PrizeSchedule,
    cost: CostFunction,
    resolution: float = 2e-4,
    concavity_points: int = 400,
    threshold: float | None = None,
) -> EquilibriumSolution:
    """Optimal standard and equilibrium effort for a fixed prize schedule.

    Pass ``threshold`` to solve at a caller-chosen threshold instead of the
    optimal one.  Emits a non-fatal ``ConcavityWarning`` when the deviation
    payoff is not unimodal on the effort range, in which case the
    first-order condition may not identify an equilibrium.
    """
    if threshold is None:
        thr = optimal_threshold(dist, n, v, resolution)
        t_star, g_star = thr.threshold, thr.marginal_benefit
    else:
        t_star = float(threshold)
        g_star = total_marginal_benefit(dist, n, v, t_star)
    e_star = equilibrium_effort(dist, n, v, t_star, cost)
    rho = e_star + t_star
    design = TournamentDesign(standard=rho, schedule=v, cost=cost)
    e_grid = np.linspace(0.0, cost.max_effort, concavity_points)
    pi = deviation_payoff_curve(dist, design, e_star, e_grid)
    ok = _is_unimodal(pi)
    if not ok:
        warnings.warn(
            "deviation payoff is not unimodal in own effort; equilibrium "
            "existence is not guaranteed for this design",
            ConcavityWarning,
            stacklevel=2,
        )
    return EquilibriumSolution(
        threshold=float(t_star),
        effort=float(e_star),
        standard=float(rho),
        marginal_benefit=float(g_star),
        pass_probability=float(dist.sf(t_star)),
        concavity_ok=bool(ok),
    )


def global_mode_sufficiency(
    dist: NoiseDistribution, n: int, resolution: float = 2e-4
) -> SufficiencyResult:
    """Whether the top-rank coefficient peaks at the global mode.

    When it does, the standard at the global mode is optimal for every prize
    schedule; the witness reports the maximizing mode either way.
    """
    shape = dist.find_modes(resolution)
    xm = shape.global_mode
    cand = sorted(m for m in shape.modes if m >= xm - 1e-12)
    vals = {m: marginal_benefit_rank(dist, n, 1, m) for m in cand}
    grid = dist.grid(resolution)
    curve = marginal_benefit_curve(dist, n, 1, grid)
    g_grid = float(grid[int(np.argmax(curve))])
    best = max(vals.values())
    witness = min(m for m, g in vals.items() if g >= best - THRESHOLD_TIE_TOL)
    holds = vals[xm] >= best - THRESHOLD_TIE_TOL
    if holds:
        # grid scan may reveal an off-candidate maximizer; treat a grid win
        # beyond tolerance at a higher mode as a failure witness
        nearest = min(cand, key=lambda m: abs(m - g_grid))
        if curve.max() > best + THRESHOLD_TIE_TOL and nearest > xm:
            holds, witness = False, nearest
    return SufficiencyResult(holds=bool(holds), witness=float(witness))
