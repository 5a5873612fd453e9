"""Standards in three classic contest models.

A Tullock contest is a rank-order tournament with Gumbel noise viewed
through an exponential lens: multiplicative efforts and standards are the
exponentials of their additive counterparts.  That mapping carries the
optimal-standard results over to Tullock contests (where the standard
introduces a no-winner probability), to innovation contests where players
draw ideas from a distribution, and to patent races where the standard is a
deadline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .distributions import NoiseDistribution, gumbel
from .montecarlo import _require_seed, noise_batches

__all__ = [
    "TullockConfig",
    "AllZeroEfforts",
    "tullock_csf_with_standard",
    "tullock_optimal",
    "tullock_effort_given_standard",
    "tullock_selfconsistent_effort",
    "tullock_best_response_gap",
    "fm_optimal_standard",
    "patent_race_deadline",
]


class AllZeroEfforts(ValueError):
    """The contest success function is undefined when every effort is zero."""


@dataclass(frozen=True)
class TullockConfig:
    """Multiplicative-units contest: ``rho`` and ``efforts`` are exponentials
    of the additive standard and efforts."""

    efforts: tuple[float, ...]
    rho: float

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("standard must be positive in multiplicative units")
        if any(e < 0 for e in self.efforts):
            raise ValueError("efforts must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.efforts)


def tullock_csf_with_standard(efforts, rho: float, i: int | None = None):
    """Win probabilities ``(e_i / sum e) * (1 - exp(-sum e / rho))``.

    The bracketed factor is the chance that anyone clears the standard; its
    complement is the no-winner probability, so the probabilities sum to
    less than one.  As ``rho -> 0`` the classic ratio form is recovered.
    """
    e = np.asarray(efforts, dtype=float)
    if rho <= 0:
        raise ValueError("standard must be positive in multiplicative units")
    total = float(e.sum())
    if total <= 0.0:
        raise AllZeroEfforts("at least one effort must be positive")
    p = (e / total) * -np.expm1(-total / rho)
    return p if i is None else float(p[i])


def tullock_optimal(n: int) -> tuple[float, float]:
    """Closed-form optimal symmetric effort and standard under linear cost.

    ``e* = (n-1)/n^2 + exp(-n)/n^2`` and the optimal multiplicative standard
    equals the effort itself (the additive threshold sits at the Gumbel
    mode, zero).
    """
    if n < 2:
        raise ValueError("need at least two players")
    e_star = (n - 1.0) / n**2 + np.exp(-float(n)) / n**2
    return float(e_star), float(e_star)


def _symmetric_foc(e: float, n: int, rho: float) -> float:
    # marginal win probability at the symmetric profile minus marginal cost 1
    s = n * e
    expo = np.exp(-s / rho)
    return (n - 1.0) * (1.0 - expo) / (n**2 * e) + expo / (n * rho) - 1.0


def tullock_effort_given_standard(n: int, rho: float) -> float:
    """Symmetric equilibrium effort for a fixed standard, linear cost."""
    return float(optimize.brentq(_symmetric_foc, 1e-12, 1.0, args=(n, rho), xtol=1e-15, rtol=1e-15))


def tullock_selfconsistent_effort(n: int) -> float:
    """Solve the symmetric first-order condition with the standard tied to
    the effort (rho = e); independent check of the closed form."""
    return float(
        optimize.brentq(lambda e: _symmetric_foc(e, n, e), 1e-12, 1.0, xtol=1e-15, rtol=1e-15)
    )


def tullock_best_response_gap(
    n: int,
    e_star: float,
    rho: float,
    grid_size: int = 200,
    draws: int = 10**5,
    seed: int | None = None,
) -> dict:
    """Monte-Carlo best-response scan for the Tullock contest with a standard.

    Simulates the underlying Gumbel-noise tournament: player 1 deviates over
    a multiplicative effort grid on [0, 1] (linear cost, unit prize) while
    rivals sit at ``e_star``.  Common random numbers across the grid; returns
    the max payoff gap over playing ``e_star``, its paired standard error,
    and a grid-coarseness bias bound.
    """
    seed = _require_seed(seed)
    noise = gumbel()
    grid = np.unique(np.concatenate([np.linspace(0.0, 1.0, grid_size), [e_star]]))
    i_star = int(np.searchsorted(grid, e_star))
    log_grid = np.log(np.where(grid > 0, grid, 1.0))
    rho_hat = np.log(rho)
    rival_hat = np.log(e_star)

    sums = np.zeros(grid.size)
    dsums = np.zeros(grid.size)
    dsumsq = np.zeros(grid.size)
    for x in noise_batches(noise, n, draws, seed):
        rival_best = np.max(rival_hat + x[:, 1:], axis=1)
        cut = np.maximum(rival_best, rho_hat)
        # player 1 wins iff log(e1) + X1 clears both the rivals and the standard
        wins = (log_grid[None, :] + x[:, 0][:, None] >= cut[:, None]) & (grid[None, :] > 0)
        w = wins.astype(float)
        sums += w.sum(axis=0)
        diff = w - w[:, i_star][:, None]
        dsums += diff.sum(axis=0)
        dsumsq += np.sum(diff * diff, axis=0)
    payoffs = sums / draws - grid
    gaps = payoffs - payoffs[i_star]
    i_best = int(np.argmax(gaps))
    var_d = max(dsumsq[i_best] / draws - (dsums[i_best] / draws) ** 2, 0.0)
    gap_se = float(np.sqrt(var_d / draws))
    # payoff slope is bounded by the win-probability slope plus marginal cost
    lipschitz = 1.0 / ((n - 1) * e_star) + 1.0 / rho + 1.0
    step = float(np.max(np.diff(grid)))
    grid_bias = 0.5 * lipschitz * step
    gap = float(gaps[i_best])
    return {
        "gap": gap,
        "gap_se": gap_se,
        "grid_bias": float(grid_bias),
        "certified": bool(gap <= 3.0 * gap_se + grid_bias),
        "effort_grid": grid,
        "payoffs": payoffs,
    }


def fm_optimal_standard(ideas: NoiseDistribution, n: int, e_star: float | None = None) -> float:
    """Optimal minimum idea quality in the sample-your-best-idea contest.

    Players draw ideas from ``ideas`` (support within [0, x_max]) at one draw
    per effort unit; only ideas above the standard count as innovations.
    The optimal standard is the idea quantile ``exp(-1/e*)`` with ``e*`` the
    optimal Tullock effort.
    """
    if e_star is None:
        e_star, _ = tullock_optimal(n)
    target = float(np.exp(-1.0 / e_star))
    if ideas._ppf is not None:
        return float(ideas.ppf(target))
    lo, hi = ideas.support
    if not np.isfinite(hi):
        hi = ideas.truncated_support()[1]
    return float(
        optimize.bisect(lambda x: float(ideas.cdf(x)) - target, lo, hi, xtol=1e-12)
    )


def patent_race_deadline(shock, n: int | None = None, e_star: float | None = None) -> float:
    """Optimal deadline for a patent race with multiplicative arrival times.

    ``shock`` is the additive-log shock distribution (or directly its mode);
    the deadline is ``exp(-mode) / e*``.  Gumbel shocks have mode zero, so
    the deadline is simply the reciprocal of the optimal effort.
    """
    if isinstance(shock, NoiseDistribution):
        mode = shock.find_modes().global_mode
    else:
        mode = float(shock)
    if e_star is None:
        if n is None:
            raise ValueError("pass n to derive the optimal effort, or e_star directly")
        e_star, _ = tullock_optimal(n)
    return float(np.exp(-mode) / e_star)
