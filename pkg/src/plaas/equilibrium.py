"""Closed-form best responses and the subgame-perfect equilibrium.

The follower's cost is a convex quadratic in the platooned distance, so its
best response to a fee is an affine function of the fee clipped to [0, D].
Substituting that response into the provider's profit gives a concave
piecewise quadratic in the fee, maximised here by comparing a small candidate
set (the unconstrained stationary fee and the two participation thresholds).

Multipliers are reported with the textbook sign conventions: for the
follower's minimisation ``grad - lambda_low + lambda_high = 0``; for the
provider's maximisation ``grad + theta = 0`` on ``fee >= 0`` and
``grad + mu_low - mu_high = 0`` on ``0 <= fee <= K``. All multipliers are
non-negative at an optimum.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

from .model import (
    CostBreakdown,
    Scenario,
    SubsidyPolicy,
    composite_g,
    drag_cost_coefficient,
    follower_cost,
    provider_compute_cost_rate,
    provider_total,
)

# fee-unit tolerance for classifying threshold boundaries
THRESHOLD_TOL = 1e-9


class Regime(str, enum.Enum):
    CORNER_ZERO = "CornerZero"
    INTERIOR = "Interior"
    CORNER_FULL = "CornerFull"


class FeeRegime(str, enum.Enum):
    INTERIOR_FEE = "InteriorFee"
    CLAMPED_FULL = "ClampedToFullParticipation"
    CLAMPED_ZERO_FEE = "ClampedToZeroFee"
    NO_TRADE = "NoTrade"


@dataclass(frozen=True)
class BestResponse:
    distance: float
    regime: Regime
    multiplier_low: float = 0.0
    multiplier_high: float = 0.0


@dataclass(frozen=True)
class Equilibrium:
    fee: float
    distance: float
    fee_regime: FeeRegime
    follower_breakdown: CostBreakdown
    provider_profit: float
    solo_baseline_cost: float
    psp_multiplier: float = 0.0
    boundary_multipliers: tuple[float, float] | None = None

    @property
    def total_fee(self) -> float:
        return self.fee * self.distance

    @property
    def follower_cost(self) -> float:
        return self.follower_breakdown.total


@dataclass(frozen=True)
class SubsidyQuadrant:
    case_none: Equilibrium
    case_follower_only: Equilibrium
    case_provider_only: Equilibrium
    case_both: Equilibrium

    def items(self):
        return [("none", self.case_none), ("follower_only", self.case_follower_only),
                ("provider_only", self.case_provider_only), ("both", self.case_both)]


def distance_per_fee(s: Scenario) -> float:
    """km of platooning given up per unit increase in the per-km fee (v^2 / 2c_o)."""
    return s.v ** 2 / (2.0 * s.rates.fv_cognitive_rate)


def full_participation_threshold(s: Scenario) -> float:
    """Fee at or below which the follower platoons the whole trip."""
    return composite_g(s) + s.subsidy.follower_subsidy


def no_trade_threshold(s: Scenario) -> float:
    """Fee at or above which the follower never joins."""
    return full_participation_threshold(s) + s.D / distance_per_fee(s)


def provider_margin(s: Scenario) -> float:
    """Provider's per-km income net of linear costs, excluding the fee."""
    return (s.subsidy.provider_subsidy
            - s.rates.psp_delay_rate / s.v_p
            - provider_compute_cost_rate(s)
            - drag_cost_coefficient(s) * s.v_p ** 2)


def _curvature_ratio(s: Scenario) -> float:
    # reduces to 1/beta^2 when provider and follower cognitive rates agree
    return (s.rates.psp_cognitive_rate / s.rates.fv_cognitive_rate) * (s.v / s.v_p) ** 2


def follower_gradient(s: Scenario, d: float, fee: float) -> float:
    """Derivative of the follower's total cost with respect to ``d``."""
    return fee - full_participation_threshold(s) - (s.D - d) / distance_per_fee(s)


def follower_best_response(s: Scenario, fee: float) -> BestResponse:
    if fee < 0:
        raise ValueError(f"fee {fee!r} must be >= 0")
    K = full_participation_threshold(s)
    N = no_trade_threshold(s)
    if fee <= K + THRESHOLD_TOL:
        return BestResponse(s.D, Regime.CORNER_FULL, 0.0, max(0.0, K - fee))
    if fee >= N - THRESHOLD_TOL:
        return BestResponse(0.0, Regime.CORNER_ZERO, max(0.0, fee - N), 0.0)
    d = s.D + distance_per_fee(s) * (K - fee)
    return BestResponse(d, Regime.INTERIOR)


def provider_interior_fee(s: Scenario) -> float:
    """Stationary fee of the provider's profit with the interior follower response.

    Unconstrained: may be negative, or fall outside the interior region.
    """
    k = _curvature_ratio(s)
    return (no_trade_threshold(s) * (1.0 + k) - provider_margin(s)) / (2.0 + k)


def substituted_profit_curvature(s: Scenario) -> float:
    """Second derivative in the fee of profit with the interior follower response."""
    return -distance_per_fee(s) * (2.0 + _curvature_ratio(s))


def profit_at_fee(s: Scenario, fee: float) -> float:
    """Provider profit when the follower best-responds to ``fee``."""
    br = follower_best_response(s, fee)
    return float(provider_total(s, br.distance, fee))


def _build(s: Scenario, fee: float, br: BestResponse, profit: float,
           regime: FeeRegime, theta: float = 0.0,
           mu: tuple[float, float] | None = None) -> Equilibrium:
    return Equilibrium(
        fee=fee,
        distance=br.distance,
        fee_regime=regime,
        follower_breakdown=follower_cost(s, br.distance, fee),
        provider_profit=profit,
        solo_baseline_cost=follower_cost(s, 0.0, fee).total,
        psp_multiplier=theta,
        boundary_multipliers=mu,
    )


def solve_equilibrium(s: Scenario) -> Equilibrium:
    """Provider's optimal fee and the follower's response to it."""
    if s.D == 0:
        return _build(s, 0.0, BestResponse(0.0, Regime.CORNER_ZERO), 0.0, FeeRegime.NO_TRADE)

    c_u = provider_interior_fee(s)
    K = full_participation_threshold(s)
    N = no_trade_threshold(s)
    candidates = sorted({c for c in (max(0.0, c_u), K, N, 0.0) if c >= 0})

    best = None
    for fee in candidates:
        br = follower_best_response(s, fee)
        profit = float(provider_total(s, br.distance, fee))
        # ties: larger distance, then smaller fee (candidates are ascending)
        key = (profit, br.distance)
        if best is None or key > best[0]:
            best = (key, fee, br)
    (profit, _), fee, br = best

    if br.distance == 0:
        return _build(s, fee, br, profit, FeeRegime.NO_TRADE)
    if br.regime is Regime.CORNER_FULL:
        # d/dfee of profit at d = D is D; fee >= 0 only binds when K == 0
        return _build(s, fee, br, profit, FeeRegime.CLAMPED_FULL, mu=(0.0, s.D))
    if fee == 0:
        theta = max(0.0, substituted_profit_curvature(s) * c_u)
        return _build(s, fee, br, profit, FeeRegime.CLAMPED_ZERO_FEE, theta=theta)
    return _build(s, fee, br, profit, FeeRegime.INTERIOR_FEE)


def with_subsidy(s: Scenario, follower: float, provider: float) -> Scenario:
    return dataclasses.replace(s, subsidy=SubsidyPolicy(follower, provider))


def subsidy_quadrant(s: Scenario) -> SubsidyQuadrant:
    """Equilibria with neither, either, or both of the scenario's subsidies switched on."""
    gf, gl = s.subsidy.follower_subsidy, s.subsidy.provider_subsidy
    return SubsidyQuadrant(
        case_none=solve_equilibrium(with_subsidy(s, 0.0, 0.0)),
        case_follower_only=solve_equilibrium(with_subsidy(s, gf, 0.0)),
        case_provider_only=solve_equilibrium(with_subsidy(s, 0.0, gl)),
        case_both=solve_equilibrium(with_subsidy(s, gf, gl)),
    )


def follower_subsidy_bounds(s: Scenario, fee: float) -> tuple[float, float] | None:
    """Range of follower subsidies keeping the best response inside [0, D] at ``fee``.

    The scenario's own follower subsidy is ignored. Returns None when even a
    zero subsidy already pushes the follower to full participation.
    """
    if fee < 0:
        raise ValueError(f"fee {fee!r} must be >= 0")
    g = composite_g(s)
    hi = fee - g
    if hi < 0:
        return None
    return max(0.0, hi - s.D / distance_per_fee(s)), hi
