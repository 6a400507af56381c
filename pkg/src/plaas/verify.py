"""Independent checks on the closed-form solutions.

Two kinds of evidence live here. KKT certificates re-derive the gradients
term by term from the raw cost definitions and report residuals for a given
candidate. The brute-force oracle searches a fee grid and solves the
follower's problem by bisection on a finite-difference gradient, touching
nothing but :func:`plaas.model.follower_total` and
:func:`plaas.model.provider_total`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import equilibrium as eqm
from .model import (
    AeroParams,
    ComputeLoad,
    CostRates,
    Kinematics,
    Scenario,
    SubsidyPolicy,
    aero_constant,
    follower_total,
    provider_profit,
    provider_total,
)


@dataclass(frozen=True)
class KktCertificate:
    stationarity_residual: float
    complementary_slackness_residuals: list[float] = field(default_factory=list)
    primal_violations: list[float] = field(default_factory=list)
    dual_violations: list[float] = field(default_factory=list)
    # absolute tolerances the residuals were held to, in the same order
    tolerances: dict[str, float] = field(default_factory=dict)
    passed: bool = False


def _certify(stationarity, cs, primal, dual, tol_stat, tol_cs, tol_primal, tol_dual):
    passed = (abs(stationarity) <= tol_stat
              and all(abs(r) <= tol_cs for r in cs)
              and all(v <= tol_primal for v in primal)
              and all(v <= tol_dual for v in dual))
    return KktCertificate(
        stationarity_residual=stationarity,
        complementary_slackness_residuals=list(cs),
        primal_violations=list(primal),
        dual_violations=list(dual),
        tolerances=dict(stationarity=tol_stat, complementary_slackness=tol_cs,
                        primal=tol_primal, dual=tol_dual),
        passed=passed,
    )


def _follower_gradient_terms(s: Scenario, d: float, fee: float) -> list[float]:
    # d/dd of each follower cost row, in table order
    r = s.rates
    T = aero_constant(s.aero)
    return [
        -r.fv_delay_rate / s.v,
        -T * s.aero.drag_alone * s.v ** 2 * r.fuel_price,
        -2.0 * r.fv_cognitive_rate * (s.D - d) / s.v ** 2,
        r.fv_delay_rate / s.v_p,
        T * s.aero.drag_platoon * s.v_p ** 2 * r.fuel_price,
        0.5 * r.compute_rate * (s.load.follower_share * s.load.total_load) ** 2,
        fee,
        -s.subsidy.follower_subsidy,
    ]


def check_follower_kkt(s: Scenario, fee: float, br: eqm.BestResponse,
                       tol: float = 1e-9) -> KktCertificate:
    """Certificate for ``br`` solving the follower's problem at ``fee``.

    ``tol`` is relative: gradient residuals are compared against ``tol`` times
    the sum of absolute gradient terms, distances against ``tol * max(1, D)``.
    A failing certificate is returned, not raised.
    """
    d, lam1, lam2 = br.distance, br.multiplier_low, br.multiplier_high
    terms = _follower_gradient_terms(s, d, fee)
    grad = math.fsum(terms)
    tol_grad = tol * max(1.0, sum(abs(t) for t in terms))
    tol_km = tol * max(1.0, s.D)
    return _certify(
        stationarity=grad - lam1 + lam2,
        cs=[lam1 * d, lam2 * (d - s.D)],
        primal=[-d, d - s.D],
        dual=[-lam1, -lam2],
        tol_stat=tol_grad,
        tol_cs=tol_grad * max(1.0, s.D),
        tol_primal=tol_km,
        tol_dual=tol_grad,
    )


def _provider_partials(s: Scenario, d: float, fee: float) -> tuple[float, list[float]]:
    """(d profit / d fee at fixed d, terms of d profit / d d at fixed fee)."""
    r = s.rates
    T = aero_constant(s.aero)
    return d, [
        fee,
        s.subsidy.provider_subsidy,
        -r.psp_delay_rate / s.v_p,
        -0.5 * r.compute_rate * ((1.0 - s.load.follower_share) * s.load.total_load) ** 2,
        -2.0 * r.psp_cognitive_rate * d / s.v_p ** 2,
        -T * s.aero.drag_alone * s.v_p ** 2 * r.fuel_price,
    ]


def _substituted_slope(s: Scenario, d: float, fee: float) -> tuple[float, float]:
    """Slope in the fee of profit along the interior follower response, and its scale."""
    # implicit function theorem on the follower's stationarity condition
    dd_dfee = -s.v ** 2 / (2.0 * s.rates.fv_cognitive_rate)
    direct, terms = _provider_partials(s, d, fee)
    slope = direct + math.fsum(terms) * dd_dfee
    scale = abs(direct) + sum(abs(t) for t in terms) * abs(dd_dfee)
    return slope, scale


def check_provider_kkt(s: Scenario, eq: eqm.Equilibrium, tol: float = 1e-9) -> KktCertificate:
    """Certificate for ``eq.fee`` maximising profit given the follower's response.

    Which system is checked depends on ``eq.fee_regime``: the fee >= 0
    system with multiplier ``psp_multiplier`` for interior and zero-fee
    equilibria, the 0 <= fee <= K system with ``boundary_multipliers`` for
    full participation (plus the sign of the slope just above K), and the
    sign of the slope just below the no-trade threshold for NoTrade.
    Every regime also checks that ``eq.distance`` is the follower's best
    response to ``eq.fee``.
    """
    fee, d = eq.fee, eq.distance
    br = eqm.follower_best_response(s, max(fee, 0.0))
    slope, scale = _substituted_slope(s, d, fee)
    tol_slope = tol * max(1.0, scale, s.D)
    tol_km = tol * max(1.0, s.D)
    tol_cs = tol_slope * max(1.0, abs(fee))
    primal = [-fee, abs(d - br.distance)]
    regime = eq.fee_regime

    if regime in (eqm.FeeRegime.INTERIOR_FEE, eqm.FeeRegime.CLAMPED_ZERO_FEE):
        theta = eq.psp_multiplier
        return _certify(slope + theta, [theta * fee], primal, [-theta],
                        tol_slope, tol_cs, tol_km, tol_slope)

    if regime is eqm.FeeRegime.CLAMPED_FULL:
        K = eqm.full_participation_threshold(s)
        mu1, mu2 = eq.boundary_multipliers or (0.0, 0.0)
        # with d pinned at D the profit is linear in the fee with slope D
        direct, _ = _provider_partials(s, d, fee)
        return _certify(direct + mu1 - mu2,
                        [mu1 * fee, mu2 * (K - fee)],
                        primal + [fee - K],
                        [-mu1, -mu2, slope],  # raising the fee past K must not pay
                        tol_slope, tol_cs, tol_km, tol_slope)

    # NoTrade: profit is flat at zero above the no-trade threshold and must
    # not rise when approaching it from below
    N = eqm.no_trade_threshold(s)
    dual = []
    if N > 0 and s.D > 0:
        left_slope, left_scale = _substituted_slope(s, 0.0, min(fee, N))
        dual.append(-left_slope)
        tol_slope = tol * max(1.0, left_scale, s.D)
    return _certify(0.0, [], primal + [d], dual, tol_slope, tol_cs, tol_km, tol_slope)


@dataclass(frozen=True)
class Curvature:
    follower: float  # d^2 cost / dd^2
    provider: float  # d^2 profit / dfee^2 along the interior response


def check_convexity(s: Scenario) -> Curvature:
    """Curvatures of the follower cost in distance and the substituted profit in fee.

    Raises ArithmeticError if the follower problem is not convex or the
    provider problem is not concave, which cannot happen for a valid scenario.
    """
    a = s.v ** 2 / (2.0 * s.rates.fv_cognitive_rate)
    follower = 2.0 * s.rates.fv_cognitive_rate / s.v ** 2
    provider = -2.0 * a - 2.0 * s.rates.psp_cognitive_rate * a ** 2 / s.v_p ** 2
    if follower < 0 or provider > 0:
        raise ArithmeticError(f"wrong curvature signs: {follower}, {provider}")
    return Curvature(follower, provider)


@dataclass(frozen=True)
class OracleResult:
    fee: float
    distance: float
    profit: float
    fee_grid_step: float


def _follower_slope(s: Scenario, d, fees, h: float):
    # central difference of a quadratic is exact up to rounding for any h
    return (follower_total(s, d + h, fees) - follower_total(s, d - h, fees)) / (2.0 * h)


def follower_response_by_bisection(s: Scenario, fees, iterations: int = 200):
    """Follower's cost-minimising distance for each fee, found by bisection.

    Uses only finite differences of the follower's total cost: the slope in
    distance is increasing, so the minimiser is 0 where the slope at 0 is
    non-negative, D where the slope at D is non-positive, and the root of the
    slope otherwise.
    """
    fees = np.atleast_1d(np.asarray(fees, dtype=float))
    D = s.D
    if D == 0:
        return np.zeros_like(fees)
    h = D
    lo = np.zeros_like(fees)
    hi = np.full_like(fees, D)
    at_zero = _follower_slope(s, lo, fees, h) >= 0
    at_full = _follower_slope(s, hi, fees, h) <= 0
    active = ~(at_zero | at_full)
    lo_a, hi_a, f_a = lo[active], hi[active], fees[active]
    for _ in range(iterations):
        mid = 0.5 * (lo_a + hi_a)
        done = (mid <= lo_a) | (mid >= hi_a)
        if done.all():
            break
        up = _follower_slope(s, mid, f_a, h) > 0
        hi_a = np.where(up, mid, hi_a)
        lo_a = np.where(up, lo_a, mid)
    d = np.where(at_full, D, 0.0)
    d[active] = 0.5 * (lo_a + hi_a)
    return d


def brute_force_equilibrium(s: Scenario, fee_grid_step: float = 1e-3,
                            margin: float = 1.0) -> OracleResult:
    """Grid search over fees with a bisection inner solve for the follower.

    The grid runs from 0 to the first fee at which the follower's slope at
    d = 0 turns non-negative, plus ``margin``. Ties go to the lowest fee.
    """
    if not fee_grid_step > 0:
        raise ValueError("fee_grid_step must be > 0")
    h = max(s.D, 1.0)
    # slope at d = 0 is affine in the fee with unit coefficient
    slope0 = float(_follower_slope(s, 0.0, 0.0, h))
    upper = max(0.0, -slope0) + margin
    if not math.isfinite(upper):
        raise ValueError(f"fee grid upper bound is not finite: {upper}")
    n = int(math.floor(upper / fee_grid_step)) + 1
    fees = fee_grid_step * np.arange(n)
    d = follower_response_by_bisection(s, fees)
    profits = provider_total(s, d, fees)
    i = int(np.argmax(profits))
    fee, dist = float(fees[i]), float(min(max(d[i], 0.0), s.D))
    return OracleResult(fee, dist, provider_profit(s, dist, fee), fee_grid_step)


def random_scenario(rng: np.random.Generator) -> Scenario:
    """Draw a valid scenario for randomised checks.

    Money rates are log-uniform; the velocity ratio is uniform on [0.3, 1.5]
    and the compute load on [0, 0.5] TB/km. Cognitive rates stay at or above
    10, far from the singular value 0. Provider rates vary independently of
    the follower's.
    """
    def logu(lo, hi):
        return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))

    v = float(rng.uniform(40.0, 100.0))
    beta = float(rng.uniform(0.3, 1.5))
    drag_alone = float(rng.uniform(0.4, 0.8))
    c_d = logu(10.0, 400.0)
    c_o = logu(20.0, 400.0)
    return Scenario(
        aero=AeroParams(
            frontal_area=float(rng.uniform(5.0, 11.0)),
            drag_alone=drag_alone,
            drag_platoon=drag_alone * float(rng.uniform(0.4, 1.0)),
            air_density=float(rng.uniform(1.1, 1.3)),
            fuel_density=float(rng.uniform(820.0, 860.0)),
            specific_fuel_consumption=float(rng.uniform(0.2, 0.3)),
            vehicle_efficiency=float(rng.uniform(0.3, 3.0)),
        ),
        rates=CostRates(
            fv_delay_rate=c_d,
            fuel_price=logu(50.0, 150.0),
            fv_cognitive_rate=c_o,
            compute_rate=logu(50.0, 1000.0),
            psp_delay_rate=c_d * logu(0.5, 2.0),
            psp_cognitive_rate=c_o * logu(0.5, 2.0),
        ),
        kinematics=Kinematics(solo_velocity=v, platoon_velocity=beta * v,
                              trip_distance=float(rng.uniform(20.0, 600.0))),
        load=ComputeLoad(total_load=float(rng.uniform(0.0, 0.5)),
                         follower_share=float(rng.uniform(0.0, 1.0))),
        subsidy=SubsidyPolicy(float(rng.uniform(0.0, 30.0)), float(rng.uniform(0.0, 30.0))),
    )
