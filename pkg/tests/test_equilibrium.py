import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from oracles import (
    exhaustive_equilibrium,
    follower_argmin_exact,
    follower_argmin_grid,
    golden_stationary_fee,
)
from plaas.equilibrium import (
    FeeRegime,
    Regime,
    distance_per_fee,
    follower_best_response,
    follower_subsidy_bounds,
    full_participation_threshold,
    no_trade_threshold,
    profit_at_fee,
    provider_interior_fee,
    solve_equilibrium,
    subsidy_quadrant,
    with_subsidy,
)
from plaas.model import ComputeLoad, composite_g, provider_profit
from plaas.verify import random_scenario

seeds = st.integers(0, 2 ** 32 - 1)


def _scenario(seed):
    return random_scenario(np.random.default_rng(seed))


def test_best_response_zero_g_zero_fee(base):
    s = dataclasses.replace(
        base,
        kinematics=dataclasses.replace(base.kinematics, platoon_velocity=base.v),
        aero=dataclasses.replace(base.aero, drag_platoon=base.aero.drag_alone),
        load=ComputeLoad(0.0, 0.5),
    )
    s = with_subsidy(s, 0.0, 0.0)
    br = follower_best_response(s, 0.0)
    assert br.distance == s.D
    assert br.regime is Regime.CORNER_FULL
    assert br.multiplier_high == 0.0


def test_best_response_interior_reference(base):
    br = follower_best_response(base, 62.735)
    assert br.regime is Regime.INTERIOR
    assert br.multiplier_low == br.multiplier_high == 0.0
    # grid step is D / 1e6 = 5e-4 km
    assert br.distance == pytest.approx(follower_argmin_grid(base, 62.735), abs=5e-4)
    assert br.distance == pytest.approx(357.27, abs=5e-3)


def test_best_response_no_trade(base):
    N = composite_g(base) + 50.0 + 2 * 180 * 500 / 60 ** 2
    assert no_trade_threshold(base) == pytest.approx(N, rel=1e-14)
    br = follower_best_response(base, N + 1.0)
    assert br.distance == 0.0
    assert br.regime is Regime.CORNER_ZERO
    assert br.multiplier_low == pytest.approx(1.0, rel=1e-12)
    assert follower_argmin_grid(base, N + 1.0) == 0.0


def test_thresholds_differ_by_cognitive_span(base):
    gap = no_trade_threshold(base) - full_participation_threshold(base)
    assert gap == pytest.approx(2 * 180 * 500 / 60 ** 2, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(seed=seeds, u=st.floats(-0.2, 1.2))
def test_exactly_one_regime(seed, u):
    s = _scenario(seed)
    K, N = full_participation_threshold(s), no_trade_threshold(s)
    fee = max(0.0, K + u * (N - K))
    br = follower_best_response(s, fee)
    if br.regime is Regime.CORNER_FULL:
        assert br.distance == s.D and br.multiplier_low == 0 and br.multiplier_high >= 0
    elif br.regime is Regime.CORNER_ZERO:
        assert br.distance == 0 and br.multiplier_high == 0 and br.multiplier_low >= 0
    else:
        assert 0 < br.distance < s.D and br.multiplier_low == br.multiplier_high == 0
    assert br.distance == pytest.approx(float(follower_argmin_exact(s, fee)),
                                        rel=1e-9, abs=1e-9 * s.D)


def test_provider_interior_fee_reference(base, unsubsidised):
    assert provider_interior_fee(base) == pytest.approx(golden_stationary_fee(base, 20, 100), abs=1e-5)
    assert provider_interior_fee(unsubsidised) == pytest.approx(
        golden_stationary_fee(unsubsidised, 10, 60), abs=1e-5)
    assert provider_interior_fee(base) == pytest.approx(62.735, abs=5e-4)
    assert provider_interior_fee(unsubsidised) == pytest.approx(37.482, abs=5e-4)


def test_provider_subsidy_shifts_fee_linearly(base):
    b2 = base.beta ** 2
    shifted = with_subsidy(base, 50.0, 57.5)
    delta = provider_interior_fee(shifted) - provider_interior_fee(base)
    assert delta == pytest.approx(-7.5 / (2 + 1 / b2), rel=1e-9)


def test_solve_reference(base):
    eq = solve_equilibrium(base)
    assert eq.fee_regime is FeeRegime.INTERIOR_FEE
    fee, d, w = exhaustive_equilibrium(base)
    assert abs(eq.fee - fee) <= 1e-3
    assert abs(eq.distance - d) <= distance_per_fee(base) * 1e-3
    assert eq.provider_profit >= w - 1e-9 * abs(w)
    assert eq.fee == pytest.approx(62.735, abs=5e-4)
    assert eq.distance == pytest.approx(357.27, abs=5e-3)
    assert eq.psp_multiplier == 0.0 and eq.boundary_multipliers is None


def test_solve_zero_distance(base):
    s = dataclasses.replace(base, kinematics=dataclasses.replace(base.kinematics, trip_distance=0.0))
    eq = solve_equilibrium(s)
    assert (eq.fee, eq.distance, eq.provider_profit) == (0.0, 0.0, 0.0)
    assert eq.fee_regime is FeeRegime.NO_TRADE
    assert eq.follower_cost == 0.0


def test_solve_clamped_full_participation(base):
    s = with_subsidy(base, 10 * provider_interior_fee(base), 50.0)
    eq = solve_equilibrium(s)
    K = full_participation_threshold(s)
    assert eq.fee_regime is FeeRegime.CLAMPED_FULL
    assert eq.distance == s.D
    assert eq.fee == K
    assert eq.boundary_multipliers == (0.0, s.D)
    fee, d, w = exhaustive_equilibrium(s, fee_max=K + 50.0)
    assert abs(eq.fee - fee) <= 1e-3
    assert d == pytest.approx(s.D, abs=distance_per_fee(s) * 1e-3)
    assert eq.provider_profit >= w - 1e-9 * abs(w)


def test_solve_zero_fee_regime(base):
    # a provider subsidy big enough to push the stationary fee below zero
    s = with_subsidy(base, 0.0, 400.0)
    assert provider_interior_fee(s) < 0
    eq = solve_equilibrium(s)
    assert eq.fee_regime is FeeRegime.CLAMPED_ZERO_FEE
    assert eq.fee == 0.0 and eq.psp_multiplier > 0
    fee, d, w = exhaustive_equilibrium(s)
    assert fee == 0.0
    assert eq.distance == pytest.approx(d, rel=1e-9)
    assert eq.provider_profit >= w - 1e-9 * abs(w)


def test_solve_no_trade(base):
    # a provider whose own costs exceed anything the follower will pay
    s = dataclasses.replace(base, rates=dataclasses.replace(base.rates, psp_delay_rate=1e5))
    eq = solve_equilibrium(s)
    assert eq.fee_regime is FeeRegime.NO_TRADE
    assert eq.distance == 0.0 and eq.provider_profit == 0.0
    assert eq.fee == pytest.approx(no_trade_threshold(s))
    assert exhaustive_equilibrium(s)[2] <= 0.0


def test_quadrant_without_subsidies_is_constant(unsubsidised):
    q = subsidy_quadrant(unsubsidised)
    cases = [eq for _, eq in q.items()]
    assert all(c == cases[0] for c in cases)


def test_quadrant_reference(base):
    q = subsidy_quadrant(base)
    expected = {}
    for name, (gf, gl) in dict(none=(0, 0), follower_only=(50, 0),
                               provider_only=(0, 50), both=(50, 50)).items():
        expected[name] = exhaustive_equilibrium(with_subsidy(base, gf, gl))
    for name, eq in q.items():
        fee, d, w = expected[name]
        assert eq.fee_regime is FeeRegime.INTERIOR_FEE
        assert abs(eq.fee - fee) <= 1e-3, name
        assert abs(eq.distance - d) <= 10 * 1e-3, name
    assert q.case_none.distance == pytest.approx(109.80, abs=0.01)
    assert q.case_follower_only.distance == pytest.approx(233.54, abs=0.01)
    assert q.case_both.distance == pytest.approx(357.27, abs=0.01)


def test_quadrant_delta_identities(base):
    q = subsidy_quadrant(base)
    a = distance_per_fee(base)
    r = 2 + 1 / base.beta ** 2
    none = q.case_none
    gap = q.case_both.distance - none.distance
    assert gap == pytest.approx(a * 100 / r, rel=1e-9)
    assert gap == pytest.approx(247.475, abs=5e-4)
    assert q.case_follower_only.fee - none.fee == pytest.approx(50 * (1 + 1 / base.beta ** 2) / r, rel=1e-9)
    assert q.case_provider_only.fee - none.fee == pytest.approx(-50 / r, rel=1e-9)
    assert q.case_follower_only.distance - none.distance == pytest.approx(a * 50 / r, rel=1e-9)
    # searched equilibria agree to grid resolution
    searched = exhaustive_equilibrium(base)[1] - exhaustive_equilibrium(with_subsidy(base, 0, 0))[1]
    assert gap == pytest.approx(searched, abs=2 * a * 1e-3)


def test_subsidy_bounds_at_g(base):
    # G is negative in the reference scenario, so slow the platoon down
    s = dataclasses.replace(base, load=ComputeLoad(0.0, 0.5),
                            kinematics=dataclasses.replace(base.kinematics, platoon_velocity=60.0))
    g = composite_g(s)
    assert g > 0
    assert follower_subsidy_bounds(s, g) == (0.0, 0.0)
    assert follower_best_response(with_subsidy(s, 0.0, 0.0), g).distance == s.D


def test_subsidy_bounds_reference(base):
    lo, hi = follower_subsidy_bounds(base, 62.735)
    assert lo == pytest.approx(14.27, abs=5e-3)
    assert hi == pytest.approx(64.27, abs=5e-3)

    # oracle: bisection on the exact follower minimiser as gamma_f varies
    def d_at(gf):
        return float(follower_argmin_exact(with_subsidy(base, gf, 50.0), 62.735))

    eps = 1e-6
    lo_b = optimize.bisect(lambda g: d_at(g) - eps, 0.0, 40.0, xtol=1e-12)
    hi_b = optimize.bisect(lambda g: d_at(g) - (base.D - eps), 40.0, 100.0, xtol=1e-12)
    a = distance_per_fee(base)
    assert lo == pytest.approx(lo_b - eps / a, abs=1e-8)
    assert hi == pytest.approx(hi_b + eps / a, abs=1e-8)

    for gf in np.linspace(lo, hi, 7)[1:-1]:
        assert follower_best_response(with_subsidy(base, gf, 50.0), 62.735).regime is Regime.INTERIOR


def test_subsidy_bounds_empty(base):
    assert follower_subsidy_bounds(base, 0.0) == pytest.approx((0.0, -composite_g(base)))
    s = dataclasses.replace(base, load=ComputeLoad(0.0, 0.5),
                            kinematics=dataclasses.replace(base.kinematics, platoon_velocity=60.0))
    assert follower_subsidy_bounds(s, 0.5 * composite_g(s)) is None


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_fixed_point_and_grid_optimality(seed):
    s = _scenario(seed)
    eq = solve_equilibrium(s)
    assert follower_best_response(s, eq.fee).distance == eq.distance
    hi = max(no_trade_threshold(s), 0.0)
    grid = np.linspace(0.0, hi, 10_000)
    best_grid = max(profit_at_fee(s, float(f)) for f in grid)
    assert eq.provider_profit >= best_grid - 1e-9 * max(1.0, abs(best_grid))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, k=st.floats(0.1, 10.0))
def test_argmax_invariance_under_money_scaling(seed, k):
    s = _scenario(seed)
    r = s.rates
    scaled = dataclasses.replace(
        s,
        rates=dataclasses.replace(
            r, fv_delay_rate=k * r.fv_delay_rate, psp_delay_rate=k * r.psp_delay_rate,
            fuel_price=k * r.fuel_price, fv_cognitive_rate=k * r.fv_cognitive_rate,
            psp_cognitive_rate=k * r.psp_cognitive_rate, compute_rate=k * r.compute_rate),
    )
    scaled = with_subsidy(scaled, k * s.subsidy.follower_subsidy, k * s.subsidy.provider_subsidy)
    a, b = solve_equilibrium(s), solve_equilibrium(scaled)
    assert b.distance == pytest.approx(a.distance, rel=1e-9, abs=1e-9 * s.D)
    assert b.fee == pytest.approx(k * a.fee, rel=1e-9, abs=1e-9)
    assert b.provider_profit == pytest.approx(k * a.provider_profit, rel=1e-8, abs=1e-8)
    assert b.follower_cost == pytest.approx(k * a.follower_cost, rel=1e-9)


def test_participation_and_rationality_on_random_scenarios():
    rng = np.random.default_rng(20240601)
    for _ in range(1000):
        s = random_scenario(rng)
        eq = solve_equilibrium(s)
        assert 0 <= eq.distance <= s.D and eq.fee >= 0
        assert eq.follower_cost <= eq.solo_baseline_cost + 1e-9 * abs(eq.solo_baseline_cost)
        assert eq.provider_profit >= 0
        assert eq.provider_profit == provider_profit(s, eq.distance, eq.fee)
