"""Fuel and CO2 accounting, and parameter sweeps over equilibrium outputs."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from . import equilibrium as eqm
from .model import Scenario, ScenarioError, aero_constant


def trip_fuel(s: Scenario, d: float) -> float:
    """Litres burnt by the follower over the whole trip when platooning ``d`` km."""
    if not 0.0 <= d <= s.D:
        raise ValueError(f"distance {d!r} outside [0, {s.D!r}]")
    per_km_alone = aero_constant(s.aero) * s.aero.drag_alone * s.v ** 2
    return per_km_alone * (s.D - d) + per_km_alone * s.alpha * s.beta ** 2 * d


@dataclass(frozen=True)
class EmissionsReport:
    fuel_alone_trip: float  # L, whole trip driven solo
    fuel_mixed_trip: float  # L, at the subsidised equilibrium distance
    delta_distance_subsidy: float  # km
    delta_fuel: float  # L saved by the subsidies
    delta_co2: float  # kg
    closed_form_applicable: bool
    direct_delta_fuel: float  # from the two solved equilibria
    direct_delta_co2: float


def subsidy_distance_gain(s: Scenario) -> float:
    """Extra platooned km induced by both subsidies when both equilibria are interior."""
    k = (s.rates.psp_cognitive_rate / s.rates.fv_cognitive_rate) / s.beta ** 2
    gamma = s.subsidy.follower_subsidy + s.subsidy.provider_subsidy
    return eqm.distance_per_fee(s) * gamma / (2.0 + k)


def fuel_saving_per_km(s: Scenario) -> float:
    """Litres saved per km moved from solo driving into the platoon."""
    return aero_constant(s.aero) * s.aero.drag_alone * s.v ** 2 * (1.0 - s.alpha * s.beta ** 2)


def subsidy_emissions(s: Scenario) -> EmissionsReport:
    """Fuel and CO2 saved by the scenario's subsidies, relative to none.

    The closed form holds only when both the subsidised and unsubsidised
    equilibria have an interior fee; otherwise the reported deltas are the
    direct differences between the two solved equilibria.
    """
    q = eqm.subsidy_quadrant(s)
    d_none, d_both = q.case_none.distance, q.case_both.distance
    direct_fuel = trip_fuel(s, d_none) - trip_fuel(s, d_both)
    applicable = (q.case_none.fee_regime is eqm.FeeRegime.INTERIOR_FEE
                  and q.case_both.fee_regime is eqm.FeeRegime.INTERIOR_FEE)
    if applicable:
        dd = subsidy_distance_gain(s)
        dfuel = fuel_saving_per_km(s) * dd
    else:
        dd, dfuel = d_both - d_none, direct_fuel
    return EmissionsReport(
        fuel_alone_trip=trip_fuel(s, 0.0),
        fuel_mixed_trip=trip_fuel(s, d_both),
        delta_distance_subsidy=dd,
        delta_fuel=dfuel,
        delta_co2=s.emission_factor * dfuel,
        closed_form_applicable=applicable,
        direct_delta_fuel=direct_fuel,
        direct_delta_co2=s.emission_factor * direct_fuel,
    )


def alternative_co2_reduction(s: Scenario) -> float:
    """CO2 saving with the extra platoon drag factor alpha*beta^2 applied.

    Not derived from the fuel model used elsewhere; kept for comparison with
    published figures that carry this factor.
    """
    return s.alpha * s.beta ** 2 * s.emission_factor * fuel_saving_per_km(s) * subsidy_distance_gain(s)


PARAMETERS = ("beta", "alpha", "c_d", "gamma_f", "gamma_l", "gamma_total", "xi", "L_T", "D")
OUTPUTS = ("fee", "total_fee", "distance", "follower_cost", "solo_cost",
           "provider_profit", "delta_co2", "regime")


class SweepError(ValueError):
    def __init__(self, parameter: str, value: float, reason: str):
        super().__init__(f"{parameter}={value!r}: {reason}")
        self.parameter = parameter
        self.value = value


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    axis1: tuple[str, Sequence[float]]
    axis2: tuple[str, Sequence[float]] | None = None
    outputs: tuple[str, ...] = OUTPUTS
    # a c_d sweep moves the provider's delay rate too unless decoupled
    decouple_provider_delay: bool = False
    # follower share of a gamma_total value
    subsidy_split: float = 0.5

    def __post_init__(self):
        for axis in (self.axis1, self.axis2):
            if axis is None:
                continue
            name, values = axis
            if name not in PARAMETERS:
                raise ValueError(f"unknown parameter {name!r}; valid: {', '.join(PARAMETERS)}")
            if len(values) == 0:
                raise ValueError(f"axis {name!r} has no points")
        for col in self.outputs:
            if col not in OUTPUTS:
                raise ValueError(f"unknown output {col!r}; valid: {', '.join(OUTPUTS)}")
        if not 0.0 <= self.subsidy_split <= 1.0:
            raise ValueError("subsidy_split must lie in [0, 1]")

    @property
    def axes(self):
        return [a for a in (self.axis1, self.axis2) if a is not None]


@dataclass(frozen=True)
class SweepTable:
    header: list[str]
    rows: list[tuple] = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [row[i] for row in self.rows]


def substitute(s: Scenario, parameter: str, value: float, *,
               decouple_provider_delay: bool = False, subsidy_split: float = 0.5) -> Scenario:
    """Copy of ``s`` with one sweep parameter set to ``value``.

    beta moves the platoon velocity with the solo velocity fixed; alpha moves
    the platoon drag with the solo drag fixed.
    """
    rep = dataclasses.replace
    value = float(value)
    try:
        if value != value or value in (float("inf"), float("-inf")):
            raise ScenarioError("value must be finite")
        if parameter == "beta":
            return rep(s, kinematics=rep(s.kinematics, platoon_velocity=value * s.v))
        if parameter == "alpha":
            return rep(s, aero=rep(s.aero, drag_platoon=value * s.aero.drag_alone))
        if parameter == "c_d":
            psp = s.rates.psp_delay_rate if decouple_provider_delay else value
            return rep(s, rates=rep(s.rates, fv_delay_rate=value, psp_delay_rate=psp))
        if parameter == "gamma_f":
            return eqm.with_subsidy(s, value, s.subsidy.provider_subsidy)
        if parameter == "gamma_l":
            return eqm.with_subsidy(s, s.subsidy.follower_subsidy, value)
        if parameter == "gamma_total":
            return eqm.with_subsidy(s, subsidy_split * value, (1.0 - subsidy_split) * value)
        if parameter == "xi":
            return rep(s, load=rep(s.load, follower_share=value))
        if parameter == "L_T":
            return rep(s, load=rep(s.load, total_load=value))
        if parameter == "D":
            return rep(s, kinematics=rep(s.kinematics, trip_distance=value))
    except ScenarioError as exc:
        raise SweepError(parameter, value, str(exc)) from None
    raise ValueError(f"unknown parameter {parameter!r}; valid: {', '.join(PARAMETERS)}")


def _outputs(s: Scenario) -> dict:
    eq = eqm.solve_equilibrium(s)
    return dict(
        fee=eq.fee,
        total_fee=eq.total_fee,
        distance=eq.distance,
        follower_cost=eq.follower_cost,
        solo_cost=eq.solo_baseline_cost,
        provider_profit=eq.provider_profit,
        delta_co2=subsidy_emissions(s).delta_co2,
        regime=eq.fee_regime.value,
    )


def _grid(spec: SweepSpec):
    name1, values1 = spec.axis1
    if spec.axis2 is None:
        return [((v1,), [(name1, v1)]) for v1 in values1]
    name2, values2 = spec.axis2
    return [((v1, v2), [(name1, v1), (name2, v2)]) for v1 in values1 for v2 in values2]


def _point_scenario(spec: SweepSpec, assignments) -> Scenario:
    s = spec.base
    for name, value in assignments:
        s = substitute(s, name, value, decouple_provider_delay=spec.decouple_provider_delay,
                       subsidy_split=spec.subsidy_split)
    return s


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    """Solve the equilibrium at every grid point, axis1-major.

    All substitutions are validated before any solve, so an invalid point
    aborts the sweep with a SweepError naming it. With ``workers > 1`` the
    solves run in a process pool; row order is unaffected.
    """
    grid = _grid(spec)
    scenarios = [_point_scenario(spec, assignments) for _, assignments in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_outputs, scenarios))
    else:
        results = [_outputs(s) for s in scenarios]
    header = [name for name, _ in spec.axes] + list(spec.outputs)
    rows = [tuple(float(v) for v in values) + tuple(out[c] for c in spec.outputs)
            for (values, _), out in zip(grid, results)]
    return SweepTable(header, rows)
