"""Parameters and raw cost/profit functions of the platooning pricing game.

Units follow the usual trucking conventions: distances in km, velocities in
km/hr, money in an opaque currency unit (INR in the reference data), fuel in
litres. Every function here is pure; scenario records are frozen dataclasses
validated on construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

DEFAULT_EMISSION_FACTOR = 2.69  # kg CO2 per litre of diesel


class ScenarioError(ValueError):
    """A parameter record violates one of its invariants."""


def _require(cond: bool, name: str, bound: str) -> None:
    if not cond:
        raise ScenarioError(f"{name} must be {bound}")


def _positive(obj, *names: str) -> None:
    for name in names:
        _require(getattr(obj, name) > 0, name, "> 0")


def _non_negative(obj, *names: str) -> None:
    for name in names:
        _require(getattr(obj, name) >= 0, name, ">= 0")


@dataclass(frozen=True)
class AeroParams:
    frontal_area: float  # m^2
    drag_alone: float
    drag_platoon: float
    air_density: float  # kg/m^3
    fuel_density: float  # kg/m^3
    specific_fuel_consumption: float  # kg/kWh
    vehicle_efficiency: float  # km/L

    def __post_init__(self):
        _positive(self, *(f.name for f in fields(self)))

    @property
    def alpha(self) -> float:
        """Drag reduction ratio, platoon drag over solo drag."""
        return self.drag_platoon / self.drag_alone

    @property
    def drag_increase(self) -> bool:
        # alpha > 1 is allowed (sweeps vary it freely) but is not physical
        return self.drag_platoon > self.drag_alone


@dataclass(frozen=True)
class CostRates:
    fv_delay_rate: float  # per hr
    fuel_price: float  # per L
    fv_cognitive_rate: float  # per hr^2
    compute_rate: float  # per TB^2
    psp_delay_rate: float | None = None
    psp_cognitive_rate: float | None = None

    def __post_init__(self):
        # provider rates default to the follower's
        if self.psp_delay_rate is None:
            object.__setattr__(self, "psp_delay_rate", self.fv_delay_rate)
        if self.psp_cognitive_rate is None:
            object.__setattr__(self, "psp_cognitive_rate", self.fv_cognitive_rate)
        _non_negative(self, "fv_delay_rate", "psp_delay_rate", "fuel_price",
                      "psp_cognitive_rate", "compute_rate")
        _positive(self, "fv_cognitive_rate")


@dataclass(frozen=True)
class Kinematics:
    solo_velocity: float  # km/hr
    platoon_velocity: float  # km/hr
    trip_distance: float  # km

    def __post_init__(self):
        _positive(self, "solo_velocity", "platoon_velocity")
        _non_negative(self, "trip_distance")

    @property
    def beta(self) -> float:
        """Velocity ratio, platoon over solo."""
        return self.platoon_velocity / self.solo_velocity


@dataclass(frozen=True)
class ComputeLoad:
    total_load: float  # TB/km
    follower_share: float

    def __post_init__(self):
        _non_negative(self, "total_load", "follower_share")
        _require(self.follower_share <= 1, "follower_share", "<= 1")


@dataclass(frozen=True)
class SubsidyPolicy:
    follower_subsidy: float = 0.0  # per km
    provider_subsidy: float = 0.0  # per km

    def __post_init__(self):
        _non_negative(self, "follower_subsidy", "provider_subsidy")


@dataclass(frozen=True)
class Scenario:
    aero: AeroParams
    rates: CostRates
    kinematics: Kinematics
    load: ComputeLoad
    subsidy: SubsidyPolicy = field(default_factory=SubsidyPolicy)
    emission_factor: float = DEFAULT_EMISSION_FACTOR  # kg CO2 / L

    def __post_init__(self):
        _non_negative(self, "emission_factor")

    # shorthand used throughout the solvers
    @property
    def v(self) -> float:
        return self.kinematics.solo_velocity

    @property
    def v_p(self) -> float:
        return self.kinematics.platoon_velocity

    @property
    def D(self) -> float:
        return self.kinematics.trip_distance

    @property
    def beta(self) -> float:
        return self.kinematics.beta

    @property
    def alpha(self) -> float:
        return self.aero.alpha


def reference_scenario(total_load: float = 0.1, follower_subsidy: float = 50.0,
                       provider_subsidy: float = 50.0) -> Scenario:
    """The published reference parameter set.

    The published table gives no computational load, so ``total_load`` has to
    be chosen; 0.1 TB/km is the value used throughout this package's tests.
    Provider delay and cognitive rates equal the follower's.
    """
    return Scenario(
        aero=AeroParams(frontal_area=8.0, drag_alone=0.6, drag_platoon=0.42,
                        air_density=1.225, fuel_density=850.0,
                        specific_fuel_consumption=0.25, vehicle_efficiency=0.5),
        rates=CostRates(fv_delay_rate=150.0, fuel_price=105.0,
                        fv_cognitive_rate=180.0, compute_rate=400.0),
        kinematics=Kinematics(solo_velocity=60.0, platoon_velocity=42.0,
                              trip_distance=500.0),
        load=ComputeLoad(total_load=total_load, follower_share=0.5),
        subsidy=SubsidyPolicy(follower_subsidy, provider_subsidy),
    )


@dataclass(frozen=True)
class CostBreakdown:
    delay_alone: float
    fuel_alone: float
    cognitive_alone: float
    delay_platoon: float
    fuel_platoon: float
    compute_platoon: float
    service_fee_paid: float
    subsidy_received: float
    total: float

    @property
    def solo_part(self) -> float:
        return self.delay_alone + self.fuel_alone + self.cognitive_alone

    @property
    def platoon_part(self) -> float:
        return self.total - self.solo_part


def aero_constant(aero: AeroParams) -> float:
    """Fuel volume per km per (km/hr)^2 of speed, per unit drag coefficient."""
    return (0.5 * aero.air_density * aero.frontal_area * aero.specific_fuel_consumption
            / (3.6 ** 2 * aero.vehicle_efficiency * 1000.0 * aero.fuel_density))


def drag_cost_coefficient(s: Scenario) -> float:
    """Fuel cost per km per (km/hr)^2 when driving alone (T * C_df * c_f)."""
    return aero_constant(s.aero) * s.aero.drag_alone * s.rates.fuel_price


def follower_compute_cost_rate(s: Scenario) -> float:
    return 0.5 * s.rates.compute_rate * (s.load.follower_share * s.load.total_load) ** 2


def provider_compute_cost_rate(s: Scenario) -> float:
    return 0.5 * s.rates.compute_rate * ((1.0 - s.load.follower_share) * s.load.total_load) ** 2


def composite_g(s: Scenario) -> float:
    """Net per-km benefit of platooning to the follower, before fee and subsidy.

    Positive fuel saving, minus extra delay from the slower platoon, minus the
    follower's share of the compute cost.
    """
    beta = s.beta
    if beta == 0:
        raise ZeroDivisionError("velocity ratio is zero")
    fuel = drag_cost_coefficient(s) * s.v ** 2 * (1.0 - s.alpha * beta ** 2)
    delay = s.rates.fv_delay_rate / s.v * (1.0 - 1.0 / beta)
    return fuel + delay - follower_compute_cost_rate(s)


def _check_inputs(s: Scenario, d: float, fee: float) -> None:
    if not 0.0 <= d <= s.D:
        raise ValueError(f"distance {d!r} outside [0, {s.D!r}]")
    if fee < 0:
        raise ValueError(f"fee {fee!r} must be >= 0")


def follower_total(s: Scenario, d, fee):
    """Follower total trip cost; no range checks, works on numpy arrays."""
    r = s.rates
    T = aero_constant(s.aero)
    alone = s.D - d
    c_ind = (alone / s.v * r.fv_delay_rate
             + T * s.aero.drag_alone * s.v ** 2 * alone * r.fuel_price
             + r.fv_cognitive_rate * alone ** 2 / s.v ** 2)
    c_pla = (d / s.v_p * r.fv_delay_rate
             + T * s.aero.drag_platoon * s.v_p ** 2 * d * r.fuel_price
             + follower_compute_cost_rate(s) * d
             + d * fee
             - s.subsidy.follower_subsidy * d)
    return c_ind + c_pla


def follower_cost(s: Scenario, d: float, fee: float) -> CostBreakdown:
    """Itemised follower cost for platooning ``d`` of the ``D`` km trip at ``fee`` per km.

    Raises ValueError when ``d`` is outside [0, D] or the fee is negative;
    callers clamp, this function never does.
    """
    _check_inputs(s, d, fee)
    r = s.rates
    T = aero_constant(s.aero)
    alone = s.D - d
    parts = dict(
        delay_alone=alone / s.v * r.fv_delay_rate,
        fuel_alone=T * s.aero.drag_alone * s.v ** 2 * alone * r.fuel_price,
        cognitive_alone=r.fv_cognitive_rate * alone ** 2 / s.v ** 2,
        delay_platoon=d / s.v_p * r.fv_delay_rate,
        fuel_platoon=T * s.aero.drag_platoon * s.v_p ** 2 * d * r.fuel_price,
        compute_platoon=follower_compute_cost_rate(s) * d,
        service_fee_paid=d * fee,
    )
    subsidy = s.subsidy.follower_subsidy * d
    return CostBreakdown(**parts, subsidy_received=subsidy,
                         total=sum(parts.values()) - subsidy)


def provider_total(s: Scenario, d, fee):
    """Provider profit; no range checks, works on numpy arrays."""
    r = s.rates
    T = aero_constant(s.aero)
    return (fee * d + s.subsidy.provider_subsidy * d
            - r.psp_delay_rate * d / s.v_p
            - provider_compute_cost_rate(s) * d
            - r.psp_cognitive_rate * d ** 2 / s.v_p ** 2
            - T * s.aero.drag_alone * s.v_p ** 2 * d * r.fuel_price)


def provider_profit(s: Scenario, d: float, fee: float) -> float:
    """Provider profit from carrying the follower ``d`` km at ``fee`` per km."""
    _check_inputs(s, d, fee)
    return float(provider_total(s, d, fee))
