"""Stackelberg pricing game for platooning as a service."""

from .analysis import SweepSpec, SweepTable, run_sweep, subsidy_emissions, trip_fuel
from .equilibrium import (
    BestResponse,
    Equilibrium,
    FeeRegime,
    Regime,
    follower_best_response,
    provider_interior_fee,
    solve_equilibrium,
    subsidy_quadrant,
)
from .model import Scenario, ScenarioError, reference_scenario

__all__ = [
    "BestResponse", "Equilibrium", "FeeRegime", "Regime", "Scenario", "ScenarioError",
    "SweepSpec", "SweepTable", "follower_best_response", "provider_interior_fee",
    "run_sweep", "solve_equilibrium", "subsidy_emissions", "subsidy_quadrant",
    "reference_scenario", "trip_fuel",
]
