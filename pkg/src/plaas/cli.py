"""Command line front end.

Scenario files hold one ``key = value`` per line; ``#`` starts a comment.
Keys (units as in :mod:`plaas.model`)::

    v v_p D                  solo / platoon velocity (km/hr), trip length (km)
    c_d c_f c_o c_c          follower delay, fuel, cognitive, compute rates
    c_d_psp c_o_psp          provider delay / cognitive rates (default: c_d / c_o)
    xi L_T                   follower compute share, total compute load (TB/km)
    gamma_f gamma_l          per-km subsidies to follower / provider
    A C_df C_dp              frontal area, solo / platoon drag coefficients
    rho_air rho_diesel       densities (kg/m^3)
    psi eta                  specific fuel consumption (kg/kWh), efficiency (km/L)
    phi                      kg CO2 per litre (default 2.69)

Exit codes: 0 success, 1 input error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, equilibrium as eqm, verify
from .model import (
    DEFAULT_EMISSION_FACTOR,
    AeroParams,
    ComputeLoad,
    CostRates,
    Kinematics,
    Scenario,
    ScenarioError,
    SubsidyPolicy,
)

REQUIRED_KEYS = ("v", "v_p", "D", "c_d", "c_f", "c_o", "c_c", "xi", "L_T", "gamma_f",
                 "gamma_l", "A", "C_df", "C_dp", "rho_air", "rho_diesel", "psi", "eta")
OPTIONAL_KEYS = ("c_d_psp", "c_o_psp", "phi")

SOLVE_COLUMNS = analysis.OUTPUTS
SUBSIDY_COLUMNS = ("case", "fee", "distance", "provider_profit", "follower_cost", "delta_co2")

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2


class ScenarioParseError(ValueError):
    pass


@dataclass
class ScenarioFile:
    path: str
    scenario: Scenario
    unknown_keys: list[str] = field(default_factory=list)


def _parse_pairs(text: str) -> tuple[dict[str, float], list[str]]:
    values: dict[str, float] = {}
    unknown: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ScenarioParseError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        try:
            number = float(value)
        except ValueError:
            raise ScenarioParseError(f"line {lineno}: value for {key!r} is not a number: {value!r}") from None
        if key in values:
            raise ScenarioParseError(f"line {lineno}: duplicate key {key!r}")
        if key not in REQUIRED_KEYS and key not in OPTIONAL_KEYS:
            unknown.append(key)
        values[key] = number
    return values, unknown


def _build_scenario(kv: dict[str, float]) -> Scenario:
    missing = sorted(k for k in REQUIRED_KEYS if k not in kv)
    if missing:
        raise ScenarioParseError(f"missing required key {missing[0]!r}")
    try:
        return Scenario(
            aero=AeroParams(frontal_area=kv["A"], drag_alone=kv["C_df"], drag_platoon=kv["C_dp"],
                            air_density=kv["rho_air"], fuel_density=kv["rho_diesel"],
                            specific_fuel_consumption=kv["psi"], vehicle_efficiency=kv["eta"]),
            rates=CostRates(fv_delay_rate=kv["c_d"], fuel_price=kv["c_f"],
                            fv_cognitive_rate=kv["c_o"], compute_rate=kv["c_c"],
                            psp_delay_rate=kv.get("c_d_psp"),
                            psp_cognitive_rate=kv.get("c_o_psp")),
            kinematics=Kinematics(solo_velocity=kv["v"], platoon_velocity=kv["v_p"],
                                  trip_distance=kv["D"]),
            load=ComputeLoad(total_load=kv["L_T"], follower_share=kv["xi"]),
            subsidy=SubsidyPolicy(kv["gamma_f"], kv["gamma_l"]),
            emission_factor=kv.get("phi", DEFAULT_EMISSION_FACTOR),
        )
    except ScenarioError as exc:
        raise ScenarioParseError(str(exc)) from None


def parse_scenario(text: str) -> Scenario:
    """Parse scenario file contents; unknown keys are ignored."""
    kv, _ = _parse_pairs(text)
    return _build_scenario(kv)


def load_scenario(path: str | Path) -> ScenarioFile:
    text = Path(path).read_text(encoding="utf-8")
    kv, unknown = _parse_pairs(text)
    return ScenarioFile(str(path), _build_scenario(kv), unknown)


def format_scenario(s: Scenario) -> str:
    """Scenario file text that parses back to ``s`` exactly."""
    a, r, k = s.aero, s.rates, s.kinematics
    pairs = [
        ("v", k.solo_velocity), ("v_p", k.platoon_velocity), ("D", k.trip_distance),
        ("c_d", r.fv_delay_rate), ("c_d_psp", r.psp_delay_rate), ("c_f", r.fuel_price),
        ("c_o", r.fv_cognitive_rate), ("c_o_psp", r.psp_cognitive_rate), ("c_c", r.compute_rate),
        ("xi", s.load.follower_share), ("L_T", s.load.total_load),
        ("gamma_f", s.subsidy.follower_subsidy), ("gamma_l", s.subsidy.provider_subsidy),
        ("A", a.frontal_area), ("C_df", a.drag_alone), ("C_dp", a.drag_platoon),
        ("rho_air", a.air_density), ("rho_diesel", a.fuel_density),
        ("psi", a.specific_fuel_consumption), ("eta", a.vehicle_efficiency),
        ("phi", s.emission_factor),
    ]
    return "".join(f"{key} = {float(value)!r}\n" for key, value in pairs)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return f"{float(value) + 0.0:.9g}"  # + 0.0 turns -0.0 into 0.0


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, path: str | None, out) -> None:
    if path and path != "-":
        Path(path).write_text(text, encoding="utf-8", newline="")
    else:
        out.write(text)


def _solve_row(s: Scenario):
    eq = eqm.solve_equilibrium(s)
    em = analysis.subsidy_emissions(s)
    return eq, em, dict(fee=eq.fee, total_fee=eq.total_fee, distance=eq.distance,
                        follower_cost=eq.follower_cost, solo_cost=eq.solo_baseline_cost,
                        provider_profit=eq.provider_profit, delta_co2=em.delta_co2,
                        regime=eq.fee_regime.value)


def _report(eq: eqm.Equilibrium, em: analysis.EmissionsReport) -> str:
    lines = [
        f"regime                 {eq.fee_regime.value}",
        f"service fee            {eq.fee:.4f} INR/km  ({eq.total_fee:.2f} INR for the trip)",
        f"platooned distance     {eq.distance:.4f} km",
        f"follower cost, solo    {eq.solo_baseline_cost:.2f} INR",
        f"follower cost, at eq.  {eq.follower_cost:.2f} INR",
        f"provider profit        {eq.provider_profit:.2f} INR",
        f"CO2 saved by subsidies {em.delta_co2:.6f} kg"
        + ("" if em.closed_form_applicable else "  (direct difference)"),
    ]
    return "\n".join(lines) + "\n"


def verify_solution(s: Scenario, fee_grid_step: float = 1e-3, tol: float = 1e-9) -> list[str]:
    """Run both KKT certificates and the brute-force oracle; return failure messages."""
    eq = eqm.solve_equilibrium(s)
    failures = []
    br = eqm.follower_best_response(s, eq.fee)
    if not verify.check_follower_kkt(s, eq.fee, br, tol).passed:
        failures.append("follower KKT certificate failed")
    if not verify.check_provider_kkt(s, eq, tol).passed:
        failures.append("provider KKT certificate failed")
    oracle = verify.brute_force_equilibrium(s, fee_grid_step)
    slope = s.v ** 2 / (2.0 * s.rates.fv_cognitive_rate)
    if abs(oracle.fee - eq.fee) > fee_grid_step * (1 + 1e-9):
        failures.append(f"oracle fee {oracle.fee:.6f} vs closed form {eq.fee:.6f}")
    if abs(oracle.distance - eq.distance) > slope * fee_grid_step * (1 + 1e-9):
        failures.append(f"oracle distance {oracle.distance:.6f} vs closed form {eq.distance:.6f}")
    if eq.provider_profit < oracle.profit - 1e-6 * abs(oracle.profit):
        failures.append(f"oracle profit {oracle.profit:.6f} beats closed form {eq.provider_profit:.6f}")
    return failures


def cmd_solve(args, out, err) -> int:
    s = load_scenario(args.scenario).scenario
    eq, em, row = _solve_row(s)
    out.write(_report(eq, em))
    if args.csv:
        _emit(write_csv(SOLVE_COLUMNS, [[row[c] for c in SOLVE_COLUMNS]]), args.csv, out)
    if args.verify:
        failures = verify_solution(s)
        for msg in failures:
            err.write(f"verification: {msg}\n")
        if failures:
            return EXIT_VERIFY
        out.write("verification passed\n")
    return EXIT_OK


def cmd_verify(args, out, err) -> int:
    s = load_scenario(args.scenario).scenario
    failures = verify_solution(s, args.step)
    for msg in failures:
        err.write(f"verification: {msg}\n")
    if failures:
        return EXIT_VERIFY
    out.write("verification passed\n")
    return EXIT_OK


def cmd_subsidy(args, out, err) -> int:
    s = load_scenario(args.scenario).scenario
    q = eqm.subsidy_quadrant(s)
    fuel_none = analysis.trip_fuel(s, q.case_none.distance)
    rows = []
    for label, eq in q.items():
        saved = s.emission_factor * (fuel_none - analysis.trip_fuel(s, eq.distance))
        rows.append([label, eq.fee, eq.distance, eq.provider_profit, eq.follower_cost, saved])
    _emit(write_csv(SUBSIDY_COLUMNS, rows), args.csv, out)
    return EXIT_OK


def cmd_emissions(args, out, err) -> int:
    s = load_scenario(args.scenario).scenario
    em = analysis.subsidy_emissions(s)
    out.write(
        f"fuel, solo trip            {em.fuel_alone_trip:.6f} L\n"
        f"fuel, subsidised eq.       {em.fuel_mixed_trip:.6f} L\n"
        f"extra platooned distance   {em.delta_distance_subsidy:.4f} km\n"
        f"fuel saved                 {em.delta_fuel:.6f} L\n"
        f"CO2 saved                  {em.delta_co2:.6f} kg\n"
        f"closed form applicable     {'yes' if em.closed_form_applicable else 'no'}\n"
        f"CO2 saved (direct)         {em.direct_delta_co2:.6f} kg\n"
    )
    return EXIT_OK


def _parse_axis(text: str) -> tuple[str, list[float]]:
    name, sep, rng = text.partition("=")
    parts = rng.split(":")
    if not sep or len(parts) != 3:
        raise ScenarioParseError(f"axis {text!r} is not param=start:stop:count")
    if name not in analysis.PARAMETERS:
        raise ScenarioParseError(
            f"unknown sweep parameter {name!r}; valid: {', '.join(analysis.PARAMETERS)}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ScenarioParseError(f"axis {text!r} has a malformed range") from None
    if count < 1:
        raise ScenarioParseError(f"axis {text!r} needs at least one point")
    return name, [float(x) for x in np.linspace(start, stop, count)]


def cmd_sweep(args, out, err) -> int:
    s = load_scenario(args.scenario).scenario
    if not 1 <= len(args.axis) <= 2:
        raise ScenarioParseError("give --axis once or twice")
    axes = [_parse_axis(a) for a in args.axis]
    outputs = tuple(c.strip() for c in args.outputs.split(",")) if args.outputs else analysis.OUTPUTS
    try:
        spec = analysis.SweepSpec(s, axes[0], axes[1] if len(axes) > 1 else None, outputs,
                                  decouple_provider_delay=args.decouple_provider_delay,
                                  subsidy_split=args.subsidy_split)
        table = analysis.run_sweep(spec, workers=args.workers)
    except analysis.SweepError as exc:
        raise ScenarioParseError(f"invalid sweep point {exc}") from None
    except ValueError as exc:
        raise ScenarioParseError(str(exc)) from None
    _emit(write_csv(table.header, table.rows), args.csv, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="plaas",
        description="Stackelberg pricing for platooning as a service.",
        epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="equilibrium fee and distance",
                        description="CSV columns: " + ",".join(SOLVE_COLUMNS))
    sp.add_argument("scenario")
    sp.add_argument("--csv", metavar="PATH", help="also write a one-row CSV ('-' for stdout)")
    sp.add_argument("--verify", action="store_true",
                    help="check KKT certificates and the brute-force oracle (exit 2 on failure)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="KKT certificates and brute-force oracle only")
    sp.add_argument("scenario")
    sp.add_argument("--step", type=float, default=1e-3, help="oracle fee grid step")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("subsidy", help="four subsidy cases as CSV",
                        description="CSV columns: " + ",".join(SUBSIDY_COLUMNS))
    sp.add_argument("scenario")
    sp.add_argument("--csv", metavar="PATH")
    sp.set_defaults(func=cmd_subsidy)

    sp = sub.add_parser("emissions", help="fuel and CO2 saved by the subsidies")
    sp.add_argument("scenario")
    sp.set_defaults(func=cmd_emissions)

    sp = sub.add_parser("sweep", help="parameter sweep as CSV",
                        description="CSV columns: swept parameters, then outputs from "
                                    + ",".join(analysis.OUTPUTS))
    sp.add_argument("scenario")
    sp.add_argument("--axis", action="append", default=[], metavar="PARAM=START:STOP:COUNT",
                    help="one of " + ", ".join(analysis.PARAMETERS))
    sp.add_argument("--outputs", help="comma-separated output columns")
    sp.add_argument("--decouple-provider-delay", action="store_true",
                    help="c_d sweeps leave the provider's delay rate alone")
    sp.add_argument("--subsidy-split", type=float, default=0.5,
                    help="follower share of gamma_total (default 0.5)")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--csv", metavar="PATH")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if hasattr(args, "scenario"):
            for key in load_scenario(args.scenario).unknown_keys:
                err.write(f"warning: unknown key {key!r} ignored\n")
        return args.func(args, out, err)
    except (ScenarioParseError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
