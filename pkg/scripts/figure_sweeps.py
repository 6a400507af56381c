"""Write the sensitivity sweeps behind the figure families as CSV tables.

    python3 scripts/figure_sweeps.py [--out sweeps/] [--workers 4]

One file per family, all on the reference scenario in scenarios/reference.txt.
"""

import argparse
from pathlib import Path

import numpy as np

from plaas.analysis import SweepSpec, run_sweep, substitute
from plaas.cli import load_scenario, write_csv
from plaas.equilibrium import with_subsidy

ROOT = Path(__file__).resolve().parent.parent


def families(base):
    unsub = with_subsidy(base, 0.0, 0.0)
    betas = list(np.linspace(0.3, 1.7, 20))
    return {
        # distance and fee against the velocity ratio, with and without subsidies
        "beta.csv": SweepSpec(base, ("beta", betas)),
        "beta_unsubsidised.csv": SweepSpec(unsub, ("beta", betas)),
        # surface over drag ratio and velocity ratio
        "alpha_beta.csv": SweepSpec(base, ("alpha", list(np.linspace(0.4, 1.0, 13))),
                                    ("beta", list(np.linspace(0.4, 1.4, 11))),
                                    outputs=("fee", "distance", "regime")),
        # velocity ratio against the follower's delay rate
        "beta_delay.csv": SweepSpec(base, ("beta", list(np.linspace(0.4, 1.4, 11))),
                                    ("c_d", [0.0, 50.0, 100.0, 150.0, 200.0]),
                                    outputs=("fee", "distance", "regime")),
        # CO2 saved against the velocity ratio for several total subsidies
        "beta_subsidy_co2.csv": SweepSpec(base, ("gamma_total", [0.0, 50.0, 100.0, 150.0, 200.0]),
                                          ("beta", list(np.linspace(0.3, 1.7, 29))),
                                          outputs=("distance", "delta_co2", "regime")),
        # delay rate at unit velocity ratio; the provider's rate is held fixed
        "delay_unit_beta.csv": SweepSpec(substitute(base, "beta", 1.0),
                                         ("c_d", list(np.linspace(0.0, 300.0, 13))),
                                         outputs=("fee", "distance", "regime"),
                                         decouple_provider_delay=True),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scenario", default=str(ROOT / "scenarios" / "reference.txt"))
    p.add_argument("--out", default="sweeps")
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = load_scenario(args.scenario).scenario
    for name, spec in families(base).items():
        table = run_sweep(spec, workers=args.workers)
        (out / name).write_text(write_csv(table.header, table.rows), encoding="utf-8", newline="")
        print(f"{out / name}: {len(table.rows)} rows")


if __name__ == "__main__":
    main()
