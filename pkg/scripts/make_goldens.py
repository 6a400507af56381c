"""Regenerate the golden CSVs under tests/golden from the scenario files.

Run only after an intentional output change; the test suite compares
against these files byte for byte.
"""

from pathlib import Path

from plaas.cli import main

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "tests" / "golden"
REFERENCE = str(ROOT / "scenarios" / "reference.txt")

COMMANDS = {
    "solve_reference.csv": ["solve", REFERENCE],
    "subsidy_reference.csv": ["subsidy", REFERENCE],
    "sweep_beta_reference.csv": ["sweep", REFERENCE, "--axis", "beta=0.5:0.9:3"],
    "sweep_beta_gamma_reference.csv": ["sweep", REFERENCE, "--axis", "beta=0.4:1.4:6",
                                       "--axis", "gamma_total=0:200:3"],
}


def main_():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name, argv in COMMANDS.items():
        path = GOLDEN / name
        code = main(argv + ["--csv", str(path)], out=open("/dev/null", "w"))
        if code != 0:
            raise SystemExit(f"{name}: exit {code}")
        print(f"wrote {path}")


if __name__ == "__main__":
    main_()
