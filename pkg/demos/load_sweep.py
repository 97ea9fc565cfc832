"""Sweep the cell from 10 to 100 UEs, write the CSVs and print the SET/DRX ratios.

    python3 demos/load_sweep.py [out_dir] [replicates]
"""

import sys

from setsim import ScenarioConfig, SweepVariable, emit_csv, sweep
from setsim.report import load_csv


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "demo_out/load_sweep"
    reps = int(sys.argv[2]) if len(sys.argv) > 2 else 1
    reports = sweep(ScenarioConfig(), SweepVariable.NUM_UES, range(10, 101, 10), replicates=reps, jobs=2)
    emit_csv(reports, out)
    print(f"wrote {out}/\n")
    print(f"{'UEs':>5}{'SE x':>8}{'delay x':>9}{'energy x':>10}{'life x':>8}")
    for row in load_csv(f"{out}/summary.csv"):
        print(f"{row['value']:5.0f}{row['se_ratio']:8.2f}{row['delay_ratio']:9.2f}"
              f"{row['energy_ratio']:10.2f}{row['lifetime_ratio']:8.2f}")


if __name__ == "__main__":
    main()
