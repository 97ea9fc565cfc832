"""SE/EE trade-off fronts for the three antenna layouts in a 150-UE cell.

For each layout the simulated channels feed the power optimizer at every theta,
and the script prints where each algorithm's front starts and ends.

    python3 demos/tradeoff_front.py
"""

from setsim import AntennaMode, ScenarioConfig, run


def main():
    for mode in AntennaMode:
        cfg = ScenarioConfig(num_ues=150, antenna_mode=mode)
        print(f"\n{mode.value}")
        for alg in ("SET", "DRX"):
            front = run(cfg.replace(algorithm=alg)).tradeoff_series
            lo, hi = front[0], front[-1]
            print(f"  {alg}: theta=0 SE {lo.se_bits_hz:7.1f} EE {lo.ee_bits_hz_w:6.2f}"
                  f"   theta=1 SE {hi.se_bits_hz:7.1f} EE {hi.ee_bits_hz_w:6.2f}")


if __name__ == "__main__":
    main()
