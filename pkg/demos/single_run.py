"""One SET run and one DRX run on the same 100-UE cell, side by side.

    python3 demos/single_run.py [num_ues]
"""

import sys

from setsim import ScenarioConfig, run


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 100
    cfg = ScenarioConfig(num_ues=n)
    print(f"{n} UEs, {cfg.sim_duration_s:g} s, {cfg.arrival_rate_pkts_per_s:g} pkt/s per UE, seed {cfg.rng_seed}\n")
    print(f"{'':10}{'SE':>10}{'delay ms':>10}{'energy J':>10}{'life s':>10}{'knee SE':>10}")
    for alg in ("SET", "DRX"):
        r = run(cfg.replace(algorithm=alg))
        print(f"{alg:10}{r.mean_se_bits_hz:10.3f}{r.mean_delay_ms:10.2f}{r.consumed_j:10.1f}"
              f"{r.lifetime_s:10.1f}{r.knee.se_bits_hz:10.1f}")
        share = {m: c / r.ttis for m, c in r.mode_ttis.items() if c}
        print(" " * 10 + "  ".join(f"{m} {s:.0%}" for m, s in share.items()))


if __name__ == "__main__":
    main()
