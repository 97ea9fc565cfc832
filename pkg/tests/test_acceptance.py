"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (collected by conftest and repeated
in the terminal summary) and then asserts on the same condition.
"""

import filecmp
import math
import time

import numpy as np
import pytest

from conftest import VERDICTS
from schedules import SCHEDULES, expand, schedule_config, schedule_trace
from setsim.cli import main
from setsim.config import AntennaMode, ScenarioConfig
from setsim.energy import total_traffic_energy
from setsim.engine import World, run
from setsim.optimizer import (ChannelContext, PowerAllocation, ee, mop_dominates, optimize_power, pareto_sweep,
                              se_total, se_user, sop)
from setsim.radio import ChannelSnapshot, sinr
from setsim.report import OUTPUT_FILES, SweepVariable, emit_csv, load_csv, sweep
from setsim.sleep import fec, iec

P_MAX = 20.0
USERS = list(range(10, 101, 10))


def verdict(num, title, ok, detail=""):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
    VERDICTS.append(line)
    print(line)
    assert ok, line


def close(a, b):
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-15)


def test_criterion_1_equation_examples():
    t0 = time.perf_counter()
    x, pn = 2.5e-9, 1.7e-9
    alloc4 = PowerAllocation((1.0, 1.0), (1.0, 1.0), 5.0)
    checks = [
        close(iec(50.0, 50.0, 20.0), 0.0), close(iec(50.0, 0.0, 20.0), 20.0), close(iec(100.0, 25.0, 20.0), 15.0),
        close(fec(1.0, 20.0, 2.0), 20.0), close(fec(0.0, 20.0, 2.0), 2.0), close(fec(0.5, 20.0, 2.0), 11.0),
        close(se_user(0.0), 0.0), close(se_user(1.0), 1.0), close(se_user(3.0), 2.0),
        close(se_total([0.0, 0.0, 0.0]), 0.0), close(se_total([1.0, 3.0]), 3.0),
        close(se_total([0.4, 7.0]), se_total([7.0, 0.4])),
        close(ee(2.0, alloc4), 0.5), close(ee(0.0, alloc4), 0.0), close(ee(1.7, alloc4) * alloc4.total_power_w, 1.7),
        close(sop(2.0, 1.0, 1.0), 2.0), close(sop(2.0, 1.0, 0.0), 1.0), close(sop(2.0, 1.0, 0.5), 1.5),
        close(total_traffic_energy(0, 2.0, 3.0), 0.0), close(total_traffic_energy(1, 2.0, 3.0), 5.0),
        close(total_traffic_energy(10, 2.0, 3.0), 10 * total_traffic_energy(1, 2.0, 3.0)),
        close(sinr(2.0, ChannelSnapshot(0, 1.0, (), 2.0)), 1.0),
        close(se_user(sinr(2.0, ChannelSnapshot(0, 1.0, (), 2.0))), 1.0),
        close(sinr(1.0, ChannelSnapshot(0, 1.0, ((1.0, 1.0),), 1.0)), 0.5),
        # Term-by-term oracle for three equal interferers.
        close(sinr(x, ChannelSnapshot(0, 1.0, ((x, 1.0),) * 3, pn)), x / (x + x + x + pn)),
    ]
    elapsed = time.perf_counter() - t0
    verdict(1, "equation examples at 1e-9", all(checks) and elapsed < 1.0,
            f"{sum(checks)}/{len(checks)} examples, {elapsed * 1000:.1f} ms")


def _random_instance(rng, k):
    # SNR per watt spans cell-edge to cell-centre users; circuit power 0.1-5 W each.
    return 10.0 ** rng.uniform(-2, 2, k), rng.uniform(0.1, 5.0, k)


def test_criterion_2_optimizer_vs_grid_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = math.inf
    g1 = np.linspace(0.0, P_MAX, 100_000)
    for _ in range(20):
        a, c = _random_instance(rng, 1)
        theta = rng.uniform()
        se = np.log2(1.0 + a[0] * g1)
        oracle = float(np.max(theta * se + (1 - theta) * se / (g1 + c[0])))
        got = optimize_power(theta, ChannelContext.from_snr_per_watt(a), P_MAX, c).sop_value
        worst = min(worst, got - oracle)
    g2 = np.linspace(0.0, P_MAX, 200)
    p1, p2 = np.meshgrid(g2, g2, indexing="ij")
    for _ in range(10):
        a, c = _random_instance(rng, 2)
        theta = rng.uniform()
        se = np.log2(1.0 + a[0] * p1) + np.log2(1.0 + a[1] * p2)
        oracle = float(np.max(theta * se + (1 - theta) * se / (p1 + p2 + c.sum())))
        got = optimize_power(theta, ChannelContext.from_snr_per_watt(a), P_MAX, c).sop_value
        worst = min(worst, got - oracle)
    elapsed = time.perf_counter() - t0
    verdict(2, "optimizer >= grid oracle - 1e-6", worst >= -1e-6 and elapsed < 30.0,
            f"worst margin {worst:+.3g}, {elapsed:.2f} s")


def test_criterion_3_pareto_properties():
    rng = np.random.default_rng(33)
    grid = [i / 20 for i in range(21)]
    violations = 0
    for _ in range(5):
        a, c = _random_instance(rng, 3)
        pts = pareto_sweep(grid, ChannelContext.from_snr_per_watt(a), P_MAX, c)
        se = [p.se_bits_hz for p in pts]
        e = [p.ee_bits_hz_w for p in pts]
        violations += sum(b < a_ - 1e-9 for a_, b in zip(se, se[1:]))
        violations += sum(b > a_ + 1e-9 for a_, b in zip(e, e[1:]))
        objs = [(p.se_bits_hz, p.ee_bits_hz_w) for p in pts]
        violations += sum(mop_dominates(p, q) for p in objs for q in objs)
    verdict(3, "SE nondecreasing, EE nonincreasing, no dominated points", violations == 0,
            f"{violations} violations over 5 x 21 points")


def test_criterion_4_hand_traced_schedules():
    counts = {"SET": 0, "DRX": 0}
    mismatches = []
    for name, s in SCHEDULES.items():
        rep = run(schedule_config(name), trace=schedule_trace(name), record_trace=True, with_tradeoff=False)
        counts[s["algorithm"]] += 1
        if rep.mode_trace != expand(s["runs"]):
            mismatches.append(name)
    ok = not mismatches and min(counts.values()) >= 3
    verdict(4, "hand-traced mode sequences match TTI by TTI", ok,
            f"{counts['SET']} SET + {counts['DRX']} DRX schedules, mismatches: {mismatches or 'none'}")


@pytest.fixture(scope="module")
def campaign(tmp_path_factory):
    """Non-congested 10..100 UE sweep, 5 seeds per point, shared traces across algorithms."""
    reports = sweep(ScenarioConfig(), SweepVariable.NUM_UES, USERS, replicates=5)
    out = tmp_path_factory.mktemp("campaign")
    emit_csv(reports, out)
    return reports, out


def test_criterion_5_directional_reproduction(campaign):
    reports, out = campaign
    bad = []
    for n in USERS:
        s, d = reports[("SET", n)], reports[("DRX", n)]
        if not s.mean_se_bits_hz > d.mean_se_bits_hz:
            bad.append(f"SE@{n}")
        if not s.mean_delay_ms < d.mean_delay_ms:
            bad.append(f"delay@{n}")
        if not s.consumed_j < d.consumed_j:
            bad.append(f"energy@{n}")
    ratios = [r["lifetime_ratio"] for r in load_csv(out / "summary.csv")]
    if not all(r > 1.5 for r in ratios):
        bad.append("lifetime")
    verdict(5, "SET beats DRX on SE, delay and energy; lifetime ratio > 1.5", not bad,
            f"lifetime ratio {min(ratios):.2f}-{max(ratios):.2f}, failures: {bad or 'none'}")


def _knee_se(cfg):
    return {alg: run(cfg.replace(algorithm=alg)).knee.se_bits_hz for alg in ("SET", "DRX")}


def test_criterion_6_tradeoff_knees():
    campaigns = {
        "non-congested omni": ScenarioConfig(num_ues=100),
        "congested omni": ScenarioConfig(num_ues=150),
        "congested sector120": ScenarioConfig(num_ues=150, antenna_mode=AntennaMode.SECTOR120),
    }
    knees = {name: _knee_se(cfg) for name, cfg in campaigns.items()}
    ok = all(k["SET"] > k["DRX"] for k in knees.values())
    detail = ", ".join(f"{n} {k['SET']:.1f} vs {k['DRX']:.1f}" for n, k in knees.items())
    verdict(6, "SET knee SE exceeds DRX knee SE", ok, detail)


def test_criterion_7_conservation_over_default_run():
    world = World(ScenarioConfig()).run()
    in_queue = sum(len(q) for q in world.queues)
    packets_ok = world._next_arrival == len([p for p in world.trace if p.arrival_time_ms < 100_000.0])
    packets_ok = packets_ok and world._next_arrival == world.delivered + in_queue
    led = world.ledger
    energy_ok = math.isclose(led.consumed_j + led.remaining_j, led.initial_j, rel_tol=1e-9)
    world.check_invariants()
    verdict(7, "packet and energy conservation over 100 s", packets_ok and energy_ok,
            f"{world._next_arrival} generated = {world.delivered} delivered + {in_queue} queued")


def _fig7_sweep(out):
    return main(["run", "--sweep", "num_ues=10:100:10", "--jobs", "4", "--out", str(out)])


@pytest.fixture(scope="module")
def fig7_runs(tmp_path_factory):
    """Two identical CLI invocations of the 20-cell sweep, the first one timed."""
    a, b = tmp_path_factory.mktemp("a"), tmp_path_factory.mktemp("b")
    t0 = time.perf_counter()
    codes = [_fig7_sweep(a)]
    elapsed = time.perf_counter() - t0
    codes.append(_fig7_sweep(b))
    return a, b, codes, elapsed


def test_criterion_8_determinism(fig7_runs):
    a, b, codes, _ = fig7_runs
    _, mismatch, errors = filecmp.cmpfiles(a, b, OUTPUT_FILES, shallow=False)
    same_listing = sorted(p.name for p in a.iterdir()) == sorted(p.name for p in b.iterdir())
    ok = codes == [0, 0] and not mismatch and not errors and same_listing
    verdict(8, "byte-identical output directories", ok,
            f"{len(OUTPUT_FILES)} files compared, mismatches: {mismatch or 'none'}")


def test_criterion_9_performance(fig7_runs):
    t0 = time.perf_counter()
    run(ScenarioConfig())
    single = time.perf_counter() - t0
    swept = fig7_runs[3]
    verdict(9, "default run < 60 s, 20-cell sweep with --jobs 4 < 600 s", single < 60.0 and swept < 600.0,
            f"run {single:.2f} s, sweep {swept:.2f} s")
