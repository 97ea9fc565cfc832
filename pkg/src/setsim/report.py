"""Sweeps over UE count, arrival rate or theta, and the CSV datasets they produce."""

from __future__ import annotations

import csv
import enum
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .config import Algorithm, ScenarioConfig
from .engine import run
from .errors import CellError, DomainError, IoError, SetsimError

log = logging.getLogger(__name__)


class SweepVariable(str, enum.Enum):
    NUM_UES = "num_ues"
    ARRIVAL_RATE = "arrival_rate"
    THETA = "theta"

    @classmethod
    def parse(cls, text):
        key = text.strip().lower()
        aliases = {"numues": cls.NUM_UES, "users": cls.NUM_UES, "arrivalrate": cls.ARRIVAL_RATE,
                   "arrival_rate_pkts_per_s": cls.ARRIVAL_RATE, "rate": cls.ARRIVAL_RATE}
        for member in cls:
            if key == member.value:
                return member
        if key in aliases:
            return aliases[key]
        raise DomainError(f"unknown sweep variable {text!r}; use num_ues, arrival_rate or theta")


_VARIABLE_CODE = {SweepVariable.NUM_UES: 1, SweepVariable.ARRIVAL_RATE: 2, SweepVariable.THETA: 3}


def cell_config(cfg: ScenarioConfig, variable: SweepVariable, value, algorithm) -> ScenarioConfig:
    if variable is SweepVariable.NUM_UES:
        return cfg.replace(num_ues=int(value), algorithm=algorithm)
    if variable is SweepVariable.ARRIVAL_RATE:
        return cfg.replace(arrival_rate_pkts_per_s=float(value), algorithm=algorithm)
    return cfg.replace(theta_grid=(float(value),), algorithm=algorithm)


def cell_seed(base_seed, variable: SweepVariable, index, replicate=0):
    """Seed for one sweep cell. Depends on the swept value's position but not on
    the algorithm, so SET and DRX replay the same traffic and channels. Theta
    cells all share one simulation seed because theta does not affect the run."""
    if variable is SweepVariable.THETA:
        index = 0
    ss = np.random.SeedSequence([int(base_seed), _VARIABLE_CODE[variable], int(index), int(replicate)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _run_cell(job):
    algorithm, value, cfg, with_tradeoff = job
    try:
        return run(cfg, with_tradeoff=with_tradeoff)
    except SetsimError as exc:
        raise CellError(algorithm, value, exc) from exc


def combine_replicates(reports):
    """Average replicate runs of one cell. The trade-off series of the first replicate is kept."""
    first = reports[0]
    if len(reports) == 1:
        return first
    numeric = ("mean_se_bits_hz", "mean_delay_ms", "violation_count", "generated", "delivered", "in_queue",
               "bits_tx", "consumed_j", "remaining_j", "lifetime_s", "depleted_at_s")
    means = {k: float(np.mean([getattr(r, k) for r in reports])) for k in numeric}
    modes = {m: float(np.mean([r.mode_ttis[m] for r in reports])) for m in first.mode_ttis}
    return replace(first, **means, mode_ttis=modes, replicates=len(reports), delays_ms=[],
                   mode_trace=[], state_trace=[], energy_trace=[])


def sweep(config: ScenarioConfig, variable, values, algorithms=(Algorithm.SET, Algorithm.DRX), *,
          replicates=1, jobs=1):
    """Run every (algorithm, value) cell and return ``{(algorithm, value): MetricsReport}``.

    Trade-off fronts are computed only where ``emit_csv`` reports them: at the
    largest swept value, or in every cell of a theta sweep.
    """
    variable = SweepVariable(variable)
    values = list(values)
    if not values:
        raise DomainError("sweep needs at least one value")
    if values != sorted(values):
        raise DomainError("sweep values must be sorted ascending")
    if replicates < 1:
        raise DomainError("replicates must be >= 1")
    algorithms = [Algorithm(a) for a in algorithms]
    top = values[-1]

    jobs_list, keys = [], []
    for alg in algorithms:
        for idx, value in enumerate(values):
            with_tradeoff = variable is SweepVariable.THETA or value == top
            for r in range(replicates):
                cfg = cell_config(config, variable, value, alg)
                cfg = cfg.replace(rng_seed=cell_seed(config.rng_seed, variable, idx, r))
                jobs_list.append((alg.value, value, cfg, with_tradeoff and r == 0))
                keys.append((alg.value, value))

    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, jobs_list))
    else:
        results = [_run_cell(j) for j in jobs_list]

    grouped = {}
    for key, rep in zip(keys, results):
        grouped.setdefault(key, []).append(rep)
        log.info("cell %s=%s %s done (%d/%d)", variable.value, key[1], key[0], len(grouped[key]), replicates)
    return {key: combine_replicates(reps) for key, reps in grouped.items()}


# --- CSV output ------------------------------------------------------------

def fmt(x):
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, (tuple, list)):
        return ";".join(fmt(v) for v in x)
    return str(x)


def _write(path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc


def _ordered(reports):
    """Cells sorted by algorithm (SET first) then swept value."""
    order = {a.value: i for i, a in enumerate(Algorithm)}
    return sorted(reports.items(), key=lambda kv: (order.get(kv[0][0], 99), kv[0][1]))


def _ratio(a, b):
    if b == 0 or not math.isfinite(a) or not math.isfinite(b):
        return math.nan
    return a / b


OUTPUT_FILES = ("se_vs_users.csv", "delay_vs_users.csv", "energy.csv", "tradeoff.csv",
                "summary.csv", "metadata.csv")


def emit_csv(reports, out_dir, variable=SweepVariable.NUM_UES):
    """Write the six result CSVs for a sweep into ``out_dir`` and return their paths."""
    if not reports:
        raise DomainError("no reports to write")
    variable = SweepVariable(variable)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise IoError(out_dir, exc.strerror or str(exc)) from exc
    cells = _ordered(reports)
    paths = {name: os.path.join(out_dir, name) for name in OUTPUT_FILES}

    _write(paths["se_vs_users.csv"], ("algorithm", "num_ues", "arrival_rate_pkts_per_s", "se_bits_hz"),
           [(alg, r.num_ues, r.arrival_rate_pkts_per_s, r.mean_se_bits_hz) for (alg, _), r in cells])
    _write(paths["delay_vs_users.csv"],
           ("algorithm", "num_ues", "arrival_rate_pkts_per_s", "delay_ms", "violations"),
           [(alg, r.num_ues, r.arrival_rate_pkts_per_s, r.mean_delay_ms, r.violation_count)
            for (alg, _), r in cells])
    _write(paths["energy.csv"],
           ("algorithm", "num_ues", "arrival_rate_pkts_per_s", "consumed_j", "remaining_j", "lifetime_s"),
           [(alg, r.num_ues, r.arrival_rate_pkts_per_s, r.consumed_j, r.remaining_j, r.lifetime_s)
            for (alg, _), r in cells])

    top = max(v for _, v in reports)
    trade_rows = []
    for (alg, value), r in cells:
        if variable is SweepVariable.THETA or value == top:
            trade_rows += [(alg, p.theta, p.se_bits_hz, p.ee_bits_hz_w, p.sop_value) for p in r.tradeoff_series]
    _write(paths["tradeoff.csv"], ("algorithm", "theta", "se", "ee", "sop"), trade_rows)

    summary = []
    for value in sorted({v for _, v in reports}):
        s = reports.get((Algorithm.SET.value, value))
        d = reports.get((Algorithm.DRX.value, value))
        ratios = [math.nan] * 4
        knees = [math.nan, math.nan]
        if s is not None and d is not None:
            ratios = [_ratio(s.mean_se_bits_hz, d.mean_se_bits_hz), _ratio(s.mean_delay_ms, d.mean_delay_ms),
                      _ratio(s.consumed_j, d.consumed_j), _ratio(s.lifetime_s, d.lifetime_s)]
        for i, rep in enumerate((s, d)):
            if rep is not None and rep.tradeoff_series:
                knees[i] = rep.knee.se_bits_hz
        summary.append((variable.value, value, *ratios, *knees))
    _write(paths["summary.csv"],
           ("variable", "value", "se_ratio", "delay_ratio", "energy_ratio", "lifetime_ratio",
            "set_knee_se", "drx_knee_se"), summary)

    fields = list(cells[0][1].config.to_dict())
    _write(paths["metadata.csv"], ("variable", "value", "replicates", *fields),
           [(variable.value, value, r.replicates, *[getattr(r.config, f) for f in fields])
            for (_, value), r in cells])
    return [paths[n] for n in OUTPUT_FILES]


def _parse_cell(text):
    try:
        return float(text)
    except ValueError:
        return text


def load_csv(path):
    """Rows of an emitted CSV as dicts, with numeric cells parsed to float."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(fh)]
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc


def series(rows, key, value, algorithm=None):
    """``{key: value}`` from loaded rows, optionally filtered by algorithm, sorted by key."""
    pick = [r for r in rows if algorithm is None or r["algorithm"] == algorithm]
    return dict(sorted((r[key], r[value]) for r in pick))
