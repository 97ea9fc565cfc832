"""Downlink packet arrivals and the inter-arrival-time estimator."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, OrderingError

TRAFFIC_STREAM = 1


@dataclass(slots=True)
class Packet:
    packet_id: int
    ue_id: int
    arrival_time_ms: float
    size_bits: int
    tx_start_ms: float | None = None
    delivered: bool = False
    remaining_bits: float = field(default=-1.0, repr=False)

    def __post_init__(self):
        if self.size_bits <= 0:
            raise DomainError("packet size must be > 0")
        if self.remaining_bits < 0:
            self.remaining_bits = float(self.size_bits)

    @property
    def delay_ms(self):
        if self.tx_start_ms is None:
            return None
        return self.tx_start_ms - self.arrival_time_ms


def traffic_rng(seed, ue_id):
    return np.random.default_rng([int(seed), TRAFFIC_STREAM, int(ue_id)])


def arrival_times(rate_pkts_per_s, horizon_ms, seed, ue_id):
    """Poisson arrival instants (ms) in ``[0, horizon_ms)`` as a float array."""
    if rate_pkts_per_s < 0:
        raise DomainError("rate must be >= 0")
    if horizon_ms <= 0:
        raise DomainError("horizon must be > 0")
    if rate_pkts_per_s == 0:
        return np.empty(0)
    rng = traffic_rng(seed, ue_id)
    mean_gap = 1000.0 / rate_pkts_per_s
    expected = horizon_ms / mean_gap
    chunk = int(expected + 6.0 * np.sqrt(expected) + 16)
    times = np.cumsum(rng.exponential(mean_gap, chunk))
    while times[-1] < horizon_ms:
        more = times[-1] + np.cumsum(rng.exponential(mean_gap, chunk))
        times = np.concatenate([times, more])
    return times[times < horizon_ms]


def generate_arrivals(rate_pkts_per_s, horizon_ms, seed, ue_id, size_bits=8000, first_id=0):
    """Seeded Poisson arrivals for one UE as a time-ordered list of packets."""
    times = arrival_times(rate_pkts_per_s, horizon_ms, seed, ue_id)
    return [Packet(first_id + i, ue_id, float(t), size_bits) for i, t in enumerate(times)]


def periodic_arrivals(gap_ms, horizon_ms, ue_id, size_bits=8000, offset_ms=0.0, first_id=0):
    """Deterministic arrivals every ``gap_ms`` starting at ``offset_ms``."""
    if gap_ms <= 0:
        raise DomainError("gap must be > 0")
    times = np.arange(offset_ms, horizon_ms, gap_ms)
    return [Packet(first_id + i, ue_id, float(t), size_bits) for i, t in enumerate(times)]


def scripted_arrivals(times_ms, ue_id=0, size_bits=8000, first_id=0):
    times = sorted(float(t) for t in times_ms)
    return [Packet(first_id + i, ue_id, t, size_bits) for i, t in enumerate(times)]


def merge_traces(per_ue):
    """Flatten per-UE packet lists into one list ordered by (arrival, ue_id), renumbering ids."""
    flat = sorted((p for plist in per_ue for p in plist), key=lambda p: (p.arrival_time_ms, p.ue_id))
    for i, p in enumerate(flat):
        p.packet_id = i
    return flat


def cell_trace(num_ues, rate_pkts_per_s, horizon_ms, seed, size_bits):
    return merge_traces(
        generate_arrivals(rate_pkts_per_s, horizon_ms, seed, ue, size_bits) for ue in range(num_ues))


@dataclass(frozen=True)
class IatEstimator:
    """Exponentially weighted inter-arrival estimate.

    ``estimate_ms`` is ``None`` until the first arrival, which counts as a gap
    of 0 ms and starts the average there.
    """

    weight_a: float = 0.3
    estimate_ms: float | None = None
    last_arrival_ms: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.weight_a <= 1.0:
            raise DomainError("weight a must lie in [0, 1]")
        if self.estimate_ms is not None and self.estimate_ms < 0:
            raise DomainError("estimate must be >= 0")

    @property
    def weight_b(self):
        return 1.0 - self.weight_a


def update_iat(est: IatEstimator, arrival_ms: float) -> IatEstimator:
    if est.last_arrival_ms is None:
        start = 0.0 if est.estimate_ms is None else est.estimate_ms
        return IatEstimator(est.weight_a, start, arrival_ms)
    gap = arrival_ms - est.last_arrival_ms
    if gap < 0:
        raise OrderingError(f"arrival {arrival_ms} precedes previous arrival {est.last_arrival_ms}")
    return IatEstimator(est.weight_a, est.weight_a * gap + est.weight_b * est.estimate_ms, arrival_ms)


TRACE_COLUMNS = ("ue_id", "arrival_ms", "size_bits")


def write_trace_csv(packets, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for p in packets:
            w.writerow((p.ue_id, repr(float(p.arrival_time_ms)), p.size_bits))


def read_trace_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
            raise ValueError(f"trace header must be {','.join(TRACE_COLUMNS)}")
        packets = [Packet(0, int(r["ue_id"]), float(r["arrival_ms"]), int(r["size_bits"])) for r in reader]
    return merge_traces([packets])
