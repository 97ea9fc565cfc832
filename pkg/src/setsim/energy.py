"""Battery bookkeeping for the eNodeB: per-mode power draw plus per-bit traffic energy."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

from .errors import DomainError, InsufficientData
from .sleep import SleepMode


def total_traffic_energy(num_users, e_rtx_j_per_bit, e_stx_j_per_bit):
    """Aggregate per-bit energy coefficient for ``num_users`` users: ``i * (E_rtx + E_stx)``."""
    if num_users < 0:
        raise DomainError("number of users must be >= 0")
    return num_users * (e_rtx_j_per_bit + e_stx_j_per_bit)


def default_mode_powers(cfg):
    return {
        SleepMode.AWAKE: cfg.awake_power_w,
        SleepMode.LISTENING: cfg.listen_power_w,
        SleepMode.INITIAL_SLEEP: cfg.sleep_power_w,
        SleepMode.FINAL_SLEEP: cfg.sleep_power_w,
        SleepMode.TERMINATED: 0.0,
    }


@dataclass(slots=True)
class EnergyLedger:
    """Running energy account for one node.

    ``remaining_j`` is always derived as ``initial_j - consumed_j`` so the two
    sum to the initial battery by construction. Consumption is clamped at the
    battery size and ``depleted_at_ms`` records when the battery ran dry.
    """

    initial_j: float
    per_mode_power_w: dict
    e_rtx_j_per_bit: float = 1e-6
    e_stx_j_per_bit: float = 1e-6
    num_users: int = 1
    consumed_j: float = 0.0
    remaining_j: float = field(default=-1.0)
    elapsed_ms: float = 0.0
    depleted_at_ms: float | None = None

    def __post_init__(self):
        if self.initial_j <= 0:
            raise DomainError("battery must be > 0")
        if any(p < 0 for p in self.per_mode_power_w.values()):
            raise DomainError("mode powers must be >= 0")
        if self.e_rtx_j_per_bit < 0 or self.e_stx_j_per_bit < 0:
            raise DomainError("per-bit energies must be >= 0")
        if self.remaining_j < 0:
            self.remaining_j = self.initial_j - self.consumed_j

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg.battery_j, default_mode_powers(cfg), cfg.e_tx_j_per_bit,
                   cfg.e_rx_j_per_bit, cfg.num_ues)

    @property
    def depleted(self):
        return self.depleted_at_ms is not None

    def accrue(self, mode, bits_tx=0, bits_rx=0, tti_ms=1.0, ttis=1):
        """Charge ``ttis`` consecutive TTIs spent in ``mode`` plus the given traffic, in place."""
        spend = self.per_mode_power_w[mode] * tti_ms * ttis / 1000.0
        spend += bits_tx * self.e_rtx_j_per_bit + bits_rx * self.e_stx_j_per_bit
        start_ms = self.elapsed_ms
        self.elapsed_ms += tti_ms * ttis
        if spend <= 0:
            return 0.0
        if self.consumed_j + spend >= self.initial_j:
            spend = self.initial_j - self.consumed_j
            self.consumed_j = self.initial_j
            self.remaining_j = 0.0
            if self.depleted_at_ms is None:
                self.depleted_at_ms = start_ms + tti_ms * ttis
            return spend
        self.consumed_j += spend
        self.remaining_j = self.initial_j - self.consumed_j
        return spend


def accrue_tti(ledger: EnergyLedger, mode, bits_tx=0, bits_rx=0, tti_ms=1.0) -> EnergyLedger:
    """Pure variant of :meth:`EnergyLedger.accrue`: returns an updated copy."""
    out = replace(ledger, per_mode_power_w=dict(ledger.per_mode_power_w))
    out.accrue(mode, bits_tx, bits_rx, tti_ms)
    return out


def battery_lifetime(ledger: EnergyLedger) -> float:
    """Seconds until the battery empties: the observed depletion time, or an
    extrapolation at the run's average power draw."""
    if ledger.consumed_j <= 0:
        raise InsufficientData("no energy consumed; lifetime is undefined")
    if ledger.depleted_at_ms is not None:
        return ledger.depleted_at_ms / 1000.0
    avg_power_w = ledger.consumed_j / (ledger.elapsed_ms / 1000.0)
    return ledger.initial_j / avg_power_w


def lifetime_or_nan(ledger):
    try:
        return battery_lifetime(ledger)
    except InsufficientData:
        return math.nan


ENERGY_TRACE_COLUMNS = ("tti", "mode", "consumed_j_cumulative", "remaining_j")


def write_energy_trace_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENERGY_TRACE_COLUMNS)
        for tti, mode, consumed, remaining in rows:
            w.writerow((tti, getattr(mode, "value", mode), format(consumed, ".9g"), format(remaining, ".9g")))
