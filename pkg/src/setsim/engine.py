"""TTI-driven single-cell downlink simulator.

Per TTI, in order: enqueue due arrivals, refresh channel state, step the
cell's sleep controller, schedule resource blocks and drain bits if the
controller transmits, charge energy, advance the clock. Sleep windows that
cannot be interrupted are fast-forwarded in one step; the result is identical
to stepping them one TTI at a time.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from . import optimizer as opt
from .config import Algorithm, ScenarioConfig, classify
from .energy import EnergyLedger, lifetime_or_nan
from .errors import InternalInconsistency
from .radio import CellGeometry, place_ues, shadow_redraw_interval_ms
from .sleep import (SLEEPING, Action, SetControllerState, SleepMode, initial_state,
                    next_event, state_trace_row, step)
from .traffic import IatEstimator, cell_trace, update_iat

PLACEMENT_STREAM = 2
SHADOWING_STREAM = 3


@dataclass(frozen=True)
class SimClock:
    tti_index: int = 0
    tti_ms: float = 1.0

    @property
    def time_ms(self):
        return self.tti_index * self.tti_ms

    def advance(self, ttis=1):
        return SimClock(self.tti_index + ttis, self.tti_ms)


@dataclass(frozen=True)
class RbAllocation:
    """``owners[rb]`` is the UE holding that RB or None; ``se`` is the per-UE link SE used."""

    owners: tuple
    se: dict = field(default_factory=dict)

    def rbs_for(self, ue_id):
        return sum(1 for o in self.owners if o == ue_id)

    def counts(self):
        out = {}
        for o in self.owners:
            if o is not None:
                out[o] = out.get(o, 0) + 1
        return out


def _cap(num_rbs, backlogged, cap):
    return math.ceil(num_rbs / backlogged) if cap else num_rbs


def allocate_rbs(backlogged, se_by_ue, num_rbs, cap=True):
    """Channel-aware greedy allocation.

    UEs are served in descending SE (ties to the lowest id), each taking up to
    ``ceil(num_rbs / n_backlogged)`` RBs when ``cap`` is set.
    """
    ues = sorted(backlogged, key=lambda u: (-se_by_ue[u], u))
    return _fill(ues, se_by_ue, num_rbs, cap)


def allocate_round_robin(backlogged, se_by_ue, num_rbs, start=0, num_ues=None, cap=True):
    """Channel-blind allocation: UEs in cyclic id order from ``start``, same per-UE cap."""
    n = num_ues or (max(backlogged, default=0) + 1)
    ues = sorted(backlogged, key=lambda u: (u - start) % n)
    return _fill(ues, se_by_ue, num_rbs, cap)


def _fill(order, se_by_ue, num_rbs, cap):
    owners = [None] * num_rbs
    if not order:
        return RbAllocation(tuple(owners), {})
    per_ue = _cap(num_rbs, len(order), cap)
    rb = 0
    se = {}
    for u in order:
        if rb >= num_rbs:
            break
        take = min(per_ue, num_rbs - rb)
        for r in range(rb, rb + take):
            owners[r] = u
        rb += take
        se[u] = se_by_ue[u]
    return RbAllocation(tuple(owners), se)


@dataclass
class MetricsReport:
    """Aggregate outcome of one run."""

    config: ScenarioConfig
    algorithm: str
    num_ues: int
    arrival_rate_pkts_per_s: float
    seed: int
    scenario_class: str
    ttis: int
    mean_se_bits_hz: float
    mean_delay_ms: float
    violation_count: int
    generated: int
    delivered: int
    in_queue: int
    bits_tx: float
    consumed_j: float
    remaining_j: float
    lifetime_s: float
    depleted_at_s: float
    mode_ttis: dict
    replicates: int = 1
    tradeoff_series: list = field(default_factory=list)
    delays_ms: list = field(default_factory=list, repr=False)
    mode_trace: list = field(default_factory=list, repr=False)
    state_trace: list = field(default_factory=list, repr=False)
    energy_trace: list = field(default_factory=list, repr=False)

    @property
    def knee(self):
        return opt.knee_point(self.tradeoff_series) if self.tradeoff_series else None


class World:
    """Mutable simulation state for one run. Single-owner, advanced by :meth:`serve_tti`."""

    def __init__(self, cfg: ScenarioConfig, trace=None, record_trace=False):
        self.cfg = cfg
        self.record = record_trace
        self.clock = SimClock(0, cfg.tti_ms)
        self.num_ttis = cfg.num_ttis
        self.channel_aware = cfg.algorithm is Algorithm.SET
        n = cfg.num_ues
        seed = cfg.rng_seed

        placements = place_ues(n, cfg.inter_enodeb_distance_m,
                               np.random.default_rng([seed, PLACEMENT_STREAM]), cfg.min_distance_m)
        self.geometry = CellGeometry(placements, cfg)
        self.base_sinr = self.geometry.sinr(cfg.max_tx_power_w * 1000.0)
        self.redraw_ms = shadow_redraw_interval_ms(cfg.ue_speed_mps)
        n_epochs = int(math.floor(max(self.num_ttis, 1) * cfg.tti_ms / self.redraw_ms)) + 1
        shadow_rng = np.random.default_rng([seed, SHADOWING_STREAM])
        self.shadowing_db = shadow_rng.normal(0.0, cfg.shadowing_sigma_db, (n_epochs, n))
        self._epoch = -1
        self.se_link = []

        if trace is None:
            horizon = self.num_ttis * cfg.tti_ms
            trace = cell_trace(n, cfg.arrival_rate_pkts_per_s, horizon, seed, cfg.packet_size_bits) if horizon > 0 else []
        self.trace = trace
        self._next_arrival = 0
        self.queues = [deque() for _ in range(n)]
        self.backlogged = set()
        self.iat = IatEstimator(cfg.iat_weight_a)

        self.state = initial_state(cfg)
        self.ledger = EnergyLedger.from_config(cfg)
        self.bits_per_rb_per_se = cfg.rb_bandwidth_hz * cfg.tti_ms / 1000.0
        self.rr_start = 0

        self.delivered = 0
        self.delays = []
        self.violations = 0
        self.bits_tx = 0.0
        self.rb_ttis = 0
        self.se_sum = 0.0
        self.served_beta_sum = np.zeros(n)
        self.served_rbs = np.zeros(n)
        self.beta_time_sum = np.zeros(n)
        self.beta_epochs = 0
        self.mode_ttis = {m: 0 for m in SleepMode}
        self.mode_trace, self.state_trace, self.energy_trace = [], [], []

    # -- per-TTI stages -------------------------------------------------

    def _enqueue(self, now_ms, strict=False):
        trace, i = self.trace, self._next_arrival
        while i < len(trace) and (trace[i].arrival_time_ms < now_ms if strict else trace[i].arrival_time_ms <= now_ms):
            p = trace[i]
            self.queues[p.ue_id].append(p)
            self.backlogged.add(p.ue_id)
            self.iat = update_iat(self.iat, p.arrival_time_ms)
            i += 1
        self._next_arrival = i

    def _refresh_channels(self, now_ms):
        epoch = int(now_ms // self.redraw_ms)
        if epoch == self._epoch:
            return
        self._epoch = epoch
        beta = self.base_sinr * 10.0 ** (self.shadowing_db[epoch] / 10.0)
        if not self.channel_aware:
            # No CSI: rate is set from the long-term channel and clipped when
            # the instantaneous channel cannot support it.
            beta = np.minimum(beta, self.base_sinr)
        self.beta = beta
        self.se_link = np.log2(1.0 + beta).tolist()
        self.beta_time_sum += beta
        self.beta_epochs += 1

    def _sync_controller(self):
        st = self.state
        if isinstance(st, SetControllerState):
            est = self.iat.estimate_ms
            if st.e_remained_j != self.ledger.remaining_j or st.iat_ms != est:
                self.state = replace(st, e_remained_j=self.ledger.remaining_j, iat_ms=est)

    def _transmit(self, now_ms):
        if not self.backlogged:
            return 0.0
        num_rbs = self.cfg.num_rbs
        if self.channel_aware:
            alloc = allocate_rbs(self.backlogged, self.se_link, num_rbs)
        else:
            alloc = allocate_round_robin(self.backlogged, self.se_link, num_rbs, self.rr_start, self.cfg.num_ues)
            self.rr_start = (list(alloc.se)[-1] + 1) % self.cfg.num_ues
        counts = alloc.counts()
        if not counts:
            raise InternalInconsistency("backlogged UEs but no RB granted while transmitting")
        sent_total = 0.0
        max_delay = self.cfg.max_delay_ms
        for ue, n_rb in counts.items():
            se = alloc.se[ue]
            self.rb_ttis += n_rb
            self.se_sum += se * n_rb
            self.served_beta_sum[ue] += self.beta[ue] * n_rb
            self.served_rbs[ue] += n_rb
            budget = se * n_rb * self.bits_per_rb_per_se
            q = self.queues[ue]
            while q and budget > 0:
                p = q[0]
                if p.tx_start_ms is None:
                    p.tx_start_ms = now_ms
                    d = now_ms - p.arrival_time_ms
                    if d < 0:
                        raise InternalInconsistency(f"packet {p.packet_id} served before arrival")
                    self.delays.append(d)
                    if d > max_delay:
                        self.violations += 1
                sent = min(budget, p.remaining_bits)
                p.remaining_bits -= sent
                budget -= sent
                sent_total += sent
                if p.remaining_bits <= 0:
                    p.delivered = True
                    q.popleft()
                    self.delivered += 1
            if not q:
                self.backlogged.discard(ue)
        return sent_total

    def serve_tti(self):
        now = self.clock.time_ms
        self._enqueue(now)
        self._refresh_channels(now)
        self._sync_controller()
        event = next_event(self.state, bool(self.backlogged), self.ledger.depleted)
        self.state, action = step(self.state, event, self.cfg.tti_ms)
        bits = 0.0
        if action is Action.TRANSMIT:
            bits = self._transmit(now)
        mode = self.state.mode
        self.ledger.accrue(mode, bits, 0, self.cfg.tti_ms)
        self.bits_tx += bits
        self.mode_ttis[mode] += 1
        if self.record:
            tti = self.clock.tti_index
            self.mode_trace.append(mode)
            self.state_trace.append(state_trace_row(tti, self.state))
            self.energy_trace.append((tti, mode, self.ledger.consumed_j, self.ledger.remaining_j))
        self.clock = self.clock.advance()

    def _skippable_ttis(self):
        """TTIs that can be collapsed into one accrual: an uninterruptible sleep countdown
        or the absorbing Terminated state."""
        left = self.num_ttis - self.clock.tti_index
        st = self.state
        if st.mode is SleepMode.TERMINATED:
            return left
        if st.mode not in SLEEPING or st.remaining_window_ms <= 0:
            return 0
        k = min(math.ceil(st.remaining_window_ms / self.cfg.tti_ms - 1e-9), left)
        power = self.ledger.per_mode_power_w[st.mode]
        if power * self.cfg.tti_ms * k / 1000.0 >= self.ledger.remaining_j:
            return 0
        return k

    def fast_forward(self, k):
        st = self.state
        tti = self.cfg.tti_ms
        last_ms = (self.clock.tti_index + k - 1) * tti
        self._enqueue(last_ms)
        if st.mode is not SleepMode.TERMINATED:
            self.state = replace(st, remaining_window_ms=max(st.remaining_window_ms - k * tti, 0.0))
        self.ledger.accrue(self.state.mode, 0, 0, tti, ttis=k)
        self.mode_ttis[self.state.mode] += k
        self.clock = self.clock.advance(k)

    def run(self):
        while self.clock.tti_index < self.num_ttis:
            k = 0 if self.record else self._skippable_ttis()
            if k > 1:
                self.fast_forward(k)
            else:
                self.serve_tti()
        # Packets that arrived during the last TTI are generated but never served.
        self._enqueue(self.num_ttis * self.cfg.tti_ms, strict=True)
        return self

    # -- reporting --------------------------------------------------------

    def effective_sinr(self):
        """Per-UE SINR averaged over served RBs, falling back to the time average."""
        time_avg = self.beta_time_sum / max(self.beta_epochs, 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            served = np.where(self.served_rbs > 0, self.served_beta_sum / np.maximum(self.served_rbs, 1), time_avg)
        return served

    def channel_context(self):
        cfg = self.cfg
        p_max = cfg.max_tx_power_w
        noise_w = self.geometry.noise_mw / 1000.0
        interference_w = self.geometry.interference_mw / 1000.0
        gains = self.effective_sinr() * (noise_w + interference_w) / p_max
        return opt.ChannelContext(tuple(gains), (noise_w,) * cfg.num_ues, tuple(interference_w))

    def tradeoff(self):
        cfg = self.cfg
        circuit = [cfg.circuit_power_w / cfg.num_ues] * cfg.num_ues
        return opt.pareto_sweep(cfg.theta_grid, self.channel_context(), cfg.max_tx_power_w, circuit)

    def check_invariants(self):
        in_queue = sum(len(q) for q in self.queues)
        arrived = self._next_arrival
        if arrived != self.delivered + in_queue:
            raise InternalInconsistency(f"packet conservation broken: {arrived} != {self.delivered} + {in_queue}")
        led = self.ledger
        if abs(led.consumed_j + led.remaining_j - led.initial_j) > 1e-9 * led.initial_j:
            raise InternalInconsistency("energy conservation broken")

    def report(self, with_tradeoff=True) -> MetricsReport:
        self.check_invariants()
        cfg = self.cfg
        in_queue = sum(len(q) for q in self.queues)
        dep = self.ledger.depleted_at_ms
        return MetricsReport(
            config=cfg,
            algorithm=cfg.algorithm.value,
            num_ues=cfg.num_ues,
            arrival_rate_pkts_per_s=cfg.arrival_rate_pkts_per_s,
            seed=cfg.rng_seed,
            scenario_class=classify(cfg).value,
            ttis=self.clock.tti_index,
            mean_se_bits_hz=self.se_sum / self.rb_ttis if self.rb_ttis else 0.0,
            mean_delay_ms=math.fsum(self.delays) / len(self.delays) if self.delays else 0.0,
            violation_count=self.violations,
            generated=self._next_arrival,
            delivered=self.delivered,
            in_queue=in_queue,
            bits_tx=self.bits_tx,
            consumed_j=self.ledger.consumed_j,
            remaining_j=self.ledger.remaining_j,
            lifetime_s=lifetime_or_nan(self.ledger),
            depleted_at_s=dep / 1000.0 if dep is not None else math.nan,
            mode_ttis={m.value: c for m, c in self.mode_ttis.items()},
            tradeoff_series=self.tradeoff() if with_tradeoff else [],
            delays_ms=list(self.delays),
            mode_trace=[m.value for m in self.mode_trace],
            state_trace=self.state_trace,
            energy_trace=self.energy_trace,
        )


def run(config: ScenarioConfig, trace=None, record_trace=False, with_tradeoff=True) -> MetricsReport:
    """Simulate ``config`` end to end and return its metrics.

    ``trace`` overrides the generated arrivals (packets are copied, so one
    trace can feed several runs). ``record_trace`` keeps per-TTI mode, state
    and energy rows and disables fast-forwarding.
    """
    if trace is not None:
        trace = [replace(p, tx_start_ms=None, delivered=False, remaining_bits=float(p.size_bits)) for p in trace]
    world = World(config, trace, record_trace)
    world.run()
    return world.report(with_tradeoff)
