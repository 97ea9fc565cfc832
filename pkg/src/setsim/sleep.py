"""eNodeB sleep-mode controllers: the SET state machine and the DRX baseline.

Both controllers are pure: ``set_step`` / ``drx_step`` take a frozen state and
one event and return the next state plus the action for the current TTI.
The engine derives the event for each TTI with :func:`next_event`.

SET cycle::

    Awake --NoPacket--> InitialSleep(IEC window) --expire--> Listening
    Listening --NoPacket--> FinalSleep(FEC window) --expire--> Listening ...
    any sleep/listen state --PacketAvailable (window over)--> Awake

DRX cycle::

    Awake --inactivity timer runs out--> short cycles (InitialSleep + on-duration)
    --after N short cycles--> long cycles (FinalSleep + on-duration)
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace

from .errors import DomainError, IllegalTransition


class SleepMode(enum.Enum):
    AWAKE = "Awake"
    LISTENING = "Listening"
    INITIAL_SLEEP = "InitialSleep"
    FINAL_SLEEP = "FinalSleep"
    TERMINATED = "Terminated"


SLEEPING = frozenset({SleepMode.INITIAL_SLEEP, SleepMode.FINAL_SLEEP})


class Event(enum.Enum):
    TERMINATION_REQUEST = "TerminationRequest"
    PACKET_AVAILABLE = "PacketAvailable"
    NO_PACKET = "NoPacket"
    WINDOW_EXPIRED = "WindowExpired"


class Action(enum.Enum):
    SLEEP = "Sleep"
    LISTEN = "Listen"
    TRANSMIT = "Transmit"
    TERMINATE = "Terminate"


# --- energy-driven window sizing ------------------------------------------

def iec(e_total_j, e_remained_j, e_max_j):
    """Initial energy consumption: battery depletion fraction scaled by ``e_max_j``."""
    if e_total_j <= 0:
        raise DomainError("total energy must be > 0")
    if not 0 <= e_remained_j <= e_total_j:
        raise DomainError("remaining energy must lie in [0, total]")
    return max((e_total_j - e_remained_j) / e_total_j, 0.0) * e_max_j


def fec(a, e_max_j, e_min_j):
    """Final energy consumption: ``a * e_max + (1 - a) * e_min``."""
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"weight a must lie in [0, 1], got {a}")
    if e_min_j > e_max_j:
        raise DomainError("e_min must not exceed e_max")
    return a * e_max_j + (1.0 - a) * e_min_j


def window_from_energy(e_j, e_min_j, e_max_j, t_min_ms, t_max_ms, tti_ms=1.0):
    """Map an energy level linearly onto ``[t_min, t_max]``, rounded up to whole TTIs."""
    if e_max_j == e_min_j:
        raise DomainError("e_max must differ from e_min")
    if e_min_j > e_max_j:
        raise DomainError("e_min must not exceed e_max")
    if not t_min_ms < t_max_ms:
        raise DomainError("need t_min < t_max")
    frac = min(max((e_j - e_min_j) / (e_max_j - e_min_j), 0.0), 1.0)
    raw = t_min_ms + frac * (t_max_ms - t_min_ms)
    # Guard against 33.000000000004 rounding up to an extra TTI.
    return math.ceil(round(raw / tti_ms, 9)) * tti_ms


# --- SET controller --------------------------------------------------------

@dataclass(frozen=True)
class SetControllerState:
    mode: SleepMode = SleepMode.AWAKE
    remaining_window_ms: float = 0.0
    ppt_ms: float = 0.0
    iec_j: float = 0.0
    fec_j: float = 0.0
    e_total_j: float = 1000.0
    e_remained_j: float = 1000.0
    e_max_j: float = 10.0
    e_min_j: float = 1.0
    weight_a: float = 0.3
    t_min_ms: float = 2.0
    t_max_ms: float = 64.0
    iat_ms: float | None = None
    initial_window_ms: float = 0.0
    final_window_ms: float = 0.0

    def __post_init__(self):
        if self.remaining_window_ms < 0 or self.ppt_ms < 0:
            raise DomainError("window and PPT counters must be >= 0")
        if not 0 <= self.e_remained_j <= self.e_total_j:
            raise DomainError("remaining energy must lie in [0, total]")

    @classmethod
    def from_config(cls, cfg):
        t_min, t_max = cfg.window_bounds_ms
        return refresh_windows(cls(
            e_total_j=cfg.battery_j, e_remained_j=cfg.battery_j,
            e_max_j=cfg.e_max_j, e_min_j=cfg.e_min_j, weight_a=cfg.iat_weight_a,
            t_min_ms=t_min, t_max_ms=t_max), cfg.tti_ms)


def window_ceiling(state: SetControllerState, tti_ms=1.0):
    """Upper window bound: the configured maximum, shrunk to the predicted inter-arrival gap."""
    if state.iat_ms is None:
        return state.t_max_ms
    return min(state.t_max_ms, max(state.iat_ms, state.t_min_ms + tti_ms))


def refresh_windows(state: SetControllerState, tti_ms=1.0) -> SetControllerState:
    """Recompute IEC, FEC and both sleep windows from the current battery and IAT."""
    i = iec(state.e_total_j, state.e_remained_j, state.e_max_j)
    f = fec(state.weight_a, state.e_max_j, state.e_min_j)
    hi = window_ceiling(state, tti_ms)
    w_init = window_from_energy(i, state.e_min_j, state.e_max_j, state.t_min_ms, hi, tti_ms)
    w_final = window_from_energy(f, state.e_min_j, state.e_max_j, state.t_min_ms, hi, tti_ms)
    return replace(state, iec_j=i, fec_j=f, initial_window_ms=w_init, final_window_ms=w_final)


def _set_packet(state, tti_ms):
    if state.ppt_ms >= 1.0:
        state = refresh_windows(state, tti_ms)
        return replace(state, mode=SleepMode.AWAKE, remaining_window_ms=0.0,
                       ppt_ms=state.ppt_ms + tti_ms), Action.TRANSMIT
    return replace(state, mode=SleepMode.AWAKE, remaining_window_ms=0.0,
                   ppt_ms=state.ppt_ms + tti_ms), Action.LISTEN


def _countdown(state, tti_ms, event):
    if state.remaining_window_ms <= 0:
        raise IllegalTransition(state.mode, event)
    return replace(state, remaining_window_ms=max(state.remaining_window_ms - tti_ms, 0.0)), Action.SLEEP


def set_step(state: SetControllerState, event: Event, tti_ms=1.0):
    mode = state.mode
    if mode is SleepMode.TERMINATED:
        return state, Action.TERMINATE
    if event is Event.TERMINATION_REQUEST:
        return replace(state, mode=SleepMode.TERMINATED, remaining_window_ms=0.0), Action.TERMINATE

    if mode is SleepMode.AWAKE:
        if event is Event.PACKET_AVAILABLE:
            return _set_packet(state, tti_ms)
        if event is Event.NO_PACKET:
            state = refresh_windows(state, tti_ms)
            return replace(state, mode=SleepMode.INITIAL_SLEEP,
                           remaining_window_ms=state.initial_window_ms - tti_ms), Action.SLEEP
        raise IllegalTransition(mode, event)

    if mode is SleepMode.LISTENING:
        if event is Event.PACKET_AVAILABLE:
            return _set_packet(state, tti_ms)
        if event is Event.NO_PACKET:
            state = refresh_windows(state, tti_ms)
            return replace(state, mode=SleepMode.FINAL_SLEEP,
                           remaining_window_ms=state.final_window_ms - tti_ms), Action.SLEEP
        raise IllegalTransition(mode, event)

    # InitialSleep / FinalSleep
    if event is Event.WINDOW_EXPIRED:
        if state.remaining_window_ms > 0:
            raise IllegalTransition(mode, event)
        return replace(state, mode=SleepMode.LISTENING, remaining_window_ms=0.0), Action.LISTEN
    if event is Event.PACKET_AVAILABLE and state.remaining_window_ms <= 0:
        return _set_packet(state, tti_ms)
    return _countdown(state, tti_ms, event)


# --- DRX baseline ----------------------------------------------------------

@dataclass(frozen=True)
class DrxControllerState:
    mode: SleepMode = SleepMode.AWAKE
    remaining_window_ms: float = 0.0
    idle_ms: float = 0.0
    cycles_done: int = 0
    on_duration_ms: float = 4.0
    inactivity_timer_ms: float = 10.0
    short_cycle_ms: float = 20.0
    long_cycle_ms: float = 80.0
    short_cycle_count: int = 4

    def __post_init__(self):
        if min(self.remaining_window_ms, self.idle_ms, self.on_duration_ms, self.inactivity_timer_ms) < 0:
            raise DomainError("DRX timers must be >= 0")
        if self.long_cycle_ms < self.short_cycle_ms:
            raise DomainError("long cycle must be >= short cycle")

    @classmethod
    def from_config(cls, cfg):
        return cls(on_duration_ms=cfg.drx_on_duration_ms, inactivity_timer_ms=cfg.drx_inactivity_ms,
                   short_cycle_ms=cfg.drx_short_cycle_ms, long_cycle_ms=cfg.drx_long_cycle_ms,
                   short_cycle_count=cfg.drx_short_cycle_count)

    @property
    def window_ms(self):
        return self.remaining_window_ms


def _drx_sleep(state, cycles_done, tti_ms):
    if cycles_done < state.short_cycle_count:
        mode, cycle = SleepMode.INITIAL_SLEEP, state.short_cycle_ms
    else:
        mode, cycle = SleepMode.FINAL_SLEEP, state.long_cycle_ms
    return replace(state, mode=mode, cycles_done=cycles_done, idle_ms=0.0,
                   remaining_window_ms=cycle - state.on_duration_ms - tti_ms), Action.SLEEP


def _drx_wake(state):
    return replace(state, mode=SleepMode.AWAKE, idle_ms=0.0, cycles_done=0,
                   remaining_window_ms=0.0), Action.TRANSMIT


def drx_step(state: DrxControllerState, event: Event, tti_ms=1.0):
    mode = state.mode
    if mode is SleepMode.TERMINATED:
        return state, Action.TERMINATE
    if event is Event.TERMINATION_REQUEST:
        return replace(state, mode=SleepMode.TERMINATED, remaining_window_ms=0.0), Action.TERMINATE

    if mode is SleepMode.AWAKE:
        if event is Event.PACKET_AVAILABLE:
            return _drx_wake(state)
        if event is Event.NO_PACKET:
            if state.idle_ms < state.inactivity_timer_ms:
                return replace(state, idle_ms=state.idle_ms + tti_ms), Action.LISTEN
            return _drx_sleep(state, 0, tti_ms)
        raise IllegalTransition(mode, event)

    if mode is SleepMode.LISTENING:
        if event is Event.PACKET_AVAILABLE:
            return _drx_wake(state)
        if event is Event.NO_PACKET:
            if state.remaining_window_ms > 0:
                return replace(state, remaining_window_ms=max(state.remaining_window_ms - tti_ms, 0.0)), Action.LISTEN
            return _drx_sleep(state, state.cycles_done + 1, tti_ms)
        raise IllegalTransition(mode, event)

    if event is Event.WINDOW_EXPIRED:
        if state.remaining_window_ms > 0:
            raise IllegalTransition(mode, event)
        return replace(state, mode=SleepMode.LISTENING,
                       remaining_window_ms=state.on_duration_ms - tti_ms), Action.LISTEN
    if event is Event.PACKET_AVAILABLE and state.remaining_window_ms <= 0:
        return _drx_wake(state)
    return _countdown(state, tti_ms, event)


# --- glue -----------------------------------------------------------------

def next_event(state, backlogged: bool, terminate: bool = False) -> Event:
    """The event the engine feeds a controller this TTI.

    Packets never cut a sleep window short; they are reported only once the
    window has run out.
    """
    if terminate:
        return Event.TERMINATION_REQUEST
    if state.mode in SLEEPING and state.remaining_window_ms <= 0:
        return Event.PACKET_AVAILABLE if backlogged else Event.WINDOW_EXPIRED
    return Event.PACKET_AVAILABLE if backlogged else Event.NO_PACKET


def step(state, event, tti_ms=1.0):
    if isinstance(state, SetControllerState):
        return set_step(state, event, tti_ms)
    return drx_step(state, event, tti_ms)


def initial_state(cfg):
    from .config import Algorithm
    if cfg.algorithm is Algorithm.SET:
        return SetControllerState.from_config(cfg)
    return DrxControllerState.from_config(cfg)


STATE_TRACE_COLUMNS = ("tti", "mode", "ppt_ms", "iec_j", "fec_j", "window_ms")


def state_trace_row(tti, state):
    if isinstance(state, SetControllerState):
        return (tti, state.mode.value, state.ppt_ms, state.iec_j, state.fec_j, state.remaining_window_ms)
    return (tti, state.mode.value, "", "", "", state.remaining_window_ms)


def write_state_trace_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATE_TRACE_COLUMNS)
        w.writerows(rows)
