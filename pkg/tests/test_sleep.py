import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setsim.config import ScenarioConfig
from setsim.errors import DomainError, IllegalTransition
from setsim.sleep import (Action, DrxControllerState, Event, SetControllerState, SleepMode, drx_step, fec, iec,
                          next_event, refresh_windows, set_step, window_from_energy, write_state_trace_csv)

A, L, IS, FS, T = (SleepMode.AWAKE, SleepMode.LISTENING, SleepMode.INITIAL_SLEEP,
                   SleepMode.FINAL_SLEEP, SleepMode.TERMINATED)


class TestIec:
    def test_full_battery(self):
        assert iec(100.0, 100.0, 20.0) == 0.0

    def test_empty_battery(self):
        assert iec(100.0, 0.0, 20.0) == 20.0

    def test_worked_example(self):
        assert iec(100.0, 25.0, 20.0) == pytest.approx(15.0, rel=1e-9)

    def test_rejects_empty_capacity(self):
        with pytest.raises(DomainError):
            iec(0.0, 0.0, 10.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1, 1e4), st.floats(0, 1), st.floats(0, 1), st.floats(0.1, 100))
    def test_bounded_and_nonincreasing_in_remaining(self, total, f1, f2, e_max):
        lo, hi = sorted((f1 * total, f2 * total))
        assert 0.0 <= iec(total, hi, e_max) <= iec(total, lo, e_max) <= e_max


class TestFec:
    def test_boundary_weights(self):
        assert fec(1.0, 20.0, 2.0) == 20.0
        assert fec(0.0, 20.0, 2.0) == 2.0

    def test_worked_example(self):
        assert fec(0.5, 20.0, 2.0) == pytest.approx(11.0, rel=1e-9)

    @pytest.mark.parametrize("a", [-0.1, 1.1])
    def test_rejects_weight_out_of_range(self, a):
        with pytest.raises(DomainError):
            fec(a, 20.0, 2.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 50), st.floats(0, 50))
    def test_bounded_and_nondecreasing_in_weight(self, a1, a2, x, y):
        e_min, e_max = sorted((x, y))
        lo, hi = sorted((a1, a2))
        assert e_min - 1e-9 <= fec(lo, e_max, e_min) <= fec(hi, e_max, e_min) + 1e-12
        assert fec(hi, e_max, e_min) <= e_max + 1e-9


class TestWindow:
    def test_anchors(self):
        assert window_from_energy(1.0, 1.0, 10.0, 2.0, 64.0) == 2.0
        assert window_from_energy(10.0, 1.0, 10.0, 2.0, 64.0) == 64.0

    def test_midpoint(self):
        assert window_from_energy(5.5, 1.0, 10.0, 2.0, 64.0) == 33.0

    def test_rounds_up_to_whole_ttis(self):
        assert window_from_energy(3.7, 1.0, 10.0, 2.0, 64.0) == 21.0

    def test_clamps(self):
        assert window_from_energy(-5.0, 1.0, 10.0, 2.0, 64.0) == 2.0
        assert window_from_energy(50.0, 1.0, 10.0, 2.0, 64.0) == 64.0

    def test_degenerate_energy_range(self):
        with pytest.raises(DomainError):
            window_from_energy(1.0, 1.0, 1.0, 2.0, 64.0)


def set_state(**kw):
    base = dict(e_total_j=1000.0, e_remained_j=1000.0, e_max_j=10.0, e_min_j=1.0, t_min_ms=2.0, t_max_ms=64.0)
    base.update(kw)
    return refresh_windows(SetControllerState(**base))


class TestSetStep:
    @pytest.mark.parametrize("mode", [A, L, IS, FS])
    def test_termination_from_any_mode(self, mode):
        st_, act = set_step(SetControllerState(mode=mode, remaining_window_ms=3.0), Event.TERMINATION_REQUEST)
        assert st_.mode is T and act is Action.TERMINATE

    @pytest.mark.parametrize("event", list(Event))
    def test_terminated_is_absorbing(self, event):
        st_, act = set_step(SetControllerState(mode=T), event)
        assert st_.mode is T and act is Action.TERMINATE

    def test_processing_gate(self):
        st_, act = set_step(set_state(), Event.PACKET_AVAILABLE)
        assert st_.ppt_ms == 1.0 and act is not Action.TRANSMIT
        st_, act = set_step(st_, Event.PACKET_AVAILABLE)
        assert act is Action.TRANSMIT and st_.mode is A

    def test_idle_enters_initial_sleep(self):
        st_, act = set_step(set_state(ppt_ms=1.0), Event.NO_PACKET)
        assert st_.mode is IS and act is Action.SLEEP
        assert st_.remaining_window_ms == st_.initial_window_ms - 1.0

    def test_initial_window_widens_as_battery_drains(self):
        full = set_state()
        low = set_state(e_remained_j=100.0)
        assert low.initial_window_ms > full.initial_window_ms
        assert low.iec_j == pytest.approx(9.0)

    def test_window_expiry_requires_zero_remaining(self):
        with pytest.raises(IllegalTransition):
            set_step(SetControllerState(mode=IS, remaining_window_ms=2.0), Event.WINDOW_EXPIRED)

    def test_expired_window_needs_an_expiry_event(self):
        with pytest.raises(IllegalTransition):
            set_step(SetControllerState(mode=FS, remaining_window_ms=0.0), Event.NO_PACKET)

    def test_window_expired_is_illegal_when_awake(self):
        with pytest.raises(IllegalTransition):
            set_step(set_state(), Event.WINDOW_EXPIRED)

    def test_listening_then_final_sleep(self):
        st_, act = set_step(SetControllerState(mode=IS), Event.WINDOW_EXPIRED)
        assert st_.mode is L and act is Action.LISTEN
        st_, act = set_step(refresh_windows(st_), Event.NO_PACKET)
        assert st_.mode is FS and st_.remaining_window_ms == st_.final_window_ms - 1.0

    def test_iat_caps_the_window(self):
        assert set_state(iat_ms=10.0).final_window_ms < set_state().final_window_ms


EVENTS = st.sampled_from(list(Event))


def _drive(step_fn, state, events):
    seq = []
    for e in events:
        e2 = next_event(state, e is Event.PACKET_AVAILABLE, e is Event.TERMINATION_REQUEST)
        state, act = step_fn(state, e2)
        seq.append((state, act))
    return seq


@settings(max_examples=100, deadline=None)
@given(st.lists(EVENTS, max_size=80))
def test_set_never_transmits_before_processing_time(events):
    state = set_state()
    for e in events:
        before = state.ppt_ms
        state, act = set_step(state, next_event(state, e is Event.PACKET_AVAILABLE, e is Event.TERMINATION_REQUEST))
        if act is Action.TRANSMIT:
            assert before >= 1.0
        assert state.remaining_window_ms >= 0 and state.ppt_ms >= 0


@settings(max_examples=100, deadline=None)
@given(st.lists(EVENTS, max_size=80))
def test_controllers_are_deterministic_and_terminated_absorbs(events):
    for step_fn, init in ((set_step, set_state()), (drx_step, DrxControllerState())):
        a = _drive(step_fn, init, events)
        b = _drive(step_fn, init, events)
        assert a == b
        modes = [s.mode for s, _ in a]
        if T in modes:
            assert all(m is T for m in modes[modes.index(T):])


def drx(**kw):
    base = dict(on_duration_ms=2.0, inactivity_timer_ms=3.0, short_cycle_ms=6.0, long_cycle_ms=12.0,
                short_cycle_count=2)
    base.update(kw)
    return DrxControllerState(**base)


def run_drx(state, backlog):
    modes = []
    for b in backlog:
        state, _ = drx_step(state, next_event(state, b))
        modes.append(state.mode)
    return modes


class TestDrxStep:
    def test_back_to_back_packets_stay_awake(self):
        assert set(run_drx(drx(), [True] * 50)) == {A}

    def test_free_running_cycle_period(self):
        modes = run_drx(drx(short_cycle_count=0), [False] * 60)
        wakes = [i for i in range(1, len(modes)) if modes[i] is L and modes[i - 1] is FS]
        assert [b - a for a, b in zip(wakes, wakes[1:])] == [12] * (len(wakes) - 1)

    def test_short_cycles_then_long(self):
        modes = run_drx(drx(), [False] * 40)
        assert modes[3:7] == [IS] * 4 and modes[15:25] == [FS] * 10

    def test_packet_mid_sleep_waits_for_window(self):
        # 40-TTI sleep window entered at t=3; packet lands at t=4.
        backlog = [False] * 4 + [True] * 60
        modes = run_drx(drx(long_cycle_ms=42.0, short_cycle_count=0), backlog)
        first_awake = next(i for i in range(4, len(modes)) if modes[i] is A)
        assert first_awake - 4 == 39

    def test_invariants(self):
        with pytest.raises(DomainError):
            DrxControllerState(short_cycle_ms=80.0, long_cycle_ms=20.0)
        with pytest.raises(DomainError):
            DrxControllerState(inactivity_timer_ms=-1.0)


def test_state_trace_csv(tmp_path):
    path = tmp_path / "trace.csv"
    write_state_trace_csv([(0, "Awake", 0.0, 0.0, 3.7, 0.0)], path)
    assert path.read_text() == "tti,mode,ppt_ms,iec_j,fec_j,window_ms\n0,Awake,0.0,0.0,3.7,0.0\n"


def test_from_config_uses_configured_bounds():
    st_ = SetControllerState.from_config(ScenarioConfig(window_bounds_ms=(4.0, 40.0)))
    assert st_.initial_window_ms == 4.0
    assert (st_.t_min_ms, st_.t_max_ms) == (4.0, 40.0)
