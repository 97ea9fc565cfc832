import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setsim.errors import DomainError, OrderingError
from setsim.traffic import (IatEstimator, Packet, arrival_times, cell_trace, generate_arrivals,
                            periodic_arrivals, read_trace_csv, update_iat, write_trace_csv)


def test_zero_rate_is_empty():
    assert generate_arrivals(0.0, 1000.0, 1, 0) == []


def test_count_within_three_sigma():
    n = len(generate_arrivals(50.0, 100_000.0, 7, 3))
    assert abs(n - 5000) <= 3 * math.sqrt(5000)


def test_reproducible():
    a = generate_arrivals(5.0, 10_000.0, 11, 2)
    b = generate_arrivals(5.0, 10_000.0, 11, 2)
    assert [(p.arrival_time_ms, p.size_bits) for p in a] == [(p.arrival_time_ms, p.size_bits) for p in b]


def test_ordered_and_within_horizon():
    t = arrival_times(20.0, 5000.0, 4, 9)
    assert np.all(np.diff(t) > 0)
    assert t.min() >= 0 and t.max() < 5000.0


def test_mean_gap_within_five_percent():
    t = arrival_times(100.0, 200_000.0, 5, 0)
    assert len(t) > 10_000
    assert np.mean(np.diff(t)) == pytest.approx(10.0, rel=0.05)


def test_users_get_independent_streams():
    a = arrival_times(10.0, 5000.0, 1, 0)
    b = arrival_times(10.0, 5000.0, 1, 1)
    assert not np.array_equal(a[:5], b[:5])


def test_rejects_bad_arguments():
    with pytest.raises(DomainError):
        arrival_times(-1.0, 100.0, 0, 0)
    with pytest.raises(DomainError):
        arrival_times(1.0, 0.0, 0, 0)
    with pytest.raises(DomainError):
        Packet(0, 0, 0.0, 0)


def test_cell_trace_is_merged_and_renumbered():
    trace = cell_trace(5, 20.0, 2000.0, 3, 8000)
    keys = [(p.arrival_time_ms, p.ue_id) for p in trace]
    assert keys == sorted(keys)
    assert [p.packet_id for p in trace] == list(range(len(trace)))
    assert {p.ue_id for p in trace} <= set(range(5))


def test_periodic():
    ps = periodic_arrivals(10.0, 35.0, 2, offset_ms=5.0)
    assert [p.arrival_time_ms for p in ps] == [5.0, 15.0, 25.0]


class TestIat:
    def test_worked_example(self):
        est = IatEstimator(0.7, 10.0, 100.0)
        assert update_iat(est, 120.0).estimate_ms == pytest.approx(17.0, rel=1e-12)

    def test_a_one_tracks_newest_gap(self):
        est = IatEstimator(1.0)
        for t in (0.0, 4.0, 11.0, 30.0):
            est = update_iat(est, t)
        assert est.estimate_ms == 19.0

    def test_a_zero_freezes_after_start(self):
        est = update_iat(IatEstimator(0.0), 3.0)
        start = est.estimate_ms
        for t in (10.0, 50.0, 51.0):
            est = update_iat(est, t)
        assert est.estimate_ms == start == 0.0

    def test_first_arrival_counts_as_zero_gap(self):
        est = update_iat(IatEstimator(0.3), 42.0)
        assert est.estimate_ms == 0.0 and est.last_arrival_ms == 42.0

    def test_weights_sum_to_one(self):
        est = IatEstimator(0.3)
        assert est.weight_a + est.weight_b == 1.0

    def test_regression_raises(self):
        est = update_iat(IatEstimator(0.5), 10.0)
        with pytest.raises(OrderingError):
            update_iat(est, 9.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 1), st.lists(st.floats(0, 1000), min_size=2, max_size=30))
    def test_stays_within_observed_range(self, a, gaps):
        est = update_iat(IatEstimator(a), 0.0)
        t = 0.0
        for g in gaps:
            t += g
            est = update_iat(est, t)
            lo, hi = min([0.0] + gaps), max([0.0] + gaps)
            assert lo - 1e-9 <= est.estimate_ms <= hi + 1e-9


def test_trace_csv_round_trip(tmp_path):
    trace = cell_trace(3, 50.0, 1000.0, 2, 4000)
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    back = read_trace_csv(path)
    assert [(p.ue_id, p.arrival_time_ms, p.size_bits) for p in back] == \
        [(p.ue_id, p.arrival_time_ms, p.size_bits) for p in trace]
