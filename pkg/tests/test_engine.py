import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adhocsim.engine import EventQueue, RngStream, uniform_jitter


def test_schedule_into_empty_queue():
    q = EventQueue()
    q.schedule(0.0, "TrafficTick")
    assert len(q) == 1
    assert q.peek().fire_at == 0.0


def test_equal_times_dispatch_in_insertion_order():
    q = EventQueue()
    seen = []
    q.schedule(0.005, "a", lambda: seen.append("first"))
    q.schedule(0.005, "b", lambda: seen.append("second"))
    q.run_until(1.0)
    assert seen == ["first", "second"]


def test_out_of_order_scheduling_dispatches_by_time():
    q = EventQueue()
    seen = []
    q.schedule(0.003, "late", lambda: seen.append(0.003))
    q.schedule(0.001, "early", lambda: seen.append(0.001))
    q.run_until(1.0)
    assert seen == [0.001, 0.003]


def test_scheduling_in_the_past_fails():
    q = EventQueue()
    q.schedule(1.0, "x")
    q.run_until(2.0)
    with pytest.raises(ValueError, match="past"):
        q.schedule(1.5, "y")


def test_nan_time_rejected():
    with pytest.raises(ValueError):
        EventQueue().schedule(float("nan"), "x")


def test_run_empty_queue_advances_to_horizon():
    q = EventQueue()
    assert q.run_until(60.0) == 0
    assert q.now == 60.0


def test_run_until_boundary_is_inclusive():
    q = EventQueue()
    for t in (0.001, 0.002, 0.003):
        q.schedule(t, "tick", lambda: None)
    assert q.run_until(0.002) == 2
    assert len(q) == 1


def test_followups_within_horizon_are_dispatched():
    q = EventQueue()
    seen = []

    def first():
        seen.append(q.now)
        q.schedule_in(0.01, "follow", lambda: seen.append(q.now))

    q.schedule(0.0, "first", first)
    assert q.run_until(1.0) == 2
    assert seen == [0.0, 0.01]


def test_cancelled_events_are_skipped():
    q = EventQueue()
    seen = []
    ev = q.schedule(0.1, "x", lambda: seen.append(1))
    ev.cancel()
    assert q.run_until(1.0) == 0
    assert seen == []


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=0, max_value=10, allow_nan=False), min_size=1, max_size=60))
def test_dispatch_order_matches_sort_oracle(times):
    q = EventQueue()
    seen = []
    for i, t in enumerate(times):
        q.schedule(t, "e", lambda i=i: seen.append(i))
    q.run_until(10.0)
    expected = [i for _, i in sorted((t, i) for i, t in enumerate(times))]
    assert seen == expected


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 5), st.floats(0, 1)), min_size=1, max_size=30))
def test_time_never_decreases_with_nested_scheduling(steps):
    q = EventQueue()
    stamps = []

    def handler(extra):
        stamps.append(q.now)
        if extra > 0.5:
            q.schedule_in(extra, "child", lambda: stamps.append(q.now))

    for t, extra in steps:
        q.schedule(t, "e", lambda extra=extra: handler(extra))
    q.run_until(10.0)
    assert stamps == sorted(stamps)


def test_uniform_jitter_range_and_contract():
    rng = RngStream(7)
    draws = [uniform_jitter(rng, 0.0, 0.01) for _ in range(1000)]
    assert all(0.0 <= d < 0.01 for d in draws)
    with pytest.raises(ValueError):
        uniform_jitter(rng, 0.01, 0.01)
    with pytest.raises(ValueError):
        uniform_jitter(rng, -0.1, 0.01)


def test_uniform_jitter_is_reproducible():
    a, b = RngStream(42), RngStream(42)
    assert [a.uniform_jitter(0, 0.01) for _ in range(50)] == [b.uniform_jitter(0, 0.01) for _ in range(50)]


def test_uniform_jitter_mean():
    rng = RngStream(3)
    mean = statistics.fmean(uniform_jitter(rng, 0.0, 0.01) for _ in range(100_000))
    assert abs(mean - 0.005) <= 0.0005
