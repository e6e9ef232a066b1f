import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradsync.clocks import (
    DriftKind,
    DriftSchedule,
    HardwareClock,
    hardware_interval,
    make_drift_schedule,
)

HORIZON = 1000.0


def test_constant_is_real_time():
    s = make_drift_schedule(DriftKind.CONSTANT, 3, 8, rho=0.5, seed=0, horizon=HORIZON)
    assert np.all(s.rates == 1.0)
    assert hardware_interval(HardwareClock(3, s), 0, 100) == 100


def test_alternating_extremes():
    even = make_drift_schedule("alternating_extremes", 2, 8, 1e-4, 0, HORIZON)
    odd = make_drift_schedule("alternating_extremes", 3, 8, 1e-4, 0, HORIZON)
    assert even.rate_at(0) == even.rate_at(999) == 1.0001
    assert odd.rate_at(500) == 1.0


def test_ramp_then_recovery():
    s = make_drift_schedule("ramp_across_nodes", 7, 8, 1e-4, 0, HORIZON)
    assert s.rate_at(0) == pytest.approx(1.0001)
    assert s.rate_at(HORIZON / 2) == 1.0
    first = make_drift_schedule("ramp_across_nodes", 0, 8, 1e-4, 0, HORIZON)
    assert first.rate_at(10) == 1.0
    mid = make_drift_schedule("ramp_across_nodes", 2, 5, 1e-4, 0, HORIZON)
    assert mid.rate_at(10) == pytest.approx(1.00005)


def test_random_walk_deterministic_and_bounded():
    a = make_drift_schedule("seeded_random_walk", 4, 8, 1e-3, seed=7, horizon=HORIZON)
    b = make_drift_schedule("seeded_random_walk", 4, 8, 1e-3, seed=7, horizon=HORIZON)
    c = make_drift_schedule("seeded_random_walk", 4, 8, 1e-3, seed=8, horizon=HORIZON)
    assert np.array_equal(a.rates, b.rates) and np.array_equal(a.starts, b.starts)
    assert not np.array_equal(a.rates, c.rates)
    assert np.all(np.diff(a.starts) == 10.0)
    assert np.all((a.rates >= 1) & (a.rates <= 1.001))


def test_invalid_rho():
    with pytest.raises(ValueError):
        make_drift_schedule("constant", 0, 1, 1.0, 0, HORIZON)
    with pytest.raises(ValueError):
        make_drift_schedule("constant", 0, 1, -0.1, 0, HORIZON)


def test_schedule_rejects_out_of_band_rates():
    with pytest.raises(ValueError):
        DriftSchedule(DriftKind.CONSTANT, np.array([0.0]), np.array([0.99]), 10.0, 0.1)


def test_linear_clock():
    s = make_drift_schedule("alternating_extremes", 0, 2, 1e-4, 0, HORIZON)
    assert hardware_interval(HardwareClock(0, s), 0, 100) == pytest.approx(100.01, rel=1e-15)


def test_piecewise_sum():
    rho = 1e-4
    s = DriftSchedule(DriftKind.CONSTANT, np.array([0.0, 50.0]), np.array([1.0, 1 + rho]), 100.0, rho)
    assert hardware_interval(HardwareClock(0, s), 0, 100) == pytest.approx(50 + 50 * (1 + rho), rel=1e-15)


def test_interval_errors():
    c = HardwareClock(0, make_drift_schedule("constant", 0, 1, 0.0, 0, 10.0))
    with pytest.raises(ValueError):
        hardware_interval(c, 5, 4)
    with pytest.raises(ValueError):
        hardware_interval(c, 0, 11)


def test_inverse_round_trip():
    s = make_drift_schedule("seeded_random_walk", 1, 4, 1e-2, 3, HORIZON)
    c = HardwareClock(1, s, h0=5.0)
    for t in [0.0, 3.3, 10.0, 555.5, 999.0]:
        assert c.real_time_of(c.value(t)) == pytest.approx(t, abs=1e-9)


schedules = st.builds(
    make_drift_schedule,
    st.sampled_from(list(DriftKind)),
    st.integers(0, 15),
    st.just(16),
    st.sampled_from([0.0, 1e-4, 1e-2, 0.5]),
    st.integers(0, 2**32 - 1),
    st.just(HORIZON),
)
times = st.floats(0, HORIZON, allow_nan=False)


@settings(max_examples=10_000)
@given(schedules, times, times)
def test_drift_bound(s, a, b):
    t1, t2 = min(a, b), max(a, b)
    dh = hardware_interval(HardwareClock(0, s), t1, t2)
    tol = 1e-9
    assert (t2 - t1) - tol <= dh <= (1 + s.rho) * (t2 - t1) + tol
    if t2 > t1:
        assert dh > 0


@given(schedules, times, times, times)
def test_additivity(s, a, b, c):
    t1, t2, t3 = sorted((a, b, c))
    clk = HardwareClock(0, s)
    whole = hardware_interval(clk, t1, t3)
    parts = hardware_interval(clk, t1, t2) + hardware_interval(clk, t2, t3)
    assert whole == pytest.approx(parts, rel=1e-12, abs=1e-9)
