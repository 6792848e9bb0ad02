import pytest
from hypothesis import given, settings, strategies as st

from rmcatsim.metrics import DeliveryLog, compute_utilization, jain_index
from rmcatsim.netmodel import BandwidthSchedule
from rmcatsim.simcore import ms, sec


def test_jain_equal_shares():
    assert jain_index([1.0, 1.0, 1.0]) == pytest.approx(1.0)


def test_jain_single_user():
    assert jain_index([1.0, 0.0, 0.0]) == pytest.approx(1 / 3)


def test_jain_mild_skew():
    assert jain_index([2.0, 1.0, 1.0]) == pytest.approx(16 / 18)


def test_jain_rejects_degenerate_input():
    with pytest.raises(ValueError):
        jain_index([])
    with pytest.raises(ValueError):
        jain_index([0.0, 0.0])
    with pytest.raises(ValueError):
        jain_index([1.0, -1.0])


@given(st.lists(st.floats(min_value=0.001, max_value=1e6), min_size=1, max_size=10))
@settings(max_examples=100, deadline=None)
def test_jain_bounded(rates):
    j = jain_index(rates)
    assert 1 / len(rates) - 1e-9 <= j <= 1.0 + 1e-9


def test_delivery_log_windows():
    log = DeliveryLog()
    for i in range(10):
        log.add(i * ms(100), 1000)
    assert log.bytes_between(0, sec(1)) == 10_000
    assert log.bytes_between(ms(500), sec(1)) == 5_000
    assert log.count_between(ms(500), sec(1)) == 5
    assert log.bytes_between(sec(2), sec(3)) == 0
    assert log.rate_bps(0, sec(1)) == pytest.approx(80_000)


def test_utilization_half_loaded_link():
    log = DeliveryLog()
    for i in range(200):  # 1 Mbps for 20 s as 125-kB chunks every 100 ms
        log.add(i * ms(100), 12_500)
    sched = BandwidthSchedule.constant(2_000_000)
    (row,) = compute_utilization([log], sched, [(0, sec(20))])
    assert row.utilization == pytest.approx(0.5)
    assert row.capacity_bits == 40_000_000


def test_utilization_zero_delivery():
    (row,) = compute_utilization(
        [DeliveryLog()], BandwidthSchedule.constant(2_000_000), [(0, sec(20))]
    )
    assert row.utilization == 0.0


def test_utilization_matches_hand_sum():
    log_a, log_b = DeliveryLog(), DeliveryLog()
    chunks_a = [(ms(150), 700), (ms(950), 1300), (sec(3), 400)]
    chunks_b = [(ms(400), 1000), (sec(2), 2000)]
    for ts, size in chunks_a:
        log_a.add(ts, size)
    for ts, size in chunks_b:
        log_b.add(ts, size)
    sched = BandwidthSchedule.constant(1_000_000)
    (row,) = compute_utilization([log_a, log_b], sched, [(0, sec(1))])
    by_hand = (700 + 1300 + 1000) * 8  # only chunks arriving inside [0, 1 s)
    assert row.delivered_bits == by_hand
    assert row.utilization == pytest.approx(by_hand / 1_000_000)
