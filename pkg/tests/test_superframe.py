import pytest

from beaconsim.mac.superframe import InvalidConfig, SuperframeConfig, superframe_timeline


@pytest.mark.parametrize("bo,so,bi,sd,slot", [
    (0, 0, 960, 960, 60),
    (3, 3, 7680, 7680, 480),
    (5, 2, 30720, 3840, 240),
    (14, 0, 960 * 2**14, 960, 60),
])
def test_durations(bo, so, bi, sd, slot):
    cfg = SuperframeConfig(bo, so)
    assert (cfg.beacon_interval, cfg.superframe_duration, cfg.slot_duration) == (bi, sd, slot)


def test_duty_cycle():
    assert SuperframeConfig(5, 2).duty_cycle == 0.125
    assert SuperframeConfig(4, 4).duty_cycle == 1.0


@pytest.mark.parametrize("bo,so", [(3, 4), (15, 3), (-1, 0), (2, -1)])
def test_invalid_orders(bo, so):
    with pytest.raises(InvalidConfig):
        SuperframeConfig(bo, so)


def test_timeline_layout():
    cfg = SuperframeConfig(4, 3)
    tl = superframe_timeline(cfg, 15360, final_cap_slot=13, beacon_duration=34)
    assert tl.beacon_end == 15394
    assert tl.cap == (15394, 15360 + 14 * 480)
    assert tl.cfp == (15360 + 14 * 480, 15360 + 7680)
    assert tl.inactive == (15360 + 7680, 15360 + 15360)
    assert tl.slot_start(14) == tl.cfp[0]
    assert len(tl.slot_boundaries) == 16


def test_backoff_boundaries_align_to_beacon_start():
    tl = superframe_timeline(SuperframeConfig(3, 3), 7680, beacon_duration=34)
    assert tl.next_backoff_boundary(0) == 7680 + 40  # not before the CAP
    assert tl.next_backoff_boundary(7720) == 7720
    assert tl.next_backoff_boundary(7721) == 7740


def test_bad_final_cap_slot():
    with pytest.raises(InvalidConfig):
        superframe_timeline(SuperframeConfig(3, 3), 0, final_cap_slot=16)
