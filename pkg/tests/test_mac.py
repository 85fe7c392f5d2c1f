from beaconsim.engine import seconds_to_symbols
from beaconsim.mac.frames import FrameKind, GtsDirection
from beaconsim.mac.layer import DeviceState
from beaconsim.metrics import DropCause, packet_delivery_ratio
from beaconsim.phy import TrxState
from beaconsim.scenario import RunPoint, ScenarioConfig, build_network
from beaconsim.trace import parse_lines


def network(bo=3, so=3, n=1, seed=1, **overrides):
    cfg = ScenarioConfig(n_devices=[n], trace=True, **overrides)
    sim, channel, recorder, tracer, coord, devices = build_network(cfg, RunPoint(bo, so, n), seed)
    return sim, channel, recorder, tracer, coord, devices


def run(sim, seconds):
    sim.run_until(seconds_to_symbols(seconds))


def events(tracer, node=None):
    return [(r.time, r.event) for r in parse_lines(tracer.lines) if node is None or r.node == node]


def first_index(evs, prefix):
    return next(i for i, (_, e) in enumerate(evs) if e.startswith(prefix))


def test_gts_request_exchange_sequence():
    sim, ch, rec, tracer, coord, (dev,) = network(n_gts_devices=1, gts_length=2, interval_s=100)
    run(sim, 5)
    assert dev.gts is not None
    assert (dev.gts.start_slot, dev.gts.length) == (14, 2)
    assert coord.gts.final_cap_slot == 13
    evs = events(tracer)
    req = first_index(evs, "sending gts request command")
    ack = first_index(evs, "ack for gts request command received")
    conf = first_index(evs, "gts confirm (node 1) success received fin_cap=13")
    assert req < ack < conf
    beacon_after = [e for t, e in evs[ack:conf] if e.startswith("sending beacon")]
    assert beacon_after and "gts=1:14:2:0" in beacon_after[0]


def test_association_lines():
    sim, ch, rec, tracer, coord, (dev,) = network(n_gts_devices=0)
    run(sim, 4)
    text = tracer.text()
    assert "beacon transmission successful [channel:11] [PAN_ID:0] [CoordAddr:0]" in text
    assert "(node 1) association successful (beacon enabled)" in text
    assert dev.mac.state is DeviceState.ASSOCIATED
    assert coord.devices == {1: 1}


def test_association_waits_response_wait_time_before_polling():
    sim, ch, rec, tracer, coord, _ = network(n_gts_devices=0)
    run(sim, 4)
    evs = events(tracer, 1)
    acked = evs[first_index(evs, "ack for association request command")][0]
    poll = evs[first_index(evs, "sending data request command")][0]
    assert poll - acked >= 30_720


def test_scan_without_coordinator_fails_and_retries():
    sim, ch, rec, tracer, coord, (dev,) = network(n_gts_devices=0)
    coord.stop()
    sim.run_until(0)
    run(sim, 6)
    text = tracer.text()
    assert text.count("no coordinator found, association fails") >= 2
    assert dev.mac.state is not DeviceState.ASSOCIATED


def test_association_not_permitted():
    sim, ch, rec, tracer, coord, (dev,) = network(n_gts_devices=0)
    coord.association_permit = False
    run(sim, 4)
    assert "association fails reason=association-not-permitted" in tracer.text()


def test_lost_beacons_orphan_the_device_which_then_reassociates():
    sim, ch, rec, tracer, coord, (dev,) = network(n_gts_devices=0, interval_s=100)
    run(sim, 4)
    assert dev.mac.associated
    cut = sim.now
    jam = {"on": True}
    ch.corrupt_filter = lambda tx, rid: jam["on"] and rid == 1 and tx.frame.kind is FrameKind.BEACON
    run(sim, 4 + 5 * 0.12288 + 0.01)
    evs = [e for t, e in events(tracer, 1) if t > cut]
    assert [e for e in evs if e.startswith("beacon missed")][:4] == [
        f"beacon missed count={k}" for k in (1, 2, 3, 4)][:4]
    assert "orphaned after 4 lost beacons" in evs
    jam["on"] = False
    run(sim, 8)
    assert dev.mac.associated and dev.associations == 2


def one_packet_network():
    """One device that generates a single packet at 5 s."""
    net = network(n_gts_devices=0, interval_s=100, traffic_start_s=100)
    sim, dev = net[0], net[5][0]
    sim.schedule(seconds_to_symbols(5), dev.cbr_tick)
    return net


def test_lost_ack_retransmits_and_counts_duplicate_once():
    sim, ch, rec, tracer, coord, (dev,) = one_packet_network()
    lost = []

    def drop_first_data_ack(tx, rid):
        if tx.frame.kind is FrameKind.ACK and rid == 1 and tx.frame.seq == dev.mac.dsn and not lost:
            lost.append(tx)
            return True
        return False

    run(sim, 4.9)
    ch.corrupt_filter = drop_first_data_ack
    run(sim, 7)
    c = rec.counters
    assert len(lost) == 1
    assert (c.sent_data_frames, c.received_data_frames, c.acked) == (2, 1, 1)
    assert packet_delivery_ratio(c) == 50.0
    assert "no ack for data" in tracer.text()


def test_retries_exhausted_drop_the_packet():
    sim, ch, rec, tracer, coord, (dev,) = one_packet_network()
    run(sim, 4.9)
    ch.corrupt_filter = lambda tx, rid: tx.frame.kind is FrameKind.DATA
    run(sim, 7)
    c = rec.counters
    assert c.sent_data_frames == 4  # first attempt + 3 retries
    assert c.dropped[DropCause.NO_ACK_EXHAUSTED] == 1
    assert c.dropped[DropCause.COLLISION_DATA] == 4


def test_gts_denied_when_not_permitted_falls_back_to_cap():
    sim, ch, rec, tracer, coord, (dev,) = network(n_gts_devices=1, traffic_start_s=5)
    coord.gts.permit = False
    run(sim, 8)
    assert dev.gts_result == "DENIED"
    assert "gts fails reason=DENIED" in tracer.text()
    assert rec.counters.acked > 0
    assert all("access=csma" in l for l in tracer.lines if "phy tx kind=data" in l)


def test_gts_too_short_for_frame_falls_back_to_cap():
    # 60-symbol slots cannot hold a 166-symbol data frame and its ACK
    sim, ch, rec, tracer, coord, (dev,) = network(0, 0, n_gts_devices=1, gts_length=1,
                                                  traffic_start_s=5)
    run(sim, 7)
    assert "gts unusable (FRAME_TOO_LONG), falling back to CAP" in tracer.text()
    assert not dev.use_gts and rec.counters.acked > 0


def test_gts_frames_are_sent_inside_the_allocated_slots():
    sim, ch, rec, tracer, coord, (dev,) = network(4, 3, n_gts_devices=1, gts_length=2,
                                                  traffic_start_s=5)
    run(sim, 10)
    slot, bi = 480, 15_360
    gts_tx = [(t, l) for t, l in events(tracer, 1) if "phy tx kind=data " in l]
    assert gts_tx and all("access=gts" in l for _, l in gts_tx)
    for t, _ in gts_tx:
        assert 14 * slot <= t % bi and t % bi + 166 + 22 <= 16 * slot
    assert packet_delivery_ratio(rec.counters) == 100.0


def test_devices_sleep_in_the_inactive_portion():
    sim, ch, rec, tracer, coord, (dev,) = network(4, 2, n_gts_devices=0, interval_s=100)
    run(sim, 4)
    states = []
    bi, sd = 15_360, 3_840
    base = (sim.now // bi + 1) * bi
    for offset in (sd + 100, bi - 100, bi + 100):
        sim.schedule(base + offset, lambda: states.append((dev.mac.radio.state,
                                                           coord.radio.state)))
    sim.run_until(base + bi + 200)
    assert states[0] == (TrxState.TRX_OFF, TrxState.TRX_OFF)
    assert states[1][0] is TrxState.TRX_OFF
    assert states[2][0] is TrxState.RX_ON


def test_receive_gts_downlink_and_deallocation():
    sim, ch, rec, tracer, coord, (dev,) = network(3, 3, n_gts_devices=1, gts_length=1,
                                                  gts_direction=1, interval_s=100)
    run(sim, 4)
    assert dev.gts.direction is GtsDirection.RECEIVE and not dev.use_gts
    statuses = []
    coord.send_downlink(1, 20, statuses.append)
    run(sim, 4.5)
    assert [s.value for s in statuses] == ["SUCCESS"]
    downlink = [l for l in tracer.lines if "phy tx kind=data dst=1" in l]
    assert downlink and "access=gts" in downlink[0]
    dev.mac.gts_deallocate(GtsDirection.RECEIVE)
    run(sim, 5)
    assert coord.gts.descriptors == [] and dev.mac.gts_rx is None
    coord.send_downlink(1, 20, statuses.append)
    run(sim, 5.5)
    assert statuses[-1].value == "GTS_EXPIRED"


def test_beacons_are_periodic():
    sim, ch, rec, tracer, coord, _ = network(2, 1, n_gts_devices=0)
    run(sim, 3)
    assert coord.beacon_starts == [k * 3840 for k in range(len(coord.beacon_starts))]
