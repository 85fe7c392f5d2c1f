import pytest

from beaconsim.engine import Simulator
from beaconsim.mac.frames import Frame, FrameKind
from beaconsim.phy import Channel, PhyError, PhyStatus, TrxState


def make(positions, range_m=18.0):
    sim = Simulator()
    ch = Channel(sim, range_m)
    radios = [ch.attach(i, p) for i, p in enumerate(positions)]
    got = {i: [] for i in range(len(radios))}
    for r in radios:
        r.set_trx_state(TrxState.RX_ON)
        r.on_indication = lambda f, tx, i=r.node_id: got[i].append(f.seq)
        r.on_confirm = lambda tx, r=r: r.set_trx_state(TrxState.RX_ON)
    return sim, ch, radios, got


def send(sim, radio, seq, at, payload=10):
    def go():
        radio.set_trx_state(TrxState.TX_ON)
        assert radio.pd_data_request(Frame(FrameKind.DATA, radio.node_id, 0, seq, payload)) \
            is PhyStatus.SUCCESS
    sim.schedule(at, go)


def test_delivery_within_range_only():
    sim, ch, (a, b, c), got = make([(0, 0), (10, 0), (30, 0)])
    send(sim, a, 1, 0)
    sim.run_until(1000)
    assert got[1] == [1] and got[2] == []
    assert ch.stats.delivered == 1 and ch.stats.out_of_range == 1


def test_range_boundary_is_inclusive():
    sim, ch, _, _ = make([(0, 0), (18, 0), (18.0001, 0)])
    assert ch.in_range(0, 1) and not ch.in_range(0, 2)


def test_overlapping_frames_corrupt_each_other():
    sim, ch, (a, b, c), got = make([(0, 0), (5, 0), (10, 0)])
    send(sim, a, 1, 0)   # 23 bytes -> 46 symbols
    send(sim, c, 2, 45)
    sim.run_until(1000)
    assert got[1] == []
    assert ch.stats.corrupted >= 2


def test_back_to_back_frames_do_not_collide():
    sim, ch, (a, b, c), got = make([(0, 0), (5, 0), (10, 0)])
    send(sim, a, 1, 0)
    send(sim, c, 2, 46)
    sim.run_until(1000)
    assert got[1] == [1, 2]


def test_hidden_terminals_collide_at_the_middle_node():
    # a and c cannot hear each other, b hears both
    sim, ch, (a, b, c), got = make([(-10, 0), (0, 0), (10, 0)])
    tx_seen = []
    ch.on_tx_end.append(tx_seen.append)
    send(sim, a, 1, 0)
    send(sim, c, 2, 20)
    sim.run_until(1000)
    assert got[1] == []
    assert all(t.corrupted_at == {1} for t in tx_seen)


def test_cca_senses_window_of_eight_symbols():
    sim, ch, (a, b), _ = make([(0, 0), (5, 0)])
    send(sim, a, 1, 100)  # on air [100, 146)
    results = {}
    for t in (99, 100, 101, 146, 153, 154, 155):
        sim.schedule(t, lambda t=t: results.__setitem__(t, b.plme_cca_request()))
    sim.run_until(1000)
    busy = {t for t, s in results.items() if s is PhyStatus.BUSY}
    assert busy == {101, 146, 153}


def test_sender_does_not_sense_itself_and_cca_needs_rx():
    sim, ch, (a, b), _ = make([(0, 0), (5, 0)])
    send(sim, b, 1, 0)
    out = []
    sim.schedule(20, lambda: out.append(a.plme_cca_request()))
    sim.schedule(21, lambda: a.set_trx_state(TrxState.TRX_OFF))
    sim.schedule(22, lambda: out.append(a.plme_cca_request()))
    sim.run_until(100)
    assert out == [PhyStatus.BUSY, PhyStatus.ERROR_TRX_STATE]


def test_transmit_requires_tx_on_and_one_frame_at_a_time():
    sim, ch, (a, b), _ = make([(0, 0), (5, 0)])
    assert a.pd_data_request(Frame(FrameKind.DATA, 0, 1)) is PhyStatus.ERROR_TRX_STATE
    a.set_trx_state(TrxState.TX_ON)
    a.pd_data_request(Frame(FrameKind.DATA, 0, 1))
    with pytest.raises(PhyError):
        a.pd_data_request(Frame(FrameKind.DATA, 0, 1))


def test_leaving_rx_aborts_reception():
    sim, ch, (a, b), got = make([(0, 0), (5, 0)])
    send(sim, a, 1, 0)
    sim.schedule(10, lambda: b.set_trx_state(TrxState.TRX_OFF))
    sim.schedule(20, lambda: b.set_trx_state(TrxState.RX_ON))
    sim.run_until(1000)
    assert got[1] == [] and ch.stats.aborted == 1


def test_sleeping_node_misses_frames_started_while_off():
    sim, ch, (a, b), got = make([(0, 0), (5, 0)])
    b.set_trx_state(TrxState.TRX_OFF)
    send(sim, a, 1, 0)
    sim.schedule(5, lambda: b.set_trx_state(TrxState.RX_ON))
    sim.run_until(1000)
    assert got[1] == []


def test_corrupt_filter_scripts_losses():
    sim, ch, (a, b), got = make([(0, 0), (5, 0)])
    ch.corrupt_filter = lambda tx, rid: tx.frame.seq == 2
    for k, seq in enumerate((1, 2, 3)):
        send(sim, a, seq, 100 * k)
    sim.run_until(1000)
    assert got[1] == [1, 3]


def test_invalid_range():
    with pytest.raises(ValueError):
        Channel(Simulator(), 0)
