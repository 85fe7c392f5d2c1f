import random
import sys
from pathlib import Path

import pytest

from beaconsim.engine import Simulator
from beaconsim.mac.csma import SlottedCsmaCa
from beaconsim.mac.superframe import SuperframeConfig, superframe_timeline

sys.path.insert(0, str(Path(__file__).parent))


def run_scripted_csma(outcomes, seed, start_at=0, needed=0, ble=False, timeline=None):
    """Drive one CSMA/CA attempt whose CCAs return the scripted outcomes."""
    sim = Simulator(seed)
    tl = timeline or superframe_timeline(SuperframeConfig(14, 14), 0)
    script = iter(outcomes)
    log = []
    result = {}
    csma = SlottedCsmaCa(
        sim, random.Random(seed),
        cap_window=lambda t: tl if tl.cap[0] <= t < tl.cap[1] else None,
        clear_channel=lambda: next(script),
        transmit=lambda: result.setdefault("status", "SUCCESS"),
        failed=lambda status: result.setdefault("status", status.value),
        battery_life_extension=ble,
        log=log,
    )
    sim.schedule(start_at, csma.start, needed)
    sim.run_until(tl.end)
    return log, result.get("status"), csma


@pytest.fixture
def scripted_csma():
    return run_scripted_csma


# -- acceptance verdict lines ---------------------------------------------------

_VERDICTS: dict[int, str] = {}


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.notes = number, title, []

    def note(self, text):
        self.notes.append(text)

    def __enter__(self):
        return self.note

    def __exit__(self, exc_type, exc, tb):
        detail = "; ".join(self.notes)
        if exc_type is None:
            _VERDICTS[self.number] = f"PASS criterion {self.number:>2} {self.title}: {detail}"
        else:
            reason = str(exc).splitlines()[0] if str(exc) else exc_type.__name__
            _VERDICTS[self.number] = (f"FAIL criterion {self.number:>2} {self.title}: {detail}"
                                      f"{'; ' if detail else ''}{reason}")
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[number])
