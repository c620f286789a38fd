import numpy as np
import pytest

from engine.core import Engine
from fpcore.bits import RoundingMode

# Golden program operands
NUM1 = 0x408C1C7D7325BEB4
NUM2 = 0x40C189C86124683C
NUM3 = 0x40BED71F07C21181
NUM4 = 0x405F1029B91B1E7C
NUM5 = 0x408F3FD41C730A4B
GOLDEN_RESULT = 0x429CD39473615714

ALL_MODES = list(RoundingMode)

@pytest.fixture
def rng():
    return np.random.default_rng(20240601)

def run_checked(config, program):
    """Run with the per-cycle queue invariants asserted"""
    engine = Engine(config)

    def on_cycle(cycle):
        assert len(cycle.issues) <= 2
        assert engine.queue.check_conservation()

    return engine.run(program, on_cycle=on_cycle)
