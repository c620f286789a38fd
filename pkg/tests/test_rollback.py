import numpy as np
import pytest

from engine.core import CheckpointEvictedError, Engine, EngineConfig, EngineVariant
from engine.stats import RunStatus
from fpcore.bits import RoundingMode
from isa.generate import random_program
from isa.program import Program, parse_program
from isa.semantics import functional_run
from tests.conftest import run_checked

WRONG_PATH = """
LDC1 $f1 @cycle=2 value=0x3FF0000000000000
LDC1 $f2 @cycle=3 value=0x4000000000000000
MUL.D $f3, $f1, $f2
BC1EQZ $f3 !mispredict
ADD.D $f20, $f1, $f2
LDC1 $f9 @cycle=40 value=0x4010000000000000
ADD.D $f9, $f1, $f2
SDC1 $f9
"""

def without(program, squashed):
    dropped = set(squashed)
    return Program([inst for index, inst in enumerate(program.instructions) if index not in dropped])

def run_capturing_rollbacks(program, **settings):
    engine = Engine(EngineConfig(**settings))
    images = []

    def on_cycle(cycle):
        if cycle.rollbacks:
            images.append((cycle.cycle, engine.state_image()))

    report = engine.run(program, on_cycle=on_cycle)
    return report, images

def test_wrong_path_is_squashed():
    report, _ = run_capturing_rollbacks(parse_program(WRONG_PATH))
    assert report.rollbacks == 1
    assert report.squashed == [4, 5]
    assert report.timeline[4].squashed
    assert report.timeline[6].dispatch > report.timeline[3].commit
    assert report.captures == [(9, 0x4008000000000000)]
    assert report.committed == 6

@pytest.mark.parametrize("bmt", [True, False])
def test_rollback_matches_never_speculating(bmt):
    program = parse_program(WRONG_PATH)
    speculative, spec_images = run_capturing_rollbacks(program, bmt_enabled=bmt)
    replay, replay_images = run_capturing_rollbacks(
        without(program, speculative.squashed), bmt_enabled=bmt, speculate=False,
    )
    assert spec_images == replay_images
    assert speculative.schedule() == replay.schedule()
    assert speculative.captures == replay.captures

def test_random_mispredictions_match_never_speculating():
    rng = np.random.default_rng(23)
    for _ in range(20):
        program = random_program(
            rng, length=40, branch_rate=0.15, mispredict_rate=1.0, divide=False, max_load_cycle=20,
        )
        speculative, spec_images = run_capturing_rollbacks(program, checkpoint_depth=1024)
        replay_program = without(program, speculative.squashed)
        replay, replay_images = run_capturing_rollbacks(replay_program, checkpoint_depth=1024, speculate=False)
        assert speculative.schedule() == replay.schedule()
        assert speculative.rollbacks == replay.rollbacks
        assert spec_images == replay_images
        assert speculative.captures == replay.captures == functional_run(replay_program).captures

def test_non_speculative_rollback_is_a_no_op():
    program = parse_program(WRONG_PATH)
    replay, _ = run_capturing_rollbacks(program, speculate=False)
    assert replay.squashed == []
    assert replay.rollbacks == 1
    assert replay.timeline[4].dispatch > replay.timeline[3].commit

def test_evicted_checkpoint():
    with pytest.raises(CheckpointEvictedError):
        Engine(EngineConfig(checkpoint_depth=3)).run(parse_program(WRONG_PATH))

# The wrong-path load lands long before the branch resolves
OVERWRITTEN = """
LDC1 $f2 @cycle=1 value=0x3FF0000000000000
LDC1 $f1 @cycle=30 value=0x3FF0000000000000
BC1EQZ $f1 !mispredict
LDC1 $f2 @cycle=5 value=0x4000000000000000
NEG.D $f1, $f3
NEG.D $f5, $f3
SDC1 $f2
SDC1 $f2
SDC1 $f2
SDC1 $f2
"""

@pytest.mark.parametrize("variant", list(EngineVariant))
def test_squashed_write_is_undone(variant):
    program = parse_program(OVERWRITTEN)
    speculative, _ = run_capturing_rollbacks(program, variant=variant)
    assert 3 in speculative.squashed
    assert speculative.timeline[3].complete < speculative.timeline[2].commit
    assert speculative.captures
    assert all(capture == (2, 0x3FF0000000000000) for capture in speculative.captures)

    replay_program = without(program, speculative.squashed)
    replay, _ = run_capturing_rollbacks(replay_program, variant=variant, speculate=False)
    assert speculative.captures == replay.captures == functional_run(replay_program).captures

def test_squashed_write_matches_replay_image():
    program = parse_program(OVERWRITTEN)
    speculative, spec_images = run_capturing_rollbacks(program)
    _, replay_images = run_capturing_rollbacks(without(program, speculative.squashed), speculate=False)
    assert spec_images == replay_images
    _, (registers, *_) = spec_images[0]
    assert registers[2] == 0x3FF0000000000000

def test_squashed_write_keeps_the_oldest_value():
    program = parse_program(OVERWRITTEN.replace(
        "NEG.D $f1, $f3", "LDC1 $f2 @cycle=8 value=0x4008000000000000",
    ))
    report, _ = run_capturing_rollbacks(program)
    assert {3, 4} <= set(report.squashed)
    assert all(value == 0x3FF0000000000000 for _, value in report.captures)

@pytest.mark.slow
@pytest.mark.parametrize("variant", list(EngineVariant))
def test_rollback_sweep(variant):
    rng = np.random.default_rng([29, int(variant == EngineVariant.V2)])
    for index in range(500):
        config = EngineConfig(
            variant=variant, checkpoint_depth=4096, rounding_mode=RoundingMode(index % 4), flush=index % 3 == 0,
        )
        program = random_program(
            rng, length=40, registers=6 + index % 11, load_rate=0.3, store_rate=0.2,
            branch_rate=0.15, mispredict_rate=0.5, divide=False, max_load_cycle=30,
        )
        report = run_checked(config, program)
        survivors = without(program, report.squashed)
        reference = functional_run(survivors, fcsr=config.fcsr())
        assert report.status == RunStatus.OK
        assert report.captures == reference.captures
        assert report.fcsr_word == reference.fcsr.to_word()
