from pathlib import Path

import pytest

from fpcore.bits import ExceptionFlags
from fpcore.compare import CmpCond
from isa.fcsr import Fcsr
from isa.generate import random_program
from isa.instructions import FORMAT_D, Instruction, Mnemonic, Resource
from isa.program import (
    TraceSyntaxError, UnimplementedInstructionError, load_program, parse_program, render,
)
from isa.semantics import evaluate, functional_run
from tests.conftest import GOLDEN_RESULT, NUM1

GOLDEN_TRACE = Path(__file__).resolve().parent.parent / "traces" / "golden.trace"

def test_golden_trace_shape():
    program = load_program(GOLDEN_TRACE)
    assert len(program) == 9
    assert len(program.loads) == 5
    assert program.captures == [15]
    assert program.expectations == [(15, GOLDEN_RESULT)]
    assert [load.cycle for load in program.loads] == [4, 5, 9, 6, 8]
    assert program.loads[0].value == NUM1

def test_glued_mnemonic_and_register_case():
    program = parse_program("MADDF$F8, $f10, $f11, $f12\n")
    assert program.instructions == [Instruction(Mnemonic.MADDF, dest=8, sources=(10, 11, 12))]

def test_empty_text():
    assert parse_program("").instructions == []
    assert parse_program("# nothing\n\n   \n").instructions == []

@pytest.mark.parametrize("text, mnemonic", [
    ("SQRT.D $f1,$f2", "SQRT.D"),
    ("CVT.D.S $f1, $f2", "CVT.D.S"),
    ("ADD.S $f1, $f2, $f3", "ADD.S"),
    ("MTC1 $f1", "MTC1"),
])
def test_unimplemented_instruction(text, mnemonic):
    with pytest.raises(UnimplementedInstructionError) as raised:
        parse_program(text)
    assert raised.value.mnemonic == mnemonic
    assert raised.value.line == 1

@pytest.mark.parametrize("text", [
    "FOO $f1, $f2",
    "ADD.D $f1, $f2",
    "ADD.D $f1, $f2, $f32",
    "CMP.D $f1, $f2, $f3",
    "CMP.XX.D $f1, $f2, $f3",
    "LDC1 $f1 @cycle=-1 value=0x0000000000000000",
    "LDC1 $f1 value=0x0000000000000000",
    "BC1EQZ $f1 !taken",
    "ADD.Q $f1, $f2, $f3",
])
def test_syntax_errors(text):
    with pytest.raises(TraceSyntaxError):
        parse_program(text)

def test_syntax_error_reports_line_number():
    text = "ADD.D $f1, $f2, $f3\n# comment\nMUL.D $f1 $f2\n"
    with pytest.raises(TraceSyntaxError) as raised:
        parse_program(text)
    assert raised.value.line == 3

def test_duplicate_load_cycle_rejected():
    text = ("LDC1 $f1 @cycle=3 value=0x3FF0000000000000\n"
            "LDC1 $f1 @cycle=3 value=0x4000000000000000\n")
    with pytest.raises(TraceSyntaxError):
        parse_program(text)

def test_compare_and_branch_forms():
    program = parse_program("cmp.ult $f1, $f2, $f3\nBC1NEZ $f1 !mispredict\nBC1EQZ $f2\n")
    compare, taken_branch, plain_branch = program.instructions
    assert compare.cond == CmpCond.ULT
    assert compare.function_code == 0x25
    assert taken_branch.mispredict and not plain_branch.mispredict
    assert taken_branch.resource == Resource.BRANCH

def test_function_codes_and_resources():
    assert Instruction(Mnemonic.MSUBF, dest=1, sources=(2, 3, 4)).function_code == 0x19
    assert Instruction(Mnemonic.RECIP, dest=1, sources=(2,)).resource == Resource.DIV
    assert Instruction(Mnemonic.LDC1, dest=1, load_cycle=0, load_value=0).resource is None
    assert FORMAT_D == 0x11

def test_render_round_trip_golden():
    program = load_program(GOLDEN_TRACE)
    assert parse_program(render(program)) == program

def test_render_round_trip_random(rng):
    for _ in range(50):
        program = random_program(rng, length=30, branch_rate=0.1, mispredict_rate=0.5)
        program.expectations.append((3, 0x3FF0000000000000))
        assert parse_program(render(program)) == program

def test_functional_run_golden():
    result = functional_run(load_program(GOLDEN_TRACE))
    assert result.captures == [(15, GOLDEN_RESULT)]
    assert result.registers[8] == 0x415ED80F1310CD73
    assert result.registers[9] == 0x412DE829E0065574
    assert result.fcsr.flags == ExceptionFlags.INEXACT
    assert result.trap_index is None

def test_functional_run_stops_at_trap():
    text = ("LDC1 $f1 @cycle=0 value=0x3FF0000000000000\n"
            "DIV.D $f2, $f1, $f0\n"
            "SDC1 $f2\n")
    result = functional_run(parse_program(text), Fcsr(enables=ExceptionFlags.DIVIDE_BY_ZERO))
    assert result.trap_index == 1
    assert result.captures == []
    assert result.fcsr.cause == ExceptionFlags.DIVIDE_BY_ZERO
    assert result.fcsr.flags == ExceptionFlags.NONE

def test_functional_run_unimplemented_divider():
    text = "DIV.D $f2, $f1, $f1\n"
    result = functional_run(parse_program(text), unimplemented={Mnemonic.DIV})
    assert result.trap_index == 0
    assert result.fcsr.cause == ExceptionFlags.UNIMPLEMENTED

@pytest.mark.parametrize("mnemonic, operand, taken", [
    (Mnemonic.BC1EQZ, 0x0000000000000000, True),
    (Mnemonic.BC1EQZ, 0xFFFFFFFFFFFFFFFF, False),
    (Mnemonic.BC1NEZ, 0x0000000000000001, True),
])
def test_branch_outcome(mnemonic, operand, taken):
    outcome = evaluate(Instruction(mnemonic, sources=(1,)), [operand], Fcsr())
    assert outcome.taken is taken
    assert outcome.value is None
