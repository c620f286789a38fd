from isa.instructions import FORMAT_D, Instruction, Mnemonic, Resource
from isa.fcsr import Fcsr, fcsr_accrue
from isa.program import (
    LoadEvent, Program, TraceError, TraceSyntaxError, UnimplementedInstructionError,
    load_program, parse_program, render,
)
from isa.semantics import FunctionalResult, Outcome, evaluate, functional_run
