"""Architectural meaning of each instruction, and the in-order reference run."""
import logging
from dataclasses import dataclass, field
from typing import Collection, Dict, List, Optional, Sequence, Tuple

from fpcore.addsub import AddSubOp, add_sub
from fpcore.bits import ExceptionFlags
from fpcore.compare import MinMaxKind, MoveKind, class_mask, compare, minmax, move_family
from fpcore.fmac import FmacOp, fmac
from fpcore.multiply import mul
from fpcore.reciprocal import div, recip
from isa.fcsr import Fcsr, fcsr_accrue
from isa.instructions import Instruction, Mnemonic
from isa.program import Program

logger = logging.getLogger(__name__)

MINMAX_KIND = {
    Mnemonic.MIN: MinMaxKind.MIN,
    Mnemonic.MAX: MinMaxKind.MAX,
    Mnemonic.MINA: MinMaxKind.MINA,
    Mnemonic.MAXA: MinMaxKind.MAXA,
}
MOVE_KIND = {
    Mnemonic.ABS: MoveKind.ABS,
    Mnemonic.NEG: MoveKind.NEG,
    Mnemonic.MOV: MoveKind.MOV,
}

@dataclass(frozen=True)
class Outcome:
    value: Optional[int] = None
    taken: Optional[bool] = None
    flags: ExceptionFlags = ExceptionFlags.NONE

def evaluate(inst: Instruction, operands: Sequence[int], fcsr: Fcsr) -> Outcome:
    """Compute an instruction's result from its source values"""
    mode, flush = fcsr.rounding_mode, fcsr.flush
    m = inst.mnemonic

    if m == Mnemonic.LDC1:
        return Outcome(value=inst.load_value)
    if m == Mnemonic.SDC1:
        return Outcome(value=operands[0])
    if m == Mnemonic.BC1EQZ:
        return Outcome(taken=(operands[0] & 1) == 0)
    if m == Mnemonic.BC1NEZ:
        return Outcome(taken=(operands[0] & 1) == 1)

    if m == Mnemonic.ADD:
        value, flags = add_sub(operands[0], operands[1], AddSubOp.ADD, mode, flush)
    elif m == Mnemonic.SUB:
        value, flags = add_sub(operands[0], operands[1], AddSubOp.SUB, mode, flush)
    elif m == Mnemonic.MUL:
        value, flags = mul(operands[0], operands[1], mode, flush)
    elif m == Mnemonic.DIV:
        value, flags = div(operands[0], operands[1], mode, flush)
    elif m == Mnemonic.RECIP:
        value, flags = recip(operands[0], mode, flush)
    elif m in (Mnemonic.MADDF, Mnemonic.MSUBF):
        op = FmacOp.MADD if m == Mnemonic.MADDF else FmacOp.MSUB
        value, flags = fmac(operands[0], operands[1], operands[2], op, mode, flush)
    elif m == Mnemonic.CMP:
        value, flags = compare(inst.cond, operands[0], operands[1])
    elif m == Mnemonic.CLASS:
        value, flags = class_mask(operands[0]), ExceptionFlags.NONE
    elif m in MINMAX_KIND:
        value, flags = minmax(MINMAX_KIND[m], operands[0], operands[1])
    else:
        value, flags = move_family(MOVE_KIND[m], operands[0]), ExceptionFlags.NONE

    return Outcome(value=value, flags=flags)

@dataclass
class FunctionalResult:
    captures: List[Tuple[int, int]] = field(default_factory=list)
    registers: Dict[int, int] = field(default_factory=dict)
    branches: List[Tuple[int, bool]] = field(default_factory=list)
    fcsr: Fcsr = field(default_factory=Fcsr)
    trap_index: Optional[int] = None

def functional_run(program: Program, fcsr: Optional[Fcsr] = None,
                   unimplemented: Collection[Mnemonic] = ()) -> FunctionalResult:
    """Evaluate the program strictly in order; registers start at +0"""
    result = FunctionalResult(fcsr=fcsr or Fcsr())
    registers = result.registers

    for index, inst in enumerate(program.instructions):
        operands = [registers.get(r, 0) for r in inst.sources]

        if inst.mnemonic in unimplemented:
            result.fcsr, _ = fcsr_accrue(result.fcsr, ExceptionFlags.UNIMPLEMENTED)
            result.trap_index = index
            break

        outcome = evaluate(inst, operands, result.fcsr)
        if inst.is_load or inst.is_store or inst.is_branch:
            trap = False
        else:
            result.fcsr, trap = fcsr_accrue(result.fcsr, outcome.flags)
        if trap:
            result.trap_index = index
            break

        if inst.is_store:
            result.captures.append((inst.sources[0], outcome.value))
        elif inst.is_branch:
            result.branches.append((index, outcome.taken))
        elif inst.dest is not None:
            registers[inst.dest] = outcome.value

    logger.debug(f"Functional run: {len(result.captures)} captures, trap at {result.trap_index}")
    return result
