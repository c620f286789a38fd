"""Seeded random trace programs for batch runs and tests."""
import logging
from typing import Optional, Sequence

import numpy as np

from fpcore.compare import CmpCond
from fpcore.oracle import random_patterns
from isa.instructions import SOURCE_COUNT, Instruction, Mnemonic
from isa.program import Program

logger = logging.getLogger(__name__)

COMPUTE_MNEMONICS = [
    Mnemonic.ADD, Mnemonic.SUB, Mnemonic.MUL, Mnemonic.DIV, Mnemonic.RECIP,
    Mnemonic.MADDF, Mnemonic.MSUBF, Mnemonic.CMP, Mnemonic.CLASS,
    Mnemonic.MIN, Mnemonic.MAX, Mnemonic.MINA, Mnemonic.MAXA,
    Mnemonic.ABS, Mnemonic.NEG, Mnemonic.MOV,
]
DIVIDER_MNEMONICS = {Mnemonic.DIV, Mnemonic.RECIP}

def random_program(rng: np.random.Generator, length: int = 24, registers: int = 16,
                   load_rate: float = 0.2, store_rate: float = 0.1, branch_rate: float = 0.0,
                   mispredict_rate: float = 0.0, divide: bool = True,
                   mnemonics: Optional[Sequence[Mnemonic]] = None,
                   max_load_cycle: Optional[int] = None) -> Program:
    """Build a random program; the first loads seed every register it reads"""
    choices = list(mnemonics or COMPUTE_MNEMONICS)
    if not divide:
        choices = [m for m in choices if m not in DIVIDER_MNEMONICS]
    max_load_cycle = max_load_cycle or 2 * length + 4

    values = iter(random_patterns(rng, length + registers))
    seen_loads = set()
    program = Program()

    def load(register: int) -> Instruction:
        cycle = int(rng.integers(0, max_load_cycle))
        while (register, cycle) in seen_loads:
            cycle += 1
        seen_loads.add((register, cycle))
        return Instruction(Mnemonic.LDC1, dest=register, load_cycle=cycle, load_value=next(values))

    for register in range(min(registers, 4)):
        program.instructions.append(load(register))

    while len(program.instructions) < length:
        roll = rng.random()
        register = int(rng.integers(0, registers))

        if roll < load_rate:
            program.instructions.append(load(register))
        elif roll < load_rate + store_rate:
            program.instructions.append(Instruction(Mnemonic.SDC1, sources=(register,)))
        elif roll < load_rate + store_rate + branch_rate:
            mnemonic = Mnemonic.BC1EQZ if rng.random() < 0.5 else Mnemonic.BC1NEZ
            program.instructions.append(Instruction(
                mnemonic, sources=(register,), mispredict=bool(rng.random() < mispredict_rate),
            ))
        else:
            mnemonic = choices[int(rng.integers(0, len(choices)))]
            sources = tuple(int(r) for r in rng.integers(0, registers, size=SOURCE_COUNT[mnemonic]))
            cond = CmpCond(int(rng.integers(0, 16))) if mnemonic == Mnemonic.CMP else None
            program.instructions.append(Instruction(mnemonic, dest=register, sources=sources, cond=cond))

    logger.debug(f"Generated program of {len(program)} instructions")
    return program
