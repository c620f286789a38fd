from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, FrozenSet, Optional, Tuple

from fpcore.compare import CmpCond

class Mnemonic(Enum):
    ADD = "ADD"
    SUB = "SUB"
    MUL = "MUL"
    DIV = "DIV"
    RECIP = "RECIP"
    MADDF = "MADDF"
    MSUBF = "MSUBF"
    CMP = "CMP"
    CLASS = "CLASS"
    MIN = "MIN"
    MAX = "MAX"
    MINA = "MINA"
    MAXA = "MAXA"
    ABS = "ABS"
    NEG = "NEG"
    MOV = "MOV"
    BC1EQZ = "BC1EQZ"
    BC1NEZ = "BC1NEZ"
    LDC1 = "LDC1"
    SDC1 = "SDC1"

class Resource(IntEnum):
    """Bit positions of the one-hot resource vector"""
    ADD = 0
    MUL = 1
    DIV = 2
    SQRT = 3
    ALU = 4
    MULA = 5
    MOV_TO_FROM = 6
    BRANCH = 7

FORMAT_D = 0x11

# MIPS FP mnemonics that exist but are not modeled
UNIMPLEMENTED_MNEMONICS: FrozenSet[str] = frozenset({
    "SQRT", "RSQRT", "CVT", "RINT", "CEIL", "FLOOR", "ROUND", "TRUNC",
    "MFC1", "MTC1", "CFC1", "CTC1", "SEL", "SELEQZ", "SELNEZ",
    "MADD", "MSUB", "NMADD", "NMSUB", "BC1T", "BC1F", "C",
})
UNIMPLEMENTED_FORMATS: FrozenSet[str] = frozenset({"S", "W", "L", "PS"})

SOURCE_COUNT: Dict[Mnemonic, int] = {
    Mnemonic.ADD: 2, Mnemonic.SUB: 2, Mnemonic.MUL: 2, Mnemonic.DIV: 2,
    Mnemonic.RECIP: 1, Mnemonic.MADDF: 3, Mnemonic.MSUBF: 3, Mnemonic.CMP: 2,
    Mnemonic.CLASS: 1, Mnemonic.MIN: 2, Mnemonic.MAX: 2, Mnemonic.MINA: 2, Mnemonic.MAXA: 2,
    Mnemonic.ABS: 1, Mnemonic.NEG: 1, Mnemonic.MOV: 1,
    Mnemonic.BC1EQZ: 1, Mnemonic.BC1NEZ: 1, Mnemonic.LDC1: 0, Mnemonic.SDC1: 1,
}

RESOURCE_OF: Dict[Mnemonic, Resource] = {
    Mnemonic.ADD: Resource.ADD, Mnemonic.SUB: Resource.ADD,
    Mnemonic.MUL: Resource.MUL,
    Mnemonic.DIV: Resource.DIV, Mnemonic.RECIP: Resource.DIV,
    Mnemonic.MADDF: Resource.MULA, Mnemonic.MSUBF: Resource.MULA,
    Mnemonic.CMP: Resource.ALU, Mnemonic.CLASS: Resource.ALU,
    Mnemonic.MIN: Resource.ALU, Mnemonic.MAX: Resource.ALU,
    Mnemonic.MINA: Resource.ALU, Mnemonic.MAXA: Resource.ALU,
    Mnemonic.ABS: Resource.ALU, Mnemonic.NEG: Resource.ALU, Mnemonic.MOV: Resource.ALU,
    Mnemonic.BC1EQZ: Resource.BRANCH, Mnemonic.BC1NEZ: Resource.BRANCH,
}

FUNCTION_CODE: Dict[Mnemonic, int] = {
    Mnemonic.ADD: 0x00, Mnemonic.SUB: 0x01, Mnemonic.MUL: 0x02, Mnemonic.DIV: 0x03,
    Mnemonic.ABS: 0x05, Mnemonic.MOV: 0x06, Mnemonic.NEG: 0x07,
    Mnemonic.BC1EQZ: 0x09, Mnemonic.BC1NEZ: 0x0D,
    Mnemonic.RECIP: 0x15, Mnemonic.MADDF: 0x18, Mnemonic.MSUBF: 0x19,
    Mnemonic.CLASS: 0x1B, Mnemonic.MIN: 0x1C, Mnemonic.MINA: 0x1D,
    Mnemonic.MAX: 0x1E, Mnemonic.MAXA: 0x1F,
}
CMP_FUNCTION_BASE = 0x20

@dataclass(frozen=True)
class Instruction:
    mnemonic: Mnemonic
    dest: Optional[int] = None
    sources: Tuple[int, ...] = ()
    cond: Optional[CmpCond] = None
    load_cycle: Optional[int] = None
    load_value: Optional[int] = None
    mispredict: bool = False
    line: int = field(default=0, compare=False)

    def __post_init__(self):
        expected = SOURCE_COUNT[self.mnemonic]
        if len(self.sources) != expected:
            raise ValueError(f"{self.mnemonic.value} takes {expected} sources, got {len(self.sources)}")
        for register in self.sources + ((self.dest,) if self.dest is not None else ()):
            if not 0 <= register < 32:
                raise ValueError(f"register $f{register} out of range")

    @property
    def is_load(self) -> bool:
        return self.mnemonic == Mnemonic.LDC1

    @property
    def is_store(self) -> bool:
        return self.mnemonic == Mnemonic.SDC1

    @property
    def is_branch(self) -> bool:
        return self.mnemonic in (Mnemonic.BC1EQZ, Mnemonic.BC1NEZ)

    @property
    def is_fused(self) -> bool:
        return self.mnemonic in (Mnemonic.MADDF, Mnemonic.MSUBF)

    @property
    def uses_queue(self) -> bool:
        """Loads and stores bypass the issue queue"""
        return not (self.is_load or self.is_store)

    @property
    def resource(self) -> Optional[Resource]:
        return RESOURCE_OF.get(self.mnemonic)

    @property
    def function_code(self) -> int:
        if self.mnemonic == Mnemonic.CMP:
            return CMP_FUNCTION_BASE | int(self.cond)
        return FUNCTION_CODE.get(self.mnemonic, 0)
