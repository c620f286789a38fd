"""Floating-point control and status register."""
from dataclasses import dataclass, replace
from typing import Tuple

from fpcore.bits import ExceptionFlags, RoundingMode

RM_SHIFT = 0
FLAGS_SHIFT = 2
ENABLES_SHIFT = 7
CAUSE_SHIFT = 12
NAN2008_BIT = 18
ABS2008_BIT = 19
FS_BIT = 24
# FENR keeps FS next to RM
FENR_FS_BIT = 2

IEEE_MASK = 0x1F
CAUSE_MASK = 0x3F

@dataclass(frozen=True)
class Fcsr:
    rounding_mode: RoundingMode = RoundingMode.RN
    flags: ExceptionFlags = ExceptionFlags.NONE
    enables: ExceptionFlags = ExceptionFlags.NONE
    cause: ExceptionFlags = ExceptionFlags.NONE
    flush: bool = False
    nan2008: bool = True
    abs2008: bool = True

    def to_word(self) -> int:
        return ((int(self.rounding_mode) << RM_SHIFT)
                | ((int(self.flags) & IEEE_MASK) << FLAGS_SHIFT)
                | ((int(self.enables) & IEEE_MASK) << ENABLES_SHIFT)
                | ((int(self.cause) & CAUSE_MASK) << CAUSE_SHIFT)
                | (int(self.nan2008) << NAN2008_BIT)
                | (int(self.abs2008) << ABS2008_BIT)
                | (int(self.flush) << FS_BIT))

    @classmethod
    def from_word(cls, word: int) -> "Fcsr":
        return cls(
            rounding_mode=RoundingMode((word >> RM_SHIFT) & 0x3),
            flags=ExceptionFlags((word >> FLAGS_SHIFT) & IEEE_MASK),
            enables=ExceptionFlags((word >> ENABLES_SHIFT) & IEEE_MASK),
            cause=ExceptionFlags((word >> CAUSE_SHIFT) & CAUSE_MASK),
            flush=bool(word >> FS_BIT & 1),
        )

    @property
    def fexr(self) -> int:
        """Flags and Cause view"""
        return self.to_word() & ((IEEE_MASK << FLAGS_SHIFT) | (CAUSE_MASK << CAUSE_SHIFT))

    @property
    def fenr(self) -> int:
        """Enables, FS and RM view"""
        return (int(self.rounding_mode)
                | (int(self.flush) << FENR_FS_BIT)
                | ((int(self.enables) & IEEE_MASK) << ENABLES_SHIFT))

def fcsr_accrue(fcsr: Fcsr, flags: ExceptionFlags) -> Tuple[Fcsr, bool]:
    """Record an operation's exceptions; returns the new FCSR and whether it traps"""
    trap = bool(flags & ExceptionFlags.UNIMPLEMENTED) or bool(fcsr.enables & flags)
    if trap:
        # A trapping operation updates Cause only
        return replace(fcsr, cause=flags), True

    accrued = fcsr.flags | (flags & ~ExceptionFlags.UNIMPLEMENTED)
    return replace(fcsr, cause=flags, flags=ExceptionFlags(accrued)), False
