"""Compare, class, min/max and sign-manipulation instructions."""
from enum import Enum, IntEnum
from typing import Dict, Tuple

from fpcore.bits import (
    ABS_MASK, ALL_ONES, DEFAULT_QNAN, ExceptionFlags, FpClass, SIGN_BIT, classify, is_nan,
    is_qnan, is_snan, ordered_key,
)

class CmpCond(IntEnum):
    AF = 0
    UN = 1
    EQ = 2
    UEQ = 3
    LT = 4
    ULT = 5
    LE = 6
    ULE = 7
    SAF = 8
    SUN = 9
    SEQ = 10
    SUEQ = 11
    SLT = 12
    SULT = 13
    SLE = 14
    SULE = 15

COND_UNORDERED = 1
COND_EQUAL = 2
COND_LESS = 4
COND_SIGNALING = 8

CLASS_BITS: Dict[FpClass, int] = {
    FpClass.SIGNALING_NAN: 0,
    FpClass.QUIET_NAN: 1,
    FpClass.NEG_INFINITY: 2,
    FpClass.NEG_NORMAL: 3,
    FpClass.NEG_SUBNORMAL: 4,
    FpClass.NEG_ZERO: 5,
    FpClass.POS_INFINITY: 6,
    FpClass.POS_NORMAL: 7,
    FpClass.POS_SUBNORMAL: 8,
    FpClass.POS_ZERO: 9,
}

class MinMaxKind(Enum):
    MIN = "min"
    MAX = "max"
    MINA = "mina"
    MAXA = "maxa"

class MoveKind(Enum):
    ABS = "abs"
    NEG = "neg"
    MOV = "mov"

def compare(cond: CmpCond, a: int, b: int) -> Tuple[int, ExceptionFlags]:
    """All-ones when the condition holds, all-zeros otherwise"""
    unordered = is_nan(a) or is_nan(b)
    flags = ExceptionFlags.NONE
    if is_snan(a) or is_snan(b) or (unordered and cond & COND_SIGNALING):
        flags = ExceptionFlags.INVALID

    if unordered:
        holds = bool(cond & COND_UNORDERED)
    else:
        key_a, key_b = ordered_key(a), ordered_key(b)
        holds = bool(cond & COND_EQUAL and key_a == key_b) or bool(cond & COND_LESS and key_a < key_b)

    return (ALL_ONES if holds else 0), flags

def class_mask(a: int) -> int:
    return 1 << CLASS_BITS[classify(a)]

def _total_key(x: int) -> int:
    # Signed order with -0 below +0
    return -(x & ABS_MASK) - 1 if x & SIGN_BIT else x

def minmax(kind: MinMaxKind, a: int, b: int) -> Tuple[int, ExceptionFlags]:
    if is_snan(a) or is_snan(b):
        return DEFAULT_QNAN, ExceptionFlags.INVALID
    if is_qnan(a):
        return (a if is_qnan(b) else b), ExceptionFlags.NONE
    if is_qnan(b):
        return a, ExceptionFlags.NONE

    if kind == MinMaxKind.MIN:
        result = a if _total_key(a) <= _total_key(b) else b
    elif kind == MinMaxKind.MAX:
        result = a if _total_key(a) >= _total_key(b) else b
    elif kind == MinMaxKind.MINA:
        result = a if (a & ABS_MASK) < (b & ABS_MASK) else b
    else:
        result = a if (a & ABS_MASK) > (b & ABS_MASK) else b
    return result, ExceptionFlags.NONE

def move_family(kind: MoveKind, a: int) -> int:
    """Non-arithmetic sign operations; NaNs pass through without flags"""
    if kind == MoveKind.ABS:
        return a & ABS_MASK
    if kind == MoveKind.NEG:
        return a ^ SIGN_BIT
    return a
