"""Double-precision bit patterns: decomposition, classification and flags."""
import struct
from dataclasses import dataclass
from enum import Enum, IntEnum, IntFlag
from typing import Optional, Tuple

@dataclass(frozen=True)
class FpFormatParams:
    precision: int = 53
    emax: int = 1023
    emin: int = -1022
    bias: int = 1023
    exponent_width: int = 11

    def __post_init__(self):
        if self.emin != 1 - self.emax:
            raise ValueError(f"emin must equal 1 - emax, got {self.emin} and {self.emax}")

DOUBLE = FpFormatParams()

SIGN_BIT = 1 << 63
ABS_MASK = SIGN_BIT - 1
EXP_MASK = 0x7FF
FRAC_BITS = 52
FRAC_MASK = (1 << FRAC_BITS) - 1
HIDDEN_BIT = 1 << FRAC_BITS
QUIET_BIT = 1 << 51
MAX_BIASED = 0x7FF

POS_ZERO = 0x0000000000000000
NEG_ZERO = 0x8000000000000000
POS_INF = 0x7FF0000000000000
NEG_INF = 0xFFF0000000000000
DEFAULT_QNAN = 0x7FF8000000000000
MAX_FINITE = 0x7FEFFFFFFFFFFFFF
MIN_NORMAL = 0x0010000000000000
MIN_SUBNORMAL = 0x0000000000000001
ALL_ONES = 0xFFFFFFFFFFFFFFFF
ONE = 0x3FF0000000000000

# 55-bit working mantissa: [54] hidden, [53:2] fraction, [1:0] guard positions
WIDE_BITS = 55
WIDE_MASK = (1 << WIDE_BITS) - 1

class FpClass(Enum):
    SIGNALING_NAN = "snan"
    QUIET_NAN = "qnan"
    NEG_INFINITY = "-inf"
    NEG_NORMAL = "-normal"
    NEG_SUBNORMAL = "-subnormal"
    NEG_ZERO = "-zero"
    POS_INFINITY = "+inf"
    POS_NORMAL = "+normal"
    POS_SUBNORMAL = "+subnormal"
    POS_ZERO = "+zero"

    @property
    def is_nan(self) -> bool:
        return self in (FpClass.SIGNALING_NAN, FpClass.QUIET_NAN)

    @property
    def is_infinity(self) -> bool:
        return self in (FpClass.NEG_INFINITY, FpClass.POS_INFINITY)

    @property
    def is_zero(self) -> bool:
        return self in (FpClass.NEG_ZERO, FpClass.POS_ZERO)

    @property
    def is_subnormal(self) -> bool:
        return self in (FpClass.NEG_SUBNORMAL, FpClass.POS_SUBNORMAL)

class RoundingMode(IntEnum):
    RN = 0
    RZ = 1
    RP = 2
    RM = 3

class ExceptionFlags(IntFlag):
    NONE = 0
    INEXACT = 1
    UNDERFLOW = 2
    OVERFLOW = 4
    DIVIDE_BY_ZERO = 8
    INVALID = 16
    # Cause-only: unimplemented operation
    UNIMPLEMENTED = 32

    def letters(self) -> str:
        """Compact V/Z/O/U/I/E rendering, most significant first"""
        names = [("E", ExceptionFlags.UNIMPLEMENTED), ("V", ExceptionFlags.INVALID),
                 ("Z", ExceptionFlags.DIVIDE_BY_ZERO), ("O", ExceptionFlags.OVERFLOW),
                 ("U", ExceptionFlags.UNDERFLOW), ("I", ExceptionFlags.INEXACT)]
        return "".join(letter for letter, flag in names if self & flag) or "-"

def decode(x: int) -> Tuple[int, int, int, FpClass]:
    """Split a pattern into sign, biased exponent, fraction and class"""
    sign = (x >> 63) & 1
    exponent = (x >> FRAC_BITS) & EXP_MASK
    fraction = x & FRAC_MASK

    if exponent == MAX_BIASED:
        if fraction == 0:
            kind = FpClass.NEG_INFINITY if sign else FpClass.POS_INFINITY
        elif fraction & QUIET_BIT:
            kind = FpClass.QUIET_NAN
        else:
            kind = FpClass.SIGNALING_NAN
    elif exponent == 0:
        if fraction == 0:
            kind = FpClass.NEG_ZERO if sign else FpClass.POS_ZERO
        else:
            kind = FpClass.NEG_SUBNORMAL if sign else FpClass.POS_SUBNORMAL
    else:
        kind = FpClass.NEG_NORMAL if sign else FpClass.POS_NORMAL

    return sign, exponent, fraction, kind

def encode(sign: int, exponent: int, fraction: int) -> int:
    if not 0 <= exponent <= MAX_BIASED:
        raise ValueError(f"biased exponent out of range: {exponent}")
    return ((sign & 1) << 63) | (exponent << FRAC_BITS) | (fraction & FRAC_MASK)

def classify(x: int) -> FpClass:
    return decode(x)[3]

def is_nan(x: int) -> bool:
    return (x & ABS_MASK) > POS_INF

def is_snan(x: int) -> bool:
    return is_nan(x) and not x & QUIET_BIT

def is_qnan(x: int) -> bool:
    return is_nan(x) and bool(x & QUIET_BIT)

def is_inf(x: int) -> bool:
    return (x & ABS_MASK) == POS_INF

def is_zero(x: int) -> bool:
    return (x & ABS_MASK) == 0

def is_subnormal(x: int) -> bool:
    return 0 < (x & ABS_MASK) < MIN_NORMAL

def sign_of(x: int) -> int:
    return (x >> 63) & 1

def signed_zero(sign: int) -> int:
    return NEG_ZERO if sign else POS_ZERO

def signed_inf(sign: int) -> int:
    return NEG_INF if sign else POS_INF

def wide_mantissa(x: int) -> int:
    """55-bit working mantissa with the hidden bit at position 54"""
    exponent = (x >> FRAC_BITS) & EXP_MASK
    hidden = 1 if exponent != 0 else 0
    return (hidden << 54) | ((x & FRAC_MASK) << 2)

def effective_exponent(x: int) -> int:
    """Biased exponent with subnormals treated as exponent 1"""
    return max((x >> FRAC_BITS) & EXP_MASK, 1)

def unpack_finite(x: int) -> Tuple[int, int, int]:
    """Finite nonzero x as (sign, integer significand, power of two) with x = sig * 2**exp2"""
    sign = (x >> 63) & 1
    exponent = (x >> FRAC_BITS) & EXP_MASK
    fraction = x & FRAC_MASK
    if exponent == 0:
        return sign, fraction, 1 - DOUBLE.bias - FRAC_BITS
    return sign, fraction | HIDDEN_BIT, exponent - DOUBLE.bias - FRAC_BITS

def unpack_normalized(x: int) -> Tuple[int, int, int]:
    """Like unpack_finite, but subnormals are shifted so bit 52 is set"""
    sign, sig, exp2 = unpack_finite(x)
    shift = 53 - sig.bit_length()
    return sign, sig << shift, exp2 - shift

def propagate_nan(*operands: int) -> Optional[Tuple[int, ExceptionFlags]]:
    """NaN result for an arithmetic op, or None when no operand is a NaN"""
    if any(is_snan(x) for x in operands):
        return DEFAULT_QNAN, ExceptionFlags.INVALID
    for x in operands:
        if is_qnan(x):
            return x, ExceptionFlags.NONE
    return None

def flush_exact(x: int, flush: bool) -> Tuple[int, ExceptionFlags]:
    """Pass an exactly computed result through the flush-to-zero rule"""
    if flush and is_subnormal(x):
        return signed_zero(sign_of(x)), ExceptionFlags.UNDERFLOW | ExceptionFlags.INEXACT
    return x, ExceptionFlags.NONE

def to_float(x: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", x & ALL_ONES))[0]

def from_float(value: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", value))[0]

def ordered_key(x: int) -> int:
    """Monotone integer image of a non-NaN pattern; +0 and -0 map together"""
    magnitude = x & ABS_MASK
    return -magnitude if x & SIGN_BIT else magnitude

def ulp_distance(a: int, b: int) -> int:
    """Number of representable steps between two non-NaN patterns"""
    return abs(ordered_key(a) - ordered_key(b))

def format_bits(x: int) -> str:
    return f"0x{x & ALL_ONES:016X}"
