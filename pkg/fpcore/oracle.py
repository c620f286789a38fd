"""Exact-rational reference for the arithmetic units.

Every finite result is computed as a Fraction and rounded once, so this
module shares no datapath code with the units it checks.
"""
import math
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from fpcore.bits import (
    ExceptionFlags, RoundingMode, from_float, to_float,
)

_SIGN = 1 << 63
_QNAN = 0x7FF8000000000000
_LARGEST = 0x7FEFFFFFFFFFFFFF
_MIN_NORMAL = Fraction(1, 1 << 1022)
_OVERFLOW = Fraction(1 << 1024)

# Directed operands covering every class, both signs
EDGE_PATTERNS: List[int] = [
    0x0000000000000000,  # zero
    0x0000000000000001,  # smallest subnormal
    0x000FFFFFFFFFFFFF,  # largest subnormal
    0x0010000000000000,  # smallest normal
    0x7FEFFFFFFFFFFFFF,  # largest normal
    0x7FF0000000000000,  # infinity
    0x7FF8000000000000,  # quiet NaN
    0x7FF4000000000000,  # signaling NaN
    0x3FF0000000000000,  # one
    0x3FF0000000000001,  # one plus ulp
    0x4340000000000000,  # 2**53
    0x3CA0000000000000,  # 2**-53
]
EDGE_PATTERNS += [pattern | _SIGN for pattern in EDGE_PATTERNS]

def _nan(x: int) -> bool:
    return (x & (_SIGN - 1)) > 0x7FF0000000000000

def _signaling(x: int) -> bool:
    return _nan(x) and not x & (1 << 51)

def _nan_policy(*operands: int) -> Optional[Tuple[int, ExceptionFlags]]:
    if any(_signaling(x) for x in operands):
        return _QNAN, ExceptionFlags.INVALID
    for x in operands:
        if _nan(x):
            return x, ExceptionFlags.NONE
    return None

def to_fraction(x: int) -> Fraction:
    """Exact value of a finite pattern"""
    sign = -1 if x & _SIGN else 1
    exponent = (x >> 52) & 0x7FF
    fraction = x & ((1 << 52) - 1)
    if exponent == 0:
        magnitude = Fraction(fraction, 1 << 1074)
    else:
        magnitude = Fraction(fraction | (1 << 52)) * Fraction(2) ** (exponent - 1075)
    return sign * magnitude

def _round_to_quantum(magnitude: Fraction, quantum: int, mode: RoundingMode, negative: bool) -> Tuple[int, bool]:
    scaled = magnitude / Fraction(2) ** quantum
    whole = math.floor(scaled)
    remainder = scaled - whole
    if remainder == 0:
        return whole, False

    if mode == RoundingMode.RN:
        up = remainder > Fraction(1, 2) or (remainder == Fraction(1, 2) and whole % 2 == 1)
    elif mode == RoundingMode.RZ:
        up = False
    elif mode == RoundingMode.RP:
        up = not negative
    else:
        up = negative
    return whole + (1 if up else 0), True

def _overflow(negative: bool, mode: RoundingMode) -> int:
    toward_infinity = (mode == RoundingMode.RN
                       or (mode == RoundingMode.RP and not negative)
                       or (mode == RoundingMode.RM and negative))
    pattern = 0x7FF0000000000000 if toward_infinity else _LARGEST
    return pattern | (_SIGN if negative else 0)

def round_fraction(value: Fraction, mode: RoundingMode, flush: bool,
                   zero_sign: int = 0) -> Tuple[int, ExceptionFlags]:
    """Correctly round an exact value to a double"""
    if value == 0:
        return (_SIGN if zero_sign else 0), ExceptionFlags.NONE

    negative = value < 0
    magnitude = abs(value)
    sign_bit = _SIGN if negative else 0

    exponent = magnitude.numerator.bit_length() - magnitude.denominator.bit_length()
    if magnitude < Fraction(2) ** exponent:
        exponent -= 1

    unbounded, _ = _round_to_quantum(magnitude, exponent - 52, mode, negative)
    tiny = unbounded * Fraction(2) ** (exponent - 52) < _MIN_NORMAL

    quantum = max(exponent, -1022) - 52
    whole, inexact = _round_to_quantum(magnitude, quantum, mode, negative)
    rounded = whole * Fraction(2) ** quantum

    if rounded >= _OVERFLOW:
        return _overflow(negative, mode), ExceptionFlags.OVERFLOW | ExceptionFlags.INEXACT

    flags = ExceptionFlags.NONE
    if inexact:
        flags |= ExceptionFlags.INEXACT
        if tiny:
            flags |= ExceptionFlags.UNDERFLOW
    if flush and tiny:
        return sign_bit, ExceptionFlags.UNDERFLOW | ExceptionFlags.INEXACT

    if rounded < _MIN_NORMAL:
        return sign_bit | int(rounded * (1 << 1074)), flags
    # Let the host encoder place the exactly representable value
    return sign_bit | (from_float(float(rounded)) & (_SIGN - 1)), flags

def _finite(*operands: int) -> bool:
    return all((x & 0x7FF0000000000000) != 0x7FF0000000000000 for x in operands)

def _special(value: float) -> Tuple[int, ExceptionFlags]:
    """Infinite or invalid host-float result mapped through the NaN policy"""
    if math.isnan(value):
        return _QNAN, ExceptionFlags.INVALID
    return from_float(value), ExceptionFlags.NONE

def _exact_zero_sign(left_sign: int, right_sign: int, mode: RoundingMode) -> int:
    if left_sign == right_sign:
        return left_sign
    return 1 if mode == RoundingMode.RM else 0

def reference_add(a: int, b: int, subtract: bool, mode: RoundingMode, flush: bool) -> Tuple[int, ExceptionFlags]:
    nan = _nan_policy(a, b)
    if nan is not None:
        return nan
    if subtract:
        b ^= _SIGN
    if not _finite(a, b):
        return _special(to_float(a) + to_float(b))

    left, right = to_fraction(a), to_fraction(b)
    if left == 0 and right == 0:
        zero_sign = _exact_zero_sign(a >> 63, b >> 63, mode)
    else:
        zero_sign = 1 if mode == RoundingMode.RM else 0
    return round_fraction(left + right, mode, flush, zero_sign=zero_sign)

def reference_mul(a: int, b: int, mode: RoundingMode, flush: bool) -> Tuple[int, ExceptionFlags]:
    nan = _nan_policy(a, b)
    if nan is not None:
        return nan
    if not _finite(a, b):
        return _special(to_float(a) * to_float(b))
    return round_fraction(to_fraction(a) * to_fraction(b), mode, flush, zero_sign=(a ^ b) >> 63)

def reference_fma(a: int, b: int, c: int, subtract: bool, mode: RoundingMode, flush: bool) -> Tuple[int, ExceptionFlags]:
    nan = _nan_policy(a, b, c)
    if nan is not None:
        return nan
    if subtract:
        c ^= _SIGN
    if _finite(a, b) and not _finite(c):
        return c, ExceptionFlags.NONE
    if not _finite(a, b, c):
        product = to_float(a) * to_float(b)
        if math.isnan(product):
            return _QNAN, ExceptionFlags.INVALID
        return _special(product + to_float(c))

    product = to_fraction(a) * to_fraction(b)
    addend = to_fraction(c)
    if product == 0 and addend == 0:
        zero_sign = _exact_zero_sign((a ^ b) >> 63, c >> 63, mode)
    else:
        zero_sign = 1 if mode == RoundingMode.RM else 0
    return round_fraction(product + addend, mode, flush, zero_sign=zero_sign)

def reference_div(a: int, b: int, mode: RoundingMode, flush: bool) -> Tuple[int, ExceptionFlags]:
    nan = _nan_policy(a, b)
    if nan is not None:
        return nan
    if not _finite(a, b) or to_fraction(b) == 0:
        left, right = to_float(a), to_float(b)
        if right == 0:
            if left == 0 or math.isnan(left):
                return _QNAN, ExceptionFlags.INVALID
            negative = (a ^ b) >> 63
            flags = ExceptionFlags.NONE if math.isinf(left) else ExceptionFlags.DIVIDE_BY_ZERO
            return (0xFFF0000000000000 if negative else 0x7FF0000000000000), flags
        return _special(left / right)
    return round_fraction(to_fraction(a) / to_fraction(b), mode, flush, zero_sign=(a ^ b) >> 63)

# Biased-exponent bands for random operands: subnormal, anywhere, near one,
# near the bottom of the normal range, near overflow
_EXPONENT_BANDS = [(0, 0), (1, 2046), (1010, 1036), (1, 64), (1980, 2046)]

def random_patterns(rng: np.random.Generator, count: int) -> List[int]:
    """Finite random doubles weighted toward subnormals, cancellation and range edges"""
    bands = rng.integers(0, len(_EXPONENT_BANDS), size=count)
    lows = np.array([band[0] for band in _EXPONENT_BANDS])[bands]
    highs = np.array([band[1] for band in _EXPONENT_BANDS])[bands]
    exponents = rng.integers(lows, highs + 1)
    fractions = rng.integers(0, 1 << 52, size=count, dtype=np.int64)
    # A quarter get short fractions so ties and exact results show up
    sparse = rng.random(count) < 0.25
    fractions[sparse] &= np.int64(~((1 << 40) - 1))
    signs = rng.integers(0, 2, size=count)

    return [
        (int(sign) << 63) | (int(exponent) << 52) | int(fraction)
        for sign, exponent, fraction in zip(signs, exponents, fractions)
    ]
