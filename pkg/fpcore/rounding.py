"""Shared rounding stage: GRS rounding, normalization, Kogge-Stone adder and LZC."""
from dataclasses import dataclass
from typing import Tuple

from fpcore.bits import (
    DOUBLE, ExceptionFlags, FRAC_MASK, MAX_BIASED, MAX_FINITE, RoundingMode,
    WIDE_BITS, encode, signed_inf, signed_zero,
)

SIG_BITS = 53

@dataclass(frozen=True)
class GrsState:
    guard: bool = False
    round: bool = False
    sticky: bool = False

    @property
    def inexact(self) -> bool:
        return self.guard or self.round or self.sticky

def round53(sig: int, grs: GrsState, mode: RoundingMode, sign: int) -> Tuple[int, bool, bool]:
    """Round a 53-bit significand; returns (rounded, carry-out, inexact)"""
    inexact = grs.inexact

    if mode == RoundingMode.RN:
        # Ties go to the even neighbour
        increment = grs.guard and (grs.round or grs.sticky or bool(sig & 1))
    elif mode == RoundingMode.RZ:
        increment = False
    elif mode == RoundingMode.RP:
        increment = inexact and not sign
    else:
        increment = inexact and bool(sign)

    rounded = sig + (1 if increment else 0)
    carry = rounded >> SIG_BITS != 0
    return rounded, carry, inexact

def count_leading_zeros(value: int, width: int) -> int:
    """Binary-search leading zero count over a width-bit vector"""
    mask = (1 << width) - 1
    value &= mask
    if value == 0:
        return width

    count = 0
    for step in (32, 16, 8, 4, 2, 1):
        if step >= width:
            continue
        if value >> (width - step) == 0:
            value = (value << step) & mask
            count += step
    return count

def lzc55(v: int) -> int:
    return count_leading_zeros(v, WIDE_BITS)

def kogge_stone_add(x: int, y: int, cin: int = 0, width: int = WIDE_BITS) -> int:
    """Parallel-prefix addition; the result has width + 1 bits"""
    mask = (1 << width) - 1
    x &= mask
    y &= mask
    span = width + 1

    # The carry-in rides as a generate at pseudo position 0
    generate = ((x & y) << 1) | (cin & 1)
    propagate = (x ^ y) << 1
    half_sum = propagate

    distance = 1
    while distance < span:
        generate = generate | (propagate & (generate << distance))
        propagate = propagate & (propagate << distance)
        distance <<= 1

    carries = generate & ((1 << span) - 1)
    total = (half_sum ^ (carries << 1)) >> 1
    return total & ((1 << span) - 1)

def shift_right_jam(value: int, distance: int) -> Tuple[int, bool]:
    """Right shift; the second element reports whether any 1 bits were lost"""
    if distance <= 0:
        return value, False
    lost = value & ((1 << distance) - 1)
    return value >> distance, lost != 0

def normalize_wide(value: int, exp2: int, sticky: bool = False) -> Tuple[int, int, GrsState]:
    """Normalize value * 2**exp2 (plus a sticky fraction below bit 0) to 53 bits

    Returns (unbounded biased exponent, 53-bit significand, GrsState). With
    sticky set the value must carry at least 55 significant bits.
    """
    length = value.bit_length()
    if length > SIG_BITS:
        shift = length - SIG_BITS
        sig = value >> shift
        guard = bool((value >> (shift - 1)) & 1)
        round_bit = shift >= 2 and bool((value >> (shift - 2)) & 1)
        rest = shift >= 3 and (value & ((1 << (shift - 2)) - 1)) != 0
        grs = GrsState(guard, round_bit, rest or sticky)
    else:
        assert not sticky or length >= SIG_BITS + 2, "sticky needs guard and round positions"
        sig = value << (SIG_BITS - length)
        grs = GrsState(False, False, sticky)

    biased = exp2 + length - 1 + DOUBLE.bias
    return biased, sig, grs

def denormalize(sig: int, grs: GrsState, distance: int) -> Tuple[int, GrsState]:
    """Shift a significand and its GRS right, accumulating sticky"""
    combined = (sig << 2) | (int(grs.guard) << 1) | int(grs.round)
    shifted, lost = shift_right_jam(combined, distance)
    return shifted >> 2, GrsState(bool(shifted & 2), bool(shifted & 1), grs.sticky or lost)

def overflow_result(sign: int, mode: RoundingMode) -> int:
    """Overflow default per rounding mode: infinity or the largest finite value"""
    if mode == RoundingMode.RN:
        return signed_inf(sign)
    if mode == RoundingMode.RZ:
        return MAX_FINITE | (sign << 63)
    if mode == RoundingMode.RP:
        return signed_inf(0) if not sign else MAX_FINITE | (1 << 63)
    return MAX_FINITE if not sign else signed_inf(1)

def round_pack(sign: int, biased: int, sig: int, grs: GrsState, mode: RoundingMode,
               flush: bool) -> Tuple[int, ExceptionFlags]:
    """Round a normalized significand and pack it into a double"""
    flags = ExceptionFlags.NONE

    if biased >= 1:
        rounded, carry, inexact = round53(sig, grs, mode, sign)
        if carry:
            rounded >>= 1
            biased += 1
        if biased >= MAX_BIASED:
            return overflow_result(sign, mode), ExceptionFlags.OVERFLOW | ExceptionFlags.INEXACT
        if inexact:
            flags |= ExceptionFlags.INEXACT
        return encode(sign, biased, rounded & FRAC_MASK), flags

    # Tininess after rounding: round at unbounded exponent range first
    _, unbounded_carry, _ = round53(sig, grs, mode, sign)
    tiny = not (biased == 0 and unbounded_carry)

    sub_sig, sub_grs = denormalize(sig, grs, 1 - biased)
    rounded, _, inexact = round53(sub_sig, sub_grs, mode, sign)

    if inexact:
        flags |= ExceptionFlags.INEXACT
        if tiny:
            flags |= ExceptionFlags.UNDERFLOW

    if flush and tiny:
        return signed_zero(sign), ExceptionFlags.UNDERFLOW | ExceptionFlags.INEXACT

    # A carry into bit 52 lands on the smallest normal exponent by itself
    return (sign << 63) | rounded, flags
