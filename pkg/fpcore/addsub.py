from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from fpcore.bits import (
    DEFAULT_QNAN, ExceptionFlags, RoundingMode, WIDE_BITS, WIDE_MASK, decode,
    effective_exponent, flush_exact, propagate_nan, signed_inf, signed_zero, wide_mantissa,
)
from fpcore.rounding import GrsState, kogge_stone_add, lzc55, round_pack, shift_right_jam

class AddSubOp(Enum):
    ADD = "add"
    SUB = "sub"

@dataclass(frozen=True)
class SignPlan:
    effective: AddSubOp
    sign1: int
    sign2: int

    def result_sign(self, first_is_larger: bool) -> int:
        """The result takes the sign of the larger-magnitude operand"""
        return self.sign1 if first_is_larger else self.sign2

def sign_plan(op: AddSubOp, s1: int, s2: int) -> SignPlan:
    """Fold the operation into operand 2's sign; magnitudes are then added or subtracted"""
    adjusted = s2 ^ (1 if op == AddSubOp.SUB else 0)
    effective = AddSubOp.ADD if s1 == adjusted else AddSubOp.SUB
    return SignPlan(effective, s1, adjusted)

def add_sub(a: int, b: int, op: AddSubOp, mode: RoundingMode, flush: bool) -> Tuple[int, ExceptionFlags]:
    """Correctly rounded a + b or a - b"""
    nan = propagate_nan(a, b)
    if nan is not None:
        return nan

    sign_a, _, _, kind_a = decode(a)
    sign_b, _, _, kind_b = decode(b)
    plan = sign_plan(op, sign_a, sign_b)

    # Initial conditions
    if kind_a.is_infinity or kind_b.is_infinity:
        if kind_a.is_infinity and kind_b.is_infinity:
            if plan.effective == AddSubOp.SUB:
                return DEFAULT_QNAN, ExceptionFlags.INVALID
            return signed_inf(plan.sign1), ExceptionFlags.NONE
        if kind_a.is_infinity:
            return signed_inf(plan.sign1), ExceptionFlags.NONE
        return signed_inf(plan.sign2), ExceptionFlags.NONE

    if kind_a.is_zero and kind_b.is_zero:
        if plan.effective == AddSubOp.ADD:
            return signed_zero(plan.sign1), ExceptionFlags.NONE
        return signed_zero(1 if mode == RoundingMode.RM else 0), ExceptionFlags.NONE
    if kind_a.is_zero:
        return flush_exact((plan.sign2 << 63) | (b & ~(1 << 63)), flush)
    if kind_b.is_zero:
        return flush_exact(a, flush)

    mant_a, mant_b = wide_mantissa(a), wide_mantissa(b)
    exp_a, exp_b = effective_exponent(a), effective_exponent(b)

    # Swap so the bigger magnitude is always first
    first_is_larger = (exp_a, mant_a) >= (exp_b, mant_b)
    if first_is_larger:
        big, small, exp_big, exp_small = mant_a, mant_b, exp_a, exp_b
    else:
        big, small, exp_big, exp_small = mant_b, mant_a, exp_b, exp_a
    sign = plan.result_sign(first_is_larger)

    aligned, sticky = shift_right_jam(small, exp_big - exp_small)

    if plan.effective == AddSubOp.ADD:
        total = kogge_stone_add(big, aligned, 0)
    else:
        # big - aligned - (sticky fraction) by ones' complement; the borrow drops the +1
        total = kogge_stone_add(big, ~aligned & WIDE_MASK, 0 if sticky else 1) & WIDE_MASK

    if total == 0 and not sticky:
        return signed_zero(1 if mode == RoundingMode.RM else 0), ExceptionFlags.NONE

    if total >> WIDE_BITS:
        # Carry out of bit 54: one right shift
        sig = total >> 3
        grs = GrsState(bool(total & 4), bool(total & 2), bool(total & 1) or sticky)
        biased = exp_big + 1
    else:
        leading = lzc55(total)
        shifted = (total << leading) & WIDE_MASK
        sig = shifted >> 2
        grs = GrsState(bool(shifted & 2), bool(shifted & 1), sticky)
        biased = exp_big - leading

    return round_pack(sign, biased, sig, grs, mode, flush)
