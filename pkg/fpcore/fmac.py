from enum import Enum
from typing import Tuple

from fpcore.bits import (
    DEFAULT_QNAN, ExceptionFlags, RoundingMode, decode, flush_exact, propagate_nan,
    signed_inf, signed_zero, unpack_finite,
)
from fpcore.multiply import block_multiply
from fpcore.rounding import normalize_wide, round_pack

class FmacOp(Enum):
    MADD = "madd"
    MSUB = "msub"

def fmac(a: int, b: int, c: int, op: FmacOp, mode: RoundingMode, flush: bool) -> Tuple[int, ExceptionFlags]:
    """a * b + c (or a * b - c) with one final rounding"""
    nan = propagate_nan(a, b, c)
    if nan is not None:
        return nan

    sign_a, _, _, kind_a = decode(a)
    sign_b, _, _, kind_b = decode(b)
    sign_c, _, _, kind_c = decode(c)
    product_sign = sign_a ^ sign_b
    addend_sign = sign_c ^ (1 if op == FmacOp.MSUB else 0)

    if kind_a.is_infinity or kind_b.is_infinity:
        if kind_a.is_zero or kind_b.is_zero:
            return DEFAULT_QNAN, ExceptionFlags.INVALID
        if kind_c.is_infinity and addend_sign != product_sign:
            return DEFAULT_QNAN, ExceptionFlags.INVALID
        return signed_inf(product_sign), ExceptionFlags.NONE
    if kind_c.is_infinity:
        return signed_inf(addend_sign), ExceptionFlags.NONE

    if kind_a.is_zero or kind_b.is_zero:
        if kind_c.is_zero:
            if product_sign == addend_sign:
                return signed_zero(product_sign), ExceptionFlags.NONE
            return signed_zero(1 if mode == RoundingMode.RM else 0), ExceptionFlags.NONE
        return flush_exact((addend_sign << 63) | (c & ~(1 << 63)), flush)

    _, sig_a, exp_a = unpack_finite(a)
    _, sig_b, exp_b = unpack_finite(b)
    # All 106 product bits are kept; the only rounding is the final one
    product = block_multiply(sig_a, sig_b)
    product_exp = exp_a + exp_b

    if kind_c.is_zero:
        total, total_exp, sign = product, product_exp, product_sign
    else:
        _, sig_c, exp_c = unpack_finite(c)
        low = min(product_exp, exp_c)
        aligned_product = product << (product_exp - low)
        aligned_addend = sig_c << (exp_c - low)
        signed_sum = ((-aligned_product if product_sign else aligned_product)
                      + (-aligned_addend if addend_sign else aligned_addend))
        if signed_sum == 0:
            return signed_zero(1 if mode == RoundingMode.RM else 0), ExceptionFlags.NONE
        total, total_exp, sign = abs(signed_sum), low, 1 if signed_sum < 0 else 0

    biased, sig, grs = normalize_wide(total, total_exp)
    return round_pack(sign, biased, sig, grs, mode, flush)
