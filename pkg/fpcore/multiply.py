from typing import Tuple

from fpcore.bits import (
    DEFAULT_QNAN, ExceptionFlags, MIN_SUBNORMAL, RoundingMode, decode, propagate_nan,
    signed_inf, signed_zero, unpack_finite,
)
from fpcore.rounding import normalize_wide, round_pack

BLOCK_BITS = 18
BLOCKS = 3

def block_multiply(x: int, y: int, block_bits: int = BLOCK_BITS, blocks: int = BLOCKS) -> int:
    """Product assembled from block_bits x block_bits partial products"""
    limit = 1 << (block_bits * blocks)
    if not (0 <= x < limit and 0 <= y < limit):
        raise ValueError(f"operands must fit in {block_bits * blocks} bits")

    mask = (1 << block_bits) - 1
    x_blocks = [(x >> (i * block_bits)) & mask for i in range(blocks)]
    y_blocks = [(y >> (j * block_bits)) & mask for j in range(blocks)]

    total = 0
    for i, x_part in enumerate(x_blocks):
        for j, y_part in enumerate(y_blocks):
            total += (x_part * y_part) << ((i + j) * block_bits)
    return total

def _tiny_product(sign: int, mode: RoundingMode, flush: bool) -> Tuple[int, ExceptionFlags]:
    """Result when both operands are subnormal: far below half the smallest subnormal"""
    flags = ExceptionFlags.UNDERFLOW | ExceptionFlags.INEXACT
    if flush:
        return signed_zero(sign), flags
    if (mode == RoundingMode.RP and not sign) or (mode == RoundingMode.RM and sign):
        return (sign << 63) | MIN_SUBNORMAL, flags
    return signed_zero(sign), flags

def mul(a: int, b: int, mode: RoundingMode, flush: bool) -> Tuple[int, ExceptionFlags]:
    """Correctly rounded a * b"""
    nan = propagate_nan(a, b)
    if nan is not None:
        return nan

    sign_a, _, _, kind_a = decode(a)
    sign_b, _, _, kind_b = decode(b)
    sign = sign_a ^ sign_b

    if kind_a.is_infinity or kind_b.is_infinity:
        if kind_a.is_zero or kind_b.is_zero:
            return DEFAULT_QNAN, ExceptionFlags.INVALID
        return signed_inf(sign), ExceptionFlags.NONE
    if kind_a.is_zero or kind_b.is_zero:
        return signed_zero(sign), ExceptionFlags.NONE
    if kind_a.is_subnormal and kind_b.is_subnormal:
        return _tiny_product(sign, mode, flush)

    _, sig_a, exp_a = unpack_finite(a)
    _, sig_b, exp_b = unpack_finite(b)
    product = block_multiply(sig_a, sig_b)

    biased, sig, grs = normalize_wide(product, exp_a + exp_b)
    return round_pack(sign, biased, sig, grs, mode, flush)
