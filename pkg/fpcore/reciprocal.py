"""Table-seeded Newton-Raphson reciprocal and the divider built on it."""
from typing import Tuple

import numpy as np

from fpcore.bits import (
    DEFAULT_QNAN, ExceptionFlags, RoundingMode, decode, propagate_nan, signed_inf,
    signed_zero, unpack_normalized,
)
from fpcore.multiply import block_multiply
from fpcore.rounding import normalize_wide, round53, round_pack

TABLE_INDEX_BITS = 7
ROM_ENTRIES = 1 << TABLE_INDEX_BITS
SEED_BITS = 16
NR_ITERATIONS = 2
# Iterations run on a 2.60 fixed-point word
FRACTION_BITS = 60
TWO = 2 << FRACTION_BITS

def rom_generate() -> np.ndarray:
    """rom[a] = floor(2**16 / (1 + a/2**7 + 2**-8)**2), exact in integers"""
    entries = [(1 << 32) // (257 + 2 * a) ** 2 for a in range(ROM_ENTRIES)]
    return np.array(entries, dtype=np.uint16)

RECIP_ROM = rom_generate()
_ROM = tuple(int(value) for value in RECIP_ROM)

def operand_modifier(top15: int) -> int:
    """Invert the low seven bits of the 1.14 mantissa window"""
    return (top15 & 0x7FFF) ^ 0x7F

def initial_approximation(sig53: int) -> int:
    """16-bit seed in 1.28 fixed point, low bits zero"""
    top15 = sig53 >> 38
    index = (top15 >> 7) & (ROM_ENTRIES - 1)
    # 0.16 times 1.14 gives 1.30
    product = _ROM[index] * operand_modifier(top15)
    seed = product >> 2
    drop = seed.bit_length() - SEED_BITS
    return (seed >> drop) << drop

def recip_significand(sig53: int) -> int:
    """Reciprocal of a normalized 53-bit significand in 2.60 fixed point"""
    if sig53 == 1 << 52:
        return 1 << FRACTION_BITS

    x = initial_approximation(sig53) << 32
    operand = sig53 << 8
    for _ in range(NR_ITERATIONS):
        scaled = (operand * x) >> FRACTION_BITS
        x = (x * (TWO - scaled)) >> FRACTION_BITS
    return x

def recip(a: int, mode: RoundingMode, flush: bool = False) -> Tuple[int, ExceptionFlags]:
    """Rounded 1/a"""
    nan = propagate_nan(a)
    if nan is not None:
        return nan

    sign, _, _, kind = decode(a)
    if kind.is_infinity:
        return signed_zero(sign), ExceptionFlags.NONE
    if kind.is_zero:
        return signed_inf(sign), ExceptionFlags.DIVIDE_BY_ZERO

    _, sig, exp2 = unpack_normalized(a)
    x = recip_significand(sig)
    exact = sig == 1 << 52

    # a = sig * 2**exp2, so 1/a = x * 2**-60 * 2**-(exp2 + 52)
    biased, sig53, grs = normalize_wide(x, -FRACTION_BITS - exp2 - 52, sticky=not exact)
    return round_pack(sign, biased, sig53, grs, mode, flush)

def div(a: int, b: int, mode: RoundingMode, flush: bool) -> Tuple[int, ExceptionFlags]:
    """a / b as a times the rounded reciprocal of b"""
    nan = propagate_nan(a, b)
    if nan is not None:
        return nan

    sign_a, _, _, kind_a = decode(a)
    sign_b, _, _, kind_b = decode(b)
    sign = sign_a ^ sign_b

    if kind_a.is_infinity and kind_b.is_infinity:
        return DEFAULT_QNAN, ExceptionFlags.INVALID
    if kind_a.is_zero and kind_b.is_zero:
        return DEFAULT_QNAN, ExceptionFlags.INVALID
    if kind_a.is_infinity:
        return signed_inf(sign), ExceptionFlags.NONE
    if kind_b.is_infinity:
        return signed_zero(sign), ExceptionFlags.NONE
    if kind_b.is_zero:
        return signed_inf(sign), ExceptionFlags.DIVIDE_BY_ZERO
    if kind_a.is_zero:
        return signed_zero(sign), ExceptionFlags.NONE

    _, sig_a, exp_a = unpack_normalized(a)
    _, sig_b, exp_b = unpack_normalized(b)

    x = recip_significand(sig_b)
    exact_recip = sig_b == 1 << 52

    # Reciprocal significand rounded to nearest at 53 bits before the multiply
    recip_biased, recip_sig, recip_grs = normalize_wide(x, -FRACTION_BITS, sticky=not exact_recip)
    recip_sig, carry, recip_inexact = round53(recip_sig, recip_grs, RoundingMode.RN, 0)
    if carry:
        recip_sig >>= 1
        recip_biased += 1

    # 1/b = recip_sig * 2**(recip_biased - 1075) * 2**-(exp_b + 52)
    product = block_multiply(sig_a, recip_sig)
    exp2 = exp_a + (recip_biased - 1075) - (exp_b + 52)
    biased, sig, grs = normalize_wide(product, exp2, sticky=recip_inexact)
    return round_pack(sign, biased, sig, grs, mode, flush)
