import math
import random
from fractions import Fraction

import numpy as np
import pytest

from fpcore.bits import (
    DEFAULT_QNAN, NEG_INF, POS_INF, ExceptionFlags, RoundingMode, is_nan, ulp_distance,
)
from fpcore.oracle import random_patterns, reference_div
from fpcore.reciprocal import (
    RECIP_ROM, div, initial_approximation, operand_modifier, recip, recip_significand, rom_generate,
)
from tests.conftest import ALL_MODES, NUM1, NUM3, NUM4

ONE = 0x3FF0000000000000
TWO = 0x4000000000000000

@pytest.mark.parametrize("index, value", [(0, 0xFE02), (1, 0xFA1A), (2, 0xF649)])
def test_rom_pinned_rows(index, value):
    assert int(RECIP_ROM[index]) == value

def test_rom_follows_floor_formula():
    rom = rom_generate()
    assert rom.shape == (128,)
    assert rom.dtype == np.uint16
    for a in range(128):
        expected = math.floor(Fraction(1 << 16) / (1 + Fraction(a, 128) + Fraction(1, 256)) ** 2)
        assert int(rom[a]) == expected

def test_rom_strictly_decreasing():
    assert np.all(np.diff(RECIP_ROM.astype(np.int64)) < 0)

@pytest.mark.parametrize("window, modified", [
    (0b1_0000000_0000000, 0b1_0000000_1111111),
    (0b1_1111111_1111111, 0b1_1111111_0000000),
    (0b1_0110100_1010001, 0b1_0110100_0101110),
])
def test_operand_modifier(window, modified):
    assert operand_modifier(window) == modified

def _relative_error_ok(sig53: int, x: int, bound_log2: int) -> bool:
    # x / 2**60 approximates 2**52 / sig53
    error = abs(x * sig53 - (1 << 112))
    return error * (1 << bound_log2) <= 1 << 112

def test_initial_approximation_is_about_14_bits(rng):
    for pattern in random_patterns(rng, 2000):
        sig53 = (pattern & ((1 << 52) - 1)) | (1 << 52)
        seed = initial_approximation(sig53) << 32
        assert _relative_error_ok(sig53, seed, 13)

def test_recip_significand_relative_error_bound():
    generator = random.Random(52)
    samples = [(1 << 52) + 1, (1 << 53) - 1, (1 << 52) + (1 << 45) - 1]
    samples += [(1 << 52) | generator.getrandbits(52) for _ in range(20_000)]
    for sig53 in samples:
        assert _relative_error_ok(sig53, recip_significand(sig53), 52), hex(sig53)

@pytest.mark.parametrize("operand, expected, flags", [
    (ONE, ONE, ExceptionFlags.NONE),
    (TWO, 0x3FE0000000000000, ExceptionFlags.NONE),
    (0x0000000000000000, POS_INF, ExceptionFlags.DIVIDE_BY_ZERO),
    (0x8000000000000000, NEG_INF, ExceptionFlags.DIVIDE_BY_ZERO),
    (POS_INF, 0x0000000000000000, ExceptionFlags.NONE),
    (NEG_INF, 0x8000000000000000, ExceptionFlags.NONE),
    (0x7FF8000000000005, 0x7FF8000000000005, ExceptionFlags.NONE),
    (0x7FF0000000000005, DEFAULT_QNAN, ExceptionFlags.INVALID),
])
def test_recip_special_values(operand, expected, flags):
    assert recip(operand, RoundingMode.RN) == (expected, flags)

def test_recip_of_table_operand_within_one_ulp():
    result, flags = recip(NUM1, RoundingMode.RN)
    reference, _ = reference_div(ONE, NUM1, RoundingMode.RN, False)
    assert ulp_distance(result, reference) <= 1
    assert flags & ExceptionFlags.INEXACT

@pytest.mark.parametrize("a, b, expected, flags", [
    (ONE, 0x0000000000000000, POS_INF, ExceptionFlags.DIVIDE_BY_ZERO),
    (0x0000000000000000, 0x0000000000000000, DEFAULT_QNAN, ExceptionFlags.INVALID),
    (POS_INF, NEG_INF, DEFAULT_QNAN, ExceptionFlags.INVALID),
    (POS_INF, 0x0000000000000000, POS_INF, ExceptionFlags.NONE),
    (ONE, NEG_INF, 0x8000000000000000, ExceptionFlags.NONE),
])
def test_div_special_values(a, b, expected, flags):
    assert div(a, b, RoundingMode.RN, False) == (expected, flags)

def test_div_by_two_halves_exactly(rng):
    for pattern in random_patterns(rng, 2000):
        exponent = (pattern >> 52) & 0x7FF
        if exponent > 1:
            assert div(pattern, TWO, RoundingMode.RN, False) == (pattern - (1 << 52), ExceptionFlags.NONE)

def test_div_by_power_of_two_is_exact_in_every_mode(rng):
    for pattern in random_patterns(rng, 500):
        for mode in ALL_MODES:
            assert div(pattern, 0x3FD0000000000000, mode, False) == reference_div(pattern, 0x3FD0000000000000, mode, False)

def test_table_quotient_within_two_ulp():
    result, _ = div(NUM3, NUM4, RoundingMode.RN, False)
    reference, _ = reference_div(NUM3, NUM4, RoundingMode.RN, False)
    assert ulp_distance(result, reference) <= 2

@pytest.mark.parametrize("mode", ALL_MODES)
def test_div_error_bound_random(rng, mode):
    for a, b in zip(random_patterns(rng, 3000), random_patterns(rng, 3000)):
        result, flags = div(a, b, mode, False)
        reference, reference_flags = reference_div(a, b, mode, False)
        assert not is_nan(result)
        assert ulp_distance(result, reference) <= 2, (hex(a), hex(b))
        if reference_flags & ExceptionFlags.INEXACT:
            assert flags & ExceptionFlags.INEXACT
