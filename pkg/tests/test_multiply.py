import itertools
import random

import pytest

from fpcore.bits import DEFAULT_QNAN, POS_INF, ExceptionFlags, RoundingMode, from_float, to_float
from fpcore.multiply import block_multiply, mul
from fpcore.oracle import EDGE_PATTERNS, random_patterns, reference_mul
from tests.conftest import ALL_MODES, NUM1, NUM2

ONE = 0x3FF0000000000000

@pytest.mark.parametrize("block_bits, blocks", [(2, 3), (4, 2), (1, 6)])
def test_block_multiply_exhaustive_reduced_width(block_bits, blocks):
    width = block_bits * blocks
    for x in range(1 << width):
        for y in range(1 << width):
            assert block_multiply(x, y, block_bits, blocks) == x * y

def test_block_multiply_random_53_bit():
    generator = random.Random(53)
    for _ in range(20_000):
        x, y = generator.getrandbits(53), generator.getrandbits(53)
        assert block_multiply(x, y) == x * y

def test_block_multiply_rejects_wide_operands():
    with pytest.raises(ValueError):
        block_multiply(1 << 54, 1)

def test_multiply_by_one_is_identity(rng):
    for pattern in random_patterns(rng, 2000):
        if pattern & 0x7FF0000000000000:
            assert mul(pattern, ONE, RoundingMode.RN, False) == (pattern, ExceptionFlags.NONE)

def test_zero_times_infinity_is_invalid():
    assert mul(0, POS_INF, RoundingMode.RN, False) == (DEFAULT_QNAN, ExceptionFlags.INVALID)

def test_table_operands_match_host_product():
    expected = from_float(to_float(NUM1) * to_float(NUM2))
    assert mul(NUM1, NUM2, RoundingMode.RN, False)[0] == expected

@pytest.mark.parametrize("a, b, mode, expected", [
    (0x0000000000000003, 0x000F000000000000, RoundingMode.RN, 0x0000000000000000),
    (0x0000000000000003, 0x000F000000000000, RoundingMode.RP, 0x0000000000000001),
    (0x8000000000000003, 0x000F000000000000, RoundingMode.RP, 0x8000000000000000),
    (0x8000000000000003, 0x000F000000000000, RoundingMode.RM, 0x8000000000000001),
    (0x8000000000000003, 0x800F000000000000, RoundingMode.RZ, 0x0000000000000000),
])
def test_both_subnormal_operands(a, b, mode, expected):
    assert mul(a, b, mode, False) == (expected, ExceptionFlags.UNDERFLOW | ExceptionFlags.INEXACT)

@pytest.mark.parametrize("mode", ALL_MODES)
def test_edge_grid_matches_reference(mode):
    for a, b in itertools.product(EDGE_PATTERNS, repeat=2):
        assert mul(a, b, mode, False) == reference_mul(a, b, mode, False), (hex(a), hex(b))

@pytest.mark.parametrize("mode", ALL_MODES)
@pytest.mark.parametrize("flush", [False, True])
def test_random_operands_match_reference(rng, mode, flush):
    for a, b in zip(random_patterns(rng, 3000), random_patterns(rng, 3000)):
        assert mul(a, b, mode, flush) == reference_mul(a, b, mode, flush), (hex(a), hex(b))
