import itertools

import pytest

from fpcore.addsub import AddSubOp, add_sub
from fpcore.bits import DEFAULT_QNAN, NEG_INF, POS_INF, ExceptionFlags, RoundingMode
from fpcore.fmac import FmacOp, fmac
from fpcore.multiply import mul
from fpcore.oracle import EDGE_PATTERNS, random_patterns, reference_fma
from tests.conftest import ALL_MODES, GOLDEN_RESULT, NUM1, NUM2, NUM3, NUM4, NUM5

MADD, MSUB = FmacOp.MADD, FmacOp.MSUB
RN = RoundingMode.RN
ONE = 0x3FF0000000000000

FIRST_RESULT = 0x415ED80F1310CD73
SECOND_RESULT = 0x412DE829E0065574

def test_identity(rng):
    for pattern in random_patterns(rng, 1000):
        if pattern & 0x7FF0000000000000:
            assert fmac(pattern, ONE, 0, MADD, RN, False) == (pattern, ExceptionFlags.NONE)

def test_golden_chain():
    first, _ = fmac(NUM1, NUM2, NUM3, MADD, RN, False)
    second, _ = fmac(NUM3, NUM4, NUM5, MSUB, RN, False)
    assert first == FIRST_RESULT
    assert second == SECOND_RESULT
    assert fmac(first, second, NUM1, MADD, RN, False)[0] == GOLDEN_RESULT

def test_table_operands_match_reference():
    assert fmac(NUM1, NUM2, NUM3, MADD, RN, False) == reference_fma(NUM1, NUM2, NUM3, False, RN, False)

def test_fused_differs_from_separate_rounding():
    a = b = 0x3FF0000000000001
    c = 0xBFF0000000000002
    fused, _ = fmac(a, b, c, MADD, RN, False)
    product, _ = mul(a, b, RN, False)
    separate, _ = add_sub(product, c, AddSubOp.ADD, RN, False)
    assert fused == 0x3970000000000000
    assert separate == 0x0000000000000000

def test_invalid_products():
    assert fmac(0, POS_INF, ONE, MADD, RN, False) == (DEFAULT_QNAN, ExceptionFlags.INVALID)
    assert fmac(ONE, POS_INF, POS_INF, MSUB, RN, False) == (DEFAULT_QNAN, ExceptionFlags.INVALID)
    assert fmac(ONE, POS_INF, NEG_INF, MSUB, RN, False) == (POS_INF, ExceptionFlags.NONE)

def test_quiet_nan_addend_wins_over_invalid_product():
    quiet = 0x7FF8000000000123
    assert fmac(0, POS_INF, quiet, MADD, RN, False) == (quiet, ExceptionFlags.NONE)

@pytest.mark.parametrize("mode", [RoundingMode.RN, RoundingMode.RM])
def test_edge_grid_matches_reference(mode):
    addends = EDGE_PATTERNS[::3]
    for a, b, c in itertools.product(EDGE_PATTERNS, EDGE_PATTERNS, addends):
        for op in (MADD, MSUB):
            assert fmac(a, b, c, op, mode, False) == reference_fma(a, b, c, op == MSUB, mode, False), (hex(a), hex(b), hex(c))

@pytest.mark.parametrize("mode", ALL_MODES)
def test_random_operands_match_reference(rng, mode):
    triples = zip(random_patterns(rng, 2000), random_patterns(rng, 2000), random_patterns(rng, 2000))
    for a, b, c in triples:
        assert fmac(a, b, c, MADD, mode, False) == reference_fma(a, b, c, False, mode, False), (hex(a), hex(b), hex(c))
        assert fmac(a, b, c, MSUB, mode, True) == reference_fma(a, b, c, True, mode, True), (hex(a), hex(b), hex(c))

@pytest.mark.parametrize("mode", ALL_MODES)
def test_near_cancellation_matches_reference(rng, mode):
    # c = -round(a*b) leaves only the rounding error of the product
    for a, b in zip(random_patterns(rng, 1500), random_patterns(rng, 1500)):
        product, _ = mul(a, b, RN, False)
        c = product ^ (1 << 63)
        assert fmac(a, b, c, MADD, mode, False) == reference_fma(a, b, c, False, mode, False), (hex(a), hex(b))
