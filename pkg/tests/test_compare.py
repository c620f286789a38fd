import itertools

import pytest

from fpcore.bits import (
    ALL_ONES, DEFAULT_QNAN, POS_INF, ExceptionFlags, is_nan, is_snan, ordered_key,
)
from fpcore.compare import (
    CmpCond, MinMaxKind, MoveKind, class_mask, compare, minmax, move_family,
)
from fpcore.oracle import EDGE_PATTERNS

ONE = 0x3FF0000000000000
TWO = 0x4000000000000000
THREE_NEG = 0xC008000000000000
FIVE = 0x4014000000000000
QNAN = DEFAULT_QNAN
SNAN = 0x7FF0000000000001

@pytest.mark.parametrize("cond, a, b, result, flags", [
    (CmpCond.EQ, ONE, ONE, ALL_ONES, ExceptionFlags.NONE),
    (CmpCond.LT, QNAN, ONE, 0, ExceptionFlags.NONE),
    (CmpCond.SLT, QNAN, ONE, 0, ExceptionFlags.INVALID),
    (CmpCond.ULT, QNAN, ONE, ALL_ONES, ExceptionFlags.NONE),
    (CmpCond.EQ, 0, 0x8000000000000000, ALL_ONES, ExceptionFlags.NONE),
    (CmpCond.LE, ONE, TWO, ALL_ONES, ExceptionFlags.NONE),
    (CmpCond.LT, TWO, ONE, 0, ExceptionFlags.NONE),
    (CmpCond.EQ, SNAN, ONE, 0, ExceptionFlags.INVALID),
    (CmpCond.AF, ONE, ONE, 0, ExceptionFlags.NONE),
])
def test_compare_examples(cond, a, b, result, flags):
    assert compare(cond, a, b) == (result, flags)

def test_all_conditions_against_truth_table():
    for cond, a, b in itertools.product(CmpCond, EDGE_PATTERNS, EDGE_PATTERNS):
        unordered = is_nan(a) or is_nan(b)
        equal = not unordered and ordered_key(a) == ordered_key(b)
        less = not unordered and ordered_key(a) < ordered_key(b)
        holds = (unordered and cond & 1) or (equal and cond & 2) or (less and cond & 4)
        signals = is_snan(a) or is_snan(b) or (unordered and cond & 8)
        result, flags = compare(cond, a, b)
        assert result == (ALL_ONES if holds else 0)
        assert bool(flags & ExceptionFlags.INVALID) == bool(signals)

@pytest.mark.parametrize("pattern, bit", [
    (0x0000000000000000, 9),
    (0x7FF0000000000000, 6),
    (0x000FFFFFFFFFFFFF, 8),
    (0x8000000000000000, 5),
    (0xFFF0000000000000, 2),
    (SNAN, 0),
    (QNAN, 1),
    (0xBFF0000000000000, 3),
    (0x800FFFFFFFFFFFFF, 4),
    (ONE, 7),
])
def test_class_mask_bits(pattern, bit):
    assert class_mask(pattern) == 1 << bit

def test_class_mask_one_hot():
    for pattern in EDGE_PATTERNS:
        mask = class_mask(pattern)
        assert mask and mask & (mask - 1) == 0
        assert mask < 1 << 10

@pytest.mark.parametrize("kind, a, b, expected", [
    (MinMaxKind.MAX, ONE, TWO, TWO),
    (MinMaxKind.MIN, ONE, TWO, ONE),
    (MinMaxKind.MAXA, THREE_NEG, TWO, THREE_NEG),
    (MinMaxKind.MINA, THREE_NEG, TWO, TWO),
    (MinMaxKind.MIN, QNAN, FIVE, FIVE),
    (MinMaxKind.MAX, FIVE, QNAN, FIVE),
    (MinMaxKind.MIN, 0, 0x8000000000000000, 0x8000000000000000),
    (MinMaxKind.MAX, 0x8000000000000000, 0, 0),
    (MinMaxKind.MAXA, TWO, TWO | 1 << 63, TWO | 1 << 63),
    (MinMaxKind.MINA, TWO | 1 << 63, TWO, TWO),
    (MinMaxKind.MAX, QNAN, 0xFFF8000000000000, QNAN),
    (MinMaxKind.MAX, 0xFFF0000000000000, POS_INF, POS_INF),
])
def test_minmax(kind, a, b, expected):
    assert minmax(kind, a, b) == (expected, ExceptionFlags.NONE)

def test_minmax_signaling_nan():
    assert minmax(MinMaxKind.MIN, SNAN, ONE) == (DEFAULT_QNAN, ExceptionFlags.INVALID)

@pytest.mark.parametrize("kind, a, expected", [
    (MoveKind.ABS, 0x8000000000000000, 0x0000000000000000),
    (MoveKind.NEG, QNAN, 0xFFF8000000000000),
    (MoveKind.MOV, SNAN, SNAN),
    (MoveKind.ABS, 0xFFF0000000000001, 0x7FF0000000000001),
])
def test_move_family(kind, a, expected):
    assert move_family(kind, a) == expected
