from fpcore.bits import (
    DEFAULT_QNAN, DOUBLE, ExceptionFlags, FpClass, FpFormatParams, RoundingMode,
    classify, decode, encode, format_bits, from_float, to_float, ulp_distance,
)
from fpcore.rounding import GrsState, kogge_stone_add, lzc55, round53, round_pack
from fpcore.addsub import AddSubOp, SignPlan, add_sub, sign_plan
from fpcore.multiply import block_multiply, mul
from fpcore.reciprocal import RECIP_ROM, div, operand_modifier, recip, recip_significand, rom_generate
from fpcore.fmac import FmacOp, fmac
from fpcore.compare import CmpCond, MinMaxKind, MoveKind, class_mask, compare, minmax, move_family
