"""Oracle self-check suites for the soft-float units."""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from rich.console import Console
from rich.table import Table
from tqdm import tqdm

from config import Config
from fpcore.addsub import AddSubOp, add_sub
from fpcore.bits import FRAC_MASK, HIDDEN_BIT, RoundingMode, is_nan, ulp_distance
from fpcore.fmac import FmacOp, fmac
from fpcore.multiply import mul
from fpcore.oracle import (
    EDGE_PATTERNS, random_patterns, reference_add, reference_div, reference_fma, reference_mul,
)
from fpcore.reciprocal import RECIP_ROM, div, recip_significand

logger = logging.getLogger(__name__)

MAX_DIV_ULP = 2
RECIP_BOUND_LOG2 = -52

@dataclass
class SuiteResult:
    suite: str
    mode: str
    checked: int
    mismatches: int
    metric: Optional[float] = None
    passed: bool = True
    first_failure: Optional[str] = None

def _exact_suite(name: str, mode: RoundingMode, cases, unit: Callable, reference: Callable) -> SuiteResult:
    result = SuiteResult(suite=name, mode=mode.name, checked=0, mismatches=0)
    for operands in cases:
        for flush in (False, True):
            result.checked += 1
            if unit(*operands, mode, flush) != reference(*operands, mode, flush):
                result.mismatches += 1
                if result.first_failure is None:
                    result.first_failure = " ".join(f"0x{x:016X}" for x in operands) + f" flush={flush}"
    result.passed = result.mismatches == 0
    return result

def _pairs(rng: np.random.Generator, samples: int):
    directed = list(itertools.product(EDGE_PATTERNS, repeat=2))
    values = random_patterns(rng, 2 * samples)
    return directed + list(zip(values[0::2], values[1::2]))

def _triples(rng: np.random.Generator, samples: int):
    # Directed third operand limited to a few classes to keep the grid small
    addends = EDGE_PATTERNS[::3]
    directed = [(a, b, c) for a, b in itertools.product(EDGE_PATTERNS, repeat=2) for c in addends]
    values = random_patterns(rng, 3 * samples)
    return directed + list(zip(values[0::3], values[1::3], values[2::3]))

def addsub_suite(mode: RoundingMode, samples: int, rng: np.random.Generator) -> SuiteResult:
    cases = [(a, b, op) for a, b in _pairs(rng, samples) for op in AddSubOp]
    return _exact_suite(
        "add_sub", mode, cases,
        lambda a, b, op, m, f: add_sub(a, b, op, m, f),
        lambda a, b, op, m, f: reference_add(a, b, op == AddSubOp.SUB, m, f),
    )

def mul_suite(mode: RoundingMode, samples: int, rng: np.random.Generator) -> SuiteResult:
    return _exact_suite("mul", mode, _pairs(rng, samples), mul, reference_mul)

def fmac_suite(mode: RoundingMode, samples: int, rng: np.random.Generator) -> SuiteResult:
    cases = [(a, b, c, op) for (a, b, c), op in zip(_triples(rng, samples), itertools.cycle(FmacOp))]
    return _exact_suite(
        "fmac", mode, cases,
        lambda a, b, c, op, m, f: fmac(a, b, c, op, m, f),
        lambda a, b, c, op, m, f: reference_fma(a, b, c, op == FmacOp.MSUB, m, f),
    )

def div_suite(mode: RoundingMode, samples: int, rng: np.random.Generator) -> SuiteResult:
    values = random_patterns(rng, 2 * samples)
    distances = []
    result = SuiteResult(suite="div", mode=mode.name, checked=0, mismatches=0)
    for a, b in zip(values[0::2], values[1::2]):
        quotient, _ = div(a, b, mode, False)
        reference, _ = reference_div(a, b, mode, False)
        result.checked += 1
        if is_nan(reference):
            continue
        distance = ulp_distance(quotient, reference)
        distances.append(distance)
        if distance > MAX_DIV_ULP:
            result.mismatches += 1
            if result.first_failure is None:
                result.first_failure = f"0x{a:016X} / 0x{b:016X}: {distance} ulp"

    result.metric = float(np.max(distances)) if distances else 0.0
    result.passed = result.mismatches == 0
    return result

def recip_suite(mode: RoundingMode, samples: int, rng: np.random.Generator) -> SuiteResult:
    """Relative error of the unrounded significand reciprocal, as log2"""
    result = SuiteResult(suite="recip", mode=mode.name, checked=0, mismatches=0)
    worst = 0
    for pattern in random_patterns(rng, samples):
        sig53 = (pattern & FRAC_MASK) | HIDDEN_BIT
        error = abs(recip_significand(sig53) * sig53 - (1 << 112))
        worst = max(worst, error)
        result.checked += 1
        if error << 52 > 1 << 112:
            result.mismatches += 1
            if result.first_failure is None:
                result.first_failure = f"significand 0x{sig53:014X}"

    result.metric = math.log2(worst / (1 << 112)) if worst else float("-inf")
    result.passed = result.mismatches == 0
    return result

SUITES: Dict[str, Callable[[RoundingMode, int, np.random.Generator], SuiteResult]] = {
    "add_sub": addsub_suite,
    "mul": mul_suite,
    "fmac": fmac_suite,
    "div": div_suite,
    "recip": recip_suite,
}

def run_suite(name: str, mode: RoundingMode, samples: int, seed: int) -> SuiteResult:
    rng = np.random.default_rng([seed, list(SUITES).index(name), int(mode)])
    result = SUITES[name](mode, samples, rng)
    logger.debug(f"{name}/{mode.name}: {result.checked} checked, {result.mismatches} mismatches")
    return result

def run_selftest(samples: int = Config.SELFTEST_SAMPLES, seed: int = Config.SEED,
                 jobs: int = Config.SELFTEST_JOBS, suites: Optional[List[str]] = None,
                 progress: bool = True) -> List[SuiteResult]:
    tasks = [(name, mode) for name in (suites or list(SUITES)) for mode in RoundingMode]
    logger.info(f"Running {len(tasks)} self-check suites with {samples} samples each on {jobs} workers")
    iterator = tqdm(tasks, desc="selftest", disable=not progress)
    return Parallel(n_jobs=jobs)(delayed(run_suite)(name, mode, samples, seed) for name, mode in iterator)

def results_frame(results: List[SuiteResult]) -> pd.DataFrame:
    return pd.DataFrame([vars(result) for result in results])

def print_results(results: List[SuiteResult], console: Optional[Console] = None):
    console = console or Console()
    table = Table(title="Soft-float self-check")
    for column in ("suite", "mode", "checked", "mismatches", "metric", "result"):
        table.add_column(column, justify="right" if column in ("checked", "mismatches", "metric") else "left")

    for result in results:
        if result.suite == "div":
            metric = f"max {result.metric:.0f} ulp"
        elif result.suite == "recip":
            metric = f"2^{result.metric:.2f}"
        else:
            metric = "-"
        verdict = "[green]pass[/green]" if result.passed else f"[red]FAIL[/red] {result.first_failure}"
        table.add_row(result.suite, result.mode, str(result.checked), str(result.mismatches), metric, verdict)
    console.print(table)

def print_rom(table: bool = False, console: Optional[Console] = None):
    """Reciprocal seed ROM, one row per index"""
    console = console or Console()
    if not table:
        for index, value in enumerate(RECIP_ROM):
            console.print(f"{index:3d} {int(value):016b} 0x{int(value):04X}", highlight=False)
        return

    rich_table = Table(title=f"Reciprocal ROM ({len(RECIP_ROM)} entries)")
    for column in ("index", "binary", "hex"):
        rich_table.add_column(column)
    for index, value in enumerate(RECIP_ROM):
        rich_table.add_row(str(index), f"{int(value):016b}", f"0x{int(value):04X}")
    console.print(rich_table)
