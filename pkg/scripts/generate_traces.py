#!/usr/bin/env python3
"""
Write seeded random trace programs for batch runs
Each trace ends with EXPECT lines taken from the in-order reference run
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import logging
from pathlib import Path

import numpy as np

from isa.generate import random_program
from isa.program import render
from isa.semantics import functional_run

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

def generate_traces(output: Path, count: int, length: int, seed: int, branch_rate: float,
                    mispredict_rate: float, divide: bool):
    """Write count traces named random_NNNN.trace into output"""
    output.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    trapped = 0

    for index in range(count):
        program = random_program(
            rng, length=length, branch_rate=branch_rate, mispredict_rate=mispredict_rate, divide=divide,
        )
        reference = functional_run(program)
        if reference.trap_index is not None:
            trapped += 1
        # Squashed wrong-path stores never reach memory
        if not mispredict_rate:
            program.expectations = list(reference.captures)

        path = output / f"random_{index:04d}.trace"
        header = f"# Random program {index}, seed {seed}\n"
        path.write_text(header + render(program))

    logger.info(f"Wrote {count} traces to {output}")
    if trapped:
        logger.warning(f"{trapped} traces trap in the reference run; their EXPECT lines stop at the trap")

def main():
    """Main function"""
    import argparse

    parser = argparse.ArgumentParser(description="Generate random trace programs")
    parser.add_argument("--output", type=Path, default=Path("traces/random"), help="Output directory")
    parser.add_argument("--count", type=int, default=100, help="Number of traces")
    parser.add_argument("--length", type=int, default=48, help="Instructions per trace")
    parser.add_argument("--seed", type=int, default=0, help="Random seed")
    parser.add_argument("--branch-rate", type=float, default=0.0, help="Share of branch instructions")
    parser.add_argument("--mispredict-rate", type=float, default=0.0, help="Share of branches marked mispredicted")
    parser.add_argument("--no-divide", action="store_true", help="Leave out DIV and RECIP")
    args = parser.parse_args()

    generate_traces(args.output, args.count, args.length, args.seed, args.branch_rate,
                    args.mispredict_rate, not args.no_divide)

if __name__ == "__main__":
    main()
