#!/usr/bin/env python3
"""
Command-line front door for the FP execution engine
Runs trace programs, batches of traces, the soft-float self-check and the ROM dump
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import toml
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from tqdm import tqdm

from cli.selftest import SUITES, print_results, print_rom, results_frame, run_selftest
from config import Config
from engine.core import CycleReport, DeadlockError, Engine, EngineConfig, EngineError, EngineVariant
from engine.regfile import RegfileModel
from engine.stats import RunReport, RunStatus, reports_to_frame, write_csv
from fpcore.bits import RoundingMode
from isa.program import Program, TraceError, load_program

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ENGINE = 2
EXIT_MISMATCH = 3

class CliConfig(BaseModel):
    """Settings merged from the config file and the command line"""
    model_config = ConfigDict(extra="forbid")

    trace: Optional[Path] = None
    engine: EngineVariant = EngineVariant(Config.ENGINE_VARIANT)
    bmt: bool = Config.BMT_ENABLED
    regfile: RegfileModel = RegfileModel(Config.REGFILE_MODEL)
    rounding: Literal["RN", "RZ", "RP", "RM"] = "RN"
    flush: bool = False
    latency: Dict[str, int] = Field(default_factory=dict)
    broadcast_lead: int = Config.BROADCAST_LEAD
    speculate: bool = True
    cycle_budget: int = Config.CYCLE_BUDGET
    log: Optional[Path] = None
    format: Literal["text", "csv"] = "text"
    seed: int = Config.SEED

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            variant=self.engine,
            bmt_enabled=self.bmt,
            regfile_model=self.regfile,
            rounding_mode=RoundingMode[self.rounding],
            flush=self.flush,
            latencies=self.latency,
            broadcast_lead=self.broadcast_lead,
            speculate=self.speculate,
            cycle_budget=self.cycle_budget,
            seed=self.seed,
        )

class SettingsError(Exception):
    pass

def _describe(error: ValidationError) -> str:
    problems = []
    for item in error.errors():
        name = ".".join(str(part) for part in item["loc"])
        if item["type"] == "extra_forbidden":
            problems.append(f"unknown setting '{name}'")
        else:
            problems.append(f"{name}: {item['msg']}")
    return "; ".join(problems)

def _parse_latencies(pairs: List[str]) -> Dict[str, int]:
    latencies = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not value.strip().isdigit():
            raise SettingsError(f"--latency expects KEY=N, got '{pair}'")
        latencies[key.strip().upper()] = int(value)
    return latencies

def build_settings(args: argparse.Namespace) -> Tuple[CliConfig, EngineConfig]:
    """Config file first, then every flag that was given"""
    values = {}
    if args.config:
        try:
            values = toml.load(args.config)
        except (OSError, toml.TomlDecodeError) as e:
            raise SettingsError(f"cannot read config {args.config}: {e}") from e

    flags = {
        "trace": getattr(args, "trace", None),
        "engine": args.engine,
        "bmt": None if args.bmt is None else args.bmt == "on",
        "regfile": args.regfile,
        "rounding": args.rounding,
        "flush": True if args.flush else None,
        "latency": _parse_latencies(args.latency) if args.latency else None,
        "broadcast_lead": args.broadcast_lead,
        "speculate": False if args.no_speculate else None,
        "cycle_budget": args.cycle_budget,
        "log": getattr(args, "log", None),
        "format": getattr(args, "format", None),
        "seed": args.seed,
    }
    if flags["latency"] is not None:
        flags["latency"] = {**values.get("latency", {}), **flags["latency"]}
    values.update({key: value for key, value in flags.items() if value is not None})

    try:
        settings = CliConfig(**values)
        return settings, settings.engine_config()
    except ValidationError as e:
        raise SettingsError(_describe(e)) from e

def check_expectations(program: Program, report: RunReport) -> bool:
    """Stored values must equal the trace's EXPECT lines, in order"""
    if not program.expectations:
        logger.warning("Trace has no EXPECT lines to check against")
        return False
    if report.captures == list(program.expectations):
        return True
    for (reg, want), got in zip(program.expectations, report.captures + [None] * len(program.expectations)):
        if got != (reg, want):
            logger.error(f"Store mismatch: expected $f{reg}=0x{want:016X}, got "
                         f"{'nothing' if got is None else f'$f{got[0]}=0x{got[1]:016X}'}")
    return False

def execute(program: Program, engine_config: EngineConfig, log_path: Optional[Path] = None) -> RunReport:
    """Run one program; deadlocks come back as a report with deadlock status"""
    engine = Engine(engine_config)
    log_file = open(log_path, "w") if log_path else None

    def on_cycle(cycle: CycleReport):
        log_file.write(json.dumps(cycle.to_dict()) + "\n")

    try:
        return engine.run(program, on_cycle=on_cycle if log_file else None)
    except DeadlockError as e:
        logger.error(f"{e}")
        return e.report
    finally:
        if log_file:
            log_file.close()

def exit_code(report: RunReport) -> int:
    return EXIT_OK if report.status == RunStatus.OK else EXIT_ENGINE

def run_command(args: argparse.Namespace) -> int:
    try:
        settings, engine_config = build_settings(args)
        if settings.trace is None:
            raise SettingsError("no trace given (use --trace or set trace in the config file)")
        program = load_program(settings.trace)
    except SettingsError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_INPUT
    except TraceError as e:
        logger.error(f"{settings.trace}: {e}")
        return EXIT_INPUT
    except OSError as e:
        logger.error(f"Cannot read trace {settings.trace}: {e.strerror or e}")
        return EXIT_INPUT

    try:
        report = execute(program, engine_config, settings.log)
    except EngineError as e:
        logger.error(f"Engine error: {e}")
        return EXIT_ENGINE

    if settings.format == "csv":
        sys.stdout.write(reports_to_frame([(settings.trace.name, report)]).to_csv(index=False))
    else:
        sys.stdout.write(report.to_text())

    code = exit_code(report)
    if code == EXIT_OK and args.golden and not check_expectations(program, report):
        return EXIT_MISMATCH
    return code

def _batch_one(path: Path, engine_config: EngineConfig, golden: bool) -> Tuple[str, Optional[RunReport], int]:
    try:
        program = load_program(path)
    except (TraceError, OSError) as e:
        logger.error(f"{path}: {e}")
        return path.name, None, EXIT_INPUT
    try:
        report = execute(program, engine_config)
    except EngineError as e:
        logger.error(f"{path.name}: {e}")
        return path.name, None, EXIT_ENGINE

    code = exit_code(report)
    if code == EXIT_OK and golden and program.expectations and not check_expectations(program, report):
        code = EXIT_MISMATCH
    return path.name, report, code

def batch_command(args: argparse.Namespace) -> int:
    try:
        _, engine_config = build_settings(args)
    except SettingsError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_INPUT

    traces = sorted(Path(args.traces).glob("*.trace"))
    if not traces:
        logger.error(f"No .trace files in {args.traces}")
        return EXIT_INPUT

    logger.info(f"Running {len(traces)} traces on {args.jobs} workers")
    results = Parallel(n_jobs=args.jobs)(
        delayed(_batch_one)(path, engine_config, args.golden) for path in tqdm(traces, desc="batch")
    )

    frame = reports_to_frame([(name, report) for name, report, _ in results if report is not None])
    if args.output:
        write_csv(frame, args.output)
    else:
        sys.stdout.write(frame.to_csv(index=False))

    worst = max(code for _, _, code in results)
    failed = [name for name, _, code in results if code != EXIT_OK]
    if failed:
        logger.warning(f"{len(failed)} of {len(results)} traces did not pass: {', '.join(failed)}")
    return worst

def selftest_command(args: argparse.Namespace) -> int:
    results = run_selftest(samples=args.samples, seed=args.seed, jobs=args.jobs, suites=args.suite)
    print_results(results)
    if args.output:
        write_csv(results_frame(results), args.output)
    return EXIT_OK if all(result.passed for result in results) else EXIT_MISMATCH

def rom_dump_command(args: argparse.Namespace) -> int:
    print_rom(table=args.table)
    return EXIT_OK

def _engine_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="Flat key = value settings file")
    parser.add_argument("--engine", choices=[v.value for v in EngineVariant], help="Engine variant")
    parser.add_argument("--bmt", choices=["on", "off"], help="Block Mapping Table wakeup filter")
    parser.add_argument("--regfile", choices=[m.value for m in RegfileModel], help="Register file model")
    parser.add_argument("--rounding", choices=[m.name for m in RoundingMode], help="Rounding mode")
    parser.add_argument("--flush", action="store_true", help="Flush tiny results to zero")
    parser.add_argument("--latency", action="append", metavar="KEY=N", help="Override a unit latency")
    parser.add_argument("--broadcast-lead", type=int, help="Cycles a result tag is broadcast early")
    parser.add_argument("--no-speculate", action="store_true", help="Stall dispatch behind unresolved branches")
    parser.add_argument("--cycle-budget", type=int, help="Abort after this many cycles")
    parser.add_argument("--seed", type=int, help="Seed recorded in the report")
    parser.add_argument("--golden", action="store_true", help="Check stores against the trace's EXPECT lines")

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Out-of-order FP execution engine")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one trace")
    run.add_argument("--trace", type=Path, help="Trace program")
    run.add_argument("--log", type=Path, help="Write per-cycle JSON lines here")
    run.add_argument("--format", choices=["text", "csv"], help="Report format")
    _engine_flags(run)
    run.set_defaults(handler=run_command)

    batch = commands.add_parser("batch", help="Run every .trace file in a directory")
    batch.add_argument("--traces", type=Path, required=True, help="Directory of traces")
    batch.add_argument("--jobs", type=int, default=1, help="Parallel workers")
    batch.add_argument("--output", type=Path, help="CSV file (default: stdout)")
    _engine_flags(batch)
    batch.set_defaults(handler=batch_command)

    selftest = commands.add_parser("selftest", help="Check the soft-float units against the exact oracle")
    selftest.add_argument("--samples", type=int, default=Config.SELFTEST_SAMPLES, help="Random cases per suite and mode")
    selftest.add_argument("--seed", type=int, default=Config.SEED, help="Random seed")
    selftest.add_argument("--jobs", type=int, default=Config.SELFTEST_JOBS, help="Parallel workers")
    selftest.add_argument("--suite", action="append", choices=list(SUITES), help="Run only these suites")
    selftest.add_argument("--output", type=Path, help="Also write the results as CSV")
    selftest.set_defaults(handler=selftest_command)

    rom = commands.add_parser("rom-dump", help="Print the reciprocal seed ROM")
    rom.add_argument("--table", action="store_true", help="Render as a table")
    rom.set_defaults(handler=rom_dump_command)
    return parser

def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    return args.handler(args)

if __name__ == "__main__":
    sys.exit(main())
