"""Trace program model and its line-oriented text format."""
import re
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple, Union

from fpcore.compare import CmpCond
from isa.instructions import (
    SOURCE_COUNT, UNIMPLEMENTED_FORMATS, UNIMPLEMENTED_MNEMONICS, Instruction, Mnemonic,
)

logger = logging.getLogger(__name__)

class TraceError(Exception):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)

class TraceSyntaxError(TraceError):
    pass

class UnimplementedInstructionError(TraceError):
    def __init__(self, mnemonic: str, line: Optional[int] = None):
        self.mnemonic = mnemonic
        super().__init__(f"unimplemented instruction {mnemonic}", line)

class LoadEvent(NamedTuple):
    cycle: int
    value: int
    register: int
    index: int

@dataclass
class Program:
    instructions: List[Instruction] = field(default_factory=list)
    expectations: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def loads(self) -> List[LoadEvent]:
        return [
            LoadEvent(inst.load_cycle, inst.load_value, inst.dest, index)
            for index, inst in enumerate(self.instructions) if inst.is_load
        ]

    @property
    def captures(self) -> List[int]:
        """Registers captured by SDC1, in program order"""
        return [inst.sources[0] for inst in self.instructions if inst.is_store]

    def __len__(self) -> int:
        return len(self.instructions)

REGISTER = r"\$f(\d{1,2})"
HEX64 = r"0x([0-9a-f]{16})"

MNEMONIC_RE = re.compile(r"^([a-z][a-z0-9]*(?:\.[a-z0-9]+)*)(.*)$", re.IGNORECASE)
REGISTER_RE = re.compile(REGISTER, re.IGNORECASE)
LOAD_RE = re.compile(rf"^{REGISTER}\s+@cycle=(\d+)\s+value={HEX64}$", re.IGNORECASE)
BRANCH_RE = re.compile(rf"^{REGISTER}(\s+!mispredict)?$", re.IGNORECASE)
EXPECT_RE = re.compile(rf"^EXPECT\s+{REGISTER}\s+{HEX64}$", re.IGNORECASE)

def _strip_comment(raw: str) -> str:
    for marker in ("#", "//"):
        position = raw.find(marker)
        if position >= 0:
            raw = raw[:position]
    return raw.strip()

def _register(text: str, line: int) -> int:
    match = REGISTER_RE.fullmatch(text.strip())
    if not match:
        raise TraceSyntaxError(f"expected a register, got '{text.strip()}'", line)
    number = int(match.group(1))
    if number > 31:
        raise TraceSyntaxError(f"register $f{number} out of range", line)
    return number

def _split_suffixes(name: str, line: int) -> Tuple[Mnemonic, Optional[CmpCond]]:
    parts = name.upper().split(".")
    base = parts[0]

    if base not in Mnemonic.__members__:
        if base in UNIMPLEMENTED_MNEMONICS:
            raise UnimplementedInstructionError(name.upper(), line)
        raise TraceSyntaxError(f"unknown mnemonic '{name}'", line)

    mnemonic = Mnemonic[base]
    cond = None
    formats = parts[1:]

    if mnemonic == Mnemonic.CMP:
        if not formats or formats[0] not in CmpCond.__members__:
            raise TraceSyntaxError(f"CMP needs a condition, got '{name}'", line)
        cond = CmpCond[formats[0]]
        formats = formats[1:]
    elif mnemonic in (Mnemonic.LDC1, Mnemonic.SDC1, Mnemonic.BC1EQZ, Mnemonic.BC1NEZ):
        if formats:
            raise TraceSyntaxError(f"{base} takes no suffix", line)

    if len(formats) > 1:
        raise TraceSyntaxError(f"malformed mnemonic '{name}'", line)
    if formats and formats[0] != "D":
        if formats[0] in UNIMPLEMENTED_FORMATS:
            raise UnimplementedInstructionError(name.upper(), line)
        raise TraceSyntaxError(f"unknown format '.{formats[0]}'", line)

    return mnemonic, cond

def _parse_line(text: str, line: int) -> Union[Instruction, Tuple[int, int]]:
    expect = EXPECT_RE.match(text)
    if expect:
        return int(expect.group(1)), int(expect.group(2), 16)

    match = MNEMONIC_RE.match(text)
    if not match:
        raise TraceSyntaxError(f"cannot parse '{text}'", line)

    mnemonic, cond = _split_suffixes(match.group(1), line)
    rest = match.group(2).strip()

    if mnemonic == Mnemonic.LDC1:
        load = LOAD_RE.match(rest)
        if not load:
            raise TraceSyntaxError("LDC1 needs '<reg> @cycle=<N> value=<0x...>'", line)
        return Instruction(
            mnemonic, dest=_register(f"$f{load.group(1)}", line),
            load_cycle=int(load.group(2)), load_value=int(load.group(3), 16), line=line,
        )

    if mnemonic == Mnemonic.SDC1:
        return Instruction(mnemonic, sources=(_register(rest, line),), line=line)

    if mnemonic in (Mnemonic.BC1EQZ, Mnemonic.BC1NEZ):
        branch = BRANCH_RE.match(rest)
        if not branch:
            raise TraceSyntaxError(f"{mnemonic.value} needs '<reg> [!mispredict]'", line)
        return Instruction(
            mnemonic, sources=(_register(f"$f{branch.group(1)}", line),),
            mispredict=branch.group(2) is not None, line=line,
        )

    operands = [_register(token, line) for token in rest.split(",")] if rest else []
    expected = SOURCE_COUNT[mnemonic] + 1
    if len(operands) != expected:
        raise TraceSyntaxError(f"{mnemonic.value} takes {expected} registers, got {len(operands)}", line)

    return Instruction(mnemonic, dest=operands[0], sources=tuple(operands[1:]), cond=cond, line=line)

def parse_program(text: str) -> Program:
    """Parse trace text into a Program, keeping file order"""
    program = Program()
    seen_loads = set()

    for line, raw in enumerate(text.splitlines(), start=1):
        content = _strip_comment(raw)
        if not content:
            continue

        parsed = _parse_line(content, line)
        if isinstance(parsed, tuple):
            program.expectations.append(parsed)
            continue

        if parsed.is_load:
            key = (parsed.dest, parsed.load_cycle)
            if key in seen_loads:
                raise TraceSyntaxError(f"duplicate load of $f{parsed.dest} at cycle {parsed.load_cycle}", line)
            seen_loads.add(key)
        program.instructions.append(parsed)

    return program

def render_instruction(inst: Instruction) -> str:
    if inst.is_load:
        return f"LDC1 $f{inst.dest} @cycle={inst.load_cycle} value=0x{inst.load_value:016X}"
    if inst.is_store:
        return f"SDC1 $f{inst.sources[0]}"
    if inst.is_branch:
        marker = " !mispredict" if inst.mispredict else ""
        return f"{inst.mnemonic.value} $f{inst.sources[0]}{marker}"

    name = f"CMP.{inst.cond.name}" if inst.mnemonic == Mnemonic.CMP else inst.mnemonic.value
    registers = ", ".join(f"$f{r}" for r in (inst.dest,) + inst.sources)
    return f"{name}.D {registers}"

def render(program: Program) -> str:
    """Canonical text form; expectations go last"""
    lines = [render_instruction(inst) for inst in program.instructions]
    lines += [f"EXPECT $f{register} 0x{value:016X}" for register, value in program.expectations]
    return "\n".join(lines) + "\n" if lines else ""

def load_program(path: Union[str, Path]) -> Program:
    path = Path(path)
    program = parse_program(path.read_text())
    logger.info(f"Loaded {len(program)} instructions from {path} "
                f"({len(program.loads)} loads, {len(program.captures)} captures)")
    return program
