"""Run counters, the final report and its serializers."""
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict

logger = logging.getLogger(__name__)

class RunStatus(str, Enum):
    OK = "ok"
    TRAP = "trap"
    DEADLOCK = "deadlock"

class InstructionTimeline(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    text: str
    dispatch: Optional[int] = None
    issue: Optional[int] = None
    complete: Optional[int] = None
    commit: Optional[int] = None
    squashed: bool = False

@dataclass
class RunCounters:
    """Raw tallies gathered while the engine steps"""
    variant: str = "v1"
    seed: int = 0
    bmt_enabled: bool = True
    regfile_model: str = "reference"
    cycles: int = 0
    dispatched: int = 0
    issued: int = 0
    committed: int = 0
    comparisons_total: int = 0
    comparisons_per_cycle: List[int] = field(default_factory=list)
    bmt_reads: int = 0
    blocks_enabled_histogram: List[int] = field(default_factory=lambda: [0] * 5)
    unit_busy_cycles: Dict[str, int] = field(default_factory=dict)
    bypass_overrides: int = 0
    occupancy_sum: int = 0
    captures: List[Tuple[int, int]] = field(default_factory=list)
    fcsr_flags: str = "-"
    fcsr_word: int = 0
    trap_cause: Optional[str] = None
    trap_index: Optional[int] = None
    squashed: List[int] = field(default_factory=list)
    rollbacks: int = 0
    timeline: List[InstructionTimeline] = field(default_factory=list)

class RunReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: RunStatus
    variant: str
    seed: int
    bmt_enabled: bool
    regfile_model: str
    cycles: int
    dispatched: int
    issued: int
    committed: int
    ipc: Optional[float]
    comparisons_total: int
    comparisons_per_committed: Optional[float]
    comparisons_per_cycle: List[int]
    bmt_reads: int
    blocks_enabled_histogram: List[int]
    unit_busy_cycles: Dict[str, int]
    bypass_overrides: int
    mean_queue_occupancy: Optional[float]
    captures: List[Tuple[int, int]]
    fcsr_flags: str
    fcsr_word: int
    trap_cause: Optional[str]
    trap_index: Optional[int]
    squashed: List[int]
    rollbacks: int
    timeline: List[InstructionTimeline]

    @property
    def store_values(self) -> List[int]:
        return [value for _, value in self.captures]

    def schedule(self) -> List[Tuple[Optional[int], ...]]:
        """(dispatch, issue, complete, commit) of every instruction that was not squashed"""
        return [(t.dispatch, t.issue, t.complete, t.commit) for t in self.timeline if not t.squashed]

    def summary(self) -> Dict[str, Union[str, int, float, None]]:
        """Flat scalar fields, one CSV row"""
        return {
            "status": self.status.value,
            "variant": self.variant,
            "seed": self.seed,
            "bmt_enabled": self.bmt_enabled,
            "regfile_model": self.regfile_model,
            "cycles": self.cycles,
            "dispatched": self.dispatched,
            "issued": self.issued,
            "committed": self.committed,
            "ipc": self.ipc,
            "comparisons_total": self.comparisons_total,
            "comparisons_per_committed": self.comparisons_per_committed,
            "bmt_reads": self.bmt_reads,
            "bypass_overrides": self.bypass_overrides,
            "mean_queue_occupancy": self.mean_queue_occupancy,
            "captures": " ".join(f"$f{reg}=0x{value:016X}" for reg, value in self.captures),
            "fcsr_flags": self.fcsr_flags,
            "fcsr_word": f"0x{self.fcsr_word:08X}",
            "trap_cause": self.trap_cause,
            "trap_index": self.trap_index,
            "squashed": len(self.squashed),
            "rollbacks": self.rollbacks,
        }

    def to_text(self) -> str:
        lines = {}
        for key, value in self.summary().items():
            if isinstance(value, float):
                value = f"{value:.6f}"
            lines[key] = "-" if value is None else str(value)
        lines["blocks_enabled_histogram"] = json.dumps(self.blocks_enabled_histogram)
        lines["unit_busy_cycles"] = json.dumps(self.unit_busy_cycles, sort_keys=True)
        lines["squashed"] = json.dumps(self.squashed)
        for t in self.timeline:
            stamps = " ".join("-" if c is None else str(c) for c in (t.dispatch, t.issue, t.complete, t.commit))
            lines[f"timeline.{t.index:04d}"] = f"{t.text} | {stamps}{' squashed' if t.squashed else ''}"
        return "\n".join(f"{key}: {lines[key]}" for key in sorted(lines)) + "\n"

def _ratio(numerator: float, denominator: float) -> Optional[float]:
    return numerator / denominator if denominator else None

def finalize(counters: RunCounters, status: RunStatus = RunStatus.OK) -> RunReport:
    """Turn raw counters into an immutable report"""
    return RunReport(
        status=status,
        variant=counters.variant,
        seed=counters.seed,
        bmt_enabled=counters.bmt_enabled,
        regfile_model=counters.regfile_model,
        cycles=counters.cycles,
        dispatched=counters.dispatched,
        issued=counters.issued,
        committed=counters.committed,
        ipc=_ratio(counters.committed, counters.cycles),
        comparisons_total=counters.comparisons_total,
        comparisons_per_committed=_ratio(counters.comparisons_total, counters.committed),
        comparisons_per_cycle=list(counters.comparisons_per_cycle),
        bmt_reads=counters.bmt_reads,
        blocks_enabled_histogram=list(counters.blocks_enabled_histogram),
        unit_busy_cycles=dict(counters.unit_busy_cycles),
        bypass_overrides=counters.bypass_overrides,
        mean_queue_occupancy=_ratio(counters.occupancy_sum, counters.cycles),
        captures=list(counters.captures),
        fcsr_flags=counters.fcsr_flags,
        fcsr_word=counters.fcsr_word,
        trap_cause=counters.trap_cause,
        trap_index=counters.trap_index,
        squashed=list(counters.squashed),
        rollbacks=counters.rollbacks,
        timeline=list(counters.timeline),
    )

def reports_to_frame(named_reports: Sequence[Tuple[str, RunReport]]) -> pd.DataFrame:
    rows = [{"trace": name, **report.summary()} for name, report in named_reports]
    return pd.DataFrame(rows)

def write_csv(frame: pd.DataFrame, path: Union[str, Path]):
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} rows to {path}")
