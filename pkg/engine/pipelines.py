"""Functional-unit pipelines for the dedicated-unit and dual-FMAC engines."""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from config import Config
from engine.regfile import V1_PORTS, V2_PORTS, PortConfig
from fpcore.bits import ExceptionFlags
from isa.instructions import Instruction, Mnemonic, Resource

logger = logging.getLogger(__name__)

@dataclass
class InFlight:
    seq: int
    dest: Optional[int]
    value: Optional[int]
    flags: ExceptionFlags
    taken: Optional[bool]
    unit: str
    write_port: Optional[int]
    remaining: int
    broadcast: bool = False

    @property
    def writes(self) -> bool:
        return self.dest is not None and self.write_port is not None

@dataclass
class Reservation:
    seq: int
    entry_cycle: int
    complete_cycle: int
    entry_stage: int = 1

class FunctionalUnit:
    def __init__(self, name: str, latency: int, write_port: Optional[int], pipelined: bool = True):
        self.name = name
        self.latency = latency
        self.write_port = write_port
        self.pipelined = pipelined
        self.records: List[InFlight] = []
        self.reservations: List[Reservation] = []
        self.busy_cycles = 0

    def can_accept(self, entry_cycle: int, entry_stage: int = 1) -> bool:
        if self.pipelined:
            return all(r.entry_cycle != entry_cycle for r in self.reservations)
        # Non-pipelined: the previous operation must have finished
        return all(r.complete_cycle <= entry_cycle for r in self.reservations)

    def reserve(self, seq: int, entry_cycle: int, entry_stage: int = 1):
        latency = self.latency_for(entry_stage)
        self.reservations.append(Reservation(seq, entry_cycle, entry_cycle - 1 + latency, entry_stage))

    def latency_for(self, entry_stage: int) -> int:
        return self.latency

    def prune(self, cycle: int):
        self.reservations = [r for r in self.reservations if r.complete_cycle >= cycle]

    def advance(self, lead: int) -> Tuple[List[InFlight], List[InFlight]]:
        """One cycle: returns (tags to broadcast, finished records)"""
        broadcasts, finished = [], []
        for record in self.records:
            record.remaining -= 1
            if record.writes and not record.broadcast and record.remaining == lead:
                record.broadcast = True
                broadcasts.append(record)
            if record.remaining == 0:
                finished.append(record)
        if finished:
            self.records = [r for r in self.records if r.remaining > 0]
        return broadcasts, finished

    def drop(self, seqs: Set[int]):
        self.records = [r for r in self.records if r.seq not in seqs]
        self.reservations = [r for r in self.reservations if r.seq not in seqs]

class UnifiedFmac(FunctionalUnit):
    """13-stage unit; an operation enters at the stage its class needs"""

    def __init__(self, name: str, write_port: int, stages: int = Config.FMAC_STAGES):
        super().__init__(name, latency=stages, write_port=write_port)
        self.stages = stages

    def latency_for(self, entry_stage: int) -> int:
        return self.stages + 1 - entry_stage

    def stage_at(self, reservation: Reservation, cycle: int) -> int:
        return reservation.entry_stage + (cycle - reservation.entry_cycle)

    def can_accept(self, entry_cycle: int, entry_stage: int = 1) -> bool:
        for reservation in self.reservations:
            if reservation.entry_cycle == entry_cycle:
                return False
            if self.stage_at(reservation, entry_cycle) == entry_stage:
                return False
        return True

@dataclass
class Route:
    unit: str
    entry_stage: int = 1
    latency: int = 1
    trap: bool = False

class PipelineSet:
    """Units of one engine variant, with port wiring and routing"""

    ports: PortConfig
    load_port: int

    def __init__(self):
        self.units: Dict[str, FunctionalUnit] = {}

    def route(self, inst: Instruction, entry_cycle: int, slot: int) -> Optional[Route]:
        raise NotImplementedError

    def read_ports(self, slot: int) -> Tuple[int, int, int]:
        return (0, 1, 2) if slot == 0 else (3, 4, 5)

    @property
    def store_port(self) -> int:
        return self.ports.reads - 1

    def try_reserve(self, inst: Instruction, seq: int, entry_cycle: int, slot: int) -> Optional[Route]:
        route = self.route(inst, entry_cycle, slot)
        if route is not None and not route.trap:
            self.units[route.unit].reserve(seq, entry_cycle, route.entry_stage)
        return route

    def enter(self, seq: int, inst: Instruction, route: Route, value: Optional[int],
              flags: ExceptionFlags, taken: Optional[bool]) -> InFlight:
        if route.trap:
            # Unimplemented on this engine: finishes at once without a result
            return InFlight(seq, inst.dest, None, flags, None, route.unit, None, remaining=0)

        unit = self.units[route.unit]
        record = InFlight(
            seq=seq, dest=inst.dest, value=value, flags=flags, taken=taken, unit=unit.name,
            write_port=unit.write_port if inst.dest is not None else None,
            remaining=route.latency - 1,
        )
        if record.remaining > 0:
            unit.records.append(record)
        return record

    def advance(self, cycle: int, lead: int) -> Tuple[List[InFlight], List[InFlight]]:
        broadcasts, finished = [], []
        for unit in self.units.values():
            unit.prune(cycle)
            sent, done = unit.advance(lead)
            broadcasts += sent
            finished += done
        return broadcasts, finished

    def count_busy(self):
        for unit in self.units.values():
            if unit.records:
                unit.busy_cycles += 1

    @property
    def in_flight(self) -> bool:
        return any(unit.records for unit in self.units.values())

    def busy_cycles(self) -> Dict[str, int]:
        return {name: unit.busy_cycles for name, unit in self.units.items()}

    def drop(self, seqs: Iterable[int]):
        seqs = set(seqs)
        for unit in self.units.values():
            unit.drop(seqs)

# Dedicated units by resource class, with their register-file write ports
V1_UNITS = {
    Resource.ADD: ("ADD", "ADD", 0),
    Resource.MUL: ("MUL", "MUL", 1),
    Resource.DIV: ("DIV", "DIV", 2),
    Resource.ALU: ("ALU", "ALU", 3),
    Resource.MULA: ("FMAC", "FMAC", 4),
    Resource.BRANCH: ("BRANCH", "BRANCH", None),
}

class V1Pipelines(PipelineSet):
    ports = V1_PORTS
    load_port = 5

    def __init__(self, latencies: Dict[str, int]):
        super().__init__()
        self.by_resource = {}
        for resource, (name, latency_key, port) in V1_UNITS.items():
            self.units[name] = FunctionalUnit(
                name, latencies[latency_key], port, pipelined=resource != Resource.DIV,
            )
            self.by_resource[resource] = name

    def route(self, inst: Instruction, entry_cycle: int, slot: int) -> Optional[Route]:
        # Only issue slot 0 reads three operands
        if inst.is_fused and slot != 0:
            return None
        unit = self.units[self.by_resource[inst.resource]]
        if not unit.can_accept(entry_cycle):
            return None
        return Route(unit=unit.name, latency=unit.latency)

UNIMPLEMENTED_V2 = frozenset({Mnemonic.DIV, Mnemonic.RECIP})

class V2Pipelines(PipelineSet):
    ports = V2_PORTS
    load_port = 2

    def __init__(self, entry_stages: Dict[str, int]):
        super().__init__()
        self.entry_stages = dict(entry_stages)
        for index in range(2):
            self.units[f"FMAC{index}"] = UnifiedFmac(f"FMAC{index}", write_port=index)

    def stage_class(self, inst: Instruction) -> str:
        if inst.resource in (Resource.MULA, Resource.MUL):
            return "FUSED"
        if inst.resource == Resource.ADD:
            return "ADD"
        return "ALU"

    def route(self, inst: Instruction, entry_cycle: int, slot: int) -> Optional[Route]:
        if inst.mnemonic in UNIMPLEMENTED_V2:
            return Route(unit="FMAC0", trap=True)

        stage = self.entry_stages[self.stage_class(inst)]
        for unit in self.units.values():
            if unit.can_accept(entry_cycle, stage):
                return Route(unit=unit.name, entry_stage=stage, latency=unit.latency_for(stage))
        return None
