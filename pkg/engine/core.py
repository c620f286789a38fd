"""Cycle-stepped out-of-order FP back end."""
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import Config
from engine.checkpoint import Checkpoint, CheckpointRing, JournalKind
from engine.issue_queue import IssueQueue, payload_for
from engine.pipelines import InFlight, PipelineSet, Route, V1Pipelines, V2Pipelines
from engine.regfile import ReadyBitVector, RegfileModel, make_register_file
from engine.rob import RobEntry, RobState, RobStub
from engine.stats import InstructionTimeline, RunCounters, RunReport, RunStatus, finalize
from fpcore.bits import ExceptionFlags, RoundingMode
from isa.fcsr import Fcsr, fcsr_accrue
from isa.instructions import Instruction
from isa.program import Program, render_instruction
from isa.semantics import evaluate

logger = logging.getLogger(__name__)

class EngineVariant(str, Enum):
    V1 = "v1"
    V2 = "v2"

ARITHMETIC_LATENCIES = ("ADD", "MUL", "FMAC", "DIV")

class EngineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    variant: EngineVariant = EngineVariant(Config.ENGINE_VARIANT)
    latencies: Dict[str, int] = Field(default_factory=lambda: dict(Config.DEFAULT_LATENCIES))
    fmac_entry_stages: Dict[str, int] = Field(default_factory=lambda: dict(Config.FMAC_ENTRY_STAGES))
    broadcast_lead: int = Field(default=Config.BROADCAST_LEAD, ge=0, le=3)
    load_broadcast_lead: int = Field(default=Config.LOAD_BROADCAST_LEAD, ge=0, le=3)
    bmt_enabled: bool = Config.BMT_ENABLED
    regfile_model: RegfileModel = RegfileModel(Config.REGFILE_MODEL)
    rounding_mode: RoundingMode = RoundingMode.RN
    flush: bool = False
    enables: int = Field(default=0, ge=0, le=0x1F)
    cycle_budget: int = Field(default=Config.CYCLE_BUDGET, gt=0)
    deadlock_window: int = Field(default=Config.DEADLOCK_WINDOW, gt=0)
    checkpoint_depth: int = Field(default=Config.CHECKPOINT_DEPTH, gt=0)
    rob_capacity: int = Field(default=Config.ROB_CAPACITY, gt=0, le=Config.ROB_CAPACITY)
    speculate: bool = True
    debug: bool = True
    seed: int = Config.SEED

    @field_validator("latencies")
    @classmethod
    def merge_latencies(cls, value: Dict[str, int]) -> Dict[str, int]:
        unknown = set(value) - set(Config.DEFAULT_LATENCIES)
        if unknown:
            raise ValueError(f"unknown latency keys: {', '.join(sorted(unknown))}")
        merged = {**Config.DEFAULT_LATENCIES, **value}
        for key, latency in merged.items():
            if latency < 1:
                raise ValueError(f"latency {key} must be at least 1, got {latency}")
        return merged

    @field_validator("fmac_entry_stages")
    @classmethod
    def merge_stages(cls, value: Dict[str, int]) -> Dict[str, int]:
        unknown = set(value) - set(Config.FMAC_ENTRY_STAGES)
        if unknown:
            raise ValueError(f"unknown FMAC stage classes: {', '.join(sorted(unknown))}")
        merged = {**Config.FMAC_ENTRY_STAGES, **value}
        for key, stage in merged.items():
            if not 1 <= stage <= Config.FMAC_STAGES:
                raise ValueError(f"entry stage {key}={stage} outside 1..{Config.FMAC_STAGES}")
        return merged

    @model_validator(mode="after")
    def check_broadcast_lead(self) -> "EngineConfig":
        if self.variant == EngineVariant.V1:
            arithmetic = {key: self.latencies[key] for key in ARITHMETIC_LATENCIES}
        else:
            arithmetic = {key: Config.FMAC_STAGES + 1 - self.fmac_entry_stages[key] for key in ("FUSED", "ADD")}
        for key, latency in arithmetic.items():
            if self.broadcast_lead >= latency:
                raise ValueError(f"broadcast_lead {self.broadcast_lead} must be below the {key} latency {latency}")
        return self

    def fcsr(self) -> Fcsr:
        return Fcsr(rounding_mode=self.rounding_mode, flush=self.flush, enables=ExceptionFlags(self.enables))

class EngineError(Exception):
    def __init__(self, message: str, cycle: Optional[int] = None):
        self.cycle = cycle
        super().__init__(f"cycle {cycle}: {message}" if cycle is not None else message)

class DeadlockError(EngineError):
    def __init__(self, diagnosis: str, cycle: int, report: Optional[RunReport] = None):
        self.diagnosis = diagnosis
        self.report = report
        super().__init__(f"deadlock: {diagnosis}", cycle)

class CheckpointEvictedError(EngineError):
    pass

class CycleBudgetExceeded(EngineError):
    pass

@dataclass
class CycleReport:
    cycle: int
    dispatches: List[Tuple[int, Optional[int]]] = field(default_factory=list)  # (seq, block)
    broadcasts: List[int] = field(default_factory=list)
    wakeups: List[Tuple[int, int, int]] = field(default_factory=list)  # (tag, block mask, comparisons)
    issues: List[Tuple[int, int, int]] = field(default_factory=list)  # (block, slot, dir_rob)
    completions: List[int] = field(default_factory=list)
    commits: List[int] = field(default_factory=list)
    comparisons: int = 0
    rollbacks: List[int] = field(default_factory=list)
    trap: bool = False

    @property
    def active(self) -> bool:
        return bool(self.dispatches or self.wakeups or self.issues or self.completions or self.commits)

    def to_dict(self) -> dict:
        return asdict(self)

@dataclass
class Latch:
    """An issued instruction waiting one cycle for its FU input"""
    seq: int
    inst: Instruction
    route: Route
    operands: List[int]

@dataclass
class PendingLoad:
    seq: int
    dest: int
    value: int
    due: int
    broadcast_cycle: int
    broadcast: bool = False

@dataclass
class Timeline:
    dispatch: Optional[int] = None
    issue: Optional[int] = None
    complete: Optional[int] = None
    commit: Optional[int] = None
    squashed: bool = False

class Engine:
    def __init__(self, config: Optional[EngineConfig] = None):
        self.config = config or EngineConfig()
        self.program = Program()
        self.reset()

    def reset(self):
        cfg = self.config
        if cfg.variant == EngineVariant.V2:
            self.pipelines: PipelineSet = V2Pipelines(cfg.fmac_entry_stages)
        else:
            self.pipelines = V1Pipelines(cfg.latencies)
        self.regfile = make_register_file(cfg.regfile_model, self.pipelines.ports, debug=cfg.debug)
        self.ready = ReadyBitVector()
        self.queue = IssueQueue(bmt_enabled=cfg.bmt_enabled)
        self.rob = RobStub(cfg.rob_capacity)
        self.checkpoints = CheckpointRing(cfg.checkpoint_depth)
        self.fcsr = cfg.fcsr()

        self.cycle = 0
        self.next_index = 0
        self.latches: List[Latch] = []
        self.loads: List[PendingLoad] = []
        self.load_port_cycles: Dict[int, int] = {}
        self.pending_tags: List[Tuple[int, int]] = []
        self.bus: Dict[int, int] = {}
        self.writers: Counter = Counter()
        self.readers: Counter = Counter()
        # Newest dispatched, unsquashed writer of each register
        self.last_writer: Dict[int, int] = {}
        # seq -> (write cycle, register, value it overwrote), until the writer commits
        self.shadow: Dict[int, Tuple[int, int, int]] = {}
        self.squashed: Set[int] = set()
        self.unresolved_branches = 0
        self.timelines: Dict[int, Timeline] = {}
        self.trap_seq: Optional[int] = None
        self.idle_cycles = 0
        self.counters = RunCounters(
            variant=cfg.variant.value, seed=cfg.seed, bmt_enabled=cfg.bmt_enabled,
            regfile_model=RegfileModel(cfg.regfile_model).value,
        )

    def load(self, program: Program):
        self.program = program
        self.reset()

    @property
    def done(self) -> bool:
        if self.trap_seq is not None:
            return True
        return self.next_index >= len(self.program.instructions) and len(self.rob) == 0

    @property
    def in_flight(self) -> bool:
        return bool(self.pipelines.in_flight or self.latches or self.loads or self.pending_tags)

    def _timeline(self, seq: int) -> Timeline:
        return self.timelines.setdefault(seq, Timeline())

    # Phase 1: FU pipelines advance, results write back and drive the bus
    def _advance_units(self, report: CycleReport):
        broadcasts, finished = self.pipelines.advance(self.cycle, self.config.broadcast_lead)
        for record in broadcasts:
            self._broadcast(record.seq, record.dest, report)
        for record in finished:
            self._complete(record, report)

    def _broadcast(self, seq: int, tag: int, report: CycleReport):
        self.pending_tags.append((seq, tag))
        report.broadcasts.append(tag)

    def _owns(self, seq: int, reg: int) -> bool:
        return self.last_writer.get(reg) == seq

    def _writeback(self, seq: int, port: int, dest: int, value: int):
        self.shadow[seq] = (self.cycle, dest, self.regfile.peek(dest))
        self.regfile.write(port, dest, value)
        self.bus[dest] = value
        if self._owns(seq, dest):
            self.ready.set(dest)
            self.checkpoints.record(self.cycle, seq, JournalKind.READY_SET, dest)

    def _complete(self, record: InFlight, report: CycleReport):
        if record.writes:
            self._writeback(record.seq, record.write_port, record.dest, record.value)
        if record.dest is not None:
            self.writers[record.dest] -= 1

        entry = self.rob.get(record.seq)
        entry.flags = record.flags
        entry.taken = record.taken
        self.rob.mark(record.seq, RobState.EXECUTED)
        self._timeline(record.seq).complete = self.cycle
        report.completions.append(record.seq)

    # Phase 2: scheduled loads broadcast early and then write through their port
    def _service_loads(self, report: CycleReport):
        remaining = []
        for load in self.loads:
            if not load.broadcast and load.broadcast_cycle <= self.cycle:
                load.broadcast = True
                self._broadcast(load.seq, load.dest, report)
            if load.due == self.cycle:
                self._writeback(load.seq, self.pipelines.load_port, load.dest, load.value)
                self.writers[load.dest] -= 1
                self.load_port_cycles.pop(load.due, None)
                self.rob.mark(load.seq, RobState.EXECUTED)
                self._timeline(load.seq).complete = self.cycle
                self.counters.issued += 1
                report.completions.append(load.seq)
            else:
                remaining.append(load)
        self.loads = remaining

    # Phase 3: select, issue and the (possibly stale) register read
    def _select_and_issue(self, report: CycleReport) -> List[Latch]:
        routes: Dict[int, Route] = {}

        def accept(entry, slot: int) -> bool:
            inst = self.program.instructions[entry.age]
            route = self.pipelines.try_reserve(inst, entry.age, self.cycle + 1, slot)
            if route is None:
                return False
            routes[entry.age] = route
            return True

        latches = []
        for slot_index, ref in enumerate(self.queue.select(accept)):
            entry = self.queue.entries[ref.block][ref.slot]
            seq = entry.age
            inst = self.program.instructions[seq]
            ports = self.pipelines.read_ports(slot_index)
            operands = [self.regfile.read(ports[i], tag) for i, tag in enumerate(inst.sources)]

            self.queue.release(ref.block, ref.slot)
            self.checkpoints.record(self.cycle, seq, JournalKind.RELEASE, ref.block, ref.slot)
            self.rob.mark(seq, RobState.ISSUED)
            self._timeline(seq).issue = self.cycle
            self.counters.issued += 1
            latches.append(Latch(seq, inst, routes[seq], operands))
            report.issues.append((ref.block, ref.slot, entry.payload.dir_rob))
        return latches

    # Phase 4: tags broadcast last cycle reach the CAM blocks
    def _wakeup(self, delivered: List[Tuple[int, int]], report: CycleReport):
        for seq, tag in delivered:
            if not self._owns(seq, tag):
                # A younger writer of this register has dispatched since the broadcast
                logger.debug(f"Cycle {self.cycle}: dropped stale tag {tag} of #{seq}")
                continue
            result = self.queue.wakeup(tag)
            if self.queue.bmt_enabled:
                self.checkpoints.record(self.cycle, seq, JournalKind.BMT_CLEAR, tag)
            for block, slot, source, age in result.woken:
                self.checkpoints.record(self.cycle, age, JournalKind.ENTRY_READY, block, slot, source)
            self.ready.set(tag)
            self.checkpoints.record(self.cycle, seq, JournalKind.READY_SET, tag)
            report.wakeups.append((tag, result.enabled_mask, result.comparisons))
            report.comparisons += result.comparisons

    # Phase 5: last cycle's issues enter their units, bypass values override stale reads
    def _enter_units(self, latches: List[Latch], report: CycleReport):
        for latch in latches:
            operands = list(latch.operands)
            for index, tag in enumerate(latch.inst.sources):
                if tag in self.bus:
                    operands[index] = self.bus[tag]
                    self.counters.bypass_overrides += 1
                self.readers[tag] -= 1

            if latch.route.trap:
                value, flags, taken = None, ExceptionFlags.UNIMPLEMENTED, None
            else:
                outcome = evaluate(latch.inst, operands, self.fcsr)
                value, flags, taken = outcome.value, outcome.flags, outcome.taken

            record = self.pipelines.enter(latch.seq, latch.inst, latch.route, value, flags, taken)
            if record.writes and record.remaining <= self.config.broadcast_lead:
                record.broadcast = True
                self._broadcast(record.seq, record.dest, report)
            if record.remaining == 0:
                self._complete(record, report)

    # Phase 6: in-order dispatch of up to two instructions
    def _blocked(self, inst: Instruction, writers: Counter, readers: Counter) -> bool:
        if inst.dest is None:
            return False
        return writers[inst.dest] > 0 or readers[inst.dest] > 0

    def _dispatch_group(self) -> List[Instruction]:
        group: List[Instruction] = []
        writers, readers = Counter(self.writers), Counter(self.readers)
        instructions = self.program.instructions

        while len(group) < Config.DISPATCH_WIDTH and self.next_index + len(group) < len(instructions):
            if not self.config.speculate and self.unresolved_branches:
                break
            if len(self.rob) + len(group) >= self.rob.capacity:
                break
            inst = instructions[self.next_index + len(group)]
            if self._blocked(inst, writers, readers):
                break
            group.append(inst)
            if inst.dest is not None:
                writers[inst.dest] += 1
            if not inst.is_load:
                readers.update(inst.sources)
            if inst.is_branch:
                break
        return group

    def _dispatch(self, report: CycleReport):
        group = self._dispatch_group()
        blocks = None
        while group:
            blocks = self.queue.assign(sum(inst.uses_queue for inst in group))
            if blocks is not None:
                break
            group = group[:-1]

        for inst in group:
            seq = self.next_index
            self.next_index += 1
            block = blocks.pop(0) if inst.uses_queue else None
            self._dispatch_one(seq, inst, block)
            report.dispatches.append((seq, block))

    def _dispatch_one(self, seq: int, inst: Instruction, block: Optional[int]):
        entry = self.rob.allocate(seq, inst, self.cycle)
        self._timeline(seq).dispatch = self.cycle
        self.counters.dispatched += 1
        if inst.dest is not None:
            self.last_writer[inst.dest] = seq

        if inst.is_load:
            due = max(inst.load_cycle, self.cycle + 1)
            while due in self.load_port_cycles:
                due += 1
            self.load_port_cycles[due] = seq
            broadcast = max(due - self.config.load_broadcast_lead, self.cycle + 1)
            self.loads.append(PendingLoad(seq, inst.dest, inst.load_value, due, broadcast))
            self.ready.clear(inst.dest)
            self.writers[inst.dest] += 1
            return

        if inst.is_store:
            self.readers[inst.sources[0]] += 1
            self.rob.mark(seq, RobState.EXECUTED)
            self._timeline(seq).complete = self.cycle
            self.counters.issued += 1
            return

        payload = payload_for(inst, entry.dir_rob)
        self.queue.dispatch(payload, len(inst.sources), block, self.ready, age=seq)
        self.readers.update(inst.sources)
        if inst.dest is not None:
            self.ready.clear(inst.dest)
            self.writers[inst.dest] += 1
        if inst.is_branch:
            self.unresolved_branches += 1

    # Phase 7: in-order commit
    def _commit(self, report: CycleReport):
        for _ in range(Config.COMMIT_WIDTH):
            head = self.rob.head
            if head is None or head.state < RobState.EXECUTED:
                return
            inst = head.inst

            if not (inst.is_load or inst.is_store or inst.is_branch):
                fcsr, trap = fcsr_accrue(self.fcsr, head.flags)
                self.fcsr = fcsr
                if trap:
                    self.trap_seq = head.seq
                    report.trap = True
                    logger.info(f"Trap at cycle {self.cycle}: #{head.seq} {render_instruction(inst)} "
                                f"cause {fcsr.cause.letters()}")
                    return

            self.rob.retire_head()
            self.shadow.pop(head.seq, None)
            self._timeline(head.seq).commit = self.cycle
            self.counters.committed += 1
            report.commits.append(head.seq)

            if inst.is_store:
                register = inst.sources[0]
                value = self.regfile.read(self.pipelines.store_port, register)
                self.readers[register] -= 1
                self.counters.captures.append((register, value))
            elif inst.is_branch:
                self.unresolved_branches -= 1
                if inst.mispredict:
                    self.rollback(head, report)
                    return

    def rollback(self, branch: RobEntry, report: Optional[CycleReport] = None):
        """Restore the branch's dispatch-cycle checkpoint and squash everything younger"""
        checkpoint = self.checkpoints.find(branch.dispatch_cycle)
        if checkpoint is None:
            raise CheckpointEvictedError(
                f"checkpoint of cycle {branch.dispatch_cycle} for branch #{branch.seq} was evicted", self.cycle,
            )

        self.queue.restore(checkpoint.queue)
        self.ready.restore(checkpoint.ready)
        for event in self.checkpoints.events_after(checkpoint.cycle, branch.seq):
            if event.kind == JournalKind.READY_SET:
                self.ready.set(*event.args)
            elif event.kind == JournalKind.BMT_CLEAR:
                self.queue.bmt.clear(*event.args)
            elif event.kind == JournalKind.ENTRY_READY:
                self.queue.mark_ready(*event.args)
            else:
                self.queue.release(*event.args)

        squashed = self.rob.squash_younger(branch.seq)
        dropped = set(squashed)
        self.pipelines.drop(dropped)
        self.latches = [latch for latch in self.latches if latch.seq not in dropped]
        self.loads = [load for load in self.loads if load.seq not in dropped]
        self.load_port_cycles = {c: s for c, s in self.load_port_cycles.items() if s not in dropped}
        self.pending_tags = [(seq, tag) for seq, tag in self.pending_tags if seq not in dropped]
        self.checkpoints.discard(lambda event: event.seq in dropped)

        # Latest write first, so each register ends with the value its first squashed writer found
        overwritten = sorted((self.shadow.pop(seq) for seq in squashed if seq in self.shadow), reverse=True)
        for _, reg, value in overwritten:
            self.regfile.restore(reg, value)

        self.squashed.update(squashed)
        self._recount_hazards()

        for seq in squashed:
            self._timeline(seq).squashed = True
        self.counters.squashed.extend(squashed)
        self.counters.rollbacks += 1
        if report is not None:
            report.rollbacks.append(branch.seq)
        logger.info(f"Rollback at cycle {self.cycle} to checkpoint {checkpoint.cycle}: "
                    f"branch #{branch.seq}, squashed {len(squashed)}")

    def _recount_hazards(self):
        latched = {latch.seq for latch in self.latches}
        self.writers = Counter()
        self.readers = Counter()
        self.unresolved_branches = 0
        for entry in self.rob:
            inst = entry.inst
            if inst.dest is not None and entry.state < RobState.EXECUTED:
                self.writers[inst.dest] += 1
            if inst.is_store or (inst.uses_queue and (entry.state == RobState.DISPATCHED or entry.seq in latched)):
                self.readers.update(inst.sources)
            if inst.is_branch:
                self.unresolved_branches += 1

        self.last_writer = {}
        for seq in range(self.next_index):
            dest = self.program.instructions[seq].dest
            if dest is not None and seq not in self.squashed:
                self.last_writer[dest] = seq

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(cycle=self.cycle, ready=self.ready.snapshot(), queue=self.queue.snapshot())

    def state_image(self) -> Tuple:
        """Register values, ready bits, queue entries, free lists, BMT and cursor"""
        values = tuple(self.regfile.peek(reg) for reg in range(self.regfile.registers))
        return (values, self.ready.snapshot()) + self.queue.image()

    def _diagnose(self) -> str:
        head = self.rob.head
        head_text = f"#{head.seq} {render_instruction(head.inst)} ({head.state.name})" if head else "empty"
        return (f"no progress for {self.idle_cycles} cycles; ROB head {head_text}; "
                f"queue occupancy {self.queue.occupancy()}; next instruction {self.next_index}")

    def step(self) -> CycleReport:
        """Advance the engine by exactly one cycle"""
        report = CycleReport(cycle=self.cycle)
        self.regfile.begin_cycle()
        self.bus = {}
        delivered, self.pending_tags = self.pending_tags, []
        latches, self.latches = self.latches, []
        comparisons_before = self.queue.comparisons

        self._advance_units(report)
        self._service_loads(report)
        issued = self._select_and_issue(report)
        self._wakeup(delivered, report)
        self._enter_units(latches, report)
        self.latches = issued
        self._dispatch(report)
        if self.trap_seq is None:
            self._commit(report)
        self.checkpoints.push(self.checkpoint())

        self.pipelines.count_busy()
        self.counters.comparisons_per_cycle.append(self.queue.comparisons - comparisons_before)
        self.counters.occupancy_sum += self.queue.occupancy()
        self.cycle += 1
        self.counters.cycles = self.cycle
        logger.debug(f"Cycle {report.cycle}: {len(report.issues)} issued, {len(report.commits)} committed")

        if report.active or self.in_flight or self.done:
            self.idle_cycles = 0
        else:
            self.idle_cycles += 1
            if self.idle_cycles >= self.config.deadlock_window:
                diagnosis = self._diagnose()
                logger.warning(f"Deadlock detected: {diagnosis}")
                raise DeadlockError(diagnosis, report.cycle, self.report(RunStatus.DEADLOCK))
        return report

    def run(self, program: Optional[Program] = None,
            on_cycle: Optional[Callable[[CycleReport], None]] = None) -> RunReport:
        if program is not None:
            self.load(program)

        while not self.done:
            if self.cycle >= self.config.cycle_budget:
                raise CycleBudgetExceeded(f"cycle budget {self.config.cycle_budget} exhausted", self.cycle)
            cycle_report = self.step()
            if on_cycle is not None:
                on_cycle(cycle_report)

        report = self.report()
        logger.info(f"Run finished: {report.committed} committed in {report.cycles} cycles ({report.status.value})")
        return report

    def report(self, status: Optional[RunStatus] = None) -> RunReport:
        if status is None:
            status = RunStatus.TRAP if self.trap_seq is not None else RunStatus.OK

        counters = self.counters
        counters.comparisons_total = self.queue.comparisons
        counters.bmt_reads = self.queue.bmt_reads
        counters.blocks_enabled_histogram = list(self.queue.blocks_enabled_histogram)
        counters.unit_busy_cycles = self.pipelines.busy_cycles()
        counters.fcsr_flags = self.fcsr.flags.letters()
        counters.fcsr_word = self.fcsr.to_word()
        counters.trap_index = self.trap_seq
        counters.trap_cause = self.fcsr.cause.letters() if self.trap_seq is not None else None
        counters.timeline = [
            InstructionTimeline(
                index=index, text=render_instruction(inst),
                **asdict(self.timelines.get(index, Timeline())),
            )
            for index, inst in enumerate(self.program.instructions)
        ]
        return finalize(counters, status)
