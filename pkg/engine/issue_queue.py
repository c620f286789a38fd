"""Block-partitioned issue queue with Block Mapping Table wakeup."""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

from config import Config
from isa.instructions import FORMAT_D, Instruction, Resource

logger = logging.getLogger(__name__)

TAG_BITS = 7
PAYLOAD_WIDTH = 54

# (name, low bit, width) from the most significant field down
PAYLOAD_FIELDS = (
    ("fmt", 49, 5),
    ("src0", 42, 7),
    ("src1", 35, 7),
    ("src2", 28, 7),
    ("dest", 21, 7),
    ("resource_vector", 13, 8),
    ("function", 7, 6),
    ("dir_rob", 0, 7),
)

@dataclass(frozen=True)
class PayloadEntry:
    fmt: int
    src0: int
    src1: int
    src2: int
    dest: int
    resource_vector: int
    function: int
    dir_rob: int

    def __post_init__(self):
        for name, _, width in PAYLOAD_FIELDS:
            value = getattr(self, name)
            if not 0 <= value < 1 << width:
                raise ValueError(f"payload field {name}={value} does not fit {width} bits")
        rv = self.resource_vector
        if rv == 0 or rv & (rv - 1):
            raise ValueError(f"resource vector 0b{rv:08b} must be one-hot")

    @property
    def sources(self) -> Tuple[int, int, int]:
        return self.src0, self.src1, self.src2

    @property
    def resource(self) -> Resource:
        return Resource(self.resource_vector.bit_length() - 1)

    def pack(self) -> int:
        word = 0
        for name, low, _ in PAYLOAD_FIELDS:
            word |= getattr(self, name) << low
        return word

    @classmethod
    def unpack(cls, word: int) -> "PayloadEntry":
        if not 0 <= word < 1 << PAYLOAD_WIDTH:
            raise ValueError(f"payload word 0x{word:X} wider than {PAYLOAD_WIDTH} bits")
        return cls(**{name: (word >> low) & ((1 << width) - 1) for name, low, width in PAYLOAD_FIELDS})

def payload_for(inst: Instruction, dir_rob: int) -> PayloadEntry:
    """Payload of a queue-bound instruction; unused tags are zero"""
    sources = list(inst.sources) + [0] * (3 - len(inst.sources))
    return PayloadEntry(
        fmt=FORMAT_D,
        src0=sources[0],
        src1=sources[1],
        src2=sources[2],
        dest=inst.dest or 0,
        resource_vector=1 << int(inst.resource),
        function=inst.function_code,
        dir_rob=dir_rob % (1 << TAG_BITS),
    )

class FreeFifo:
    """Ring of free slot indices for one queue block"""

    def __init__(self, size: int = Config.QUEUE_BLOCK_SIZE):
        self.size = size
        self.storage = list(range(size))
        self.rd_pointer = 0
        self.wr_pointer = 0
        self.count = size

    @property
    def empty(self) -> bool:
        return self.count == 0

    def pop(self) -> int:
        if self.count == 0:
            raise IndexError("free list is empty")
        slot = self.storage[self.rd_pointer]
        self.rd_pointer = (self.rd_pointer + 1) % self.size
        self.count -= 1
        return slot

    def push(self, slot: int):
        if self.count == self.size:
            raise IndexError("free list is full")
        self.storage[self.wr_pointer] = slot
        self.wr_pointer = (self.wr_pointer + 1) % self.size
        self.count += 1

    def free_slots(self) -> List[int]:
        return [self.storage[(self.rd_pointer + i) % self.size] for i in range(self.count)]

    def snapshot(self) -> Tuple[Tuple[int, ...], int, int, int]:
        return tuple(self.storage), self.rd_pointer, self.wr_pointer, self.count

    def restore(self, image: Tuple[Tuple[int, ...], int, int, int]):
        storage, self.rd_pointer, self.wr_pointer, self.count = image
        self.storage = list(storage)

class Bmt:
    """Rows of block bits: which blocks hold un-woken consumers of a register"""

    def __init__(self, registers: int = Config.PHYSICAL_REGISTERS, blocks: int = Config.QUEUE_BLOCKS):
        self.blocks = blocks
        self.rows = [0] * registers

    def set(self, tag: int, block: int):
        self.rows[tag] |= 1 << block

    def read(self, tag: int) -> int:
        return self.rows[tag]

    def clear(self, tag: int):
        self.rows[tag] = 0

    def snapshot(self) -> Tuple[int, ...]:
        return tuple(self.rows)

    def restore(self, image: Tuple[int, ...]):
        self.rows = list(image)

@dataclass(frozen=True)
class IqEntry:
    valid: bool = False
    payload: Optional[PayloadEntry] = None
    ready: Tuple[bool, bool, bool] = (True, True, True)
    sources_used: int = 0
    age: int = 0

    @property
    def operands_ready(self) -> bool:
        return self.valid and all(self.ready)

    @property
    def is_fused(self) -> bool:
        return self.sources_used == 3

class EntryRef(NamedTuple):
    block: int
    slot: int

@dataclass
class WakeupResult:
    tag: int
    enabled_mask: int
    comparisons: int
    woken: List[Tuple[int, int, int, int]] = field(default_factory=list)  # (block, slot, source, age)

@dataclass(frozen=True)
class QueueSnapshot:
    entries: Tuple[Tuple[IqEntry, ...], ...]
    fifos: Tuple[Tuple[Tuple[int, ...], int, int, int], ...]
    bmt: Tuple[int, ...]
    cursor: int

def round_robin_assign(active: int, cursor: int,
                       free_counts: Sequence[int]) -> Optional[Tuple[List[int], int]]:
    """Give each incoming instruction the next non-full block; None when they do not all fit"""
    blocks = len(free_counts)
    assignments: List[int] = []
    for step in range(blocks):
        if len(assignments) == active:
            break
        block = (cursor + step) % blocks
        if free_counts[block] > 0:
            assignments.append(block)

    if len(assignments) < active:
        return None
    new_cursor = (assignments[-1] + 1) % blocks if assignments else cursor
    return assignments, new_cursor

class IssueQueue:
    def __init__(self, blocks: int = Config.QUEUE_BLOCKS, block_size: int = Config.QUEUE_BLOCK_SIZE,
                 registers: int = Config.PHYSICAL_REGISTERS, bmt_enabled: bool = True):
        self.blocks = blocks
        self.block_size = block_size
        self.bmt_enabled = bmt_enabled
        self.entries = [[IqEntry() for _ in range(block_size)] for _ in range(blocks)]
        self.fifos = [FreeFifo(block_size) for _ in range(blocks)]
        self.bmt = Bmt(registers, blocks)
        self.cursor = 0

        self.comparisons = 0
        self.bmt_reads = 0
        self.blocks_enabled_histogram = [0] * (blocks + 1)

    def free_counts(self) -> List[int]:
        return [fifo.count for fifo in self.fifos]

    def occupancy(self) -> int:
        return sum(entry.valid for block in self.entries for entry in block)

    def valid_bits(self, block: int) -> int:
        return sum(1 << slot for slot, entry in enumerate(self.entries[block]) if entry.valid)

    def assign(self, active: int) -> Optional[List[int]]:
        result = round_robin_assign(active, self.cursor, self.free_counts())
        if result is None:
            return None
        assignments, self.cursor = result
        return assignments

    def dispatch(self, payload: PayloadEntry, sources_used: int, block: int,
                 ready_vector, age: int) -> EntryRef:
        slot = self.fifos[block].pop()
        ready = [True, True, True]
        for index in range(sources_used):
            tag = payload.sources[index]
            ready[index] = ready_vector.is_ready(tag)
            if not ready[index]:
                self.bmt.set(tag, block)

        self.entries[block][slot] = IqEntry(
            valid=True, payload=payload, ready=tuple(ready), sources_used=sources_used, age=age,
        )
        return EntryRef(block, slot)

    def mark_ready(self, block: int, slot: int, source: int):
        entry = self.entries[block][slot]
        ready = list(entry.ready)
        ready[source] = True
        self.entries[block][slot] = replace(entry, ready=tuple(ready))

    def wakeup(self, tag: int) -> WakeupResult:
        """Compare a broadcast tag against the sources of the enabled blocks"""
        if self.bmt_enabled:
            mask = self.bmt.read(tag)
            self.bmt_reads += 1
        else:
            mask = (1 << self.blocks) - 1

        result = WakeupResult(tag=tag, enabled_mask=mask, comparisons=0)
        for block in range(self.blocks):
            if not mask >> block & 1:
                continue
            for slot, entry in enumerate(self.entries[block]):
                if not entry.valid:
                    continue
                for source in range(entry.sources_used):
                    result.comparisons += 1
                    if entry.payload.sources[source] == tag and not entry.ready[source]:
                        self.mark_ready(block, slot, source)
                        entry = self.entries[block][slot]
                        result.woken.append((block, slot, source, entry.age))

        if self.bmt_enabled:
            self.bmt.clear(tag)

        self.comparisons += result.comparisons
        self.blocks_enabled_histogram[bin(mask).count("1")] += 1
        return result

    def select(self, accept: Callable[[IqEntry, int], bool],
               width: int = Config.ISSUE_WIDTH) -> List[EntryRef]:
        """Oldest ready entry per block, then the oldest of those that a unit takes"""
        candidates = []
        for block in range(self.blocks):
            ready = [(entry.age, slot) for slot, entry in enumerate(self.entries[block]) if entry.operands_ready]
            if ready:
                age, slot = min(ready)
                candidates.append((age, block, slot))

        winners: List[EntryRef] = []
        for _, block, slot in sorted(candidates):
            if len(winners) == width:
                break
            if accept(self.entries[block][slot], len(winners)):
                winners.append(EntryRef(block, slot))
        return winners

    def release(self, block: int, slot: int):
        entry = self.entries[block][slot]
        if not entry.valid:
            raise ValueError(f"release of empty slot B{block}[{slot}]")
        self.entries[block][slot] = replace(entry, valid=False)
        self.fifos[block].push(slot)

    def snapshot(self) -> QueueSnapshot:
        return QueueSnapshot(
            entries=tuple(tuple(block) for block in self.entries),
            fifos=tuple(fifo.snapshot() for fifo in self.fifos),
            bmt=self.bmt.snapshot(),
            cursor=self.cursor,
        )

    def restore(self, image: QueueSnapshot):
        self.entries = [list(block) for block in image.entries]
        for fifo, fifo_image in zip(self.fifos, image.fifos):
            fifo.restore(fifo_image)
        self.bmt.restore(image.bmt)
        self.cursor = image.cursor

    def image(self) -> Tuple:
        """Architectural queue state, for equivalence checks"""
        entries = tuple(
            tuple((entry.payload, entry.ready, entry.age) if entry.valid else None for entry in block)
            for block in self.entries
        )
        return entries, tuple(fifo.snapshot() for fifo in self.fifos), self.bmt.snapshot(), self.cursor

    def check_conservation(self) -> bool:
        for block, fifo in enumerate(self.fifos):
            valid = [slot for slot, entry in enumerate(self.entries[block]) if entry.valid]
            if sorted(fifo.free_slots() + valid) != list(range(self.block_size)):
                return False
        return True
