import logging
from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from typing import Deque, Iterator, List, Optional

from config import Config
from fpcore.bits import ExceptionFlags
from isa.instructions import Instruction

logger = logging.getLogger(__name__)

class RobState(IntEnum):
    DISPATCHED = 0
    ISSUED = 1
    EXECUTED = 2
    COMMITTED = 3

@dataclass
class RobEntry:
    seq: int
    inst: Instruction
    dispatch_cycle: int
    state: RobState = RobState.DISPATCHED
    flags: ExceptionFlags = ExceptionFlags.NONE
    taken: Optional[bool] = None
    store_value: Optional[int] = None

    @property
    def dir_rob(self) -> int:
        return self.seq % Config.ROB_CAPACITY

    @property
    def is_store(self) -> bool:
        return self.inst.is_store

    @property
    def is_branch(self) -> bool:
        return self.inst.is_branch

    @property
    def mispredict(self) -> bool:
        return self.inst.mispredict

class RobStub:
    """In-order commit tracker; no result storage beyond store captures"""

    def __init__(self, capacity: int = Config.ROB_CAPACITY):
        self.capacity = capacity
        self.entries: Deque[RobEntry] = deque()
        self._by_seq = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[RobEntry]:
        return iter(self.entries)

    @property
    def full(self) -> bool:
        return len(self.entries) >= self.capacity

    @property
    def head(self) -> Optional[RobEntry]:
        return self.entries[0] if self.entries else None

    def allocate(self, seq: int, inst: Instruction, cycle: int) -> RobEntry:
        if self.full:
            raise IndexError("reorder buffer is full")
        entry = RobEntry(seq=seq, inst=inst, dispatch_cycle=cycle)
        self.entries.append(entry)
        self._by_seq[seq] = entry
        return entry

    def get(self, seq: int) -> Optional[RobEntry]:
        return self._by_seq.get(seq)

    def mark(self, seq: int, state: RobState):
        entry = self._by_seq[seq]
        entry.state = max(entry.state, state)

    def retire_head(self) -> RobEntry:
        entry = self.entries.popleft()
        entry.state = RobState.COMMITTED
        del self._by_seq[entry.seq]
        return entry

    def squash_younger(self, seq: int) -> List[int]:
        """Drop every entry younger than seq; returns the dropped sequence numbers"""
        dropped = []
        while self.entries and self.entries[-1].seq > seq:
            entry = self.entries.pop()
            del self._by_seq[entry.seq]
            dropped.append(entry.seq)
        dropped.reverse()
        if dropped:
            logger.debug(f"Squashed {len(dropped)} entries younger than #{seq}")
        return dropped
