"""Per-cycle snapshots and the event journal used for misprediction recovery."""
import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Deque, Iterable, Optional, Tuple

from config import Config
from engine.issue_queue import QueueSnapshot

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class Checkpoint:
    cycle: int
    ready: int
    queue: QueueSnapshot

class JournalKind(Enum):
    READY_SET = "ready_set"
    BMT_CLEAR = "bmt_clear"
    ENTRY_READY = "entry_ready"
    RELEASE = "release"

@dataclass(frozen=True)
class JournalEvent:
    cycle: int
    seq: int
    kind: JournalKind
    args: Tuple[int, ...]

class CheckpointRing:
    def __init__(self, depth: int = Config.CHECKPOINT_DEPTH):
        self.depth = depth
        self.ring: Deque[Checkpoint] = deque(maxlen=depth)
        self.journal: Deque[JournalEvent] = deque()

    def __len__(self) -> int:
        return len(self.ring)

    def push(self, checkpoint: Checkpoint):
        self.ring.append(checkpoint)
        oldest = self.ring[0].cycle
        while self.journal and self.journal[0].cycle <= oldest:
            self.journal.popleft()

    def record(self, cycle: int, seq: int, kind: JournalKind, *args: int):
        self.journal.append(JournalEvent(cycle, seq, kind, args))

    def find(self, cycle: int) -> Optional[Checkpoint]:
        for checkpoint in reversed(self.ring):
            if checkpoint.cycle == cycle:
                return checkpoint
        return None

    def events_after(self, cycle: int, survivor_limit: int) -> Iterable[JournalEvent]:
        """Events after the checkpoint cycle that belong to instructions at or before survivor_limit"""
        return [event for event in self.journal if event.cycle > cycle and event.seq <= survivor_limit]

    def discard(self, predicate):
        self.journal = deque(event for event in self.journal if not predicate(event))
