from engine.core import (
    CheckpointEvictedError, CycleBudgetExceeded, CycleReport, DeadlockError, Engine, EngineConfig,
    EngineError, EngineVariant,
)
from engine.regfile import RegfileModel
from engine.stats import RunReport, RunStatus, reports_to_frame, write_csv
