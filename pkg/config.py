import os
from typing import Dict
from dotenv import load_dotenv

load_dotenv()

class Config:
    # Engine Configuration
    ENGINE_VARIANT = os.getenv("FPX_ENGINE_VARIANT", "v1")
    BMT_ENABLED = os.getenv("FPX_BMT_ENABLED", "True").lower() == "true"
    REGFILE_MODEL = os.getenv("FPX_REGFILE_MODEL", "reference")
    BROADCAST_LEAD = int(os.getenv("FPX_BROADCAST_LEAD", "3"))
    LOAD_BROADCAST_LEAD = int(os.getenv("FPX_LOAD_BROADCAST_LEAD", "3"))
    CYCLE_BUDGET = int(os.getenv("FPX_CYCLE_BUDGET", "100000"))
    DEADLOCK_WINDOW = int(os.getenv("FPX_DEADLOCK_WINDOW", "200"))
    SEED = int(os.getenv("FPX_SEED", "0"))

    # Structure Sizes
    CHECKPOINT_DEPTH = int(os.getenv("FPX_CHECKPOINT_DEPTH", "64"))
    ROB_CAPACITY = int(os.getenv("FPX_ROB_CAPACITY", "128"))
    QUEUE_BLOCKS = 4
    QUEUE_BLOCK_SIZE = 8
    PHYSICAL_REGISTERS = 128
    ISSUE_WIDTH = 2
    DISPATCH_WIDTH = 2
    COMMIT_WIDTH = 2

    # Functional Unit Latencies (cycles)
    DEFAULT_LATENCIES: Dict[str, int] = {
        "ADD": int(os.getenv("FPX_LATENCY_ADD", "8")),
        "MUL": int(os.getenv("FPX_LATENCY_MUL", "7")),
        "FMAC": int(os.getenv("FPX_LATENCY_FMAC", "13")),
        "DIV": int(os.getenv("FPX_LATENCY_DIV", "14")),
        "ALU": int(os.getenv("FPX_LATENCY_ALU", "1")),
        "BRANCH": int(os.getenv("FPX_LATENCY_BRANCH", "1")),
    }

    # Unified FMAC entry stages (second design)
    FMAC_STAGES = 13
    FMAC_ENTRY_STAGES: Dict[str, int] = {
        "FUSED": 1,
        "ADD": 6,
        "ALU": 12,
    }

    # Self-test
    SELFTEST_SAMPLES = int(os.getenv("FPX_SELFTEST_SAMPLES", "1000000"))
    SELFTEST_JOBS = int(os.getenv("FPX_SELFTEST_JOBS", "1"))

    # Logging
    LOG_LEVEL = os.getenv("FPX_LOG_LEVEL", "INFO").upper()

# Create config instance
config = Config()
