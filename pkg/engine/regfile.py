"""Multiported 64-bit physical register file models and the ready-bit vector."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Set

import numpy as np

from config import Config

logger = logging.getLogger(__name__)

class RegfileModel(str, Enum):
    REFERENCE = "reference"
    XOR = "xor"
    LVT = "lvt"

class RegisterFileError(Exception):
    pass

@dataclass(frozen=True)
class PortConfig:
    reads: int
    writes: int

V1_PORTS = PortConfig(reads=6, writes=6)
V2_PORTS = PortConfig(reads=7, writes=3)

class RegisterFile:
    """Common port checking; subclasses store the values"""

    def __init__(self, ports: PortConfig, registers: int = Config.PHYSICAL_REGISTERS, debug: bool = True):
        self.ports = ports
        self.registers = registers
        self.debug = debug
        self._written: Set[int] = set()
        self._ports_used: Set[int] = set()

    def begin_cycle(self):
        self._written.clear()
        self._ports_used.clear()

    def _check_write(self, port: int, reg: int):
        if not 0 <= port < self.ports.writes:
            raise RegisterFileError(f"write port {port} out of range (have {self.ports.writes})")
        if not 0 <= reg < self.registers:
            raise RegisterFileError(f"register {reg} out of range")
        if self.debug:
            if reg in self._written:
                raise RegisterFileError(f"two writes to register {reg} in one cycle")
            if port in self._ports_used:
                raise RegisterFileError(f"write port {port} used twice in one cycle")
            self._written.add(reg)
            self._ports_used.add(port)

    def _check_read(self, port: int, reg: int):
        if not 0 <= port < self.ports.reads:
            raise RegisterFileError(f"read port {port} out of range (have {self.ports.reads})")
        if not 0 <= reg < self.registers:
            raise RegisterFileError(f"register {reg} out of range")

    def _store(self, port: int, reg: int, value: int):
        raise NotImplementedError

    def _load(self, port: int, reg: int) -> int:
        raise NotImplementedError

    def write(self, port: int, reg: int, value: int):
        self._check_write(port, reg)
        self._store(port, reg, value)

    def read(self, port: int, reg: int) -> int:
        self._check_read(port, reg)
        return self._load(port, reg)

    def peek(self, reg: int) -> int:
        """Current value without using a read port"""
        return self._load(0, reg)

    def restore(self, reg: int, value: int):
        """Put back a value overwritten by a squashed writer; no port is charged"""
        self._store(0, reg, value)

class ReferenceRegisterFile(RegisterFile):
    def __init__(self, ports: PortConfig, registers: int = Config.PHYSICAL_REGISTERS, debug: bool = True):
        super().__init__(ports, registers, debug)
        self.values = [0] * registers

    def _store(self, port: int, reg: int, value: int):
        self.values[reg] = value

    def _load(self, port: int, reg: int) -> int:
        return self.values[reg]

class XorRegisterFile(RegisterFile):
    """Each write port owns m-1+n banks; a read XORs one bank per write port"""

    def __init__(self, ports: PortConfig, registers: int = Config.PHYSICAL_REGISTERS, debug: bool = True):
        super().__init__(ports, registers, debug)
        m, n = ports.writes, ports.reads
        self.columns = m - 1 + n
        self.banks = np.zeros((m, self.columns, registers), dtype=np.uint64)

    @property
    def bank_count(self) -> int:
        return self.banks.shape[0] * self.banks.shape[1]

    def _feedback_column(self, owner: int, reader: int) -> int:
        # Column of the owner's banks that the other write port reads
        return reader if reader < owner else reader - 1

    def _store(self, port: int, reg: int, value: int):
        encoded = np.uint64(value)
        for other in range(self.banks.shape[0]):
            if other != port:
                encoded ^= self.banks[other, self._feedback_column(other, port), reg]
        self.banks[port, :, reg] = encoded

    def _load(self, port: int, reg: int) -> int:
        column = self.banks.shape[0] - 1 + port
        return int(np.bitwise_xor.reduce(self.banks[:, column, reg]))

class LvtRegisterFile(RegisterFile):
    """One replicated bank group per write port plus a live value table"""

    def __init__(self, ports: PortConfig, registers: int = Config.PHYSICAL_REGISTERS, debug: bool = True):
        super().__init__(ports, registers, debug)
        self.banks = np.zeros((ports.writes, ports.reads, registers), dtype=np.uint64)
        self.lvt = np.zeros(registers, dtype=np.uint8)

    def _store(self, port: int, reg: int, value: int):
        self.banks[port, :, reg] = np.uint64(value)
        self.lvt[reg] = port

    def _load(self, port: int, reg: int) -> int:
        return int(self.banks[self.lvt[reg], port, reg])

REGFILE_MODELS = {
    RegfileModel.REFERENCE: ReferenceRegisterFile,
    RegfileModel.XOR: XorRegisterFile,
    RegfileModel.LVT: LvtRegisterFile,
}

def make_register_file(model: RegfileModel, ports: PortConfig,
                       registers: int = Config.PHYSICAL_REGISTERS, debug: bool = True) -> RegisterFile:
    regfile = REGFILE_MODELS[RegfileModel(model)](ports, registers, debug)
    logger.debug(f"Built {RegfileModel(model).value} register file with {ports.reads}R/{ports.writes}W")
    return regfile

class ReadyBitVector:
    """One bit per physical register, held as a single integer"""

    def __init__(self, registers: int = Config.PHYSICAL_REGISTERS, initial: bool = True):
        self.registers = registers
        self.bits = (1 << registers) - 1 if initial else 0

    def is_ready(self, reg: int) -> bool:
        return bool(self.bits >> reg & 1)

    def set(self, reg: int):
        self.bits |= 1 << reg

    def clear(self, reg: int):
        self.bits &= ~(1 << reg)

    def snapshot(self) -> int:
        return self.bits

    def restore(self, snapshot: int):
        if snapshot >> self.registers:
            raise ValueError(f"snapshot wider than {self.registers} bits")
        self.bits = snapshot
