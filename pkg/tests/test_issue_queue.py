import pytest

from engine.issue_queue import (
    PAYLOAD_WIDTH, FreeFifo, IssueQueue, PayloadEntry, payload_for, round_robin_assign,
)
from engine.regfile import ReadyBitVector
from isa.instructions import FORMAT_D, Instruction, Mnemonic, Resource

def add(dest, a, b):
    return Instruction(Mnemonic.ADD, dest=dest, sources=(a, b))

def dispatch(queue, inst, block, ready, age):
    return queue.dispatch(payload_for(inst, age), len(inst.sources), block, ready, age=age)

def test_payload_fields_of_fused_op():
    inst = Instruction(Mnemonic.MADDF, dest=8, sources=(10, 11, 12))
    payload = payload_for(inst, dir_rob=3)
    assert payload.fmt == FORMAT_D
    assert payload.sources == (10, 11, 12)
    assert payload.dest == 8
    assert payload.resource == Resource.MULA
    assert payload.function == 0x18
    assert payload.dir_rob == 3

def test_payload_pack_layout():
    payload = payload_for(add(1, 2, 3), dir_rob=127)
    word = payload.pack()
    assert word < 1 << PAYLOAD_WIDTH
    assert word & 0x7F == 127
    assert word >> 49 == FORMAT_D
    assert PayloadEntry.unpack(word) == payload

def test_unused_sources_are_zero():
    payload = payload_for(Instruction(Mnemonic.NEG, dest=4, sources=(9,)), dir_rob=0)
    assert payload.sources == (9, 0, 0)

def test_payload_rejects_wide_fields():
    with pytest.raises(ValueError):
        PayloadEntry(fmt=0x11, src0=128, src1=0, src2=0, dest=0, resource_vector=1, function=0, dir_rob=0)
    with pytest.raises(ValueError):
        PayloadEntry(fmt=0x11, src0=0, src1=0, src2=0, dest=0, resource_vector=0b11, function=0, dir_rob=0)
    with pytest.raises(ValueError):
        PayloadEntry.unpack(1 << PAYLOAD_WIDTH)

@pytest.mark.parametrize("active, cursor, free, expected", [
    (2, 0, [8, 8, 8, 8], ([0, 1], 2)),
    (2, 3, [8, 8, 8, 8], ([3, 0], 1)),
    (2, 0, [0, 8, 0, 8], ([1, 3], 0)),
    (1, 2, [8, 8, 0, 0], ([0], 1)),
    (0, 1, [8, 8, 8, 8], ([], 1)),
    (3, 0, [0, 0, 1, 1], None),
    (1, 0, [0, 0, 0, 0], None),
])
def test_round_robin_assign(active, cursor, free, expected):
    assert round_robin_assign(active, cursor, free) == expected

def test_assign_moves_cursor_only_on_success():
    queue = IssueQueue()
    assert queue.assign(2) == [0, 1]
    assert queue.cursor == 2
    for _ in range(8):
        queue.fifos[2].pop()
        queue.fifos[3].pop()
        queue.fifos[0].pop()
    assert queue.assign(2) is None
    assert queue.cursor == 2

def test_free_fifo_reuses_released_slots_last():
    fifo = FreeFifo(4)
    assert [fifo.pop(), fifo.pop()] == [0, 1]
    fifo.push(0)
    assert fifo.free_slots() == [2, 3, 0]
    assert [fifo.pop(), fifo.pop(), fifo.pop()] == [2, 3, 0]
    assert fifo.empty
    with pytest.raises(IndexError):
        fifo.pop()

def test_dispatch_sets_bmt_for_waiting_sources():
    queue, ready = IssueQueue(), ReadyBitVector()
    ready.clear(7)
    ref = dispatch(queue, add(1, 7, 2), block=2, ready=ready, age=0)
    assert queue.bmt.read(7) == 0b0100
    assert queue.bmt.read(2) == 0
    assert queue.entries[2][ref.slot].ready == (False, True, True)

def test_bmt_wakeup_only_searches_marked_blocks():
    queue, ready = IssueQueue(), ReadyBitVector()
    ready.clear(7)
    dispatch(queue, add(1, 2, 3), block=0, ready=ready, age=0)
    dispatch(queue, add(4, 5, 6), block=1, ready=ready, age=1)
    ref = dispatch(queue, add(8, 7, 9), block=2, ready=ready, age=2)

    result = queue.wakeup(7)
    assert result.enabled_mask == 0b0100
    assert result.comparisons == 2
    assert result.woken == [(2, ref.slot, 0, 2)]
    assert queue.entries[2][ref.slot].operands_ready
    assert queue.bmt.read(7) == 0
    assert queue.bmt_reads == 1
    assert queue.blocks_enabled_histogram[1] == 1

def test_full_search_without_bmt():
    queue, ready = IssueQueue(bmt_enabled=False), ReadyBitVector()
    ready.clear(7)
    dispatch(queue, add(1, 2, 3), block=0, ready=ready, age=0)
    dispatch(queue, Instruction(Mnemonic.MADDF, dest=4, sources=(5, 6, 7)), block=1, ready=ready, age=1)

    result = queue.wakeup(7)
    assert result.enabled_mask == 0b1111
    assert result.comparisons == 5
    assert [w[2] for w in result.woken] == [2]
    assert queue.bmt_reads == 0
    assert queue.blocks_enabled_histogram[4] == 1

def test_unawaited_tag_costs_nothing_with_bmt():
    queue, ready = IssueQueue(), ReadyBitVector()
    dispatch(queue, add(1, 2, 3), block=0, ready=ready, age=0)
    result = queue.wakeup(30)
    assert result.enabled_mask == 0
    assert result.comparisons == 0
    assert queue.blocks_enabled_histogram[0] == 1

def test_select_oldest_per_block_then_by_age():
    queue, ready = IssueQueue(), ReadyBitVector()
    dispatch(queue, add(1, 2, 3), block=0, ready=ready, age=5)
    young = dispatch(queue, add(4, 2, 3), block=0, ready=ready, age=3)
    other = dispatch(queue, add(6, 2, 3), block=1, ready=ready, age=4)
    dispatch(queue, add(9, 2, 3), block=2, ready=ready, age=6)

    picks = queue.select(lambda entry, slot: True)
    assert picks == [young, other]

def test_select_skips_rejected_candidates():
    queue, ready = IssueQueue(), ReadyBitVector()
    dispatch(queue, add(1, 2, 3), block=0, ready=ready, age=0)
    second = dispatch(queue, add(4, 2, 3), block=1, ready=ready, age=1)
    third = dispatch(queue, add(6, 2, 3), block=2, ready=ready, age=2)

    slots = []

    def accept(entry, slot):
        slots.append((entry.age, slot))
        return entry.age != 0

    assert queue.select(accept) == [second, third]
    assert slots == [(0, 0), (1, 0), (2, 1)]

def test_waiting_entries_are_not_selected():
    queue, ready = IssueQueue(), ReadyBitVector()
    ready.clear(2)
    dispatch(queue, add(1, 2, 3), block=0, ready=ready, age=0)
    assert queue.select(lambda entry, slot: True) == []

def test_release_and_conservation():
    queue, ready = IssueQueue(), ReadyBitVector()
    refs = [dispatch(queue, add(1, 2, 3), block=0, ready=ready, age=age) for age in range(3)]
    assert queue.occupancy() == 3
    assert queue.valid_bits(0) == 0b111

    queue.release(*refs[1])
    assert queue.check_conservation()
    assert queue.fifos[0].free_slots()[-1] == refs[1].slot
    with pytest.raises(ValueError):
        queue.release(*refs[1])

def test_snapshot_restore_round_trip():
    queue, ready = IssueQueue(), ReadyBitVector()
    ready.clear(5)
    dispatch(queue, add(1, 5, 3), block=1, ready=ready, age=0)
    before = queue.image()
    snapshot = queue.snapshot()

    queue.wakeup(5)
    ref = dispatch(queue, add(4, 2, 3), block=3, ready=ready, age=1)
    queue.release(*ref)
    queue.cursor = 3
    assert queue.image() != before

    queue.restore(snapshot)
    assert queue.image() == before
