import pandas as pd

from engine.stats import InstructionTimeline, RunCounters, RunStatus, finalize, reports_to_frame, write_csv

def counters(**overrides):
    base = RunCounters(
        cycles=8, dispatched=3, issued=2, committed=2, comparisons_total=6,
        comparisons_per_cycle=[0, 3, 3, 0, 0, 0, 0, 0], bmt_reads=2, occupancy_sum=4,
        captures=[(15, 0x429CD39473615714)], fcsr_flags="I", fcsr_word=0x1004,
        timeline=[
            InstructionTimeline(index=0, text="ADD.D $f1, $f2, $f3", dispatch=0, issue=1, complete=9, commit=9),
            InstructionTimeline(index=1, text="SDC1 $f1", dispatch=0, complete=0),
        ],
    )
    for key, value in overrides.items():
        setattr(base, key, value)
    return base

def test_ratios_guard_zero_denominators():
    report = finalize(RunCounters())
    assert report.ipc is None
    assert report.comparisons_per_committed is None
    assert report.mean_queue_occupancy is None
    assert "ipc: -" in report.to_text()

def test_ratios():
    report = finalize(counters())
    assert report.ipc == 0.25
    assert report.comparisons_per_committed == 3.0
    assert report.mean_queue_occupancy == 0.5
    assert report.store_values == [0x429CD39473615714]

def test_text_is_sorted_and_stable():
    report = finalize(counters(), RunStatus.OK)
    text = report.to_text()
    keys = [line.split(":", 1)[0] for line in text.splitlines()]
    assert keys == sorted(keys)
    assert "ipc: 0.250000" in text
    assert "captures: $f15=0x429CD39473615714" in text
    assert "timeline.0001: SDC1 $f1 | 0 - 0 -" in text
    assert text == finalize(counters(), RunStatus.OK).to_text()

def test_schedule_skips_squashed():
    timeline = counters().timeline + [InstructionTimeline(index=2, text="NEG.D $f4, $f1", dispatch=1, squashed=True)]
    report = finalize(counters(timeline=timeline))
    assert report.schedule() == [(0, 1, 9, 9), (0, None, 0, None)]

def test_frame_and_csv(tmp_path):
    frame = reports_to_frame([("golden", finalize(counters())), ("empty", finalize(RunCounters()))])
    assert list(frame["trace"]) == ["golden", "empty"]
    assert frame.loc[0, "fcsr_word"] == "0x00001004"

    path = tmp_path / "summary.csv"
    write_csv(frame, path)
    loaded = pd.read_csv(path)
    assert len(loaded) == 2
    assert loaded.loc[0, "committed"] == 2
