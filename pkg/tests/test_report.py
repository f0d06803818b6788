"""Event-log reporting: the CSV table and the rendered figures."""

import csv
import json

import pytest

from daydreamer.cli import main
from daydreamer.report import (
    build_report,
    cycle_counts,
    emotion_series,
    load_events,
    wm_occupancy,
    write_csv,
)

from conftest import FIXTURES

LOG = FIXTURES / "nuart_events.ndjson"

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@pytest.fixture(scope="module")
def events():
    return load_events(LOG)


@pytest.fixture(scope="module")
def report_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("report")
    return out, build_report(LOG, out)


# -- loading ---------------------------------------------------------------


def test_load_events_keeps_stream_order(events):
    assert len(events) == 227
    assert [e["seq"] for e in events] == sorted(e["seq"] for e in events)


def test_load_events_rejects_non_json(tmp_path):
    bad = tmp_path / "bad.ndjson"
    good = '{"seq": 1, "cycle": 0, "kind": "MODE", "data": {}}'
    bad.write_text(good + "\nnot json\n", encoding="utf-8")
    with pytest.raises(ValueError, match="bad.ndjson:2: not JSON"):
        load_events(bad)


def test_load_events_rejects_missing_fields(tmp_path):
    bad = tmp_path / "short.ndjson"
    bad.write_text('{"seq": 1, "cycle": 0, "kind": "TEXT"}\n', encoding="utf-8")
    with pytest.raises(ValueError, match="missing 'data'"):
        load_events(bad)


def test_load_events_skips_blank_lines(tmp_path):
    log = tmp_path / "gaps.ndjson"
    record = {"seq": 1, "cycle": 0, "kind": "MODE", "data": {"mode": "performance"}}
    log.write_text("\n" + json.dumps(record) + "\n\n", encoding="utf-8")
    assert load_events(log) == [record]


# -- series extraction -----------------------------------------------------


def test_emotion_series_by_kind(events):
    series = emotion_series(events)
    assert set(series) == {"NEG-AFFECT", "ANGER", "REJECTION", "POS-AFFECT", "REGRET"}
    assert len(series["NEG-AFFECT"]) == 2
    for points in series.values():
        for seq, intensity in points:
            assert isinstance(seq, int)
            assert 0.0 <= intensity <= 1.0


def test_cycle_counts_cover_every_event(events):
    counts = cycle_counts(events)
    assert set(counts) == {0, 1, 2, 3, 4, 5}
    assert sum(sum(c.values()) for c in counts.values()) == len(events)


def test_wm_occupancy_steps_by_one(events):
    points = wm_occupancy(events)
    # refreshed adds change nothing, so points come only from real churn
    assert len(points) == 25 + 7
    previous = 0
    for _seq, size in points:
        assert abs(size - previous) == 1
        assert size >= 0
        previous = size


# -- csv -------------------------------------------------------------------


def test_csv_has_one_row_per_event(events, tmp_path):
    path = tmp_path / "events.csv"
    write_csv(events, path)
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["seq", "cycle", "kind", "detail"]
    assert len(rows) == len(events) + 1
    def first(kind):
        return next(row for row in rows[1:] if row[2] == kind)

    assert first("PROMPT")[3] == "I am going to a movie at the Nuart theater."
    assert first("MODE")[3] == "performance"
    assert first("RULE-FIRED")[3] == "dating-urge"
    assert first("TEXT")[3].startswith("trace: CYCLE 1")


# -- full report -----------------------------------------------------------


def test_report_writes_csv_and_figures(report_dir):
    out, written = report_dir
    assert [p.name for p in written] == ["events.csv", "emotions.png", "activity.png", "wm.png"]
    for path in written:
        assert path.exists() and path.stat().st_size > 0
    for path in written[1:]:
        assert path.read_bytes()[:8] == PNG_MAGIC


def test_report_cli_prints_written_paths(tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["report", str(LOG), "--out", str(out)]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert len(printed) == 4
    assert printed[0].endswith("events.csv")
    assert all((out / name).exists() for name in ("emotions.png", "activity.png", "wm.png"))


def test_report_cli_default_directory(tmp_path, capsys, monkeypatch):
    log = tmp_path / "sess.ndjson"
    log.write_text(LOG.read_text(encoding="utf-8"), encoding="utf-8")
    main(["report", str(log)])
    capsys.readouterr()
    assert (tmp_path / "sess_report" / "events.csv").exists()


def test_empty_log_still_reports(tmp_path):
    log = tmp_path / "empty.ndjson"
    log.write_text("", encoding="utf-8")
    written = build_report(log, tmp_path / "out")
    assert len(written) == 4
    for path in written:
        assert path.exists()
