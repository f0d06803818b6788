"""Post-session reporting from a recorded event log.

The run command can write every session event as one JSON object per
line.  This module turns such a log into a CSV table plus a few
matplotlib figures: emotional intensities over time, event volume per
cycle, and working memory occupancy.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from pathlib import Path
from typing import Union

FIGURE_NAMES = ("emotions.png", "activity.png", "wm.png")


def load_events(path: Union[str, Path]) -> list[dict]:
    events = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not JSON: {exc}") from exc
            for field in ("seq", "cycle", "kind", "data"):
                if field not in record:
                    raise ValueError(f"{path}:{lineno}: event missing {field!r}")
            events.append(record)
    return events


def emotion_series(events: list[dict]) -> dict[str, list[tuple[int, float]]]:
    """Per emotion kind, (seq, intensity) points in stream order."""
    series: dict[str, list[tuple[int, float]]] = {}
    for event in events:
        if event["kind"] != "EMOTION":
            continue
        data = event["data"]
        series.setdefault(data["kind"], []).append((event["seq"], float(data["intensity"])))
    return series


def cycle_counts(events: list[dict]) -> dict[int, Counter]:
    """Event kind counts per cycle."""
    counts: dict[int, Counter] = {}
    for event in events:
        counts.setdefault(event["cycle"], Counter())[event["kind"]] += 1
    return counts


def wm_occupancy(events: list[dict]) -> list[tuple[int, int]]:
    """(seq, entry count) after every working memory change."""
    size = 0
    points: list[tuple[int, int]] = []
    for event in events:
        if event["kind"] == "WM-ADD" and not event["data"].get("refreshed"):
            size += 1
        elif event["kind"] == "WM-REMOVE":
            size -= 1
        else:
            continue
        points.append((event["seq"], size))
    return points


def write_csv(events: list[dict], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["seq", "cycle", "kind", "detail"])
        for event in events:
            writer.writerow([event["seq"], event["cycle"], event["kind"], _detail(event)])


def _detail(event: dict) -> str:
    data = event["data"]
    kind = event["kind"]
    if kind == "TEXT":
        return f"{data['tag']}: {data['text']}"
    if kind in ("WM-ADD", "WM-REMOVE"):
        return data["concept"]
    if kind == "EMOTION":
        return f"{data['op']} {data['kind']} {data['intensity']}"
    if kind in ("GOAL", "CONTROL-GOAL"):
        return f"{data['op']} {data.get('objective', '')}".strip()
    if kind == "SCENARIO-EVENT":
        return f"{data['step']} {data.get('concept', '')}".strip()
    if kind == "RULE-FIRED":
        return data["name"]
    if kind == "PROMPT":
        return data["text"]
    if kind == "MODE":
        return data["mode"]
    if kind == "ERROR":
        return data["message"]
    return ""


def render_figures(events: list[dict], out_dir: Union[str, Path]) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    fig, ax = plt.subplots(figsize=(8, 4))
    for kind, points in sorted(emotion_series(events).items()):
        xs = [seq for seq, _ in points]
        ys = [value for _, value in points]
        ax.plot(xs, ys, marker="o", label=kind)
    ax.set_xlabel("event sequence")
    ax.set_ylabel("intensity")
    ax.set_title("Emotional intensity")
    ax.set_ylim(0, 1.05)
    if ax.lines:
        ax.legend(fontsize=8)
    path = out / "emotions.png"
    fig.savefig(path, dpi=100, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    counts = cycle_counts(events)
    cycles = sorted(counts)
    kinds = sorted({k for counter in counts.values() for k in counter})
    fig, ax = plt.subplots(figsize=(8, 4))
    bottoms = [0] * len(cycles)
    for kind in kinds:
        heights = [counts[c].get(kind, 0) for c in cycles]
        ax.bar(cycles, heights, bottom=bottoms, label=kind)
        bottoms = [b + h for b, h in zip(bottoms, heights)]
    ax.set_xlabel("cycle")
    ax.set_ylabel("events")
    ax.set_title("Session activity by cycle")
    if kinds:
        ax.legend(fontsize=7)
    path = out / "activity.png"
    fig.savefig(path, dpi=100, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(8, 4))
    points = wm_occupancy(events)
    if points:
        ax.step([s for s, _ in points], [n for _, n in points], where="post")
    ax.set_xlabel("event sequence")
    ax.set_ylabel("entries")
    ax.set_title("Working memory occupancy")
    path = out / "wm.png"
    fig.savefig(path, dpi=100, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    return written


def build_report(log_path: Union[str, Path], out_dir: Union[str, Path]) -> list[Path]:
    """CSV plus figures; returns every file written."""
    events = load_events(log_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "events.csv"
    write_csv(events, csv_path)
    return [csv_path] + render_figures(events, out)
