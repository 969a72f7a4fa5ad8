"""Corpus and batch reports: figures rendered next to the delimited files.

Each report writes a JSON document, a CSV with the same stem, and a PNG
figure, so a single output path fans out into everything a reader needs.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import corpus as C
from . import goals as G


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def corpus_report(records, out_json) -> list[Path]:
    """Write corpus statistics plus a dialogue-length histogram CSV/figure."""
    out_json = Path(out_json)
    out_json.parent.mkdir(parents=True, exist_ok=True)
    stats = C.compute_stats(records)
    out_json.write_text(json.dumps(stats, indent=2, ensure_ascii=False) + "\n",
                        encoding="utf-8")

    buckets = C.bucket_by_goal_type(records)
    types = [t for t in G.GOAL_TYPES if buckets.get(t)]
    hists = {t: Counter(len(r.turns) for r in buckets[t]) for t in types}
    lengths = sorted({n for h in hists.values() for n in h})

    csv_path = _sibling(out_json, "_lengths.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["turns", *types, "total"])
        for n in lengths:
            row = [hists[t].get(n, 0) for t in types]
            w.writerow([n, *row, sum(row)])

    fig_path = _sibling(out_json, "_lengths.png")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for t in types:
        total = sum(hists[t].values())
        xs = sorted(hists[t])
        ys = [100.0 * hists[t][x] / total for x in xs]
        ax.plot(xs, ys, marker="o", markersize=3, label=t)
    ax.set_xlabel("dialogue length (turns)")
    ax.set_ylabel("share of dialogues (%)")
    ax.set_title("Dialogue length by goal type")
    ax.legend()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return [out_json, csv_path, fig_path]


def finish_report(report, out_json) -> list[Path]:
    """Write a batch result as JSON, a per-type CSV and a bar figure."""
    out_json = Path(out_json)
    out_json.parent.mkdir(parents=True, exist_ok=True)
    out_json.write_text(
        json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8")

    csv_path = _sibling(out_json, "_rates.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["goal_type", "n", "finished", "finish_rate",
                    "avg_turns", "failures"])
        for t, d in report.per_type.items():
            fails = ";".join(f"{k}={v}" for k, v in sorted(d["failures"].items()))
            w.writerow([t, d["n"], d["finished"], f"{d['finish_rate']:.4f}",
                        f"{d['avg_turns']:.2f}", fails])

    fig_path = _sibling(out_json, "_rates.png")
    types = list(report.per_type)
    rates = [report.per_type[t]["finish_rate"] for t in types]
    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar(types, rates, color="#4878a8")
    for bar, rate in zip(bars, rates):
        ax.annotate(f"{rate:.2f}", (bar.get_x() + bar.get_width() / 2, rate),
                    ha="center", va="bottom", fontsize=9)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("task finish rate")
    cfg = report.config
    ax.set_title(f"Finish rate ({cfg.get('level')}/{cfg.get('wizard')}, "
                 f"n={report.overall.get('n', 0)})")
    fig.tight_layout()
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return [out_json, csv_path, fig_path]
