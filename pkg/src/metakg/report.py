"""Corpus report: dataset and variable counts per category.

Writes the same numbers four ways: aligned text for the terminal, JSON and
CSV for machines, and a bar chart rendered to PNG next to them.
"""

from __future__ import annotations

import csv
import json
import logging
import os

log = logging.getLogger(__name__)


def compute_report(tables_dir) -> dict:
    """Per-category dataset/variable counts from the staging tables; a
    missing tables directory yields an all-zero report."""
    datasets_path = os.path.join(tables_dir, "datasets.csv")
    variables_path = os.path.join(tables_dir, "variables.csv")
    categories: dict[str, dict] = {}
    doc_category: dict[str, str] = {}
    if os.path.exists(datasets_path):
        with open(datasets_path, "r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                cat = row["category"]
                doc_category[row["doc_id"]] = cat
                bucket = categories.setdefault(cat, {"datasets": 0, "variables": 0})
                bucket["datasets"] += 1
    if os.path.exists(variables_path):
        with open(variables_path, "r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                cat = doc_category.get(row["doc_id"])
                if cat is not None:
                    categories[cat]["variables"] += 1
    rows = [
        {"category": cat, "datasets": counts["datasets"],
         "variables": counts["variables"]}
        for cat, counts in sorted(categories.items())
    ]
    totals = {
        "datasets": sum(r["datasets"] for r in rows),
        "variables": sum(r["variables"] for r in rows),
    }
    return {"categories": rows, "totals": totals}


def format_report_text(report: dict) -> str:
    rows = report["categories"]
    width = max([len("Category")] + [len(r["category"]) for r in rows])
    lines = [f"{'Category':<{width}}  {'Datasets':>8}  {'Variables':>9}"]
    lines.append("-" * (width + 21))
    for r in rows:
        lines.append(f"{r['category']:<{width}}  {r['datasets']:>8}  "
                     f"{r['variables']:>9}")
    lines.append("-" * (width + 21))
    totals = report["totals"]
    lines.append(f"{'Total':<{width}}  {totals['datasets']:>8}  "
                 f"{totals['variables']:>9}")
    return "\n".join(lines) + "\n"


def render_report_figure(report: dict, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = report["categories"]
    labels = [r["category"] for r in rows]
    datasets = [r["datasets"] for r in rows]
    variables = [r["variables"] for r in rows]
    x = range(len(rows))
    fig, ax = plt.subplots(figsize=(max(6, len(rows) * 1.4), 4.5))
    ax.bar([i - 0.2 for i in x], datasets, width=0.4, label="datasets")
    ax.bar([i + 0.2 for i in x], variables, width=0.4, label="variables")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel("count")
    ax.set_title("Datasets and variables per category")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(report: dict, out_dir, figure=True):
    """Write report.json, report.csv, report.txt and report.png."""
    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, "report.json")
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8",
              newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["category", "datasets", "variables"])
        for r in report["categories"]:
            writer.writerow([r["category"], r["datasets"], r["variables"]])
        writer.writerow(["Total", report["totals"]["datasets"],
                         report["totals"]["variables"]])
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(format_report_text(report))
    if figure:
        try:
            render_report_figure(report, os.path.join(out_dir, "report.png"))
        except Exception as exc:
            log.warning("could not render report figure: %s", exc)
    return json_path
