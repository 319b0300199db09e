"""Pareto reporting: scatter figures, plot-data tables, gain summaries.

Consumes the artifact directory written by an exploration run (pareto.json,
pareto.csv) and produces a static accuracy-vs-normalized-area scatter per
run, the plotted points as a CSV, and a text summary of the best points at
up to 1% and up to 5% accuracy loss against the conventional baseline.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


class ReportError(RuntimeError):
    """Missing or malformed run artifact."""


def load_artifact(run_dir) -> dict:
    path = Path(run_dir) / "pareto.json"
    if not path.is_file():
        raise ReportError(f"no pareto.json under {run_dir}; run `adcprune explore` first")
    with open(path) as fh:
        return json.load(fh)


def front_points(artifact: dict) -> list[dict]:
    """Archive points sorted by normalized area (the plotted staircase)."""
    pts = sorted(
        artifact["archive"],
        key=lambda row: (row["area_normalized_to_baseline"], row["accuracy"]),
    )
    return pts


def best_within_loss(points, baseline_accuracy: float, max_loss: float) -> dict | None:
    """Smallest-area archive point whose accuracy is within `max_loss` of baseline."""
    ok = [p for p in points if p["accuracy"] >= baseline_accuracy - max_loss]
    if not ok:
        return None
    return min(ok, key=lambda p: (p["area_normalized_to_baseline"], -p["accuracy"]))


def write_points_csv(run_dir, artifact: dict) -> Path:
    out = Path(run_dir) / "report_points.csv"
    pts = front_points(artifact)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "accuracy", "area_normalized_to_baseline"])
        name = artifact.get("name", Path(run_dir).name)
        for p in pts:
            w.writerow([name, f"{p['accuracy']:.6f}", f"{p['area_normalized_to_baseline']:.6f}"])
    return out


def write_figure(run_dir, artifact: dict) -> Path:
    out = Path(run_dir) / "pareto.svg"
    pts = front_points(artifact)
    base = artifact["baseline"]
    xs = [p["area_normalized_to_baseline"] for p in pts]
    ys = [p["accuracy"] for p in pts]

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(xs, ys, "o-", ms=4, lw=1.0, label="pruned front")
    ax.plot([1.0], [base["accuracy"]], "s", color="tab:red", ms=6, label="conventional")
    for loss, style in ((0.01, ":"), (0.05, "--")):
        ax.axhline(base["accuracy"] - loss, color="gray", lw=0.8, ls=style)
    ax.set_xlabel("ADC front-end area (normalized to conventional)")
    ax.set_ylabel("accuracy")
    ax.set_title(artifact.get("name", Path(run_dir).name))
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def summarize(run_dir, artifact: dict) -> str:
    base = artifact["baseline"]
    pts = front_points(artifact)
    lines = [
        f"run: {run_dir} ({artifact.get('name', '?')}, seed {artifact.get('seed', '?')})",
        f"  baseline: accuracy {base['accuracy']:.4f}, area {base['area_units']:g} units",
    ]
    if pts:
        lines.append(
            f"  front: {len(pts)} points, normalized area"
            f" {pts[0]['area_normalized_to_baseline']:.3f}"
            f"..{pts[-1]['area_normalized_to_baseline']:.3f}"
        )
    else:
        lines.append("  front: empty")
    for loss in (0.01, 0.05):
        best = best_within_loss(pts, base["accuracy"], loss)
        if best is None:
            lines.append(f"  best <={loss:.0%} acc loss: none")
        else:
            norm = best["area_normalized_to_baseline"]
            gain = 1.0 / norm if norm > 0 else float("inf")
            lines.append(
                f"  best <={loss:.0%} acc loss: accuracy {best['accuracy']:.4f},"
                f" area {best['f2_area_units']:g}, normalized {norm:.3f}, gain {gain:.1f}x"
            )
    return "\n".join(lines)


def comparison_table(rows: list[dict]) -> str:
    header = f"{'run':<24}{'base_acc':>9}{'norm@1%':>9}{'gain@1%':>9}{'norm@5%':>9}{'gain@5%':>9}"
    out = [header, "-" * len(header)]
    for r in rows:
        out.append(
            f"{r['name']:<24}{r['baseline_accuracy']:>9.4f}"
            f"{r['norm_1']:>9}{r['gain_1']:>9}{r['norm_5']:>9}{r['gain_5']:>9}"
        )
    return "\n".join(out)


def report_runs(run_dirs) -> str:
    """Render figure + points CSV + summary for each run; returns the report text."""
    sections = []
    table_rows = []
    for run_dir in run_dirs:
        artifact = load_artifact(run_dir)
        write_figure(run_dir, artifact)
        write_points_csv(run_dir, artifact)
        text = summarize(run_dir, artifact)
        (Path(run_dir) / "summary.txt").write_text(text + "\n")
        sections.append(text)

        base = artifact["baseline"]
        pts = front_points(artifact)
        row = {"name": artifact.get("name", Path(run_dir).name),
               "baseline_accuracy": base["accuracy"]}
        for loss, tag in ((0.01, "1"), (0.05, "5")):
            best = best_within_loss(pts, base["accuracy"], loss)
            if best is None:
                row[f"norm_{tag}"], row[f"gain_{tag}"] = "-", "-"
            else:
                norm = best["area_normalized_to_baseline"]
                row[f"norm_{tag}"] = f"{norm:.3f}"
                row[f"gain_{tag}"] = f"{1.0 / norm:.1f}x" if norm > 0 else "inf"
        table_rows.append(row)

    text = "\n\n".join(sections)
    if len(table_rows) > 1:
        text += "\n\n" + comparison_table(table_rows)
    return text
