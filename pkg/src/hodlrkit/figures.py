"""Figure and CSV rendering for CLI reports.

When a command gets ``--figures DIR`` it drops a PNG plot of the report's
main result next to a CSV with the underlying numbers, so reports can be
eyeballed directly or re-plotted elsewhere.  Rendering is entirely
offscreen.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)


def _finite(values):
    return [v for v in values if v is not None]


def render(report: dict, out_dir) -> list:
    """Render the figures and CSV files for one report; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    command = report["command"]
    if command in ("factor", "solve"):
        return _render_ranks(report, out_dir)
    if command == "gmres":
        return _render_convergence(report, out_dir)
    if command == "study-rank":
        return _render_rank_error(report, out_dir)
    if command == "study-pivots":
        return _render_pivots(report, out_dir)
    return []


def _save(fig, path):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="ascii") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _render_ranks(report, out_dir):
    levels = report["results"]["ranks_per_level"]
    csv_path = os.path.join(out_dir, "ranks_per_level.csv")
    _write_csv(csv_path, ["level", "max_rank", "mean_rank"],
               [(e["level"], e["max_rank"], e["mean_rank"]) for e in levels])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if levels:
        xs = [e["level"] for e in levels]
        ax.plot(xs, [e["max_rank"] for e in levels], "o-", label="max rank")
        ax.plot(xs, [e["mean_rank"] for e in levels], "s--", label="mean rank")
        ax.set_xticks(xs)
    ax.set_xlabel("level (root = 1)")
    ax.set_ylabel("off-diagonal rank")
    ax.legend()
    fig_path = os.path.join(out_dir, "ranks_per_level.png")
    _save(fig, fig_path)
    return [fig_path, csv_path]


def _render_convergence(report, out_dir):
    runs = [("preconditioned", report["results"]["preconditioned"])]
    if report["results"].get("baseline"):
        runs.append(("diag baseline", report["results"]["baseline"]))
    csv_path = os.path.join(out_dir, "convergence.csv")
    rows = []
    for name, run in runs:
        for it, res in enumerate(run["residual_history"], start=1):
            rows.append((name, it, res))
    _write_csv(csv_path, ["run", "iteration", "relative_residual"], rows)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name, run in runs:
        hist = _finite(run["residual_history"])
        ax.semilogy(range(1, len(hist) + 1), hist, label=name)
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative residual")
    ax.legend()
    fig_path = os.path.join(out_dir, "convergence.png")
    _save(fig, fig_path)
    return [fig_path, csv_path]


def _render_rank_error(report, out_dir):
    results = report["results"]
    csv_path = os.path.join(out_dir, "rank_error.csv")
    rows = [("svd", "", point["rank"], point["error"])
            for point in results["svd_curve"]]
    for curve in results["bdlr_curves"]:
        for point in curve["points"]:
            rows.append(("bdlr", curve["tol"], point["rank"], point["error"]))
    _write_csv(csv_path, ["scheme", "tol", "rank", "error"], rows)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    svd_pts = [(p["rank"], p["error"]) for p in results["svd_curve"]]
    ax.semilogy([p[0] for p in svd_pts], [max(p[1], 1e-18) for p in svd_pts],
                "k-", label="svd")
    for curve in results["bdlr_curves"]:
        pts = [(p["rank"], max(p["error"], 1e-18)) for p in curve["points"]]
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], "o--",
                    label=f"bdlr tol={curve['tol']:g}")
    ax.set_xlabel("rank")
    ax.set_ylabel("relative Frobenius error")
    ax.legend()
    fig_path = os.path.join(out_dir, "rank_error.png")
    _save(fig, fig_path)
    return [fig_path, csv_path]


def _render_pivots(report, out_dir):
    pivots = report["results"]["pivots"]
    csv_path = os.path.join(out_dir, "pivot_distance.csv")
    _write_csv(csv_path, ["step", "magnitude", "row_d", "col_d"],
               [(k, p["magnitude"], p["row_d"], p["col_d"])
                for k, p in enumerate(pivots)])
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5), sharey=True)
    for ax, key, label in ((axes[0], "row_d", "row distance"),
                           (axes[1], "col_d", "column distance")):
        xs = [p[key] for p in pivots if p[key] is not None and p["magnitude"] > 0]
        ys = [p["magnitude"] for p in pivots if p[key] is not None and p["magnitude"] > 0]
        ax.scatter(xs, ys, s=12)
        ax.set_yscale("log")
        ax.set_xlabel(label)
    axes[0].set_ylabel("pivot magnitude")
    fig_path = os.path.join(out_dir, "pivot_distance.png")
    _save(fig, fig_path)
    return [fig_path, csv_path]
