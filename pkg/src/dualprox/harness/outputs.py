"""CSV and static SVG outputs for a finished run."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from ..asyncsim import write_event_log
from ..graph import format_edge_list, neighbors
from ..trace import write_trace_csv

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173",
)

FIGURES = ("cost.svg", "x_first.svg", "mu_first.svg", "lambda_first.svg")


class OutputError(OSError):
    pass


def _num(v):
    return f"{v:.6g}"


def _thin(xs, ys, cap=2000):
    if len(xs) <= cap:
        return xs, ys
    idx = np.unique(np.linspace(0, len(xs) - 1, cap).astype(int))
    return xs[idx], ys[idx]


def svg_line_chart(series, title, xlabel, ylabel, hlines=(), meta="", width=640, height=400):
    """Render ``series = [(label, xs, ys), ...]`` as a plain SVG line chart.

    ``hlines`` are ``(label, y)`` reference levels drawn dotted red.
    """
    ml, mr, mt, mb = 70, 20, 36, 46
    pw, ph = width - ml - mr, height - mt - mb
    finite = []
    for _, xs, ys in series:
        ys = np.asarray(ys, dtype=float)
        finite.append(np.isfinite(ys))
    all_x = np.concatenate([np.asarray(xs, dtype=float) for _, xs, _ in series]) if series else np.zeros(1)
    all_y = [np.asarray(ys, dtype=float)[f] for (_, _, ys), f in zip(series, finite)]
    all_y = np.concatenate(all_y + [np.array([y for _, y in hlines], dtype=float)])
    all_y = all_y[np.isfinite(all_y)]
    x0, x1 = (float(all_x.min()), float(all_x.max())) if all_x.size else (0.0, 1.0)
    y0, y1 = (float(all_y.min()), float(all_y.max())) if all_y.size else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return mt + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f"<!-- {meta} -->" if meta else "",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for k in range(5):
        xv = x0 + k * (x1 - x0) / 4
        yv = y0 + k * (y1 - y0) / 4
        out.append(
            f'<text x="{_num(sx(xv))}" y="{mt + ph + 16}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="10">{_num(xv)}</text>'
        )
        out.append(
            f'<text x="{ml - 6}" y="{_num(sy(yv) + 3)}" text-anchor="end" font-family="sans-serif" '
            f'font-size="10">{_num(yv)}</text>'
        )
    out.append(
        f'<text x="{ml + pw / 2}" y="{height - 8}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">{xlabel}</text>'
    )
    out.append(
        f'<text x="14" y="{mt + ph / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 14 {mt + ph / 2})">{ylabel}</text>'
    )
    for k, ((label, xs, ys), ok) in enumerate(zip(series, finite)):
        xs, ys = _thin(np.asarray(xs, dtype=float)[ok], np.asarray(ys, dtype=float)[ok])
        if xs.size == 0:
            continue
        pts = " ".join(f"{_num(sx(a))},{_num(sy(b))}" for a, b in zip(xs, ys))
        color = PALETTE[k % len(PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"><title>{label}</title></polyline>')
    for label, yv in hlines:
        if math.isfinite(yv):
            out.append(
                f'<line x1="{ml}" y1="{_num(sy(yv))}" x2="{ml + pw}" y2="{_num(sy(yv))}" stroke="red" '
                f'stroke-dasharray="3,3" stroke-width="1.2"><title>{label}</title></line>'
            )
    out.append("</svg>")
    return "\n".join(s for s in out if s) + "\n"


def _write(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None


def emit_outputs(trace, config, instance, reference=None, out_dir=None) -> list:
    """Write CSVs and the four SVG charts; return the written paths.

    Files: ``trace.csv``, ``nodes.csv`` (snapshots of ``x_i*`` and ``mu_i``),
    ``lambda.csv`` (``lambda_node^j`` snapshots), ``events.csv`` for gossip
    runs, ``graph.txt``, ``config.txt`` and the SVGs in :data:`FIGURES`.
    """
    if not trace.records:
        raise ValueError("cannot emit outputs for an empty trace")
    out = Path(out_dir or config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc.strerror}") from None
    meta = f"seed={config.seed} config={config.digest()} algorithm={config.algorithm}"
    d = instance.dim
    lay = instance.layout
    node = config.node
    nbrs = neighbors(instance.graph, node)
    written = []

    try:
        write_trace_csv(trace, out / "trace.csv")
    except OSError as exc:
        raise OutputError(f"cannot write {out / 'trace.csv'}: {exc.strerror}") from None
    written.append(out / "trace.csv")

    snaps = trace.snapshots
    rows = []
    lam_rows = []
    for s in snaps:
        M = s.y[lay.all_mu_cols].reshape(instance.n, d)
        for i in range(instance.n):
            rows.append([s.iteration, i + 1, *map(repr, s.x_star[i].tolist()), *map(repr, M[i].tolist())])
        for j in nbrs:
            p = lay.lam_start[(node, j)]
            lam_rows.append([s.iteration, j, *map(repr, s.y[p:p + d].tolist())])
    try:
        with open(out / "nodes.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "node"] + [f"x{k + 1}" for k in range(d)] + [f"mu{k + 1}" for k in range(d)])
            w.writerows(rows)
        with open(out / "lambda.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "neighbor"] + [f"lambda{k + 1}" for k in range(d)])
            w.writerows(lam_rows)
        if "events" in trace.meta:
            write_event_log(trace.meta["events"], out / "events.csv")
            written.append(out / "events.csv")
    except OSError as exc:
        raise OutputError(f"cannot write outputs under {out}: {exc.strerror}") from None
    written += [out / "nodes.csv", out / "lambda.csv"]
    _write(out / "graph.txt", format_edge_list(instance.graph))
    _write(out / "config.txt", config.to_text())
    written += [out / "graph.txt", out / "config.txt"]

    it = trace.column("iteration")
    cost = -trace.dual_objective
    ref_h = [("optimal cost", reference.value)] if reference is not None else []
    charts = {
        "cost.svg": svg_line_chart([("-Gamma(y(t))", it, cost)], "Cost -Gamma(y(t)) vs optimal cost",
                                   "iteration", "cost", ref_h, meta),
    }
    sit = np.array([s.iteration for s in snaps]) if snaps else np.zeros(0)
    xs = np.array([s.x_star[:, 0] for s in snaps]) if snaps else np.zeros((0, instance.n))
    mus = np.array([s.y[lay.all_mu_cols].reshape(instance.n, d)[:, 0] for s in snaps]) if snaps else np.zeros((0, instance.n))
    x_ref = [("optimal x first component", float(reference.x[0]))] if reference is not None else []
    charts["x_first.svg"] = svg_line_chart(
        [(f"x_{i + 1}", sit, xs[:, i]) for i in range(instance.n)],
        "First component of x_i*(t)", "iteration", "x_i*(t)[1]", x_ref, meta,
    )
    charts["mu_first.svg"] = svg_line_chart(
        [(f"mu_{i + 1}", sit, mus[:, i]) for i in range(instance.n)],
        "First component of mu_i(t)", "iteration", "mu_i(t)[1]", (), meta,
    )
    lam_series = []
    for j in nbrs:
        p = lay.lam_start[(node, j)]
        lam_series.append((f"lambda_{node}^{j}", sit, np.array([s.y[p] for s in snaps])))
    charts["lambda_first.svg"] = svg_line_chart(
        lam_series, f"First component of lambda_{node}^j, j in N_{node}", "iteration", "lambda[1]", (), meta,
    )
    for name in FIGURES:
        _write(out / name, charts[name])
        written.append(out / name)
    return written
