"""Per-iteration trace records shared by every solver."""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass, field, fields

import numpy as np

TRACE_COLUMNS = (
    "iteration",
    "active_node",
    "dual_objective",
    "primal_cost_raw",
    "primal_cost_projected",
    "consensus_residual",
    "wall_clock_ns",
)


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    active_node: int  # -1 for synchronous iterations
    dual_objective: float
    primal_cost_raw: float
    primal_cost_projected: float
    consensus_residual: float
    wall_clock_ns: int = 0


@dataclass
class Snapshot:
    iteration: int
    y: np.ndarray
    x_star: np.ndarray


@dataclass
class Trace:
    """Records plus optional strided state snapshots."""

    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, k):
        return self.records[k]

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    @property
    def dual_objective(self):
        return self.column("dual_objective")

    @property
    def active_nodes(self):
        return [r.active_node for r in self.records]

    @property
    def last(self):
        return self.records[-1]


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return repr(v)


def write_trace_csv(trace: Trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for rec in trace.records:
            w.writerow([_fmt(v) for v in astuple(rec)])


def read_trace_csv(path) -> Trace:
    kinds = {f.name: f.type for f in fields(TraceRecord)}
    out = Trace()
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals = {k: (int(v) if kinds[k] == "int" else float(v)) for k, v in row.items()}
            out.records.append(TraceRecord(**vals))
    return out
