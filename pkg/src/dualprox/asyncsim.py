"""Event-driven gossip simulation of the asynchronous dual proximal gradient.

Each node sleeps for an exponential time, wakes up, takes a proximal gradient
step on its own dual block ``y_i = [Lambda_i; mu_i]`` and broadcasts. Neighbors
that receive a new ``lambda_i^j`` recompute their primal minimizer. Messages
are delivered instantly and reliably, so the run is a sequence of single-node
updates ordered by wake-up time.
"""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass

import numpy as np

from .dualcore import DualState, ProblemInstance, Recorder, StepSizes, _initial_state
from .graph import neighbors
from .trace import Trace

MODES = ("event_queue", "uniform_pick")


@dataclass(frozen=True)
class TimerModel:
    """Exponential wake-up clocks, one rate per node."""

    rates: tuple
    mode: str = "uniform_pick"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown activation mode {self.mode!r}; pick one of {MODES}")
        if len(self.rates) == 0 or any(r <= 0 for r in self.rates):
            raise ValueError("timer rates must be strictly positive")

    @classmethod
    def uniform(cls, n, mode="uniform_pick", rate=1.0):
        return cls((float(rate),) * n, mode)

    @property
    def n(self):
        return len(self.rates)


@dataclass(frozen=True, order=True)
class SimEvent:
    time: float
    node: int
    seq: int


class ActivationClock:
    """Produces the global sequence of wake-ups.

    ``event_queue`` keeps one pending timer per node in a heap and resamples
    the timer of whichever node fires. ``uniform_pick`` draws the next node
    directly (proportionally to its rate) and advances time by an
    exponential with the total rate.
    """

    def __init__(self, timer: TimerModel, rng: np.random.Generator):
        self.timer = timer
        self.rng = rng
        self.rates = np.asarray(timer.rates, dtype=float)
        self.now = 0.0
        self._seq = 0
        self._heap = []
        if timer.mode == "event_queue":
            for node, rate in enumerate(self.rates, start=1):
                self._push(self.rng.exponential(1.0 / rate), node)
        else:
            self._probs = self.rates / self.rates.sum()
            self._equal = bool(np.all(self.rates == self.rates[0]))

    def _push(self, time, node):
        heapq.heappush(self._heap, SimEvent(time, node, self._seq))
        self._seq += 1

    def next_activation(self) -> SimEvent:
        if self.timer.mode == "event_queue":
            ev = heapq.heappop(self._heap)
            self._push(ev.time + self.rng.exponential(1.0 / self.rates[ev.node - 1]), ev.node)
            self.now = ev.time
            return ev
        n = self.rates.size
        node = int(self.rng.integers(1, n + 1)) if self._equal else int(self.rng.choice(n, p=self._probs)) + 1
        self.now += self.rng.exponential(1.0 / self.rates.sum())
        ev = SimEvent(self.now, node, self._seq)
        self._seq += 1
        return ev


def next_activation(clock: ActivationClock) -> SimEvent:
    return clock.next_activation()


class _NodeKernels:
    """Per-node slices and primal refresh data, built once per instance."""

    def __init__(self, instance: ProblemInstance):
        lay = instance.layout
        d = instance.dim
        fast = instance._fast
        self.lam = [None] * (instance.n + 1)
        self.mu = [None] * (instance.n + 1)
        self.nb0 = [None] * (instance.n + 1)
        self.rows = [None] * (instance.n + 1)
        self.refresh = [None] * (instance.n + 1)
        for i in instance.graph.nodes():
            nb = neighbors(instance.graph, i)
            self.lam[i] = slice(lay.block[i].start, lay.mu_start[i])
            self.mu[i] = slice(lay.mu_start[i], lay.mu_start[i] + d)
            self.nb0[i] = np.array(nb, dtype=int) - 1
            touched = np.array((i, *nb), dtype=int) - 1
            self.rows[i] = touched
            # rows of v = A y belonging to node i and its neighbors
            sub = lay.A[np.concatenate([np.arange(k * d, (k + 1) * d) for k in touched])]
            if fast.diagonal:
                self.refresh[i] = (sub, fast.r[touched], fast.inv2q[touched])
            else:
                self.refresh[i] = (sub, None, None)
        self.instance = instance
        self.d = d


def _kernels(instance):
    k = instance.__dict__.get("_async_kernels")
    if k is None:
        k = _NodeKernels(instance)
        object.__setattr__(instance, "_async_kernels", k)
    return k


def awake_update(instance: ProblemInstance, y: DualState, i: int, alpha_i: float) -> DualState:
    """Node ``i`` wakes up; updates ``y`` in place and returns it.

    ``lambda_i^j += alpha_i (x_i* - x_j*)`` for every neighbor ``j``,
    ``mu_i = prox_{alpha_i g_i*}(mu_i + alpha_i x_i*)``, then ``x_i*`` and
    every neighbor's ``x_j*`` are recomputed (the neighbors react to the
    received ``lambda_i^j``).
    """
    ker = _kernels(instance)
    X = y.x_star
    xi = X[i - 1]
    lam = ker.lam[i]
    k = ker.nb0[i].size
    y.y[lam] += alpha_i * (xi - X[ker.nb0[i]]).reshape(k * ker.d)
    mu = ker.mu[i]
    y.y[mu] = instance.g(i).prox_conjugate(alpha_i, y.y[mu] + alpha_i * xi)

    sub, r, c = ker.refresh[i]
    rows = ker.rows[i]
    V = (sub @ y.y).reshape(rows.size, ker.d)
    if c is not None:
        X[rows] = -(r + V) * c
    else:
        for row, v in zip(rows, V):
            X[row] = instance.smooth[row].argmin_coupled(v)
    return y


def run_async(
    instance: ProblemInstance,
    steps: StepSizes,
    T: int,
    seed=None,
    callbacks=(),
    timer: TimerModel | None = None,
    sequence=None,
    y0=None,
    event_log: bool = False,
    recorder=None,
    **record_opts,
) -> Trace:
    """Run ``T`` activations of the gossip algorithm.

    Parameters
    ----------
    steps : StepSizes
        Local step sizes; in ``safe`` mode each must satisfy ``alpha_i <= 1/L_i``.
    seed : int or None
        Seeds the activation clock. Ignored when ``sequence`` is given.
    sequence : iterable of int, optional
        Replay an explicit activation order instead of sampling one.
    event_log : bool
        Keep ``(time, node, msg_count)`` rows in ``trace.meta["events"]``.

    Each callback is called as ``cb(t, node, state)`` after activation ``t``.
    """
    if T < 1:
        raise ValueError(f"need at least one activation, got T={T}")
    if len(steps.local_alpha) != instance.n:
        raise ValueError("one local step size per node is required")
    if steps.mode == "safe":
        for i, (a, L) in enumerate(zip(steps.local_alpha, steps.local_L), start=1):
            if not 0 < a <= 1.0 / L * (1 + 1e-12):
                raise ValueError(f"node {i}: alpha={a} violates 0 < alpha <= 1/L_i = {1.0 / L}")
    rec = recorder or Recorder(instance, **record_opts)
    y = _initial_state(instance, y0)
    rec.trace.meta.update(algorithm="async", seed=seed, mode=steps.mode)
    rec(0, -1, y, force=True)

    if sequence is not None:
        seq = [int(s) for s in sequence]
        if len(seq) < T:
            raise ValueError(f"activation sequence has {len(seq)} entries, need {T}")
        events = (SimEvent(float(t), node, t) for t, node in enumerate(seq[:T], start=1))
    else:
        timer = timer or TimerModel.uniform(instance.n)
        if timer.n != instance.n:
            raise ValueError("timer model and instance disagree on the node count")
        clock = ActivationClock(timer, np.random.default_rng(seed))
        events = (clock.next_activation() for _ in range(T))

    activations = []
    log_rows = [] if event_log else None
    alphas = steps.local_alpha
    for t, ev in enumerate(events, start=1):
        i = ev.node
        awake_update(instance, y, i, alphas[i - 1])
        activations.append(i)
        if log_rows is not None:
            log_rows.append((ev.time, i, instance.graph.degree(i)))
        rec(t, i, y, force=(t == T))
        for cb in callbacks:
            cb(t, i, y)
    rec.trace.meta["activations"] = activations
    rec.trace.meta["final_state"] = y
    if log_rows is not None:
        rec.trace.meta["events"] = log_rows
    return rec.trace


def write_event_log(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("time", "node", "msg_count"))
        for time, node, count in rows:
            w.writerow((repr(float(time)), node, count))
