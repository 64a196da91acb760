"""Dual decomposition core: problem instances, stacked duals, and the synchronous solvers.

The dual variable of node ``i`` is ``y_i = [lambda_i^{j_1}; ...; lambda_i^{j_k}; mu_i]``
with neighbors in ascending order, and ``y`` stacks ``y_1, ..., y_n``.
The minimization-form dual is ``Gamma(y) = F*(y) + G*(y)`` with

    F*(y) = sum_i f_i*(-v_i),  v_i = sum_{j in N_i} (lambda_i^j - lambda_j^i) + mu_i,
    G*(y) = sum_i g_i*(mu_i).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, neighbors
from .oracles import (
    BoxOracle,
    PolytopeOracle,
    QuadraticOracle,
    UnsupportedConfiguration,
    ZeroOracle,
    dykstra_halfspaces,
)
from .trace import Snapshot, Trace, TraceRecord

log = logging.getLogger(__name__)


class DualLayout:
    """Index bookkeeping for the stacked dual vector."""

    def __init__(self, graph: Graph, d: int):
        self.graph = graph
        self.d = d
        n = graph.n
        self.lam_start = {}
        self.block = [None] * (n + 1)
        self.mu_start = [None] * (n + 1)
        pos = 0
        for i in graph.nodes():
            start = pos
            for j in neighbors(graph, i):
                self.lam_start[(i, j)] = pos
                pos += d
            self.mu_start[i] = pos
            pos += d
            self.block[i] = slice(start, pos)
        self.size = pos

        self.lam_cols = [None] * (n + 1)  # entries of Lambda_i
        self.rev_cols = [None] * (n + 1)  # entries of lambda_j^i, j in N_i
        self.mu_cols = [None] * (n + 1)
        for i in graph.nodes():
            nb = neighbors(graph, i)
            self.lam_cols[i] = np.arange(self.block[i].start, self.mu_start[i])
            self.rev_cols[i] = np.concatenate(
                [np.arange(self.lam_start[(j, i)], self.lam_start[(j, i)] + d) for j in nb]
            ) if nb else np.arange(0)
            self.mu_cols[i] = np.arange(self.mu_start[i], self.mu_start[i] + d)
        self.all_mu_cols = np.concatenate([self.mu_cols[i] for i in graph.nodes()])

        # v = A y, rows grouped per node
        A = np.zeros((n * d, self.size))
        eye = np.eye(d)
        for (i, j), p in self.lam_start.items():
            A[(i - 1) * d:i * d, p:p + d] += eye
            A[(j - 1) * d:j * d, p:p + d] -= eye
        for i in graph.nodes():
            p = self.mu_start[i]
            A[(i - 1) * d:i * d, p:p + d] += eye
        self.A = A

    def block_dims(self):
        return [self.block[i].stop - self.block[i].start for i in self.graph.nodes()]


@dataclass(frozen=True)
class ProblemInstance:
    """Graph plus per-node smooth and regularizer oracles (lists indexed from node 1)."""

    graph: Graph
    smooth: tuple
    regularizers: tuple
    dim: int
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = self.graph.n
        if len(self.smooth) != n or len(self.regularizers) != n:
            raise ValueError(f"need {n} smooth and {n} regularizer oracles")
        for k, (f, g) in enumerate(zip(self.smooth, self.regularizers), start=1):
            if f.dim != self.dim or g.dim != self.dim:
                raise ValueError(f"node {k}: oracle dimension does not match d={self.dim}")
        object.__setattr__(self, "smooth", tuple(self.smooth))
        object.__setattr__(self, "regularizers", tuple(self.regularizers))
        object.__setattr__(self, "layout", DualLayout(self.graph, self.dim))
        object.__setattr__(self, "_fast", _FastPaths(self))

    @property
    def n(self):
        return self.graph.n

    def f(self, i):
        return self.smooth[i - 1]

    def g(self, i):
        return self.regularizers[i - 1]

    @property
    def sigmas(self):
        return [f.sigma for f in self.smooth]

    def constraint_system(self):
        """Stacked ``(A, b)`` for the intersection of indicator regularizers.

        Returns ``None`` when every regularizer is zero.
        """
        rows, offs = [], []
        for g in self.regularizers:
            if isinstance(g, ZeroOracle):
                continue
            if isinstance(g, BoxOracle):
                g = g.as_polytope()
            if not isinstance(g, PolytopeOracle):
                raise UnsupportedConfiguration(f"{g!r} is not a polyhedral indicator")
            rows.append(g.A)
            offs.append(g.b)
        if not rows:
            return None
        return np.vstack(rows), np.concatenate(offs)

    def primal_value(self, x):
        """``sum_i f_i(x)`` (regularizers excluded)."""
        return sum(f.value(x) for f in self.smooth)


class _FastPaths:
    """Vectorized kernels used when all oracles have a known closed form."""

    def __init__(self, inst):
        n, d = inst.graph.n, inst.dim
        self.quadratic = all(isinstance(f, QuadraticOracle) for f in inst.smooth)
        self.diagonal = False
        if self.quadratic:
            self.r = np.array([f.r for f in inst.smooth])
            self.half_inv = np.array([f.conjugate_hessian() for f in inst.smooth])
            self.diagonal = all(f.diagonal is not None for f in inst.smooth)
            if self.diagonal:
                self.inv2q = np.array([0.5 / f.diagonal for f in inst.smooth])
        self.half_idx, self.zero_idx, self.other_idx = [], [], []
        for k, g in enumerate(inst.regularizers):
            if isinstance(g, PolytopeOracle) and g.m == 1:
                self.half_idx.append(k)
            elif isinstance(g, ZeroOracle):
                self.zero_idx.append(k)
            else:
                self.other_idx.append(k)
        self.half_idx = np.array(self.half_idx, dtype=int)
        self.zero_idx = np.array(self.zero_idx, dtype=int)
        if self.half_idx.size:
            regs = [inst.regularizers[k] for k in self.half_idx]
            self.ha = np.array([g.A[0] for g in regs])
            self.hb = np.array([g.b[0] for g in regs])
            self.hn2 = np.array([g.norms2[0] for g in regs])
        self.n, self.d = n, d

    def argmin(self, V, inst):
        if self.diagonal:
            return -(self.r + V) * self.inv2q
        if self.quadratic:
            return -np.einsum("nij,nj->ni", self.half_inv, self.r + V)
        return np.array([f.argmin_coupled(v) for f, v in zip(inst.smooth, V)])

    def conj_sum(self, Y, inst):
        if self.quadratic:
            U = Y - self.r
            return 0.5 * float(np.einsum("ni,nij,nj->", U, self.half_inv, U))
        return float(sum(f.conjugate(y) for f, y in zip(inst.smooth, Y)))

    def prox_conj(self, alpha, M, inst):
        out = np.empty_like(M)
        if self.half_idx.size:
            W = M[self.half_idx] / alpha
            t = np.maximum(0.0, (np.einsum("hd,hd->h", self.ha, W) - self.hb) / self.hn2)
            out[self.half_idx] = alpha * (t[:, None] * self.ha)
        if self.zero_idx.size:
            out[self.zero_idx] = 0.0
        for k in self.other_idx:
            out[k] = inst.regularizers[k].prox_conjugate(alpha, M[k])
        return out

    def support_sum(self, M, inst, tol=1e-9):
        total = 0.0
        if self.half_idx.size:
            Mh = M[self.half_idx]
            c = np.einsum("hd,hd->h", Mh, self.ha) / self.hn2
            off = np.linalg.norm(Mh - c[:, None] * self.ha, axis=1)
            zero = ~np.any(Mh, axis=1)
            ok = zero | ((c >= -tol) & (off <= tol * np.linalg.norm(Mh, axis=1)))
            if not np.all(ok):
                return math.inf
            total += float(np.sum(np.where(zero, 0.0, c * self.hb)))
        if self.zero_idx.size and np.any(M[self.zero_idx]):
            return math.inf
        for k in self.other_idx:
            total += inst.regularizers[k].conjugate(M[k])
        return total


class DualState:
    """Stacked duals ``y`` with the cached primal minimizers ``x_i*``.

    Node-level accessors use 1-based ids and return views into ``y``.
    """

    def __init__(self, instance: ProblemInstance, y=None, x_star=None):
        self.instance = instance
        self.layout = instance.layout
        self.y = np.zeros(self.layout.size) if y is None else np.array(y, dtype=float)
        if self.y.shape != (self.layout.size,):
            raise ValueError(f"dual vector has shape {self.y.shape}, expected ({self.layout.size},)")
        if x_star is None:
            self.x_star = np.zeros((instance.n, instance.dim))
            refresh_primal(instance, self)
        else:
            self.x_star = np.array(x_star, dtype=float)

    @classmethod
    def zeros(cls, instance):
        return cls(instance)

    def copy(self):
        return DualState(self.instance, self.y.copy(), self.x_star.copy())

    def lam(self, i, j):
        p = self.layout.lam_start[(i, j)]
        return self.y[p:p + self.layout.d]

    def mu(self, i):
        p = self.layout.mu_start[i]
        return self.y[p:p + self.layout.d]

    def Lambda(self, i):
        return {j: self.lam(i, j) for j in neighbors(self.layout.graph, i)}

    def block(self, i):
        return self.y[self.layout.block[i]]

    def x(self, i):
        return self.x_star[i - 1]

    def mu_matrix(self):
        return self.y[self.layout.all_mu_cols].reshape(self.instance.n, self.instance.dim)


def coupled_vector(instance: ProblemInstance, y: DualState, i: int) -> np.ndarray:
    """``v_i = sum_{j in N_i} (lambda_i^j - lambda_j^i) + mu_i``."""
    if y.y.size != instance.layout.size:
        raise ValueError("dual state is not shaped for this instance")
    v = y.mu(i).copy()
    for j in neighbors(instance.graph, i):
        v += y.lam(i, j) - y.lam(j, i)
    return v


def primal_from_dual(instance: ProblemInstance, y: DualState, i: int) -> np.ndarray:
    x = instance.f(i).argmin_coupled(coupled_vector(instance, y, i))
    y.x_star[i - 1] = x
    return x


def refresh_primal(instance: ProblemInstance, y: DualState) -> None:
    """Recompute every cached ``x_i*`` from the current duals."""
    V = (instance.layout.A @ y.y).reshape(instance.n, instance.dim)
    y.x_star[:] = instance._fast.argmin(V, instance)


def dual_gradient(instance: ProblemInstance, y: DualState) -> np.ndarray:
    """Gradient of ``F*`` from the cached minimizers.

    The ``lambda_i^j`` block is ``x_j* - x_i*`` and the ``mu_i`` block is ``-x_i*``.
    """
    grad = np.empty_like(y.y)
    d = instance.dim
    lay = instance.layout
    for i in instance.graph.nodes():
        xi = y.x(i)
        for j in neighbors(instance.graph, i):
            p = lay.lam_start[(i, j)]
            grad[p:p + d] = y.x(j) - xi
        p = lay.mu_start[i]
        grad[p:p + d] = -xi
    return grad


def smooth_dual(instance: ProblemInstance, yvec) -> float:
    """``F*(y)`` evaluated directly from the conjugates."""
    V = (instance.layout.A @ np.asarray(yvec, dtype=float)).reshape(instance.n, instance.dim)
    return instance._fast.conj_sum(-V, instance)


def dual_objective(instance: ProblemInstance, y) -> float:
    """``Gamma(y) = F*(y) + G*(y)``; ``math.inf`` when some ``mu_i`` leaves ``dom g_i*``.

    Raises :class:`UnsupportedConfiguration` when a support function cannot be
    evaluated (multi-halfspace polytopes in d > 2).
    """
    yvec = y.y if isinstance(y, DualState) else np.asarray(y, dtype=float)
    M = yvec[instance.layout.all_mu_cols].reshape(instance.n, instance.dim)
    G = instance._fast.support_sum(M, instance)
    if math.isinf(G):
        return math.inf
    return smooth_dual(instance, yvec) + G


def prox_dual(instance: ProblemInstance, yvec, alpha) -> np.ndarray:
    """``prox_{alpha G*}``: Lambda blocks untouched, each ``mu_i`` through ``prox_{alpha g_i*}``."""
    out = np.array(yvec, dtype=float)
    cols = instance.layout.all_mu_cols
    M = out[cols].reshape(instance.n, instance.dim)
    out[cols] = instance._fast.prox_conj(alpha, M, instance).ravel()
    return out


def sync_step(instance: ProblemInstance, y: DualState, alpha: float) -> DualState:
    """One synchronous round: proximal gradient step on ``Gamma`` at step ``alpha``."""
    if alpha <= 0:
        raise ValueError(f"step size must be positive, got {alpha}")
    # -grad F*(y) = A^T x*
    z = y.y + alpha * (instance.layout.A.T @ y.x_star.ravel())
    return DualState(instance, prox_dual(instance, z, alpha))


def consensus_residual(instance: ProblemInstance, x_star) -> float:
    if not instance.graph.edges:
        return 0.0
    e = np.array(instance.graph.sorted_edges()) - 1
    return float(np.max(np.linalg.norm(x_star[e[:, 0]] - x_star[e[:, 1]], axis=1)))


# ---------------------------------------------------------------------------
# step sizes


def theorem1_step_size(sigmas) -> float:
    """``1 / sum_i (1 / sigma_i)``."""
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.size == 0 or np.any(sigmas <= 0):
        raise ValueError("strong-convexity moduli must be positive")
    return float(1.0 / np.sum(1.0 / sigmas))


def theorem2_lipschitz(i: int, sigmas, graph: Graph) -> float:
    """``L_i = sqrt(1/sigma_i^2 + sum_{j in N_i} (1/sigma_i + 1/sigma_j)^2)``; ``sigmas`` indexed from node 1."""
    nb = neighbors(graph, i)
    s_i = sigmas[i - 1]
    if s_i <= 0 or any(sigmas[j - 1] <= 0 for j in nb):
        raise ValueError("strong-convexity moduli must be positive")
    return math.sqrt(1.0 / s_i**2 + sum((1.0 / s_i + 1.0 / sigmas[j - 1]) ** 2 for j in nb))


def _conj_hessian_blocks(instance):
    if instance._fast.quadratic:
        return instance._fast.half_inv
    return None


def dual_lipschitz(instance: ProblemInstance) -> float:
    """Lipschitz constant of ``grad F*``.

    Exact (largest eigenvalue of ``A^T H A``) for quadratic costs, otherwise the
    bound ``||A||^2 / min_i sigma_i``.
    """
    A = instance.layout.A
    H = _conj_hessian_blocks(instance)
    if H is None:
        return float(np.linalg.norm(A, 2) ** 2 / min(instance.sigmas))
    from scipy.linalg import block_diag

    Hfull = block_diag(*H)
    return float(np.linalg.eigvalsh(A.T @ Hfull @ A).max())


def block_lipschitz_exact(instance: ProblemInstance, i: int) -> float:
    """Exact block-``i`` Lipschitz constant of ``grad F*`` for quadratic costs."""
    H = _conj_hessian_blocks(instance)
    if H is None:
        raise UnsupportedConfiguration("exact block constants need quadratic costs")
    from scipy.linalg import block_diag

    Ai = instance.layout.A[:, instance.layout.block[i]]
    return float(np.linalg.eigvalsh(Ai.T @ block_diag(*H) @ Ai).max())


@dataclass(frozen=True)
class StepSizes:
    """Step sizes for the synchronous (global) and gossip (local) solvers."""

    global_alpha: float
    local_alpha: tuple
    local_L: tuple
    mode: str = "safe"

    def alpha(self, i):
        return self.local_alpha[i - 1]


def step_sizes(instance: ProblemInstance, mode: str = "safe", alpha: float | None = None) -> StepSizes:
    """Build step sizes.

    ``safe`` uses ``min(1/sum(1/sigma_i), 1/L_F)`` globally, where ``L_F`` is the
    Lipschitz constant of ``grad F*``, and ``1/L_i`` per node. ``reproduction``
    uses ``alpha`` (default 1) everywhere regardless of the bounds.
    """
    sig = instance.sigmas
    L = tuple(theorem2_lipschitz(i, sig, instance.graph) for i in instance.graph.nodes())
    if mode == "safe":
        if alpha is not None:
            raise ValueError("an explicit alpha is only honored in reproduction mode")
        g = min(theorem1_step_size(sig), 1.0 / dual_lipschitz(instance))
        return StepSizes(g, tuple(1.0 / li for li in L), L, "safe")
    if mode == "reproduction":
        a = 1.0 if alpha is None else float(alpha)
        if a <= 0:
            raise ValueError(f"step size must be positive, got {a}")
        return StepSizes(a, (a,) * instance.n, L, "reproduction")
    raise ValueError(f"unknown step mode {mode!r}")


# ---------------------------------------------------------------------------
# runs


class Recorder:
    """Turns solver states into :class:`TraceRecord` rows."""

    def __init__(self, instance, record_every=1, project_primal=True, snapshot_every=0, timing=False):
        self.instance = instance
        self.record_every = max(1, int(record_every))
        self.project_primal = project_primal
        self.snapshot_every = int(snapshot_every)
        self.timing = timing
        self.trace = Trace()
        self._t0 = time.perf_counter_ns()
        self._cons = instance.constraint_system() if project_primal else None
        self._warned = False

    def _gamma(self, y):
        try:
            return dual_objective(self.instance, y)
        except UnsupportedConfiguration:
            if not self._warned:
                log.warning("dual objective not computable for this instance; recording nan")
                self._warned = True
            return math.nan

    def __call__(self, t, node, y: DualState, force=False):
        if self.snapshot_every and (t % self.snapshot_every == 0 or force):
            self.trace.snapshots.append(Snapshot(t, y.y.copy(), y.x_star.copy()))
        if not force and t % self.record_every:
            return
        xbar = y.x_star.mean(axis=0)
        raw = self.instance.primal_value(xbar)
        if not self.project_primal:
            proj = math.nan
        elif self._cons is None:
            proj = raw
        else:
            proj = self.instance.primal_value(dykstra_halfspaces(*self._cons, xbar, tol=1e-12))
        wall = time.perf_counter_ns() - self._t0 if self.timing else 0
        self.trace.records.append(
            TraceRecord(t, node, self._gamma(y), raw, proj, consensus_residual(self.instance, y.x_star), wall)
        )


def _initial_state(instance, y0):
    if y0 is None:
        return DualState(instance)
    if isinstance(y0, DualState):
        return DualState(instance, y0.y.copy())
    return DualState(instance, y0)


def run_sync(instance, alpha, T, callbacks=(), y0=None, recorder=None, **record_opts) -> Trace:
    """Algorithm with synchronous rounds, ``T`` iterations from ``y0`` (zero duals by default).

    Each entry of ``callbacks`` is called as ``cb(t, -1, state)`` after round ``t``.
    """
    if T < 1:
        raise ValueError(f"need at least one iteration, got T={T}")
    rec = recorder or Recorder(instance, **record_opts)
    y = _initial_state(instance, y0)
    rec.trace.meta.update(algorithm="sync", alpha=alpha)
    rec(0, -1, y, force=True)
    for t in range(1, T + 1):
        y = sync_step(instance, y, alpha)
        rec(t, -1, y, force=(t == T))
        for cb in callbacks:
            cb(t, -1, y)
    rec.trace.meta["final_state"] = y
    return rec.trace


def run_fista(instance, alpha, T, callbacks=(), y0=None, extrapolate=True, recorder=None, **record_opts) -> Trace:
    """Nesterov-accelerated variant with the ``theta_{k+1} = (1 + sqrt(1 + 4 theta_k^2)) / 2`` schedule."""
    if T < 1:
        raise ValueError(f"need at least one iteration, got T={T}")
    rec = recorder or Recorder(instance, **record_opts)
    y = _initial_state(instance, y0)
    y_prev = y.y.copy()
    theta = 1.0
    rec.trace.meta.update(algorithm="fista", alpha=alpha)
    rec(0, -1, y, force=True)
    for t in range(1, T + 1):
        theta_next = (1.0 + math.sqrt(1.0 + 4.0 * theta * theta)) / 2.0
        beta = (theta - 1.0) / theta_next if extrapolate else 0.0
        if beta:
            w = DualState(instance, y.y + beta * (y.y - y_prev))
        else:
            w = y
        y_prev = y.y.copy()
        y = sync_step(instance, w, alpha)
        theta = theta_next
        rec(t, -1, y, force=(t == T))
        for cb in callbacks:
            cb(t, -1, y)
    rec.trace.meta["final_state"] = y
    return rec.trace
