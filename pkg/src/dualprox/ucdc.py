"""Uniform randomized block-coordinate proximal gradient (UCDC).

Minimizes ``Phi(y) + sum_i psi_i(y_i)`` by picking one block uniformly at
random and setting ``y_i <- prox_{psi_i / L_i}(y_i - grad_i Phi(y) / L_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dualcore import ProblemInstance, dual_objective, theorem2_lipschitz
from .trace import Trace, TraceRecord


@dataclass
class BlockProblem:
    """Composite problem split into consecutive coordinate blocks (ids from 1)."""

    block_dims: list
    grad_block: Callable  # (y, i) -> grad_i Phi(y)
    prox_block: Callable  # (i, v, step) -> prox_{step psi_i}(v)
    lipschitz: list
    objective: Optional[Callable] = None  # y -> Phi(y) + Psi(y)
    psi_block: Optional[Callable] = None  # (i, y_i) -> psi_i(y_i)
    offsets: list = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.block_dims) != len(self.lipschitz):
            raise ValueError("need one Lipschitz constant per block")
        if any(L <= 0 for L in self.lipschitz):
            raise ValueError("Lipschitz constants must be positive")
        self.offsets = np.concatenate([[0], np.cumsum(self.block_dims)]).astype(int).tolist()

    @property
    def n_blocks(self):
        return len(self.block_dims)

    @property
    def size(self):
        return self.offsets[-1]

    def block(self, i):
        return slice(self.offsets[i - 1], self.offsets[i])


def ucdc_step(p: BlockProblem, y, i: int) -> np.ndarray:
    """Return a copy of ``y`` with block ``i`` replaced by its prox-gradient update."""
    sl = p.block(i)
    L = p.lipschitz[i - 1]
    out = np.array(y, dtype=float)
    out[sl] = p.prox_block(i, out[sl] - p.grad_block(out, i) / L, 1.0 / L)
    return out


def block_model(p: BlockProblem, y, i: int, s) -> float:
    """``V_i(y, s) = grad_i Phi(y)^T s + L_i/2 ||s||^2 + psi_i(y_i + s)``."""
    if p.psi_block is None:
        raise ValueError("block model needs psi_block")
    s = np.asarray(s, dtype=float)
    yi = np.asarray(y, dtype=float)[p.block(i)]
    return float(p.grad_block(y, i) @ s + 0.5 * p.lipschitz[i - 1] * (s @ s) + p.psi_block(i, yi + s))


def run_ucdc(p: BlockProblem, T: int, seed=None, sequence=None, y0=None, callbacks=(), record_objective=True):
    """Run ``T`` UCDC iterations.

    Blocks are drawn uniformly with ``numpy.random.default_rng(seed)`` unless an
    explicit ``sequence`` of block ids is supplied. Callbacks receive
    ``(t, block, y)``. Returns ``(y_final, trace)``; the trace's
    ``dual_objective`` column holds the composite objective when
    ``p.objective`` is set (primal columns are ``nan``).
    """
    if T < 1:
        raise ValueError(f"need at least one iteration, got T={T}")
    y = np.zeros(p.size) if y0 is None else np.array(y0, dtype=float)
    if sequence is not None:
        blocks = [int(b) for b in sequence]
        if len(blocks) < T:
            raise ValueError(f"block sequence has {len(blocks)} entries, need {T}")
        blocks = blocks[:T]
    else:
        rng = np.random.default_rng(seed)
        blocks = (rng.integers(1, p.n_blocks + 1, size=T)).tolist()
    trace = Trace(meta={"algorithm": "ucdc", "seed": seed, "blocks": blocks})
    track = record_objective and p.objective is not None

    def _rec(t, b):
        obj = p.objective(y) if track else math.nan
        trace.records.append(TraceRecord(t, b, obj, math.nan, math.nan, math.nan))

    _rec(0, -1)
    for t, b in enumerate(blocks, start=1):
        y = ucdc_step(p, y, b)
        _rec(t, b)
        for cb in callbacks:
            cb(t, b, y)
    return y, trace


def dual_block_problem(instance: ProblemInstance, lipschitz=None) -> BlockProblem:
    """The minimization-form dual as a :class:`BlockProblem` with blocks ``y_i = [Lambda_i; mu_i]``.

    Block gradients are recomputed from scratch (no primal caches). By default
    ``L_i`` are the closed-form per-node constants of :func:`theorem2_lipschitz`.
    """
    lay = instance.layout
    A = lay.A
    n, d = instance.n, instance.dim
    fast = instance._fast
    if lipschitz is None:
        lipschitz = [theorem2_lipschitz(i, instance.sigmas, instance.graph) for i in instance.graph.nodes()]
    cols = [A[:, lay.block[i]] for i in instance.graph.nodes()]

    def grad_block(y, i):
        X = fast.argmin((A @ y).reshape(n, d), instance)
        # grad F* = -A^T x*
        return -(cols[i - 1].T @ X.ravel())

    def prox_block(i, v, step):
        out = np.array(v, dtype=float)
        out[-d:] = instance.g(i).prox_conjugate(step, out[-d:])
        return out

    def psi_block(i, yi):
        return instance.g(i).conjugate(np.asarray(yi)[-d:])

    return BlockProblem(
        block_dims=lay.block_dims(),
        grad_block=grad_block,
        prox_block=prox_block,
        lipschitz=list(lipschitz),
        objective=lambda y: dual_objective(instance, y),
        psi_block=psi_block,
    )
