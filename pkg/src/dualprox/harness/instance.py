"""Random quadratic/polytope instances for the 15-node gossip experiment."""

from __future__ import annotations

import numpy as np
from scipy import optimize

from ..dualcore import ProblemInstance
from ..graph import Graph, erdos_renyi_connected
from ..oracles import PolytopeOracle, QuadraticOracle, ZeroOracle


class InstanceError(RuntimeError):
    pass


def strictly_feasible_point(A, b, slack_cap=1.0):
    """Chebyshev-style LP: maximize ``s`` s.t. ``a_k^T x + s ||a_k|| <= b_k``.

    Returns ``(x, s)``; the intersection has nonempty interior iff ``s > 0``.
    """
    A = np.asarray(A, dtype=float)
    m, d = A.shape
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = optimize.linprog(
        c,
        A_ub=np.hstack([A, norms[:, None]]),
        b_ub=b,
        bounds=[(None, None)] * d + [(None, slack_cap)],
        method="highs",
    )
    if res.status != 0:
        return None, -np.inf
    return res.x[:d], float(res.x[-1])


def generate_instance(config, rng: np.random.Generator, max_retries: int = 100) -> ProblemInstance:
    """Sample an instance.

    ``Q_i`` diagonal with entries in U[1, 2], ``r_i`` in U[-5, 5]^d, and
    ``m_halfspaces`` constraints per node with normals in U[0, 10]^d and
    offsets in U[-5, 5]. Constraint sets are redrawn until their intersection
    has a strictly feasible point.
    """
    n, d, m = config.n, config.d, config.m_halfspaces
    if n == 1:
        graph = Graph.from_edges(1, [])
    else:
        graph = erdos_renyi_connected(n, config.graph_p, int(rng.integers(2**63 - 1)))
    smooth = [QuadraticOracle(rng.uniform(1.0, 2.0, d), rng.uniform(-5.0, 5.0, d)) for _ in range(n)]
    if m == 0:
        regs = [ZeroOracle(d) for _ in range(n)]
        return ProblemInstance(graph, smooth, regs, d, meta={"constraint_redraws": 0})
    for attempt in range(max_retries):
        A = rng.uniform(0.0, 10.0, (n, m, d))
        b = rng.uniform(-5.0, 5.0, (n, m))
        _, s = strictly_feasible_point(A.reshape(n * m, d), b.ravel())
        if s > 1e-9:
            regs = [PolytopeOracle(A[k], b[k]) for k in range(n)]
            return ProblemInstance(graph, smooth, regs, d, meta={"constraint_redraws": attempt})
    raise InstanceError(f"no constraint draw with a strictly feasible intersection in {max_retries} tries")
