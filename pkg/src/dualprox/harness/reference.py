"""Centralized ground truth: minimize sum_i f_i over the intersection of the X_i."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..dualcore import ProblemInstance
from ..oracles import QuadraticOracle, UnsupportedConfiguration, dykstra_halfspaces


class ReferenceError(RuntimeError):
    pass


@dataclass
class Reference:
    x: np.ndarray
    value: float
    active_nodes: list = field(default_factory=list)
    iterations: int = 0
    grad_map_norm: float = math.nan
    grid_value: float = math.nan

    def __iter__(self):
        return iter((self.x, self.value))


def _active_nodes(instance, x, tol):
    out = []
    for i in instance.graph.nodes():
        g = instance.g(i)
        A = getattr(g, "A", None)
        if A is None:
            continue
        if np.any(np.abs(A @ x - g.b) <= tol * (1.0 + np.abs(g.b))):
            out.append(i)
    return out


def grid_refine(objective, feasible, center, radius, points=101, levels=20, shrink=3.0):
    """Zooming grid search for d <= 2.

    Returns ``(x_best, value_best)`` over feasible grid points, or
    ``(None, inf)`` if no grid point is feasible.
    """
    center = np.asarray(center, dtype=float)
    d = center.size
    if d > 2:
        raise UnsupportedConfiguration("grid search is limited to d <= 2")
    best_x, best_v = None, math.inf
    for _ in range(levels):
        axes = [np.linspace(c - radius, c + radius, points) for c in center]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        ok = feasible(grid)
        if np.any(ok):
            vals = objective(grid[ok])
            k = int(np.argmin(vals))
            if vals[k] < best_v:
                best_x, best_v = grid[ok][k], float(vals[k])
            center = best_x
        radius /= shrink
    return best_x, best_v


def centralized_reference(instance: ProblemInstance, tol=1e-10, max_iter=200000, grid_check=True) -> Reference:
    """Solve the centralized problem by accelerated projected gradient.

    The projection onto the intersection of all halfspaces uses Dykstra's
    method. Iteration stops once the gradient-mapping norm is at most ``tol``.
    For ``d <= 2`` the answer is cross-checked by a zooming grid search.
    """
    if not all(isinstance(f, QuadraticOracle) for f in instance.smooth):
        raise UnsupportedConfiguration("the reference solver needs quadratic costs")
    Qs = sum(f.Q for f in instance.smooth)
    rs = sum(f.r for f in instance.smooth)
    ev = np.linalg.eigvalsh(2.0 * Qs)
    L, mu = float(ev.max()), float(ev.min())
    cons = instance.constraint_system()
    inner = max(tol * 1e-3, 1e-15)

    def proj(x):
        return x if cons is None else dykstra_halfspaces(cons[0], cons[1], x, tol=inner)

    def grad(x):
        return 2.0 * Qs @ x + rs

    q = math.sqrt(mu / L)
    beta = (1.0 - q) / (1.0 + q)
    x = proj(np.zeros(instance.dim))
    z = x.copy()
    gm = math.inf
    for it in range(1, max_iter + 1):
        x_new = proj(z - grad(z) / L)
        z = x_new + beta * (x_new - x)
        x = x_new
        gm = L * np.linalg.norm(x - proj(x - grad(x) / L))
        if gm <= tol:
            break
    else:
        raise ReferenceError(f"gradient mapping {gm:.3e} above tol={tol:g} after {max_iter} iterations")
    value = instance.primal_value(x)
    ref = Reference(x, value, _active_nodes(instance, x, 1e-7), it, gm)

    if grid_check and instance.dim <= 2:

        def objective(P):
            return np.einsum("ki,ij,kj->k", P, Qs, P) + P @ rs

        def feasible(P):
            if cons is None:
                return np.ones(len(P), dtype=bool)
            return np.all(P @ cons[0].T <= cons[1], axis=1)

        _, gv = grid_refine(objective, feasible, x, radius=2.0 * (1.0 + np.abs(x).max()))
        ref.grid_value = gv
        if gv < value - 1e-8 * (1.0 + abs(value)):
            raise ReferenceError(f"grid search found {gv!r} below the solver value {value!r}")
    return ref
