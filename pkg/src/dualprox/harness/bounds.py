"""Checks of objective traces against the O(1/t) and O(1/t^2) rate bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..trace import Trace


@dataclass
class BoundReport:
    ok: bool
    max_violation: float  # max_t (gap_t - bound_t); <= slack when ok
    worst_iteration: int
    bound_at_1: float

    def __bool__(self):
        return self.ok


def _gaps(trace, gamma_star):
    if isinstance(trace, Trace):
        t = np.array([r.iteration for r in trace.records])
        g = trace.dual_objective
        keep = t >= 1
        return t[keep], g[keep] - gamma_star
    g = np.asarray(trace, dtype=float)
    return np.arange(1, g.size + 1), g - gamma_star


def _check(t, gap, bound, slack):
    excess = gap - bound
    k = int(np.argmax(excess))
    return BoundReport(bool(np.all(excess <= slack)), float(excess[k]), int(t[k]), float(bound[0]) if t[0] == 1 else float("nan"))


def theorem1_bound_check(trace, sigmas, y0, y_star, gamma_star, slack=1e-8) -> BoundReport:
    """``Gamma(y(t)) - Gamma* <= (sum 1/sigma_i) ||y0 - y*||^2 / (2t)`` for all recorded ``t >= 1``.

    ``trace`` is a :class:`Trace` or an array of ``Gamma(y(t))`` for ``t = 1, 2, ...``.
    """
    C = float(np.sum(1.0 / np.asarray(sigmas, dtype=float)))
    R2 = float(np.sum((np.asarray(y0) - np.asarray(y_star)) ** 2))
    t, gap = _gaps(trace, gamma_star)
    return _check(t, gap, C * R2 / (2.0 * t), slack)


def accelerated_bound_check(trace, sigmas, y0, y_star, gamma_star, slack=1e-8) -> BoundReport:
    """``Gamma(y(t)) - Gamma* <= 2 (sum 1/sigma_i) ||y0 - y*||^2 / (t + 1)^2``."""
    C = float(np.sum(1.0 / np.asarray(sigmas, dtype=float)))
    R2 = float(np.sum((np.asarray(y0) - np.asarray(y_star)) ** 2))
    t, gap = _gaps(trace, gamma_star)
    return _check(t, gap, 2.0 * C * R2 / (t + 1.0) ** 2, slack)
