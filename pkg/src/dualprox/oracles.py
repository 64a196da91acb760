"""Convex-analysis oracles: quadratic costs, indicator regularizers, proxes, conjugates.

Conventions
-----------
``prox(v, alpha)`` is ``argmin_x g(x) + ||x - v||^2 / (2 alpha)``.
Conjugates return ``math.inf`` outside their domain.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import optimize


class ProjectionError(RuntimeError):
    """Dykstra's method hit its iteration cap."""


class EmptySetError(ValueError):
    pass


class UnsupportedConfiguration(NotImplementedError):
    """The requested quantity is not computable for this oracle shape."""


def _vec(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# smooth part


class QuadraticOracle:
    """``f(x) = x^T Q x + r^T x`` with symmetric positive-definite ``Q``.

    Note the missing 1/2: the Hessian is ``2Q`` and the strong-convexity
    modulus is ``sigma = 2 * lambda_min(Q)``.

    Parameters
    ----------
    Q : array_like
        Either the full ``d x d`` matrix or a length-``d`` diagonal.
    r : array_like
        Linear term of length ``d``.
    """

    def __init__(self, Q, r):
        Q = np.asarray(Q, dtype=float)
        r = _vec(r)
        if Q.ndim <= 1:
            diag = np.atleast_1d(Q).copy()
            if diag.shape != r.shape:
                raise ValueError(f"diagonal {diag.shape} does not match r {r.shape}")
            if np.any(diag <= 0):
                raise ValueError("Q must be positive definite")
            self.diagonal = diag
            self.Q = np.diag(diag)
            self._Qinv = np.diag(1.0 / diag)
            lam_min = diag.min()
        else:
            if Q.shape != (r.size, r.size):
                raise ValueError(f"Q {Q.shape} does not match r {r.shape}")
            if not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(Q).max())):
                raise ValueError("Q must be symmetric")
            lam_min = np.linalg.eigvalsh(Q).min()
            if lam_min <= 0:
                raise ValueError("Q must be positive definite")
            self.diagonal = np.diag(Q).copy() if np.count_nonzero(Q - np.diag(np.diag(Q))) == 0 else None
            self.Q = Q.copy()
            self._Qinv = np.linalg.inv(Q)
        self.r = r
        self.sigma = 2.0 * float(lam_min)

    @property
    def dim(self):
        return self.r.size

    def value(self, x):
        x = _vec(x)
        return float(x @ self.Q @ x + self.r @ x)

    def gradient(self, x):
        return 2.0 * self.Q @ _vec(x) + self.r

    def argmin_coupled(self, v):
        if self.diagonal is not None:
            return -0.5 * (self.r + _vec(v)) / self.diagonal
        return -0.5 * self._Qinv @ (self.r + _vec(v))

    def conjugate(self, y):
        u = _vec(y) - self.r
        return float(0.25 * u @ self._Qinv @ u)

    def conjugate_gradient(self, y):
        return self.argmin_coupled(-_vec(y))

    def conjugate_hessian(self):
        """Hessian of the conjugate, ``Q^{-1} / 2``."""
        return 0.5 * self._Qinv

    def minimum(self):
        return -self.conjugate(np.zeros(self.dim))

    def __repr__(self):
        return f"QuadraticOracle(d={self.dim}, sigma={self.sigma:.4g})"


def quad_argmin_coupled(q: QuadraticOracle, v) -> np.ndarray:
    """Minimizer of ``x^T v + f(x)``; equals the conjugate gradient at ``-v``."""
    return q.argmin_coupled(v)


def quad_conjugate(q: QuadraticOracle, y) -> float:
    return q.conjugate(y)


# ---------------------------------------------------------------------------
# regularizers


class RegularizerOracle:
    """Closed convex regularizer ``g`` with prox and conjugate access."""

    dim: int

    def prox(self, v, alpha=1.0):
        raise NotImplementedError

    def conjugate(self, mu):
        raise NotImplementedError

    def prox_conjugate(self, alpha, v):
        # prox_{alpha g*}(v) = v - alpha prox_{g/alpha}(v / alpha), written as
        # alpha * (w - prox(w)) so that fixed points of prox give an exact zero.
        w = _vec(v) / alpha
        return alpha * self._displacement(w, 1.0 / alpha)

    def _displacement(self, w, beta):
        return w - self.prox(w, beta)

    def prox_conjugate_direct(self, beta, w):
        """``prox_{beta g*}(w)`` computed without the Moreau identity."""
        raise UnsupportedConfiguration(f"{type(self).__name__} has no direct conjugate prox")

    def contains(self, x, tol=1e-9):
        return True


class ZeroOracle(RegularizerOracle):
    """``g = 0``; its conjugate is the indicator of ``{0}``."""

    def __init__(self, dim):
        self.dim = int(dim)

    def prox(self, v, alpha=1.0):
        return _vec(v).copy()

    def conjugate(self, mu):
        return 0.0 if not np.any(_vec(mu)) else math.inf

    def prox_conjugate(self, alpha, v):
        return np.zeros(self.dim)

    def prox_conjugate_direct(self, beta, w):
        return np.zeros(self.dim)

    def __repr__(self):
        return f"ZeroOracle(d={self.dim})"


class BoxOracle(RegularizerOracle):
    """Indicator of ``{x : lo <= x <= hi}``; infinite bounds allowed."""

    def __init__(self, lo, hi):
        self.lo = _vec(lo)
        self.hi = _vec(hi)
        if self.lo.shape != self.hi.shape:
            raise ValueError("lo and hi must have the same shape")
        if np.any(self.lo > self.hi):
            raise EmptySetError("box has lo > hi in some coordinate")
        self.dim = self.lo.size

    def prox(self, v, alpha=1.0):
        return np.clip(_vec(v), self.lo, self.hi)

    def conjugate(self, mu):
        mu = _vec(mu)
        total = 0.0
        for m, lo, hi in zip(mu, self.lo, self.hi):
            if m > 0:
                total += m * hi
            elif m < 0:
                total += m * lo
        return float(total)

    def prox_conjugate_direct(self, beta, w):
        # coordinatewise: argmin_u beta*max(u*hi, u*lo) + (u - w)^2 / 2
        w = _vec(w)
        out = np.zeros_like(w)
        up = w > beta * self.hi
        down = w < beta * self.lo
        out[up] = w[up] - beta * self.hi[up]
        out[down] = w[down] - beta * self.lo[down]
        return out

    def contains(self, x, tol=1e-9):
        x = _vec(x)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def as_polytope(self):
        """Same set written as halfspaces (finite bounds only)."""
        rows, offs = [], []
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = 1.0
            if np.isfinite(self.hi[k]):
                rows.append(e)
                offs.append(self.hi[k])
            if np.isfinite(self.lo[k]):
                rows.append(-e)
                offs.append(-self.lo[k])
        return PolytopeOracle(np.array(rows), np.array(offs))

    def __repr__(self):
        return f"BoxOracle(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class PolytopeOracle(RegularizerOracle):
    """Indicator of ``X = {x : A x <= b}``.

    Parameters
    ----------
    A : array_like, shape (m, d)
        Halfspace normals; a 1-D array is read as a single row.
    b : array_like, shape (m,)
    tol : float
        Dykstra stopping tolerance used by :meth:`prox`.
    """

    def __init__(self, A, b, tol=1e-10, max_iter=100000):
        A = np.asarray(A, dtype=float)
        if A.ndim == 1:
            A = A[None, :]
        b = _vec(b)
        if A.shape[0] != b.size:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.size} entries")
        norms2 = np.einsum("ij,ij->i", A, A)
        if np.any(norms2 == 0):
            raise ValueError("A has a zero row")
        self.A = A
        self.b = b
        self.norms2 = norms2
        self.dim = A.shape[1]
        self.tol = tol
        self.max_iter = max_iter
        self._vertices = None
        try:
            x0 = project_polytope(self, np.zeros(self.dim), tol=tol, max_iter=min(max_iter, 20000))
        except ProjectionError:
            raise EmptySetError("polytope appears empty: projecting the origin did not converge") from None
        if not self.contains(x0, tol=1e-6 * (1 + np.abs(b).max())):
            raise EmptySetError("polytope is empty")

    @property
    def m(self):
        return self.A.shape[0]

    def contains(self, x, tol=1e-9):
        return bool(np.all(self.A @ _vec(x) <= self.b + tol))

    def prox(self, v, alpha=1.0):
        return project_polytope(self, v, tol=self.tol, max_iter=self.max_iter)

    def _displacement(self, w, beta):
        if self.m == 1:
            a = self.A[0]
            t = max(0.0, (a @ w - self.b[0]) / self.norms2[0])
            return t * a
        return w - self.prox(w)

    def conjugate(self, mu):
        return support_function(self, mu)

    def prox_conjugate_direct(self, beta, w):
        """Minimize ``beta * sigma_X(u) + ||u - w||^2 / 2`` directly.

        One halfspace: ``dom sigma_X`` is the ray ``{c a : c >= 0}`` and the
        problem is a 1-D quadratic in ``c``. Bounded 2-D polytopes: the
        minimizer is ``w - beta * z`` with ``z`` the nearest point of the
        vertex hull to ``w / beta``, found from vertices and edges.
        """
        w = _vec(w)
        if self.m == 1:
            a = self.A[0]
            c = max(0.0, (a @ w - beta * self.b[0]) / self.norms2[0])
            return c * a
        verts = self.vertices()
        if self.dim != 2 or verts is None or not self.is_bounded():
            raise UnsupportedConfiguration("direct conjugate prox needs a bounded polytope in d=2")
        return w - beta * _nearest_in_hull_2d(verts, w / beta)

    def vertices(self):
        """Vertices for d <= 2 (``None`` when the set has none)."""
        if self.dim > 2:
            raise UnsupportedConfiguration("vertex enumeration is limited to d <= 2")
        if self._vertices is None:
            found = []
            scale = 1.0 + np.abs(self.b).max()
            for rows in itertools.combinations(range(self.m), self.dim):
                sub = self.A[list(rows)]
                if abs(np.linalg.det(sub)) < 1e-12 * np.prod(np.sqrt(self.norms2[list(rows)])):
                    continue
                x = np.linalg.solve(sub, self.b[list(rows)])
                if self.contains(x, tol=1e-9 * scale):
                    if not any(np.allclose(x, f, rtol=0, atol=1e-10 * scale) for f in found):
                        found.append(x)
            self._vertices = np.array(found) if found else np.empty((0, self.dim))
        return self._vertices if len(self._vertices) else None

    def is_bounded(self):
        # bounded iff the recession cone {r : A r <= 0} is trivial,
        # i.e. the rows' conic hull is all of R^d
        for s in np.vstack([np.eye(self.dim), -np.eye(self.dim)]):
            if not _in_cone(self.A, s, 1e-12):
                return False
        return True

    def __repr__(self):
        return f"PolytopeOracle(m={self.m}, d={self.dim})"


def _in_cone(A, mu, tol):
    """Is ``mu`` a nonnegative combination of the rows of ``A``?"""
    _, resid = optimize.nnls(A.T, mu)
    return resid <= tol * (1.0 + np.linalg.norm(mu))


def _nearest_in_hull_2d(verts, p):
    if len(verts) == 1:
        return verts[0].copy()
    # order the vertices counter-clockwise around their centroid
    c = verts.mean(axis=0)
    ang = np.arctan2(verts[:, 1] - c[1], verts[:, 0] - c[0])
    ring = verts[np.argsort(ang)]
    k = len(ring)
    if k >= 3:
        inside = True
        for s in range(k):
            e = ring[(s + 1) % k] - ring[s]
            q = p - ring[s]
            if e[0] * q[1] - e[1] * q[0] < 0:
                inside = False
                break
        if inside:
            return p.copy()
    best, best_d = None, math.inf
    for s in range(k):
        u, v = ring[s], ring[(s + 1) % k]
        e = v - u
        t = np.clip((p - u) @ e / (e @ e), 0.0, 1.0)
        z = u + t * e
        dz = np.linalg.norm(p - z)
        if dz < best_d:
            best, best_d = z, dz
    return best


def _dykstra(A, b, x, tol, max_iter, norms2):
    """Dykstra sweeps from ``x``; returns ``(iterate, converged)``."""
    m = A.shape[0]
    incr = np.zeros((m, x.size))
    for _ in range(max_iter):
        x_prev = x
        for k in range(m):
            z = x + incr[k]
            t = (A[k] @ z - b[k]) / norms2[k]
            x = z - t * A[k] if t > 0 else z
            incr[k] = z - x
        if np.linalg.norm(x - x_prev) <= tol:
            return x, True
    return x, False


def dykstra_halfspaces(A, b, v, tol=1e-10, max_iter=100000, norms2=None):
    """Euclidean projection of ``v`` onto ``{x : A x <= b}`` by Dykstra's method.

    Stops once a full sweep moves the iterate by at most ``tol``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    x = _vec(v).copy()
    if np.all(A @ x <= b):
        return x
    if norms2 is None:
        norms2 = np.einsum("ij,ij->i", A, A)
    x, ok = _dykstra(A, b, x, tol, max_iter, norms2)
    if not ok:
        raise ProjectionError(f"Dykstra did not reach tol={tol:g} within {max_iter} sweeps")
    return x


def _kkt_point(A, b, v, S, scale):
    """Projection of ``v`` with rows ``S`` held at equality if it satisfies KKT, else ``None``."""
    AS = A[S]
    z, *_ = np.linalg.lstsq(AS @ AS.T, AS @ v - b[S], rcond=None)
    xp = v - AS.T @ z
    tol = 1e-12 * scale
    if np.all(z >= -tol) and np.all(A @ xp <= b + tol) and np.all(np.abs(AS @ xp - b[S]) <= tol):
        return xp
    return None


def _polish(A, b, v, x, scale, max_enum=12):
    """Exact projection certified by the KKT conditions, or ``None``.

    Dykstra's sweep-change test can stop well short of the projection at acute
    corners or nearly parallel faces. The rows near-active at its iterate are
    tried first; for small ``m`` every active set of size at most ``d`` is then
    enumerated. A certified point is the unique projection.
    """
    S = A @ x - b >= -1e-6 * scale
    if np.any(S):
        xp = _kkt_point(A, b, v, S, scale)
        if xp is not None:
            return xp
    m, d = A.shape
    if m > max_enum:
        return None
    for k in range(1, min(d, m) + 1):
        for rows in itertools.combinations(range(m), k):
            xp = _kkt_point(A, b, v, list(rows), scale)
            if xp is not None:
                return xp
    return None


def project_polytope(P: PolytopeOracle, v, tol=1e-10, max_iter=100000) -> np.ndarray:
    """Projection onto ``P``: closed form for one halfspace, else Dykstra plus a KKT-certified polish.

    Raises :class:`ProjectionError` when Dykstra hits ``max_iter`` and the
    polish cannot certify its last iterate.
    """
    v = _vec(v)
    if P.m == 1:
        a = P.A[0]
        t = max(0.0, (a @ v - P.b[0]) / P.norms2[0])
        return v - t * a
    if np.all(P.A @ v <= P.b):
        return v.copy()
    x, ok = _dykstra(P.A, P.b, v.copy(), tol, max_iter, P.norms2)
    xp = _polish(P.A, P.b, v, x, 1.0 + np.abs(P.b).max() + np.abs(v).max())
    if xp is not None:
        return xp
    if not ok:
        raise ProjectionError(f"Dykstra did not reach tol={tol:g} within {max_iter} sweeps")
    return x


def support_function(P: PolytopeOracle, mu, tol=1e-9) -> float:
    """``sup {mu^T x : A x <= b}``, possibly ``math.inf``."""
    mu = _vec(mu)
    if not np.any(mu):
        return 0.0
    if P.m == 1:
        a = P.A[0]
        c = (mu @ a) / P.norms2[0]
        if c >= -tol and np.linalg.norm(mu - c * a) <= tol * np.linalg.norm(mu):
            return float(c * P.b[0])
        return math.inf
    if P.dim > 2:
        raise UnsupportedConfiguration("support function of a multi-halfspace polytope needs d <= 2")
    # finite iff mu lies in the cone spanned by the normals
    if not _in_cone(P.A, mu, tol):
        return math.inf
    verts = P.vertices()
    if verts is not None:
        return float(np.max(verts @ mu))
    # no vertices (all normals parallel): LP duality, sup = min b^T z, A^T z = mu, z >= 0
    res = optimize.linprog(P.b, A_eq=P.A.T, b_eq=mu, bounds=(0, None), method="highs")
    if res.status != 0:
        return math.inf
    return float(res.fun)


def prox_conjugate(gor: RegularizerOracle, alpha: float, v) -> np.ndarray:
    """``prox_{alpha g*}(v)`` through the extended Moreau decomposition."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return gor.prox_conjugate(alpha, v)


def moreau_check(gor: RegularizerOracle, alpha: float, v) -> float:
    """Residual ``||v - prox_{alpha g}(v) - alpha prox_{g*/alpha}(v/alpha)||``.

    The conjugate prox is taken from the oracle's direct route, so the two
    terms are computed independently.
    """
    v = _vec(v)
    lhs = gor.prox(v, alpha)
    rhs = alpha * gor.prox_conjugate_direct(1.0 / alpha, v / alpha)
    return float(np.linalg.norm(v - lhs - rhs))
