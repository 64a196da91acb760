import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import optimize

from bruteforce import central_diff, grid_argmin
from dualprox.oracles import (
    BoxOracle,
    EmptySetError,
    PolytopeOracle,
    ProjectionError,
    QuadraticOracle,
    UnsupportedConfiguration,
    ZeroOracle,
    dykstra_halfspaces,
    moreau_check,
    project_polytope,
    prox_conjugate,
    quad_argmin_coupled,
    quad_conjugate,
    support_function,
)

vec2 = arrays(np.float64, 2, elements=st.floats(-20, 20))


# --- quadratic -------------------------------------------------------------


def test_quadratic_attributes():
    q = QuadraticOracle([1.5, 1.2], [0.0, 1.0])
    assert q.sigma == pytest.approx(2.4)
    full = QuadraticOracle([[2.0, 0.5], [0.5, 1.0]], [0.0, 0.0])
    assert full.sigma == pytest.approx(2 * np.linalg.eigvalsh([[2.0, 0.5], [0.5, 1.0]]).min())
    with pytest.raises(ValueError):
        QuadraticOracle([1.0, -1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        QuadraticOracle([[1.0, 2.0], [0.0, 1.0]], [0.0, 0.0])


def test_argmin_closed_examples():
    assert quad_argmin_coupled(QuadraticOracle([1.0], [0.0]), [-2.0]) == pytest.approx([1.0])
    assert quad_argmin_coupled(QuadraticOracle([1.0], [-4.0]), [0.0]) == pytest.approx([2.0])


def test_argmin_matches_grid():
    rng = np.random.default_rng(0)
    q = QuadraticOracle([1.5, 1.2], rng.uniform(-5, 5, 2))
    v = rng.uniform(-5, 5, 2)
    x_grid, _ = grid_argmin(lambda P: P @ v + np.einsum("ki,ij,kj->k", P, q.Q, P) + P @ q.r, [-20, -20], [20, 20])
    assert np.abs(quad_argmin_coupled(q, v) - x_grid).max() <= 1e-6


def test_conjugate_examples():
    q = QuadraticOracle([1.0], [0.0])
    assert quad_conjugate(q, q.r) == 0.0
    # sup_x 2x - x^2 by grid
    _, neg = grid_argmin(lambda P: -(2 * P[:, 0] - P[:, 0] ** 2), [-20], [20])
    assert quad_conjugate(q, [2.0]) == pytest.approx(-neg, abs=1e-9)
    assert quad_conjugate(q, [2.0]) == pytest.approx(1.0)


def test_conjugate_matches_grid_sup():
    rng = np.random.default_rng(1)
    for _ in range(5):
        q = QuadraticOracle(rng.uniform(1, 2, 2), rng.uniform(-5, 5, 2))
        y = rng.uniform(-5, 5, 2)
        _, neg = grid_argmin(lambda P: -(P @ y - np.einsum("ki,ij,kj->k", P, q.Q, P) - P @ q.r), [-20, -20], [20, 20])
        assert abs(quad_conjugate(q, y) + neg) <= 1e-5


@given(arrays(np.float64, 2, elements=st.floats(-10, 10)), st.integers(0, 1000))
def test_conjugate_gradient_is_coupled_argmin(y, seed):
    rng = np.random.default_rng(seed)
    q = QuadraticOracle(rng.uniform(1, 2, 2), rng.uniform(-5, 5, 2))
    fd = central_diff(lambda z: quad_conjugate(q, z), y, h=1e-6 * (1 + np.linalg.norm(y)))
    exact = quad_argmin_coupled(q, -y)
    assert np.linalg.norm(fd - exact) <= 1e-5 * max(1.0, np.linalg.norm(exact))


@given(vec2, vec2, st.integers(0, 1000))
def test_conjugate_gradient_lipschitz(y1, y2, seed):
    rng = np.random.default_rng(seed)
    q = QuadraticOracle(rng.uniform(1, 2, 2), rng.uniform(-5, 5, 2))
    lhs = np.linalg.norm(q.conjugate_gradient(y1) - q.conjugate_gradient(y2))
    assert lhs <= np.linalg.norm(y1 - y2) / q.sigma + 1e-12


def test_full_matrix_conjugate_matches_diagonal_path():
    q1 = QuadraticOracle([1.3, 1.7], [0.2, -0.4])
    q2 = QuadraticOracle(np.diag([1.3, 1.7]), [0.2, -0.4])
    y = np.array([0.7, -2.0])
    assert q1.conjugate(y) == pytest.approx(q2.conjugate(y), rel=1e-14)
    assert q1.argmin_coupled(y) == pytest.approx(q2.argmin_coupled(y), rel=1e-14)
    assert q1.minimum() == pytest.approx(q1.value(q1.argmin_coupled(np.zeros(2))))


# --- projection ------------------------------------------------------------


def test_projection_examples():
    P = PolytopeOracle([[1.0, 0.0]], [0.0])
    assert np.array_equal(project_polytope(P, [-1.0, 3.0]), [-1.0, 3.0])
    assert project_polytope(P, [2.0, 3.0]) == pytest.approx([0.0, 3.0])


def test_two_face_projection_matches_grid():
    P = PolytopeOracle([[1.0, 0.0], [0.0, 1.0]], [1.0, 2.0])
    v = np.array([3.0, 4.5])
    feas = lambda X: np.all(X @ P.A.T <= P.b, axis=1)
    x_grid, _ = grid_argmin(lambda X: np.where(feas(X), np.linalg.norm(X - v, axis=1), np.inf), [-5, -5], [5, 5])
    assert np.abs(project_polytope(P, v) - x_grid).max() <= 1e-6


def test_oblique_corner_projection_matches_grid():
    P = PolytopeOracle([[1.0, 0.3], [0.2, 1.0]], [1.0, 0.5])
    v = np.array([4.0, 3.0])
    feas = lambda X: np.all(X @ P.A.T <= P.b, axis=1)
    x_grid, _ = grid_argmin(lambda X: np.where(feas(X), np.linalg.norm(X - v, axis=1), np.inf), [-5, -5], [5, 5])
    assert np.abs(project_polytope(P, v) - x_grid).max() <= 1e-6


def _random_polytope(rng, d=2, m=3):
    # shift the halfspaces so a random point is strictly inside
    A = rng.normal(size=(m, d))
    c = rng.normal(size=d)
    return PolytopeOracle(A, A @ c + rng.uniform(0.1, 2.0, m)), c


def test_projection_nearly_parallel_faces_matches_lp():
    # Dykstra stalls ~3e-3 short here; the certified polish must land exactly
    rng = np.random.default_rng(2365)
    P, _ = _random_polytope(rng, 2, 4)
    v = rng.normal(scale=5.0, size=2)
    p = project_polytope(P, v)
    assert P.contains(p, tol=1e-12)
    x_grid, _ = grid_argmin(
        lambda X: np.where(np.all(X @ P.A.T <= P.b, axis=1), np.linalg.norm(X - v, axis=1), np.inf), [-5, -5], [5, 5]
    )
    assert np.abs(p - x_grid).max() <= 1e-6


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(2, 3))
def test_projection_idempotent_and_optimal(seed, m, d):
    rng = np.random.default_rng(seed)
    P, c = _random_polytope(rng, d, m)
    v = rng.normal(scale=5.0, size=d)
    p = project_polytope(P, v)
    assert P.contains(p, tol=1e-9)
    assert np.abs(project_polytope(P, p) - p).max() <= 1e-12
    # random feasible points are never closer
    for _ in range(100):
        x = project_polytope(P, c + rng.normal(scale=3.0, size=d))
        assert np.linalg.norm(v - p) <= np.linalg.norm(v - x) + 1e-9


def test_dykstra_iteration_cap():
    A = np.array([[1.0, 0.0], [-1.0, 1e-3]])
    with pytest.raises(ProjectionError):
        dykstra_halfspaces(A, np.array([0.0, 0.0]), np.array([5.0, 100.0]), tol=1e-15, max_iter=2)


def test_polytope_validation():
    with pytest.raises(ValueError, match="zero row"):
        PolytopeOracle([[0.0, 0.0]], [1.0])
    with pytest.raises(EmptySetError):
        PolytopeOracle([[1.0], [-1.0]], [-1.0, -1.0])  # x <= -1 and x >= 1
    with pytest.raises(ValueError):
        PolytopeOracle([[1.0, 0.0]], [1.0, 2.0])
    with pytest.raises(EmptySetError):
        BoxOracle([1.0], [0.0])


# --- support function ------------------------------------------------------


def test_support_function_examples():
    P = PolytopeOracle([[1.0, 0.0]], [3.0])
    assert support_function(P, [0.0, 0.0]) == 0.0
    assert support_function(P, [2.0, 0.0]) == pytest.approx(6.0)
    assert support_function(P, [0.0, 1.0]) == math.inf
    assert support_function(P, [-1.0, 0.0]) == math.inf


def test_support_function_single_halfspace_grid():
    # sup 2 x1 over x1 <= 3 on a box large enough to contain the maximizer
    _, neg = grid_argmin(lambda X: np.where(X[:, 0] <= 3, -2 * X[:, 0], np.inf), [-10, -10], [10, 10])
    assert -neg == pytest.approx(6.0, abs=1e-6)


def test_support_function_triangle_matches_lp():
    rng = np.random.default_rng(3)
    P = PolytopeOracle([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]], [1.0, 2.0, 0.5])
    assert P.is_bounded() and len(P.vertices()) == 3
    for _ in range(20):
        mu = rng.normal(size=2)
        lp = optimize.linprog(-mu, A_ub=P.A, b_ub=P.b, bounds=(None, None), method="highs")
        assert support_function(P, mu) == pytest.approx(-lp.fun, abs=1e-9)


def test_support_function_unbounded_polytope():
    # x1 <= 1, x2 <= 1: finite only for mu >= 0
    P = PolytopeOracle([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
    assert not P.is_bounded()
    assert support_function(P, [1.0, 2.0]) == pytest.approx(3.0)
    assert support_function(P, [1.0, -0.5]) == math.inf
    # parallel normals, no vertices: a slab-free halfplane written twice
    Q = PolytopeOracle([[1.0, 1.0], [2.0, 2.0]], [1.0, 4.0])
    assert Q.vertices() is None
    assert support_function(Q, [3.0, 3.0]) == pytest.approx(3.0)


def test_support_function_high_dim_unsupported():
    P = PolytopeOracle(np.eye(3), np.ones(3))
    with pytest.raises(UnsupportedConfiguration):
        support_function(P, np.ones(3))
    # one halfspace stays supported in any dimension
    H = PolytopeOracle(np.ones((1, 4)), [2.0])
    assert support_function(H, 0.5 * np.ones(4)) == pytest.approx(1.0)


def test_box_conjugate_matches_polytope_form():
    B = BoxOracle([-1.0, 0.0], [2.0, 3.0])
    P = B.as_polytope()
    for mu in ([1.0, 1.0], [-2.0, 0.5], [0.0, -1.0]):
        assert B.conjugate(mu) == pytest.approx(support_function(P, mu))


# --- conjugate prox and Moreau --------------------------------------------


def test_prox_conjugate_examples():
    assert np.array_equal(prox_conjugate(ZeroOracle(2), 1.0, [3.0, -1.0]), [0.0, 0.0])
    H = PolytopeOracle([[1.0]], [0.0])  # x <= 0
    assert prox_conjugate(H, 1.0, [-3.0]) == pytest.approx([0.0])
    assert prox_conjugate(H, 1.0, [2.0]) == pytest.approx([2.0])
    with pytest.raises(ValueError):
        prox_conjugate(H, 0.0, [1.0])


def test_prox_conjugate_halfspace_matches_ray_grid():
    rng = np.random.default_rng(4)
    for _ in range(5):
        a, b = rng.uniform(0, 10, 2), rng.uniform(-5, 5)
        H = PolytopeOracle(a[None, :], [b])
        v, alpha = rng.normal(scale=5, size=2), 0.7
        # dom g* is the ray {c a : c >= 0}; grid over c of g*(c a) + ||c a - v||^2 / (2 alpha)
        obj = lambda C: np.array([support_function(H, c * a) for c in C[:, 0]]) + np.sum(
            (C[:, :1] * a - v) ** 2, axis=1) / (2 * alpha)
        c_grid, _ = grid_argmin(obj, [0.0], [5.0], points=401)
        assert np.abs(prox_conjugate(H, alpha, v) - c_grid[0] * a).max() <= 1e-4


def test_prox_conjugate_box_matches_grid():
    B = BoxOracle([-1.0, 0.5], [2.0, 3.0])
    v, alpha = np.array([4.0, -3.0]), 0.7
    obj = lambda U: np.where(U > 0, U * B.hi, U * B.lo).sum(axis=1) + np.sum((U - v) ** 2, axis=1) / (2 * alpha)
    u_grid, _ = grid_argmin(obj, [-10, -10], [10, 10])
    assert np.abs(prox_conjugate(B, alpha, v) - u_grid).max() <= 1e-4


@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
def test_prox_conjugate_lands_in_domain(seed, alpha):
    rng = np.random.default_rng(seed)
    P, _ = _random_polytope(rng, 2, int(rng.integers(1, 4)))
    mu = prox_conjugate(P, alpha, rng.normal(scale=5.0, size=2))
    assert math.isfinite(support_function(P, mu))


def test_moreau_zero_oracle_exact():
    rng = np.random.default_rng(5)
    for _ in range(20):
        assert moreau_check(ZeroOracle(3), float(rng.uniform(0.1, 3)), rng.normal(size=3)) == 0.0


@pytest.mark.parametrize("alpha", [1.0, 0.5, 2.0])
def test_moreau_halfspace_sweep(alpha):
    rng = np.random.default_rng(int(alpha * 10))
    H = PolytopeOracle(rng.uniform(0, 10, (1, 2)), rng.uniform(-5, 5, 1))
    for _ in range(100):
        assert moreau_check(H, alpha, rng.normal(scale=5, size=2)) <= 1e-9


def test_moreau_direct_route_needs_bounded_2d():
    P = PolytopeOracle([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
    with pytest.raises(UnsupportedConfiguration):
        P.prox_conjugate_direct(1.0, np.ones(2))
