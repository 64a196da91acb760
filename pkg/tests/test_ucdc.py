import numpy as np
import pytest

from bruteforce import grid_argmin
from conftest import make_instance
from dualprox.dualcore import ProblemInstance, block_lipschitz_exact, dual_objective, run_sync, step_sizes
from dualprox.graph import Graph
from dualprox.oracles import BoxOracle, QuadraticOracle
from dualprox.ucdc import BlockProblem, block_model, dual_block_problem, run_ucdc, ucdc_step


def _quadratic_problem(H, c, sizes, psi=None):
    """``Phi(y) = y^T H y / 2 - c^T y`` split into ``sizes`` blocks; exact block constants."""
    offs = np.concatenate([[0], np.cumsum(sizes)])
    L = [float(np.linalg.eigvalsh(H[a:b, a:b]).max()) for a, b in zip(offs, offs[1:])]
    return BlockProblem(
        block_dims=list(sizes),
        grad_block=lambda y, i: (H @ y - c)[offs[i - 1]:offs[i]],
        prox_block=psi or (lambda i, v, step: v),
        lipschitz=L,
        objective=lambda y: 0.5 * y @ H @ y - c @ y,
        psi_block=lambda i, yi: 0.0,
    )


def test_zero_psi_is_gradient_step():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(5, 5))
    H = M @ M.T + np.eye(5)
    c = rng.normal(size=5)
    p = _quadratic_problem(H, c, [2, 3])
    y = rng.normal(size=5)
    out = ucdc_step(p, y, 2)
    assert np.array_equal(out[:2], y[:2])
    assert out[2:] == pytest.approx(y[2:] - (H @ y - c)[2:] / p.lipschitz[1])


def test_one_dimensional_exact_step():
    p = BlockProblem([1], lambda y, i: 2 * y, lambda i, v, s: v, [2.0])
    assert ucdc_step(p, np.array([3.0]), 1) == pytest.approx([0.0])


def test_closed_form_matches_grid_of_block_model():
    # box regularizers keep psi_i = g_i* finite on the whole grid
    f = [QuadraticOracle([1.0], [0.0]), QuadraticOracle([1.3], [-4.0])]
    g = [BoxOracle([-1.0], [0.5]), BoxOracle([0.0], [2.0])]
    inst = ProblemInstance(Graph.from_edges(2, [(1, 2)]), f, g, 1)
    p = dual_block_problem(inst)
    rng = np.random.default_rng(1)
    for _ in range(4):
        y = rng.normal(scale=2.0, size=4)
        for i in (1, 2):
            s_closed = ucdc_step(p, y, i)[p.block(i)] - y[p.block(i)]
            obj = lambda S: np.array([block_model(p, y, i, s) for s in S])
            lo = np.full(2, -10.0)
            s_grid, _ = grid_argmin(obj, lo, lo + 20, points=1601, levels=10)
            assert np.abs(s_grid - s_closed).max() <= 1e-6
            assert block_model(p, y, i, s_closed) <= block_model(p, y, i, np.zeros(2)) + 1e-12


def test_replay_deterministic():
    inst = make_instance(n=5, d=2, p=0.5, seed=2)
    p = dual_block_problem(inst)
    seq = np.random.default_rng(0).integers(1, 6, 300)
    y1, t1 = run_ucdc(p, 300, sequence=seq)
    y2, t2 = run_ucdc(p, 300, sequence=seq)
    assert np.array_equal(y1, y2) and t1.records == t2.records
    y3, _ = run_ucdc(p, 300, seed=4)
    y4, _ = run_ucdc(p, 300, seed=4)
    assert np.array_equal(y3, y4)


def test_two_node_dual_in_probability(two_node_constrained):
    inst = two_node_constrained
    a = step_sizes(inst).global_alpha
    g_star = dual_objective(inst, run_sync(inst, a, 20_000, record_every=10**9).meta["final_state"])
    p = dual_block_problem(inst)
    hits = 0
    for seed in range(50):
        y, _ = run_ucdc(p, 2000, seed=seed, record_objective=False)
        hits += dual_objective(inst, y) - g_star <= 1e-4
    assert hits / 50 >= 0.95


def test_quadratic_converges_to_linear_solve():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(6, 6))
    H = M @ M.T + 2 * np.eye(6)
    c = rng.normal(size=6)
    p = _quadratic_problem(H, c, [2, 2, 2])
    y, tr = run_ucdc(p, 20_000, seed=0)
    assert np.abs(y - np.linalg.solve(H, c)).max() <= 1e-8
    assert np.all(np.diff(tr.dual_objective) <= 1e-10)


def test_single_block_mutation():
    inst = make_instance(n=6, d=2, p=0.4, seed=3)
    p = dual_block_problem(inst)
    rng = np.random.default_rng(5)
    for i in inst.graph.nodes():
        y = rng.normal(size=p.size)
        changed = np.flatnonzero(ucdc_step(p, y, i) != y)
        sl = p.block(i)
        assert np.all((changed >= sl.start) & (changed < sl.stop))


@pytest.mark.parametrize("seed", range(3))
def test_composite_objective_monotone_with_exact_constants(seed):
    inst = make_instance(n=6, d=2, p=0.4, seed=seed)
    L = [block_lipschitz_exact(inst, i) for i in inst.graph.nodes()]
    p = dual_block_problem(inst, lipschitz=L)
    _, tr = run_ucdc(p, 600, seed=seed)
    assert np.all(np.diff(tr.dual_objective) <= 1e-10)


def test_callbacks_and_validation():
    p = BlockProblem([1, 1], lambda y, i: y[i - 1:i], lambda i, v, s: v, [1.0, 1.0])
    seen = []
    run_ucdc(p, 3, sequence=[2, 1, 2], y0=[1.0, 1.0], callbacks=[lambda t, b, y: seen.append((t, b, y.copy()))])
    assert [(t, b) for t, b, _ in seen] == [(1, 2), (2, 1), (3, 2)]
    assert np.array_equal(seen[-1][2], [0.0, 0.0])
    with pytest.raises(ValueError):
        BlockProblem([1, 1], None, None, [1.0])
    with pytest.raises(ValueError):
        BlockProblem([1], None, None, [0.0])
    with pytest.raises(ValueError):
        run_ucdc(p, 0)
    with pytest.raises(ValueError):
        block_model(p, np.zeros(2), 1, np.zeros(1))
