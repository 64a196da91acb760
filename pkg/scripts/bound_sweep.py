"""Worst slack of the O(1/t) and O(1/t^2) bounds over random instances.

For each instance a long plain run supplies y* and Gamma*; the script reports
max_t (gap_t - bound_t) for plain and accelerated runs (negative = bound holds).
"""

import argparse

import numpy as np

from dualprox.dualcore import dual_objective, run_fista, run_sync, step_sizes
from dualprox.harness.bounds import accelerated_bound_check, theorem1_bound_check
from dualprox.harness.config import RunConfig
from dualprox.harness.instance import generate_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--T", type=int, default=2000)
    ap.add_argument("--ref-iters", type=int, default=100_000)
    ap.add_argument("--m", type=int, default=1, help="halfspaces per node")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'seed':>4} {'n':>3} {'d':>2} {'alpha':>9} {'sync slack':>12} {'fista slack':>12}")
    for seed in range(args.instances):
        n, d = int(rng.choice([2, 5, 15])), int(rng.integers(1, 3))
        cfg = RunConfig(n=n, d=d, graph_p=0.3 if n > 2 else 0.5, seed=seed, m_halfspaces=args.m, node=1)
        inst = generate_instance(cfg, np.random.default_rng(seed))
        a = step_sizes(inst).global_alpha
        ys = run_sync(inst, a, args.ref_iters, record_every=10**9, project_primal=False).meta["final_state"]
        gs = dual_objective(inst, ys)
        y0 = np.zeros_like(ys.y)
        r1 = theorem1_bound_check(run_sync(inst, a, args.T, project_primal=False), inst.sigmas, y0, ys.y, gs)
        r2 = accelerated_bound_check(run_fista(inst, a, args.T, project_primal=False), inst.sigmas, y0, ys.y, gs)
        print(f"{seed:4d} {n:3d} {d:2d} {a:9.4f} {r1.max_violation:12.3e} {r2.max_violation:12.3e}")


if __name__ == "__main__":
    main()
