"""Compare the closed-form step constants with the exact ones on random instances.

Prints, per instance, the global step 1/sum(1/sigma_i) against 1/L_F (L_F the
exact Lipschitz constant of grad F*) and the largest ratio between the exact
block constant of node i and the closed-form local L_i.
"""

import argparse

import numpy as np

from dualprox.dualcore import block_lipschitz_exact, dual_lipschitz, step_sizes, theorem1_step_size
from dualprox.harness.config import RunConfig
from dualprox.harness.instance import generate_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--n", type=int, default=15)
    ap.add_argument("--p", type=float, default=0.2)
    args = ap.parse_args()

    print(f"{'seed':>4} {'1/sum(1/s)':>11} {'1/L_F':>9} {'max exact/L_i':>14} {'worst node':>10}")
    for seed in range(args.instances):
        cfg = RunConfig(n=args.n, graph_p=args.p, seed=seed, node=1)
        inst = generate_instance(cfg, np.random.default_rng(seed))
        local = step_sizes(inst).local_L
        ratios = [block_lipschitz_exact(inst, i) / local[i - 1] for i in inst.graph.nodes()]
        k = int(np.argmax(ratios))
        print(f"{seed:4d} {theorem1_step_size(inst.sigmas):11.4f} {1 / dual_lipschitz(inst):9.4f} "
              f"{ratios[k]:14.4f} {k + 1:10d}")


if __name__ == "__main__":
    main()
