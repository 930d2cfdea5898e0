"""How many outer iterations SemFS needs to reach a relative-decrease tolerance.

    python scripts/convergence_profile.py --seeds 10 --max-iters 2000

Random Gaussian instances (n=60, d=30, m=8, c=5).  Prints, per seed, the
iteration at which the tolerance was met (or -1) and the final |W|, |s| to
show the score/weight rescaling drift that keeps the objective creeping down.
"""
import argparse

import numpy as np

from zerosel.data import make_rng
from zerosel.semfs import SemfsConfig, fit


def instance(seed, n=60, d=30, m=8, c=5):
    rng = make_rng(seed, 99)
    x = rng.standard_normal((n, d))
    labels = np.arange(n) % c
    rng.shuffle(labels)
    return x, labels, rng.standard_normal((c, m))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--max-iters", type=int, default=2000)
    ap.add_argument("--rel-tol", type=float, default=1e-6)
    args = ap.parse_args()

    print("seed,iterations,converged,final_objective,w_norm,s_norm")
    for seed in range(args.seeds):
        res = fit(*instance(seed), SemfsConfig(max_iters=args.max_iters, rel_tol=args.rel_tol))
        print(f"{seed},{res.iterations_run if res.converged else -1},{res.converged},"
              f"{res.objective_trace[-1]:.10g},{np.linalg.norm(res.weights):.4g},"
              f"{np.linalg.norm(res.scores):.4g}", flush=True)


if __name__ == "__main__":
    main()
