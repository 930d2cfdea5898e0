"""Unseen-class ACC/NMI for every selector over the 5..50 feature-count grid.

    python scripts/method_sweep.py --seeds 5 > method_sweep.csv

Averages over synthetic datasets drawn with consecutive seeds.
"""
import argparse
import sys

import numpy as np

from zerosel.cli import METHODS, compute_ranking
from zerosel.data import SyntheticParams, format_float, generate_synthetic_zero_shot
from zerosel.evaluation import DEFAULT_COUNTS, sweep_feature_counts


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--feature-noise-sd", type=float, default=0.5)
    args = ap.parse_args()

    params = SyntheticParams(feature_noise_sd=args.feature_noise_sd)
    acc = {m: np.zeros((args.seeds, len(DEFAULT_COUNTS))) for m in METHODS}
    nmi = {m: np.zeros_like(acc[m]) for m in METHODS}
    for seed in range(args.seeds):
        ds = generate_synthetic_zero_shot(params, seed)
        for method in METHODS:
            ranking, _, _ = compute_ranking(method, ds.seen_x, ds.seen_labels, ds.seen_attrs,
                                            "attributes", 1.0, 0.1, seed)
            reps = sweep_feature_counts(ds.unseen_x, ds.unseen_labels, ranking, repeats=args.repeats, seed=seed)
            acc[method][seed] = [r.acc_mean for r in reps]
            nmi[method][seed] = [r.nmi_mean for r in reps]

    out = sys.stdout
    out.write("method,k_features,acc_mean,nmi_mean\n")
    for method in METHODS:
        for j, k in enumerate(DEFAULT_COUNTS):
            out.write(f"{method},{k},{format_float(acc[method][:, j].mean())},"
                      f"{format_float(nmi[method][:, j].mean())}\n")


if __name__ == "__main__":
    main()
