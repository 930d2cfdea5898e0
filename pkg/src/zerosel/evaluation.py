"""Clustering-based evaluation of a feature subset on unseen classes.

The protocol: keep only the selected columns of the unseen-class data, run
K-means with ``k`` equal to the number of unseen classes, and score the
partition against the true classes with clustering accuracy (best one-to-one
cluster/class matching) and normalised mutual information.  Each setting is
repeated with consecutive seeds and averaged.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .data import DataError, make_rng

__all__ = [
    "Clustering",
    "EvalReport",
    "kmeans",
    "clustering_accuracy",
    "nmi",
    "evaluate_selection",
    "sweep_feature_counts",
    "DEFAULT_COUNTS",
    "threads_from_env",
]

DEFAULT_COUNTS = tuple(range(5, 55, 5))


@dataclass(frozen=True)
class Clustering:
    assignments: np.ndarray
    k: int
    inertia: float
    inertia_trace: list = field(default_factory=list)  # after every assignment step
    iterations: int = 0


@dataclass(frozen=True)
class EvalReport:
    k_features: int
    acc_mean: float
    acc_sd: float
    nmi_mean: float
    nmi_sd: float
    repeats: int
    acc_values: tuple = ()
    nmi_values: tuple = ()


def _sq_dists(x, centers):
    diff = x[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _kmeanspp(x, k, rng):
    n = x.shape[0]
    idx = [int(rng.integers(n))]
    closest = np.sum((x - x[idx[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            nxt = int(rng.integers(n))
        idx.append(nxt)
        closest = np.minimum(closest, np.sum((x - x[nxt]) ** 2, axis=1))
    return x[idx].copy()


def kmeans(x, k: int, seed: int, max_iter: int = 100) -> Clustering:
    """Lloyd's algorithm with k-means++ seeding (squared Euclidean distance).

    Empty clusters are refilled with the point farthest from its current
    centroid, taken from a cluster that has more than one member, so ``k``
    stays fixed and the inertia never increases.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DataError("kmeans needs a non-empty 2-d array")
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    rng = make_rng(seed)
    centers = _kmeanspp(x, k, rng)
    dist = _sq_dists(x, centers)
    assign = np.argmin(dist, axis=1)
    trace = [float(dist[np.arange(n), assign].sum())]
    it = 0
    while it < max_iter:
        it += 1
        counts = np.bincount(assign, minlength=k)
        for j in np.flatnonzero(counts == 0):
            own = np.sum((x - centers[assign]) ** 2, axis=1)
            own[counts[assign] <= 1] = -1.0
            far = int(np.argmax(own))
            counts[assign[far]] -= 1
            assign[far] = j
            counts[j] = 1
        sums = np.zeros_like(centers)
        np.add.at(sums, assign, x)
        centers = sums / counts[:, None]
        dist = _sq_dists(x, centers)
        new = np.argmin(dist, axis=1)
        trace.append(float(dist[np.arange(n), new].sum()))
        if np.array_equal(new, assign):
            break
        assign = new
    return Clustering(assignments=assign.astype(np.int64), k=k, inertia=trace[-1],
                      inertia_trace=trace, iterations=it)


def _contingency(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValueError("empty partition")
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def clustering_accuracy(pred, truth) -> float:
    table = _contingency(pred, truth)
    size = max(table.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[: table.shape[0], : table.shape[1]] = table
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return float(padded[rows, cols].sum() / table.sum())


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(pred, truth) -> float:
    """Mutual information over the geometric mean of the two entropies.

    Two single-cluster partitions score 1; if only one side is a single
    cluster the score is 0.
    """
    table = _contingency(pred, truth)
    n = table.sum()
    h_pred = _entropy(table.sum(axis=1), n)
    h_truth = _entropy(table.sum(axis=0), n)
    if h_pred == 0.0 and h_truth == 0.0:
        return 1.0
    if h_pred == 0.0 or h_truth == 0.0:
        return 0.0
    joint = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / (n * n)
    nz = joint > 0
    mi = float(np.sum(joint[nz] * np.log(joint[nz] / outer[nz])))
    return float(min(1.0, max(0.0, mi / np.sqrt(h_pred * h_truth))))


def threads_from_env() -> int:
    raw = os.environ.get("ZEROSEL_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"ZEROSEL_THREADS must be an integer, got {raw!r}") from None
    return max(n, 0)


def _zscore(x):
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd[sd == 0] = 1.0
    return (x - mu) / sd


def evaluate_selection(x_unseen, labels_unseen, selected, repeats: int = 20, seed: int = 0,
                       standardize: bool = False, max_iter: int = 100,
                       threads: int | None = None) -> EvalReport:
    """Average ACC/NMI of K-means on the selected columns over ``repeats`` seeds.

    Repeat ``r`` uses seed ``seed + r``, so the result does not depend on
    whether repeats run serially or in a thread pool.
    """
    x = np.asarray(x_unseen, dtype=np.float64)
    truth = np.asarray(labels_unseen)
    selected = np.asarray(selected, dtype=np.int64)
    if selected.size == 0:
        raise ValueError("empty feature selection")
    if selected.min() < 0 or selected.max() >= x.shape[1]:
        raise ValueError(f"selected index out of range [0, {x.shape[1]})")
    if x.shape[0] != truth.shape[0]:
        raise DataError(f"{x.shape[0]} unseen instances but {truth.shape[0]} labels")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    sub = x[:, selected]
    if standardize:
        sub = _zscore(sub)
    k = int(np.unique(truth).size)

    def one(r):
        cl = kmeans(sub, k, seed + r, max_iter=max_iter)
        return clustering_accuracy(cl.assignments, truth), nmi(cl.assignments, truth)

    workers = threads_from_env() if threads is None else threads
    if workers > 1 and repeats > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(one, range(repeats)))
    else:
        scores = [one(r) for r in range(repeats)]
    acc = np.array([a for a, _ in scores])
    nm = np.array([b for _, b in scores])
    ddof = 1 if repeats > 1 else 0
    return EvalReport(
        k_features=int(selected.size),
        acc_mean=float(acc.mean()),
        acc_sd=float(acc.std(ddof=ddof)),
        nmi_mean=float(nm.mean()),
        nmi_sd=float(nm.std(ddof=ddof)),
        repeats=repeats,
        acc_values=tuple(acc.tolist()),
        nmi_values=tuple(nm.tolist()),
    )


def sweep_feature_counts(x_unseen, labels_unseen, ranking, counts=DEFAULT_COUNTS, repeats: int = 20,
                         seed: int = 0, standardize: bool = False, threads: int | None = None
                         ) -> list[EvalReport]:
    """One report per count, each using the top-``count`` prefix of ``ranking``."""
    ranking = np.asarray(ranking, dtype=np.int64)
    counts = list(counts)
    if not counts:
        raise ValueError("counts must be non-empty")
    for c in counts:
        if not 1 <= c <= ranking.size:
            raise ValueError(f"feature count {c} outside [1, {ranking.size}]")
    return [
        evaluate_selection(x_unseen, labels_unseen, ranking[:c], repeats=repeats, seed=seed,
                           standardize=standardize, threads=threads)
        for c in counts
    ]
