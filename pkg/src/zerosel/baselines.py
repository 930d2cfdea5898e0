"""Reference selectors: random, ridge row norms, and L2,1 row-sparse regression."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import DataError, make_rng
from .semfs import ConvergenceError, ranking_from_scores

__all__ = ["L21Config", "L21Result", "select_random", "fit_ridge", "fit_l21", "l21_objective"]


def select_random(d: int, k: int, seed: int) -> np.ndarray:
    """``k`` distinct feature indices drawn uniformly without replacement."""
    if not 0 <= k <= d:
        raise ValueError(f"cannot select {k} of {d} features")
    return make_rng(seed).permutation(d)[:k].astype(np.int64)


def _spd_solve(a, rhs):
    try:
        factor = scipy.linalg.cho_factor(a, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"system is not numerically positive definite (condition number {np.linalg.cond(a):.3g})"
        ) from exc
    out = scipy.linalg.cho_solve(factor, rhs)
    return out + scipy.linalg.cho_solve(factor, rhs - a @ out)


def _check(x, ys):
    x = np.asarray(x, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if ys.ndim == 1:
        ys = ys[:, None]
    if x.ndim != 2 or ys.shape[0] != x.shape[0]:
        raise DataError(f"x {x.shape} and targets {ys.shape} disagree on the number of rows")
    return x, ys


def fit_ridge(x, ys, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """``argmin |Y - XW|^2 + gamma |W|^2`` and the features ranked by row norm of ``W``."""
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    x, ys = _check(x, ys)
    a = x.T @ x
    a[np.diag_indices_from(a)] += gamma
    w = _spd_solve(a, x.T @ ys)
    return w, ranking_from_scores(np.linalg.norm(w, axis=1))


@dataclass(frozen=True)
class L21Config:
    gamma: float = 0.1
    max_iters: int = 200
    rel_tol: float = 1e-8
    epsilon: float = 1e-10

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")


@dataclass(frozen=True)
class L21Result:
    weights: np.ndarray
    ranking: np.ndarray
    objective_trace: np.ndarray
    iterations_run: int
    converged: bool


def _smoothed_row_norms(w, eps):
    # Huber-smoothed |w_i| shifted so phi(0) = 0; the reweighting step majorises it exactly
    r = np.linalg.norm(w, axis=1)
    return np.where(r >= eps, r - eps / 2, r * r / (2 * eps))


def l21_objective(x, ys, w, gamma, epsilon) -> float:
    """``|Y - XW|^2 + gamma * sum_i phi(|W_i|)`` with ``phi`` quadratic below ``epsilon``."""
    x, ys = _check(x, ys)
    return float(np.sum((ys - x @ w) ** 2) + gamma * np.sum(_smoothed_row_norms(w, epsilon)))


def fit_l21(x, ys, cfg: L21Config = L21Config()) -> L21Result:
    """Row-sparse regression ``min |Y - XW|_F^2 + gamma |W|_{2,1}`` by iterative reweighting.

    Starts from the ridge solution, then alternates ``D_ii = 1 / (2 max(|W_i|, eps))``
    with the solve ``(X'X + gamma D) W = X'Y``.  Each round minimises a
    quadratic upper bound of the smoothed objective that touches it at the
    current ``W``, so the recorded trace never increases.
    """
    x, ys = _check(x, ys)
    xtx = x.T @ x
    xty = x.T @ ys
    w, _ = fit_ridge(x, ys, cfg.gamma)
    trace = [l21_objective(x, ys, w, cfg.gamma, cfg.epsilon)]
    converged = False
    it = 0
    while it < cfg.max_iters:
        it += 1
        dvec = 0.5 / np.maximum(np.linalg.norm(w, axis=1), cfg.epsilon)
        a = xtx.copy()
        a[np.diag_indices_from(a)] += cfg.gamma * dvec
        w = _spd_solve(a, xty)
        trace.append(l21_objective(x, ys, w, cfg.gamma, cfg.epsilon))
        prev, cur = trace[-2], trace[-1]
        if (prev - cur) / max(prev, 1e-30) < cfg.rel_tol:
            converged = True
            break
    return L21Result(
        weights=w,
        ranking=ranking_from_scores(np.linalg.norm(w, axis=1)),
        objective_trace=np.array(trace),
        iterations_run=it,
        converged=converged,
    )
