"""Semantic feature selection (SemFS).

Scores features by how well a non-negative per-feature scaling ``s`` lets the
scaled data generate the class attributes through a linear map ``W``, both at
the instance level and at the level of class centers::

    J(W, s) = |Y_s - X diag(s) W|_F^2
              + alpha * |Y_s - Xbar diag(s) W|_F^2
              + gamma * |W|_F^2,          s >= 0

``Xbar`` holds, for every instance, the mean feature vector of its class.
The problem is minimised by alternating an exact ridge-type solve for ``W``
with projected gradient descent on ``s``.

Everything the optimiser needs reduces to a handful of Gram matrices::

    P = X'X + alpha Xbar'Xbar      (d, d)
    Q = X'Y_s + alpha Xbar'Y_s     (d, m)

and, because ``Xbar`` and ``Y_s`` are constant within a class, the center
parts are computed from the ``c`` class centers weighted by class sizes
instead of the expanded ``n x d`` matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .data import DataError, compute_class_centers, expand_semantic_labels

__all__ = [
    "SemfsConfig",
    "SelectionResult",
    "ConvergenceError",
    "objective",
    "update_w",
    "grad_s",
    "pgd_update_s",
    "fit",
    "rank_features",
    "ranking_from_scores",
]

# step sizes below this are treated as a failed line search
_MIN_STEP = 1e-16


class ConvergenceError(ArithmeticError):
    """Raised when a linear solve fails or the objective stops being finite."""


@dataclass(frozen=True)
class SemfsConfig:
    alpha: float = 1.0
    gamma: float = 0.1
    max_iters: int = 100
    rel_tol: float = 1e-6
    pgd_max_steps: int = 10
    pgd_init_step: float = 1.0
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    s_init: str = "ones"  # "ones" or "uniform" (every entry 1/d)

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        # 0 inner steps is allowed: it freezes s (used for the ridge anchor)
        if self.pgd_max_steps < 0:
            raise ValueError("pgd_max_steps must be >= 0")
        if not self.pgd_init_step > 0:
            raise ValueError("pgd_init_step must be > 0")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.s_init not in ("ones", "uniform"):
            raise ValueError(f"s_init must be 'ones' or 'uniform', got {self.s_init!r}")

    def initial_scores(self, d: int) -> np.ndarray:
        if self.s_init == "ones":
            return np.ones(d)
        return np.full(d, 1.0 / d)


@dataclass(frozen=True)
class SelectionResult:
    scores: np.ndarray
    weights: np.ndarray
    ranking: np.ndarray
    objective_trace: np.ndarray  # entry 0 is the starting point (W = 0)
    iterations_run: int
    converged: bool
    pgd_steps_accepted: list = field(default_factory=list)  # one per outer iteration
    config: SemfsConfig | None = None


# ---------------------------------------------------------------------------
# Gram-matrix form of the problem

@dataclass(frozen=True)
class _Grams:
    p: np.ndarray  # X'X + alpha Xbar'Xbar
    q: np.ndarray  # X'Y + alpha Xbar'Y


def _grams_expanded(x, xbar, ys, alpha) -> _Grams:
    x, xbar, ys = _check_shapes(x, xbar, ys)
    p = x.T @ x
    q = x.T @ ys
    if alpha:
        p = p + alpha * (xbar.T @ xbar)
        q = q + alpha * (xbar.T @ ys)
    return _Grams(p, q)


def _grams_grouped(x, ys, centers, counts, attrs, alpha) -> _Grams:
    p = x.T @ x
    q = x.T @ ys
    if alpha:
        weighted = centers * counts[:, None]
        p = p + alpha * (centers.T @ weighted)
        q = q + alpha * (weighted.T @ attrs)
    return _Grams(p, q)


def _check_shapes(x, xbar, ys, w=None, s=None):
    x = np.asarray(x, dtype=np.float64)
    xbar = np.asarray(xbar, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if x.ndim != 2 or xbar.shape != x.shape:
        raise DataError(f"x {x.shape} and xbar {xbar.shape} must be equal-shape matrices")
    if ys.ndim != 2 or ys.shape[0] != x.shape[0]:
        raise DataError(f"ys {ys.shape} must have {x.shape[0]} rows")
    if w is not None and np.shape(w) != (x.shape[1], ys.shape[1]):
        raise DataError(f"w has shape {np.shape(w)}, expected {(x.shape[1], ys.shape[1])}")
    if s is not None and np.shape(s) != (x.shape[1],):
        raise DataError(f"s has shape {np.shape(s)}, expected {(x.shape[1],)}")
    return x, xbar, ys


def _solve_w(g: _Grams, s, gamma) -> np.ndarray:
    # (S P S + gamma I) W = S Q, with S = diag(s)
    a = g.p * np.outer(s, s)
    a[np.diag_indices_from(a)] += gamma
    rhs = s[:, None] * g.q
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        with np.errstate(all="ignore"):
            cond = np.linalg.cond(a) if np.all(np.isfinite(a)) else np.inf
        raise ConvergenceError(
            f"W-system is not numerically positive definite (condition number {cond:.3g}); "
            f"increase gamma"
        ) from exc
    w = scipy.linalg.cho_solve(factor, rhs)
    # one step of refinement keeps the residual at rounding level for ill-conditioned systems
    w += scipy.linalg.cho_solve(factor, rhs - a @ w)
    return w


def _s_quadratic(g: _Grams, w):
    """J_s(s) = const - 2 lin.s + s' H s."""
    h = g.p * (w @ w.T)
    lin = np.sum(g.q * w, axis=1)
    return h, lin


def _pgd(h, lin, s, cfg: SemfsConfig) -> tuple[np.ndarray, int]:
    accepted = 0
    for _ in range(cfg.pgd_max_steps):
        grad = 2.0 * (h @ s - lin)
        if not np.any(grad):
            break
        t = cfg.pgd_init_step
        moved = False
        while t >= _MIN_STEP:
            cand = np.maximum(0.0, s - t * grad)
            delta = cand - s
            if not np.any(delta):
                # every coordinate that could move is pinned at zero
                break
            slope = grad @ delta
            change = slope + delta @ h @ delta
            # Armijo along the projection arc; slope == -t|g|^2 when nothing is clipped
            if change <= cfg.armijo_c * slope:
                s = cand
                accepted += 1
                moved = True
                break
            t *= cfg.backtrack_factor
        if not moved:
            break
    return s, accepted


# ---------------------------------------------------------------------------
# public operations on explicit (expanded) matrices

def objective(x, xbar, ys, w, s, alpha, gamma) -> float:
    """Full relaxed objective, evaluated from the residuals directly."""
    x, xbar, ys = _check_shapes(x, xbar, ys, w, s)
    w = np.asarray(w, dtype=np.float64)
    sw = np.asarray(s, dtype=np.float64)[:, None] * w
    val = np.sum((ys - x @ sw) ** 2) + gamma * np.sum(w ** 2)
    if alpha:
        val += alpha * np.sum((ys - xbar @ sw) ** 2)
    if not np.isfinite(val):
        raise ConvergenceError("objective is not finite")
    return float(val)


def update_w(x, xbar, ys, s, alpha, gamma) -> np.ndarray:
    """Exact minimiser of the objective over ``W`` for fixed ``s``.

    Solves the symmetric positive definite system
    ``(S P S + gamma I) W = S Q`` by Cholesky factorisation.
    """
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    s = np.asarray(s, dtype=np.float64)
    _check_shapes(x, xbar, ys, s=s)
    return _solve_w(_grams_expanded(x, xbar, ys, alpha), s, gamma)


def grad_s(x, xbar, ys, w, s, alpha) -> np.ndarray:
    """Gradient of the ``s``-subproblem (the gamma term is constant in ``s``).

    Entry ``i`` is the ``i``-th diagonal element of
    ``2 X'(X diag(s) W - Y_s) W' + 2 alpha Xbar'(Xbar diag(s) W - Y_s) W'``.
    """
    x, xbar, ys = _check_shapes(x, xbar, ys, w, s)
    w = np.asarray(w, dtype=np.float64)
    sw = np.asarray(s, dtype=np.float64)[:, None] * w
    out = 2.0 * np.sum((x.T @ (x @ sw - ys)) * w, axis=1)
    if alpha:
        out += 2.0 * alpha * np.sum((xbar.T @ (xbar @ sw - ys)) * w, axis=1)
    return out


def pgd_update_s(x, xbar, ys, w, s, alpha, cfg: SemfsConfig) -> np.ndarray:
    """Up to ``cfg.pgd_max_steps`` projected gradient steps with backtracking.

    Each step starts from ``cfg.pgd_init_step`` and shrinks by
    ``cfg.backtrack_factor`` until the projected point passes the Armijo
    test; if the step underflows, ``s`` is returned as is.
    """
    s = np.asarray(s, dtype=np.float64)
    _check_shapes(x, xbar, ys, w, s)
    if np.any(s < 0):
        raise ValueError("s must be non-negative")
    h, lin = _s_quadratic(_grams_expanded(x, xbar, ys, alpha), np.asarray(w, dtype=np.float64))
    return _pgd(h, lin, s.copy(), cfg)[0]


def ranking_from_scores(s) -> np.ndarray:
    """All feature indices by descending score; ties go to the smaller index."""
    s = np.asarray(s, dtype=np.float64)
    return np.lexsort((np.arange(s.size), -s)).astype(np.int64)


def rank_features(s, k: int) -> np.ndarray:
    s = np.asarray(s)
    if not 1 <= k <= s.size:
        raise ValueError(f"k must lie in [1, {s.size}], got {k}")
    return ranking_from_scores(s)[:k]


# ---------------------------------------------------------------------------
# the alternating solver

def _grouped_objective(x, ys, centers, counts, attrs, w, s, alpha, gamma) -> float:
    sw = s[:, None] * w
    val = np.sum((ys - x @ sw) ** 2) + gamma * np.sum(w ** 2)
    if alpha:
        val += alpha * np.sum(counts[:, None] * (attrs - centers @ sw) ** 2)
    if not np.isfinite(val):
        raise ConvergenceError("objective is not finite")
    return float(val)


def fit(x, labels, attrs, cfg: SemfsConfig = SemfsConfig(), callback=None) -> SelectionResult:
    """Run SemFS on seen-class data.

    Parameters
    ----------
    x : (n, d) array
        Seen-class instances.
    labels : (n,) int array
        Dense 0-based class ids.
    attrs : (c, m) array
        One attribute row per class. Pass an identity table for plain
        class-label supervision.
    cfg : SemfsConfig
    callback : callable, optional
        ``callback(iteration, w, s)`` is invoked right after every W update,
        before ``s`` moves.

    Returns
    -------
    SelectionResult
    """
    x = np.asarray(x, dtype=np.float64)
    attrs = np.asarray(attrs, dtype=np.float64)
    ys = expand_semantic_labels(labels, attrs)
    if x.ndim != 2 or x.shape[0] != ys.shape[0]:
        raise DataError(f"x has {x.shape[0] if x.ndim else 0} rows but there are {ys.shape[0]} labels")
    cc = compute_class_centers(x, labels)
    counts = cc.counts.astype(np.float64)
    grams = _grams_grouped(x, ys, cc.centers, counts, attrs, cfg.alpha)

    def obj(w, s):
        return _grouped_objective(x, ys, cc.centers, counts, attrs, w, s, cfg.alpha, cfg.gamma)

    d, m = x.shape[1], attrs.shape[1]
    s = cfg.initial_scores(d)
    w = np.zeros((d, m))
    trace = [obj(w, s)]
    steps = []
    converged = False
    it = 0
    while it < cfg.max_iters:
        it += 1
        w = _solve_w(grams, s, cfg.gamma)
        if callback is not None:
            callback(it, w, s)
        h, lin = _s_quadratic(grams, w)
        s, accepted = _pgd(h, lin, s, cfg)
        steps.append(accepted)
        trace.append(obj(w, s))
        prev, cur = trace[-2], trace[-1]
        if (prev - cur) / max(prev, 1e-30) < cfg.rel_tol:
            converged = True
            break
    return SelectionResult(
        scores=s,
        weights=w,
        ranking=ranking_from_scores(s),
        objective_trace=np.array(trace),
        iterations_run=it,
        converged=converged,
        pgd_steps_accepted=steps,
        config=cfg,
    )
