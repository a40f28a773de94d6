"""Breakpoint candidate pools and the initialization search.

Two pool builders feed the max-EM pipeline: recursive binary segmentation
(one-breakpoint max-EM applied to ever smaller sub-samples) and a fused-lasso
path (per-observation parameters under a total-variation penalty, whose jumps
mark candidates). ``combination_search`` then runs max-EM from every
(K-1)-subset of a pool and keeps the best fit. Everything here is
deterministic given the dataset and model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import minimize

from .data import Dataset, Segmentation
from .exceptions import CandidatePoolError
from .maxem import SegmentedFit, max_em
from .models import EmissionModel
from .oracle import SegmentFitCache, _rank_key
from .tvprox import tv_denoise


@dataclass(frozen=True)
class CandidatePool:
    """Sorted, deduplicated candidate breakpoints with their provenance.

    ``provenance`` carries the recursion depth (binary segmentation) or the
    penalty value (fused lasso) each candidate came from; ``flagged`` marks a
    fused-lasso pool that never reached its candidate quota.
    """

    candidates: tuple[int, ...]
    source: str
    provenance: tuple[float, ...] = field(default=())
    flagged: bool = False

    def __post_init__(self) -> None:
        if any(b <= 0 for b in self.candidates):
            raise CandidatePoolError("candidates must be in 1..n-1")
        if list(self.candidates) != sorted(set(self.candidates)):
            raise CandidatePoolError("candidates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.candidates)


# ---------------------------------------------------------------------------
# Binary segmentation


def bs_candidates(data: Dataset, model: EmissionModel, depth: int = 4) -> CandidatePool:
    """Recursive one-breakpoint splits, each found by max-EM from the middle.

    Depth levels give up to 2^depth - 1 candidates (15 at the default);
    sub-samples too short to fit two segments are skipped, so the pool may
    be smaller.
    """
    min_len = max(4, 2 * model.dim(data))
    found: dict[int, int] = {}

    def recurse(start: int, end: int, level: int) -> None:
        length = end - start
        if level > depth or length < min_len:
            return
        sub = data.slice(start, end)
        fit = max_em(sub, model, 2, init=(length // 2,))
        bp = start + fit.breakpoints[0]
        if bp not in found:
            found[bp] = level
        recurse(start, start + fit.breakpoints[0], level + 1)
        recurse(start + fit.breakpoints[0], end, level + 1)

    recurse(0, data.n, 1)
    cands = tuple(sorted(found))
    return CandidatePool(cands, "bs", tuple(float(found[c]) for c in cands))


# ---------------------------------------------------------------------------
# Fused lasso


def _pooled_unit_scale(data: Dataset, model: EmissionModel) -> np.ndarray:
    """Minimizer of the unit-scale loss with one shared coefficient vector."""
    q = model.fl_dim(data)

    def objective(b):
        value, grad = model.fl_value_grad(data, np.broadcast_to(b, (data.n, q)))
        return value, grad.sum(axis=0)

    res = minimize(objective, np.zeros(q), jac=True, method="L-BFGS-B")
    return res.x


def _fl_solve(data: Dataset, model: EmissionModel, lam: float, b: np.ndarray,
              max_iter: int, tol: float) -> tuple[np.ndarray, list[float]]:
    """Proximal gradient with exact per-coordinate TV prox; monotone descent."""
    design_norm = max(1.0, float(np.max(np.sum(
        np.column_stack([np.ones(data.n), data.covariates]) ** 2, axis=1))))
    step = 1.0 / design_norm
    value, grad = model.fl_value_grad(data, b)

    def penalty(m):
        return lam * float(np.abs(np.diff(m, axis=0)).sum())

    objective = [value + penalty(b)]
    for _ in range(max_iter):
        while True:
            z = b - step * grad
            b_new = np.column_stack([tv_denoise(z[:, j], lam * step) for j in range(b.shape[1])])
            delta = b_new - b
            value_new, grad_new = model.fl_value_grad(data, b_new)
            bound = value + float(np.sum(grad * delta)) + float(np.sum(delta * delta)) / (2 * step)
            if value_new <= bound + 1e-12 or step < 1e-12:
                break
            step *= 0.5
        b, value, grad = b_new, value_new, grad_new
        objective.append(value + penalty(b))
        if objective[-2] - objective[-1] <= tol * (1.0 + abs(objective[-1])):
            break
    return b, objective


def _jump_positions(b: np.ndarray, tol_jump: float) -> np.ndarray:
    scale = np.maximum(1.0, np.max(np.abs(b), axis=0))
    jumps = np.abs(np.diff(b, axis=0)) > tol_jump * scale[None, :]
    return np.flatnonzero(jumps.any(axis=1)) + 1  # 1-based breakpoints


def _prune_pool(data: Dataset, model: EmissionModel, cands: list[int],
                min_per_segment: int, floor: int) -> list[int]:
    fitter = SegmentFitCache(data, model)

    def removal_loss(cands_now: Sequence[int], pos: int) -> float:
        a = 0 if pos == 0 else cands_now[pos - 1]
        c = cands_now[pos]
        b = data.n if pos == len(cands_now) - 1 else cands_now[pos + 1]
        return (fitter.fit(a, c).loglik + fitter.fit(c, b).loglik
                - fitter.fit(a, b).loglik)

    cands = list(cands)
    while len(cands) > floor:
        edges = [0, *cands, data.n]
        lengths = np.diff(edges)
        shortest = int(np.argmin(lengths))
        if lengths[shortest] >= min_per_segment:
            break
        # breakpoints bordering the shortest segment, later index preferred on ties
        border = [j for j in (shortest - 1, shortest) if 0 <= j < len(cands)]
        drop = max(border, key=lambda j: (-removal_loss(cands, j), cands[j]))
        cands.pop(drop)
    return cands


def fl_candidates(data: Dataset, model: EmissionModel, k: int,
                  lambda_grid: Sequence[float] | None = None, *,
                  quota: int | None = None, min_per_segment: int = 50,
                  tol_jump: float = 1e-6, max_iter: int = 300,
                  tol: float = 1e-8) -> CandidatePool:
    """Candidate breakpoints from the total-variation-penalized parameter path.

    Walks the penalty from large to small (warm-started), declares a
    candidate wherever any coordinate of the per-observation parameter path
    jumps, and keeps the largest penalty reaching at least 5(K-1) candidates.
    Candidates closer together than ``min_per_segment`` are then pruned, but
    never below floor(3(K-1)/2) of them. A pool that never reached the quota
    is returned flagged, with the densest set found.
    """
    if k < 2:
        return CandidatePool((), "fl")
    quota = 5 * (k - 1) if quota is None else quota
    floor = (3 * (k - 1)) // 2
    q = model.fl_dim(data)

    pooled = _pooled_unit_scale(data, model)
    b = np.tile(pooled, (data.n, 1))
    if lambda_grid is None:
        _, grad = model.fl_value_grad(data, b)
        lam_max = float(np.max(np.abs(np.cumsum(grad, axis=0)[:-1])))
        lam_max = max(lam_max, 1e-6)
        lambda_grid = lam_max * 0.7 ** np.arange(40)
    else:
        lambda_grid = np.asarray(sorted(lambda_grid, reverse=True), dtype=float)

    best: np.ndarray = np.array([], dtype=int)
    best_lam = float(lambda_grid[0])
    flagged = True
    for lam in lambda_grid:
        b, _ = _fl_solve(data, model, float(lam), b, max_iter, tol)
        jumps = _jump_positions(b, tol_jump)
        if len(jumps) > len(best):
            best, best_lam = jumps, float(lam)
        if len(jumps) >= quota:
            best, best_lam = jumps, float(lam)
            flagged = False
            break

    kept = _prune_pool(data, model, [int(j) for j in best], min_per_segment, floor)
    return CandidatePool(tuple(kept), "fl", tuple(best_lam for _ in kept), flagged=flagged)


# ---------------------------------------------------------------------------
# Combination search


def _search_chunk(data, model, k, subsets, max_iter, tol):
    fitter = SegmentFitCache(data, model) if model.exact_mle else None
    best_key = None
    best_fit = None
    for subset in subsets:
        fit = max_em(data, model, k, init=subset, max_iter=max_iter, tol=tol,
                     fitter=fitter)
        key = _rank_key(fit.degenerate, fit.loglik, fit.breakpoints)
        if best_key is None or key < best_key:
            best_key, best_fit = key, fit
    return best_key, best_fit


def combination_search(data: Dataset, model: EmissionModel, k: int,
                       pool: CandidatePool, *, n_jobs: int = 1,
                       max_iter: int = 100, tol: float = 1e-9) -> SegmentedFit:
    """Best max-EM fit over all (K-1)-subsets of the candidate pool.

    Non-degenerate fits outrank degenerate ones, then higher likelihood wins,
    then earliest lexicographic breakpoints; the reduction is order-stable,
    so results do not depend on worker scheduling.
    """
    if k == 1:
        return max_em(data, model, 1)
    if len(pool) < k - 1:
        raise CandidatePoolError(
            f"pool of {len(pool)} candidates cannot seed K={k}; "
            "increase the binary-segmentation depth or lower the penalty"
        )
    subsets = list(combinations(pool.candidates, k - 1))
    if n_jobs != 1 and len(subsets) > 4:
        n_chunks = max(1, min(len(subsets) // 2, 4 * abs(n_jobs)))
        chunks = [subsets[j::n_chunks] for j in range(n_chunks)]
        results = Parallel(n_jobs=n_jobs)(
            delayed(_search_chunk)(data, model, k, chunk, max_iter, tol)
            for chunk in chunks
        )
    else:
        results = [_search_chunk(data, model, k, subsets, max_iter, tol)]
    best_key, best_fit = min(results, key=lambda r: r[0])
    return best_fit
