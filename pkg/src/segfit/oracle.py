"""Exhaustive segmentation search with per-interval fit memoization.

Exact but exponential in the number of segments; used as ground truth for
small problems and for the one-breakpoint sweep. Candidate fits are ranked
non-degenerate first, then by log-likelihood, then by earliest lexicographic
breakpoints, the same total order the combination search uses.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .data import Dataset, Segmentation
from .exceptions import EnumerationBudgetError
from .maxem import SegmentedFit
from .models import EmissionModel, FitResult


class SegmentFitCache:
    """Memoized per-interval MLEs keyed by (start, end), 0-based half-open.

    One fit per distinct interval, reused across segmentations and across K.
    Concurrent insert-or-read of the same key is harmless: values for a key
    are identical and dict access is atomic under the GIL.
    """

    def __init__(self, data: Dataset, model: EmissionModel):
        self.data = data
        self.model = model
        self._fitter = model.range_fitter(data)
        self._store: dict[tuple[int, int], FitResult] = {}
        self.hits = 0
        self.misses = 0

    def fit(self, start: int, end: int, init=None) -> FitResult:
        key = (start, end)
        res = self._store.get(key)
        if res is None:
            self.misses += 1
            res = self._fitter.fit(start, end, init=init)
            self._store[key] = res
        else:
            self.hits += 1
        return res

    def __len__(self) -> int:
        return len(self._store)


def _rank_key(degenerate: bool, loglik: float, bps: tuple[int, ...]):
    return (degenerate, -loglik, bps)


def _fit_for(cache: SegmentFitCache, bps: tuple[int, ...], n: int):
    edges = (0, *bps, n)
    results = [cache.fit(edges[j], edges[j + 1]) for j in range(len(edges) - 1)]
    ll = float(sum(r.loglik for r in results))
    deg = any(r.degenerate for r in results)
    return ll, deg, results


def brute_force(data: Dataset, model: EmissionModel, k: int,
                max_enumerations: int = 10_000_000,
                cache: SegmentFitCache | None = None) -> SegmentedFit:
    """Global maximizer of the segmented log-likelihood by enumeration.

    Enumerates all C(n-1, K-1) segmentations with memoized per-segment fits;
    K = 2 runs as a single warm-started sweep over the breakpoint. Raises
    EnumerationBudgetError when the enumeration would exceed the guard.
    """
    n = data.n
    if not 1 <= k <= n:
        raise EnumerationBudgetError(f"need 1 <= K <= n, got K={k}, n={n}")
    n_comb = math.comb(n - 1, k - 1)
    if n_comb > max_enumerations:
        raise EnumerationBudgetError(
            f"{n_comb} segmentations exceed the guard ({max_enumerations}); "
            "use max-EM with an initializer instead"
        )
    if cache is None:
        cache = SegmentFitCache(data, model)

    if k == 1:
        res = cache.fit(0, n)
        return SegmentedFit(Segmentation(n), res.theta[None, :], res.loglik,
                            converged=True, degenerate=res.degenerate,
                            trace=(res.loglik,))

    best_key = None
    best_bps = None
    if k == 2:
        left_init = right_init = None
        for b in range(1, n):
            left = cache.fit(0, b, init=left_init)
            right = cache.fit(b, n, init=right_init)
            left_init, right_init = left.theta, right.theta
            key = _rank_key(left.degenerate or right.degenerate,
                            left.loglik + right.loglik, (b,))
            if best_key is None or key < best_key:
                best_key, best_bps = key, (b,)
    else:
        for bps in combinations(range(1, n), k - 1):
            ll, deg, _ = _fit_for(cache, bps, n)
            key = _rank_key(deg, ll, bps)
            if best_key is None or key < best_key:
                best_key, best_bps = key, bps

    ll, deg, results = _fit_for(cache, best_bps, n)
    thetas = np.stack([r.theta for r in results])
    return SegmentedFit(Segmentation(n, best_bps), thetas, ll,
                        converged=True, degenerate=deg, trace=(ll,))
