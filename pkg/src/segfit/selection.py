"""Model-order selection: pick the number of segments by BIC."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .candidates import bs_candidates, combination_search, fl_candidates
from .data import Dataset
from .exceptions import DataError
from .maxem import SegmentedFit, max_em
from .models import EmissionModel


def bic_value(loglik: float, dim: int, k: int, n: int) -> float:
    """-2 l_n + d*K*log(n), d = emission parameter dimension."""
    return -2.0 * loglik + dim * k * np.log(n)


@dataclass(frozen=True)
class SelectionReport:
    ks: tuple[int, ...]
    fits: tuple[SegmentedFit, ...]
    bics: tuple[float, ...]
    chosen_k: int

    @property
    def best_fit(self) -> SegmentedFit:
        return self.fits[self.ks.index(self.chosen_k)]


def select_k(data: Dataset, model: EmissionModel, k_range: Sequence[int],
             init_method: str = "bs", *, bs_depth: int = 4,
             lambda_grid=None, n_jobs: int = 1) -> SelectionReport:
    """Run the full pipeline for each K and keep the BIC minimizer.

    Ties go to the smaller K. The binary-segmentation pool is K-independent
    and built once; fused-lasso pools depend on K through their candidate
    quota and are rebuilt per K.
    """
    ks = sorted(set(int(k) for k in k_range))
    if not ks or ks[0] < 1 or ks[-1] > data.n:
        raise DataError(f"k_range must lie in 1..{data.n}")
    if init_method not in ("bs", "fl"):
        raise DataError(f"init_method must be 'bs' or 'fl', got {init_method!r}")

    bs_pool = None
    if init_method == "bs" and any(k > 1 for k in ks):
        bs_pool = bs_candidates(data, model, depth=bs_depth)

    dim = model.dim(data)
    fits = []
    bics = []
    for k in ks:
        if k == 1:
            fit = max_em(data, model, 1)
        else:
            pool = bs_pool if init_method == "bs" else fl_candidates(
                data, model, k, lambda_grid)
            fit = combination_search(data, model, k, pool, n_jobs=n_jobs)
        fits.append(fit)
        bics.append(bic_value(fit.loglik, dim, k, data.n))

    chosen = ks[int(np.argmin(bics))]
    return SelectionReport(tuple(ks), tuple(fits), tuple(bics), chosen)
