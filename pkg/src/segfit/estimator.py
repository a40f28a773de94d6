"""scikit-learn style estimators wrapping the segmentation pipeline.

These facades make the algorithm compose with the wider ecosystem
(``get_params``/``set_params``, ``clone``, pipelines operating on plain
arrays); the functional modules remain the primary API. Rows must already be
in the intended order: segment labels refer to row positions, so ``predict``
returns the training labels and ignores its argument.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .candidates import bs_candidates, combination_search, fl_candidates
from .data import Dataset
from .exceptions import DataError
from .lrtest import h0_context, lr_scan, permutation_test
from .models import get_model
from .selection import bic_value, select_k


def _build_dataset(model_name: str, X, y) -> Dataset:
    model = get_model(model_name)
    if X is None or (hasattr(X, "shape") and 0 in np.shape(X)):
        x = np.empty((len(np.asarray(y if not isinstance(y, tuple) else y[0])), 0))
    else:
        x = check_array(X, ensure_2d=True, dtype=float)
    if y is None:
        raise DataError("y is required")
    if model.kind.value == "censored_time":
        if isinstance(y, tuple) and len(y) == 2:
            t, ev = np.asarray(y[0], dtype=float), np.asarray(y[1])
        else:
            y = check_array(y, ensure_2d=True, dtype=float)
            if y.shape[1] != 2:
                raise DataError("censored responses need two columns: time, status")
            t, ev = y[:, 0], y[:, 1]
        return Dataset(model.kind, t, x, ev.astype(np.int8))
    y = np.asarray(y, dtype=float).ravel()
    return Dataset(model.kind, y, x)


class MaxEmSegmenter(BaseEstimator):
    """Segment ordered regression data by the max-EM pipeline.

    Parameters
    ----------
    model : str
        Emission family: "mean", "linear", "logistic", "poisson" or "aft".
    n_segments : int or "bic"
        Fixed number of segments, or "bic" to minimize the information
        criterion over 1..k_max.
    k_max : int
        Upper end of the search range when n_segments="bic".
    init : str or sequence of int
        "bs" (binary segmentation pool), "fl" (fused-lasso pool), or explicit
        initial breakpoints (skips pool construction).
    bs_depth : int
        Recursion depth of the binary-segmentation pool.
    n_jobs : int
        Worker pool for the combination search.

    Attributes
    ----------
    breakpoints_ : tuple of int
        Last row index (1-based) of each segment but the final one.
    labels_ : ndarray of shape (n,)
        Per-row segment index in 1..K.
    params_ : ndarray of shape (K, d)
        Per-segment parameter vectors (scales on the log scale).
    log_likelihood_, bic_ : float
    n_iter_, converged_, degenerate_ : fit diagnostics
    selection_ : SelectionReport, only when n_segments="bic"
    """

    def __init__(self, model: str = "linear", n_segments=2, k_max: int = 6,
                 init="bs", bs_depth: int = 4, lambda_grid=None,
                 max_iter: int = 100, tol: float = 1e-9, n_jobs: int = 1):
        self.model = model
        self.n_segments = n_segments
        self.k_max = k_max
        self.init = init
        self.bs_depth = bs_depth
        self.lambda_grid = lambda_grid
        self.max_iter = max_iter
        self.tol = tol
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        data = _build_dataset(self.model, X, y)
        model = get_model(self.model)
        self.n_features_in_ = data.p

        if self.n_segments == "bic":
            init = self.init if isinstance(self.init, str) else "bs"
            report = select_k(data, model, range(1, self.k_max + 1), init,
                              bs_depth=self.bs_depth, lambda_grid=self.lambda_grid,
                              n_jobs=self.n_jobs)
            self.selection_ = report
            fit = report.best_fit
            k = report.chosen_k
        else:
            k = int(self.n_segments)
            from .maxem import max_em
            if not isinstance(self.init, str):
                fit = max_em(data, model, k, init=tuple(self.init),
                             max_iter=self.max_iter, tol=self.tol)
            elif self.init == "bs":
                pool = bs_candidates(data, model, depth=self.bs_depth)
                fit = combination_search(data, model, k, pool, n_jobs=self.n_jobs,
                                         max_iter=self.max_iter, tol=self.tol)
            elif self.init == "fl":
                pool = fl_candidates(data, model, k, self.lambda_grid)
                fit = combination_search(data, model, k, pool, n_jobs=self.n_jobs,
                                         max_iter=self.max_iter, tol=self.tol)
            else:
                raise DataError(f"init must be 'bs', 'fl' or breakpoints, got {self.init!r}")

        self.fit_result_ = fit
        self.breakpoints_ = fit.breakpoints
        self.labels_ = fit.segmentation.labels()
        self.params_ = fit.thetas
        self.log_likelihood_ = fit.loglik
        self.bic_ = bic_value(fit.loglik, model.dim(data), k, data.n)
        self.n_iter_ = fit.n_iter
        self.converged_ = fit.converged
        self.degenerate_ = fit.degenerate
        return self

    def predict(self, X=None) -> np.ndarray:
        """Training-row segment labels (positions, not feature values)."""
        check_is_fitted(self, "labels_")
        return self.labels_

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X, y).labels_


class SingleBreakpointTest(BaseEstimator):
    """Permutation-calibrated test for one breakpoint versus none.

    Attributes after ``fit``: ``statistic_`` (T_n), ``breakpoint_`` (argmax
    n1), ``p_value_``, ``null_quantile_`` (0.95 quantile of the permutation
    null) and ``curve_`` (the per-n1 statistic curve).
    """

    def __init__(self, model: str = "linear", permutations: int = 199,
                 seed: int = 0, t_low: int = 100, n_jobs: int = 1):
        self.model = model
        self.permutations = permutations
        self.seed = seed
        self.t_low = t_low
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        data = _build_dataset(self.model, X, y)
        model = get_model(self.model)
        self.n_features_in_ = data.p
        ctx = h0_context(data, model)
        curve = lr_scan(data, model, t_low=self.t_low, ctx=ctx)
        result = permutation_test(data, model, self.permutations, self.seed,
                                  t_low=self.t_low, ctx=ctx, observed=curve,
                                  n_jobs=self.n_jobs)
        self.curve_ = curve
        self.result_ = result
        self.statistic_ = result.observed_t
        self.breakpoint_ = result.n1_hat
        self.p_value_ = result.p_value
        self.null_quantile_ = result.q95_null
        return self
