"""The max-EM fixed point: MAP decoding alternated with per-segment MLE.

Each iteration first decodes the best segmentation under the current
parameters (E-step, max lattice) and then refits every segment by maximum
likelihood (M-step). The emission part of the complete-data log-likelihood

    l_n = sum_k sum_{i in C_k} log e_i(k; theta_k)

is non-decreasing along the iteration; a decrease beyond numerical slack is
a hard error, not a warning. Transition terms are constant under the uniform
chain and therefore dropped from l_n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset, Segmentation
from .exceptions import DataError
from .hmm import map_decode, max_forward_backward, viterbi_path
from .models import RIDGE_FALLBACK, EmissionModel, FitResult, subset_rows

MONOTONICITY_SLACK = 1e-9


@dataclass(frozen=True)
class SegmentedFit:
    """A segmentation with per-segment parameters and its log-likelihood."""

    segmentation: Segmentation
    thetas: np.ndarray  # K x d
    loglik: float
    n_iter: int = 0
    converged: bool = True
    degenerate: bool = False
    trace: tuple[float, ...] = ()

    @property
    def breakpoints(self) -> tuple[int, ...]:
        return self.segmentation.breakpoints

    @property
    def k(self) -> int:
        return self.segmentation.k


def _as_segmentation(n: int, init) -> Segmentation:
    if isinstance(init, Segmentation):
        if init.n != n:
            raise DataError(f"initial segmentation is for n={init.n}, data has n={n}")
        return init
    return Segmentation(n, tuple(init))


def default_init(n: int, k: int) -> Segmentation:
    """Equally spaced starting breakpoints."""
    bps = tuple(int(round(j * n / k)) for j in range(1, k))
    return Segmentation(n, bps)


def matrix_loglik(log_emissions: np.ndarray, seg: Segmentation) -> float:
    """Sum of log e_i(k_i) along a segmentation, from a precomputed matrix."""
    lab = seg.labels() - 1
    return float(np.take_along_axis(log_emissions, lab[:, None], axis=1).sum())


def segmented_loglik(data: Dataset, model: EmissionModel, seg: Segmentation,
                     thetas: np.ndarray) -> float:
    return matrix_loglik(model.emission_matrix(data, thetas), seg)


def evaluate_loglik(data: Dataset, model: EmissionModel, fit: SegmentedFit) -> float:
    """Recompute l_n of a fit from its parts."""
    return segmented_loglik(data, model, fit.segmentation, fit.thetas)


def _fit_segment(data, model, fitter, start, end, warm, dim) -> FitResult:
    short = (end - start) < dim
    if short:
        res = model.fit_mle(data, np.arange(start, end), ridge=RIDGE_FALLBACK, init=warm)
        res = FitResult(res.theta, res.loglik, True, res.n_iter, "short segment; ridge fit")
    else:
        res = fitter.fit(start, end, init=warm)
    if res.degenerate and warm is not None and not model.exact_mle:
        # a ridge/floored refit must not undo the previous iterate
        ll_warm = float(np.sum(model.log_density_all(
            subset_rows(data, np.arange(start, end)), warm)))
        if ll_warm > res.loglik:
            res = FitResult(np.asarray(warm, dtype=float), ll_warm, True, 0,
                            "kept previous parameters")
    return res


def _m_step(data, model, fitter, seg, warm, dim):
    thetas = np.empty((seg.k, dim))
    lls = np.empty(seg.k)
    degenerate = False
    for k in range(1, seg.k + 1):
        start, end = seg.bounds(k)
        w = None if warm is None else warm[k - 1]
        res = _fit_segment(data, model, fitter, start, end, w, dim)
        thetas[k - 1] = res.theta
        lls[k - 1] = res.loglik
        degenerate |= res.degenerate
    return thetas, float(lls.sum()), degenerate


def max_em(data: Dataset, model: EmissionModel, k: int,
           init: Segmentation | Sequence[int] | None = None, *,
           max_iter: int = 100, tol: float = 1e-9,
           fitter=None) -> SegmentedFit:
    """Run the max-EM iteration from an initial segmentation.

    The first step is an M-step on ``init`` (fit before decoding), then
    E (max lattice + MAP decode) and M alternate until the segmentation
    repeats, the improvement drops below ``tol``, or ``max_iter`` E-steps
    ran. Revisiting an earlier segmentation (a tie cycle) returns the best
    iterate seen. ``fitter`` may be a shared range-fit cache.

    Raises RuntimeError if the objective ever decreases by more than the
    documented slack; this is the implemented form of the monotonicity
    guarantee.
    """
    if not 1 <= k <= data.n:
        raise DataError(f"need 1 <= K <= n, got K={k} for n={data.n}")
    if fitter is None:
        fitter = model.range_fitter(data)
    dim = model.dim(data)

    if k == 1:
        res = fitter.fit(0, data.n)
        return SegmentedFit(Segmentation(data.n), res.theta[None, :], res.loglik,
                            n_iter=0, converged=True, degenerate=res.degenerate,
                            trace=(res.loglik,))

    seg = _as_segmentation(data.n, init) if init is not None else default_init(data.n, k)
    if seg.k != k:
        raise DataError(f"initial segmentation has {seg.k} segments, expected {k}")

    thetas, ll, degenerate = _m_step(data, model, fitter, seg, None, dim)
    trace = [ll]
    best = (ll, seg, thetas, degenerate)
    seen = {seg.breakpoints}
    converged = False
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        log_e = model.emission_matrix(data, thetas)
        lattice = max_forward_backward(log_e)
        new_seg = map_decode(lattice)
        if matrix_loglik(log_e, new_seg) < ll - MONOTONICITY_SLACK:
            # reachable through (near-)ties only; the single best path
            # never degrades the objective
            new_seg = viterbi_path(lattice)
        if new_seg.breakpoints == seg.breakpoints:
            converged = True
            break

        thetas_new, ll_new, deg_new = _m_step(data, model, fitter, new_seg, thetas, dim)
        if ll_new < ll - MONOTONICITY_SLACK:
            raise RuntimeError(
                f"max-EM objective decreased from {ll:.12g} to {ll_new:.12g} "
                f"at iteration {n_iter}"
            )
        seg, thetas, degenerate = new_seg, thetas_new, deg_new
        improvement = ll_new - ll
        ll = ll_new
        trace.append(ll)
        if ll > best[0]:
            best = (ll, seg, thetas, degenerate)
        if seg.breakpoints in seen:
            converged = True
            ll, seg, thetas, degenerate = best
            break
        seen.add(seg.breakpoints)
        if improvement < tol:
            converged = True
            break

    return SegmentedFit(seg, thetas, ll, n_iter=n_iter, converged=converged,
                        degenerate=degenerate, trace=tuple(trace))
