"""Single-breakpoint likelihood-ratio test with permutation calibration.

The split statistic 2(l(th1,th2; n1) - l(th0)) is approximated without
refitting both sides at every n1: away from the ends a three-term quadratic
form in prefix sums of the null-model scores (one pass, O(n d) after an
O(n d^2) setup); near either end a refit of the short side only. The test
statistic T_n is the maximum over n1, and its null distribution comes from
random permutations of the data order, which leave the null-model machinery
(theta0, the Fisher estimate, the multiset of scores) unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.linalg import cho_factor, cho_solve

from .data import Dataset
from .exceptions import DataError, FitError, SingularInformationError
from .models import EmissionModel
from .oracle import SegmentFitCache

REGIME_THM1 = "thm1"
REGIME_LEFT = "thm2-left"
REGIME_RIGHT = "thm2-right"


@dataclass(frozen=True)
class H0Context:
    """Everything the scan needs under the no-breakpoint model.

    All fields are permutation-invariant except for row order, which the
    scan applies on top.
    """

    theta0: np.ndarray
    base_loglik: np.ndarray  # per-observation log-density at theta0
    scores: np.ndarray       # n x d per-observation score at theta0
    info: np.ndarray         # Fisher estimate -(1/n) sum hessians
    info_inv: np.ndarray


def h0_context(data: Dataset, model: EmissionModel) -> H0Context:
    fit = model.fit_mle(data)
    theta0 = fit.theta
    info = -model.hessian_sum(data, None, theta0) / data.n
    try:
        factor = cho_factor(info)
    except np.linalg.LinAlgError:
        raise SingularInformationError(
            "Fisher information is not positive definite; add a ridge to the "
            "null fit or reconsider the model"
        ) from None
    info_inv = cho_solve(factor, np.eye(info.shape[0]))
    return H0Context(theta0, model.log_density_all(data, theta0),
                     model.score_all(data, theta0), info, info_inv)


@dataclass(frozen=True)
class LrCurve:
    """Approximate statistic per candidate breakpoint.

    ``excluded`` lists n1 values whose tail refit was degenerate. Negative
    approximate values are kept as computed; ``clamped()`` floors them at
    zero for display, never for the maximum.
    """

    n1: np.ndarray
    statistic: np.ndarray
    regime: tuple[str, ...]
    excluded: tuple[int, ...] = ()

    @property
    def t_n(self) -> float:
        return float(self.statistic.max())

    @property
    def n1_hat(self) -> int:
        return int(self.n1[int(np.argmax(self.statistic))])

    def clamped(self) -> np.ndarray:
        return np.maximum(self.statistic, 0.0)

    def to_csv(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write("n1,statistic,regime\n")
            for n1, stat, reg in zip(self.n1, self.statistic, self.regime):
                fh.write(f"{int(n1)},{stat!r},{reg}\n")


@dataclass(frozen=True)
class PermutationResult:
    """Permutation null for T_n and the add-one p-value (never exactly 0)."""

    b: int
    null_statistics: np.ndarray
    p_value: float
    q95_null: float
    seed: int
    observed_t: float
    n1_hat: int


def _order(data: Dataset, order) -> np.ndarray:
    if order is None:
        return np.arange(data.n)
    order = np.asarray(order, dtype=np.intp)
    if sorted(order.tolist()) != list(range(data.n)):
        raise DataError("order must be a permutation of 0..n-1")
    return order


def _thm1_statistics(ctx: H0Context, n: int, n1_values: np.ndarray,
                     order: np.ndarray | None) -> np.ndarray:
    scores = ctx.scores if order is None else ctx.scores[order]
    prefix = np.cumsum(scores, axis=0)
    total = prefix[-1]
    s1 = prefix[n1_values - 1]
    s2 = total[None, :] - s1
    a1 = s1 @ ctx.info_inv
    a2 = s2 @ ctx.info_inv
    q11 = np.einsum("ij,ij->i", s1, a1)
    q22 = np.einsum("ij,ij->i", s2, a2)
    q12 = np.einsum("ij,ij->i", s1, a2)
    m = n1_values.astype(float)
    return ((n - m) / (n * m) * q11 + m / (n * (n - m)) * q22 - 2.0 / n * q12)


def theorem1_scan(data: Dataset, model: EmissionModel,
                  n1_values=None, *, ctx: H0Context | None = None,
                  order=None) -> LrCurve:
    """Quadratic-form approximation of the split statistic for each n1.

    Valid when both sides are large; the scan machinery restricts the range
    accordingly. Scores and the Fisher estimate are computed once and reused
    across n1 (and across permutations).
    """
    ctx = ctx if ctx is not None else h0_context(data, model)
    if n1_values is None:
        n1_values = np.arange(1, data.n)
    n1_values = np.asarray(n1_values, dtype=int)
    if n1_values.size and not (n1_values.min() >= 1 and n1_values.max() <= data.n - 1):
        raise DataError("n1 values must lie in 1..n-1")
    order = None if order is None else _order(data, order)
    stats = _thm1_statistics(ctx, data.n, n1_values, order)
    return LrCurve(n1_values, stats, tuple(REGIME_THM1 for _ in n1_values))


def _tail_statistics(data: Dataset, model: EmissionModel, ctx: H0Context,
                     n1_values: np.ndarray, side: str,
                     order: np.ndarray | None):
    rows = _order(data, order)
    if side == "right":
        rows = rows[::-1]
        lengths = data.n - n1_values
    elif side == "left":
        lengths = n1_values.copy()
    else:
        raise DataError(f"side must be 'left' or 'right', got {side!r}")

    fast = model.prefix_fit_logliks(data, rows, lengths)
    if fast is not None:
        fit_ll, deg = fast
    else:
        fit_ll = np.empty(len(lengths))
        deg = np.zeros(len(lengths), dtype=bool)
        init = None
        for j, m in enumerate(lengths):
            res = model.fit_mle(data, rows[:m], init=init)
            init = res.theta
            fit_ll[j] = res.loglik
            deg[j] = res.degenerate
    base = np.cumsum(ctx.base_loglik[rows])[lengths - 1]
    return 2.0 * (fit_ll - base), deg


def theorem2_tail(data: Dataset, model: EmissionModel, n1: int, side: str, *,
                  ctx: H0Context | None = None, order=None) -> float:
    """Short-side refit statistic 2 sum_tail {log p(x; th_tail) - log p(x; th0)}."""
    ctx = ctx if ctx is not None else h0_context(data, model)
    d = model.dim(data)
    size = n1 if side == "left" else data.n - n1
    if size < d + 1:
        raise FitError(f"tail of {size} rows cannot fit {d} parameters")
    stats, _ = _tail_statistics(data, model, ctx, np.array([n1]), side, order)
    return float(stats[0])


def lr_scan(data: Dataset, model: EmissionModel, *, t_low: int = 100,
            ctx: H0Context | None = None, order=None) -> LrCurve:
    """Stitched statistic curve over every usable breakpoint position.

    Small-sample-capable models (exact closed-form MLEs) use the tail refits
    for n1 < t_low and n1 >= n - t_low; other models are restricted to
    n1 in [t_low, n - t_low) where the quadratic approximation holds.
    """
    ctx = ctx if ctx is not None else h0_context(data, model)
    n = data.n
    d = model.dim(data)
    lo, hi = t_low, n - t_low  # theorem-1 range [lo, hi)
    if not model.exact_mle and n < 2 * t_low + 1:
        raise DataError(
            f"n={n} is too small for a model restricted to n1 in [{t_low}, n-{t_low})"
        )

    pieces = []
    excluded: list[int] = []
    if model.exact_mle:
        left = np.arange(d + 1, min(lo, n - 1))
        if left.size:
            stats, deg = _tail_statistics(data, model, ctx, left, "left", order)
            pieces.append((left[~deg], stats[~deg], REGIME_LEFT))
            excluded.extend(int(v) for v in left[deg])
    mid = np.arange(max(lo, 1), min(hi, n))
    if mid.size:
        curve = theorem1_scan(data, model, mid, ctx=ctx, order=order)
        pieces.append((curve.n1, curve.statistic, REGIME_THM1))
    if model.exact_mle:
        right = np.arange(max(hi, 1), n - d)
        if right.size:
            stats, deg = _tail_statistics(data, model, ctx, right, "right", order)
            pieces.append((right[~deg], stats[~deg], REGIME_RIGHT))
            excluded.extend(int(v) for v in right[deg])

    if not pieces or all(len(p[0]) == 0 for p in pieces):
        raise DataError("no usable breakpoint positions for this n and model")
    n1 = np.concatenate([p[0] for p in pieces])
    stats = np.concatenate([p[1] for p in pieces])
    regimes = tuple(r for p in pieces for r in [p[2]] * len(p[0]))
    idx = np.argsort(n1, kind="stable")
    return LrCurve(n1[idx], stats[idx], tuple(regimes[j] for j in idx),
                   tuple(sorted(excluded)))


def exact_lr(data: Dataset, model: EmissionModel, n1_values,
             cache: SegmentFitCache | None = None) -> np.ndarray:
    """Exact double-refit statistic 2(l(th1,th2;n1) - l(th0)); the slow oracle."""
    cache = cache if cache is not None else SegmentFitCache(data, model)
    full = cache.fit(0, data.n).loglik
    n1_values = np.asarray(n1_values, dtype=int)
    out = np.empty(n1_values.size)
    for j, b in enumerate(n1_values):
        out[j] = 2.0 * (cache.fit(0, b).loglik + cache.fit(b, data.n).loglik - full)
    return out


def _null_chunk(data, model, ctx, t_low, seed, indices):
    out = np.empty(len(indices))
    for j, r in enumerate(indices):
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, r], dtype=np.uint64)))
        order = rng.permutation(data.n)
        out[j] = lr_scan(data, model, t_low=t_low, ctx=ctx, order=order).t_n
    return out


def permutation_test(data: Dataset, model: EmissionModel, b: int = 1000,
                     seed: int = 0, *, t_low: int = 100,
                     ctx: H0Context | None = None,
                     observed: LrCurve | None = None,
                     n_jobs: int = 1) -> PermutationResult:
    """Calibrate T_n by rescanning under random orderings of the data.

    The null-model fit is permutation-invariant, so each replicate only
    permutes the score rows (and refits the two short tails for capable
    models); replicate r derives its own counter-based stream from
    (seed, r), making results independent of scheduling. The p-value uses
    the add-one rule (1 + #{null >= observed}) / (B + 1).
    """
    if b < 1:
        raise DataError("need at least one permutation replicate")
    ctx = ctx if ctx is not None else h0_context(data, model)
    observed = observed if observed is not None else lr_scan(
        data, model, t_low=t_low, ctx=ctx)

    indices = list(range(b))
    if n_jobs != 1 and b >= 8:
        n_chunks = 4 * abs(n_jobs)
        chunks = [indices[j::n_chunks] for j in range(n_chunks) if indices[j::n_chunks]]
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_null_chunk)(data, model, ctx, t_low, seed, c) for c in chunks
        )
        null = np.empty(b)
        for c, part in zip(chunks, parts):
            null[c] = part
    else:
        null = _null_chunk(data, model, ctx, t_low, seed, indices)

    t_obs = observed.t_n
    p = (1.0 + float(np.sum(null >= t_obs))) / (b + 1.0)
    return PermutationResult(b, null, p, float(np.quantile(null, 0.95)),
                             seed, t_obs, observed.n1_hat)
