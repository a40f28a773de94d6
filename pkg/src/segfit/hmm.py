"""Log-space dynamic programming over the left-to-right segment chain.

The latent chain starts in state 1, ends in state K and moves by steps of 0
or +1, so state k is feasible at position i iff k <= i and K-k <= n-i. Both
lattices work on an n x K matrix of finite log-emissions:

* ``forward_backward`` sums over label paths and yields the posterior
  membership weights used by the classical EM engine;
* ``max_forward_backward`` replaces the sums by maxima, so that
  logF[i,k] + logB[i,k] is the best complete-path log-likelihood through
  (i,k) and a per-position argmax gives the MAP segmentation.

Every lattice-feasible step carries the same log(1/2) transition weight
(probability 1 for K = 1), hence all complete paths share one additive
constant and the MAP depends on the emissions only; see the scaling
invariance tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Segmentation
from .exceptions import DataError

LOG_HALF = float(np.log(0.5))
NEG_INF = -np.inf


@dataclass(frozen=True)
class ChainSpec:
    """Dimensions and feasibility structure of the constrained chain."""

    n: int
    k: int

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.n:
            raise DataError(f"need 1 <= K <= n, got K={self.k}, n={self.n}")

    @property
    def step_logweight(self) -> float:
        return 0.0 if self.k == 1 else LOG_HALF

    def feasible_mask(self) -> np.ndarray:
        """Boolean n x K mask of positions reachable from (1,1) and reaching (n,K)."""
        i = np.arange(self.n)[:, None]
        k = np.arange(self.k)[None, :]
        return (k <= i) & (self.k - 1 - k <= self.n - 1 - i)


@dataclass(frozen=True)
class LatticeScores:
    """Forward/backward lattices; entries at infeasible (i,k) are -inf."""

    spec: ChainSpec
    kind: str  # "sum" | "max"
    log_forward: np.ndarray
    log_backward: np.ndarray

    @property
    def log_norm(self) -> float:
        """log P(X_{1:n}, R_n = K | theta) for the sum lattice."""
        return float(self.log_forward[-1, -1])

    @property
    def max_path_loglik(self) -> float:
        """Best complete-path log-likelihood (max lattice), transitions included."""
        return float(self.log_forward[-1, -1])

    @property
    def scale_forward(self) -> np.ndarray:
        """Per-row scaling constants L_i (row maxima of the forward lattice)."""
        return self.log_forward.max(axis=1)

    @property
    def scale_backward(self) -> np.ndarray:
        return self.log_backward.max(axis=1)


def _check_emissions(log_emissions: np.ndarray) -> tuple[np.ndarray, ChainSpec]:
    e = np.asarray(log_emissions, dtype=float)
    if e.ndim != 2:
        raise DataError("log-emission matrix must be n x K")
    n, k = e.shape
    if n < k:
        raise DataError(f"no feasible path: n={n} < K={k}")
    if not np.all(np.isfinite(e)):
        raise DataError("log-emissions must be finite (use large negatives, not -inf)")
    return e, ChainSpec(n, k)


def max_forward_backward(log_emissions: np.ndarray) -> LatticeScores:
    """Max-forward/max-backward lattice for MAP decoding.

    Emission-only recursions are unrolled per state into prefix/suffix sums
    plus running maxima (O(nK) vector work); the constant per-step transition
    weight is added as a row offset afterwards.
    """
    e, spec = _check_emissions(log_emissions)
    n, k = spec.n, spec.k

    f = np.full((n, k), NEG_INF)
    cum = np.cumsum(e, axis=0)
    f[:, 0] = cum[:, 0]
    for s in range(1, k):
        a = f[:, s - 1] - cum[:, s]
        best_prev = np.empty(n)
        best_prev[0] = NEG_INF
        np.maximum.accumulate(a[:-1], out=best_prev[1:])
        f[:, s] = cum[:, s] + best_prev

    b = np.full((n, k), NEG_INF)
    total = cum[-1]
    suf = total[None, :] - cum  # suffix sums over rows i+1..n-1
    b[:, k - 1] = suf[:, k - 1]
    for s in range(k - 2, -1, -1):
        d = np.full(n, NEG_INF)
        d[:-1] = -suf[:-1, s] + e[1:, s + 1] + b[1:, s + 1]
        best_next = np.maximum.accumulate(d[::-1])[::-1]
        b[:, s] = suf[:, s] + best_next

    return _finish(spec, "max", f, b)


def forward_backward(log_emissions: np.ndarray) -> tuple[LatticeScores, np.ndarray]:
    """Sum lattice plus the posterior weights w_i(k) = P(R_i=k | X, R_n=K).

    Each weight row is normalized over the feasible states and sums to 1.
    """
    e, spec = _check_emissions(log_emissions)
    n, k = spec.n, spec.k

    f = np.full((n, k), NEG_INF)
    f[0, 0] = e[0, 0]
    for i in range(1, n):
        prev = f[i - 1]
        shifted = np.concatenate([[NEG_INF], prev[:-1]])
        f[i] = e[i] + np.logaddexp(prev, shifted)

    b = np.full((n, k), NEG_INF)
    b[n - 1, k - 1] = 0.0
    for i in range(n - 2, -1, -1):
        nxt = e[i + 1] + b[i + 1]
        shifted = np.concatenate([nxt[1:], [NEG_INF]])
        b[i] = np.logaddexp(nxt, shifted)

    step = spec.step_logweight
    if step:
        rows = np.arange(n, dtype=float)
        f = f + (rows * step)[:, None]
        b = b + ((n - 1 - rows) * step)[:, None]
    lattice = _finish(spec, "sum", f, b, add_step=False)

    s = lattice.log_forward + lattice.log_backward
    s = s - lattice.log_norm
    omega = np.exp(s)
    omega[~spec.feasible_mask()] = 0.0
    omega /= omega.sum(axis=1, keepdims=True)
    return lattice, omega


def _finish(spec: ChainSpec, kind: str, f: np.ndarray, b: np.ndarray,
            add_step: bool = True) -> LatticeScores:
    if add_step and spec.step_logweight:
        rows = np.arange(spec.n, dtype=float)
        f = f + (rows * spec.step_logweight)[:, None]
        b = b + ((spec.n - 1 - rows) * spec.step_logweight)[:, None]
    mask = spec.feasible_mask()
    f = np.where(mask, f, NEG_INF)
    b = np.where(mask, b, NEG_INF)
    f.setflags(write=False)
    b.setflags(write=False)
    return LatticeScores(spec, kind, f, b)


def map_decode(lattice: LatticeScores) -> Segmentation:
    """Per-position argmax of F_max * B_max, ties toward the smaller state.

    When the pointwise argmax violates the chain constraint (possible only
    under exact ties) the single best path is backtracked instead; the result
    is always a valid segmentation.
    """
    labels, ok = _argmax_labels(lattice)
    if not ok:
        return viterbi_path(lattice)
    return Segmentation.from_labels(labels + 1)


def _argmax_labels(lattice: LatticeScores) -> tuple[np.ndarray, bool]:
    if lattice.kind != "max":
        raise DataError("decoding requires a max lattice")
    s = lattice.log_forward + lattice.log_backward
    labels = np.argmax(s, axis=1)  # first maximum = smaller k
    diffs = np.diff(labels)
    ok = (labels[0] == 0 and labels[-1] == lattice.spec.k - 1
          and diffs.min(initial=0) >= 0 and diffs.max(initial=0) <= 1)
    return labels, bool(ok)


def viterbi_path(lattice: LatticeScores) -> Segmentation:
    """Backtrack the single best path from the max-forward lattice.

    Ties prefer staying in the current segment.
    """
    if lattice.kind != "max":
        raise DataError("decoding requires a max lattice")
    f = lattice.log_forward
    n, k = f.shape
    labels = np.empty(n, dtype=np.int64)
    state = k - 1
    labels[-1] = state
    for i in range(n - 1, 0, -1):
        if state > 0 and not f[i - 1, state] >= f[i - 1, state - 1]:
            state -= 1
        labels[i - 1] = state
    return Segmentation.from_labels(labels + 1)
