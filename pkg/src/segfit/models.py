"""Per-observation emission families: log-density, MLE, score and Hessian.

Five regression families share one interface: mean, linear, logistic, Poisson
and Weibull accelerated-failure-time. Scale parameters are stored on the log
scale so the whole parameter space is unconstrained and Newton iterations need
no box constraints. Every family also exposes the pieces the rest of the
package builds on: vectorized log-density columns for the lattice recursions,
prefix-statistic range fitters for contiguous segments, and the convex
unit-scale loss used by the fused-lasso initializer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln

from .data import Dataset, ResponseKind
from .exceptions import DataError, FitError

SIGMA_FLOOR = 1e-8
NEWTON_MAX_ITER = 100
NEWTON_MAX_HALVINGS = 30
GRAD_TOL = 1e-8
RIDGE_FALLBACK = 1e-4
_DIVERGENCE_NORM = 1e3


@dataclass(frozen=True)
class FitResult:
    """Outcome of a per-segment MLE.

    ``loglik`` is always the unpenalized log-likelihood at ``theta``;
    ``degenerate`` marks fits that hit the sigma floor, needed a ridge
    fallback, ran out of iterations, or had fewer observations than
    parameters.
    """

    theta: np.ndarray
    loglik: float
    degenerate: bool = False
    n_iter: int = 0
    message: str = ""


def _design(data) -> np.ndarray:
    return np.column_stack([np.ones(data.n), data.covariates])


def _as_index(data, idx) -> np.ndarray:
    if idx is None:
        return np.arange(data.n)
    idx = np.asarray(idx, dtype=np.intp)
    if idx.size == 0:
        raise FitError("empty index set")
    return idx


@dataclass(frozen=True)
class RowView:
    """Unvalidated row subset of a dataset; may hold a single row.

    Models only read ``y``, ``covariates``, ``event``, ``n`` and ``p``, so
    this stands in for a Dataset wherever per-segment work needs fewer than
    two rows.
    """

    y: np.ndarray
    covariates: np.ndarray
    event: np.ndarray | None

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]


def subset_rows(data, idx) -> "RowView | Dataset":
    idx = _as_index(data, idx)
    if idx.size == data.n and np.array_equal(idx, np.arange(data.n)):
        return data
    ev = None if data.event is None else data.event[idx]
    return RowView(data.y[idx], data.covariates[idx], ev)


class EmissionModel:
    """Behavior contract shared by all response families.

    Subclasses implement the per-observation log-density together with its
    analytic gradient and Hessian in the unconstrained parameterization, and
    a maximum-likelihood fit over an index set. All operations are pure
    functions of (dataset, theta); models carry no state.
    """

    name: str = ""
    kind: ResponseKind = ResponseKind.CONTINUOUS
    #: closed-form exact MLE (mean/linear); enables shared fit caches and
    #: small-sample tail refits in the likelihood-ratio scan
    exact_mle: bool = False

    def dim(self, data: Dataset) -> int:
        raise NotImplementedError

    # -- densities -----------------------------------------------------
    def log_density_all(self, data: Dataset, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_density(self, data: Dataset, i: int, theta: np.ndarray) -> float:
        """log e_i(.; theta) for a single (1-based) row index."""
        return float(self.log_density_all(data, theta)[i - 1])

    def emission_matrix(self, data: Dataset, thetas: np.ndarray) -> np.ndarray:
        """n x K matrix of log e_i(k; theta_k)."""
        thetas = np.atleast_2d(thetas)
        return np.column_stack([self.log_density_all(data, th) for th in thetas])

    # -- derivatives ---------------------------------------------------
    def score_all(self, data: Dataset, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def score(self, data: Dataset, i: int, theta: np.ndarray) -> np.ndarray:
        """Gradient of the log-density of (1-based) row i."""
        return self.score_all(data, theta)[i - 1]

    def hessian_sum(self, data: Dataset, idx, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- fitting -------------------------------------------------------
    def initial_theta(self, data: Dataset, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def fit_mle(self, data: Dataset, idx=None, ridge: float = 0.0,
                init: np.ndarray | None = None) -> FitResult:
        idx = _as_index(data, idx)
        theta0 = np.asarray(init, dtype=float) if init is not None else self.initial_theta(data, idx)
        return _newton_mle(self, data, idx, theta0, ridge)

    def range_fitter(self, data: Dataset) -> "RangeFitter":
        """Fitter for contiguous 0-based half-open row ranges."""
        return RangeFitter(self, data)

    # -- optional fast paths (overridden by closed-form families) ------
    def prefix_fit_logliks(self, data: Dataset, rows: np.ndarray,
                           lengths: np.ndarray):
        """Fitted logliks over growing prefixes of ``rows``; None = no fast path."""
        return None

    # -- fused-lasso support --------------------------------------------
    def fl_dim(self, data: Dataset) -> int:
        """Number of per-observation coordinates entering the TV path."""
        raise NotImplementedError

    def fl_value_grad(self, data: Dataset, b: np.ndarray) -> tuple[float, np.ndarray]:
        """Convex unit-scale loss -log e_i(i; b_i) (constants dropped) and its gradient."""
        raise NotImplementedError


class RangeFitter:
    """Default range fitter: delegates to fit_mle on the sliced rows."""

    def __init__(self, model: EmissionModel, data: Dataset):
        self.model = model
        self.data = data

    def fit(self, start: int, end: int, init: np.ndarray | None = None) -> FitResult:
        return self.model.fit_mle(self.data, np.arange(start, end), init=init)


def _newton_mle(model: EmissionModel, data: Dataset, idx: np.ndarray,
                theta0: np.ndarray, ridge: float) -> FitResult:
    """Maximize sum of log-densities over ``idx`` (minus ridge*||theta||^2).

    Monotone ascent: Newton direction with positive-definite damping and up
    to NEWTON_MAX_HALVINGS step halvings, so the returned value never falls
    below the value at ``theta0``. Diverging iterates (logistic separation,
    all-censored survival segments) trigger one ridge-regularized refit and
    the result is flagged degenerate.
    """
    m = idx.size
    sub = subset_rows(data, idx)
    gtol = GRAD_TOL * max(1.0, m)

    def value(th):
        v = float(np.sum(model.log_density_all(sub, th)))
        return v - ridge * float(th @ th)

    theta = theta0.copy()
    f = value(theta)
    if not np.isfinite(f):
        raise FitError(f"{model.name}: non-finite log-likelihood at the starting point")
    n_iter = 0
    degenerate = False
    message = ""
    for n_iter in range(1, NEWTON_MAX_ITER + 1):
        g = model.score_all(sub, theta).sum(axis=0) - 2.0 * ridge * theta
        if np.max(np.abs(g)) < gtol:
            n_iter -= 1
            break
        h = model.hessian_sum(sub, None, theta)
        if ridge:
            h = h - 2.0 * ridge * np.eye(h.shape[0])
        step = _solve_ascent(h, g)
        t = 1.0
        accepted = False
        for _ in range(NEWTON_MAX_HALVINGS + 1):
            cand = model._project(theta + t * step)
            fc = value(cand)
            if np.isfinite(fc) and fc >= f:
                moved = bool(np.max(np.abs(cand - theta)) >
                             1e-14 * (1.0 + np.max(np.abs(theta))))
                theta, f = cand, fc
                accepted = moved  # pinned at a bound counts as a stall
                break
            t *= 0.5
        if not accepted:
            message = "line search stalled"
            break
        if np.max(np.abs(theta)) > _DIVERGENCE_NORM:
            if ridge == 0.0:
                res = _newton_mle(model, data, idx, model.initial_theta(data, idx), RIDGE_FALLBACK)
                ll = float(np.sum(model.log_density_all(sub, res.theta)))
                return FitResult(res.theta, ll, True, res.n_iter, "diverging fit; ridge refit")
            message = "diverging iterates"
            degenerate = True
            break
    else:
        degenerate = True
        message = "max iterations reached"

    g = model.score_all(sub, theta).sum(axis=0) - 2.0 * ridge * theta
    if np.max(np.abs(g)) >= gtol:
        degenerate = True
        message = message or "gradient tolerance not met"
    if model._at_boundary(theta):
        degenerate = True
        message = message or "scale floored"
    ll = float(np.sum(model.log_density_all(sub, theta)))
    return FitResult(theta, ll, degenerate, n_iter, message)


def _solve_ascent(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Newton ascent direction from a (possibly indefinite) Hessian."""
    a = -h
    lam = 0.0
    scale = max(1.0, float(np.trace(a)) / a.shape[0])
    for _ in range(40):
        try:
            c = np.linalg.cholesky(a + lam * np.eye(a.shape[0]))
            w = np.linalg.solve(c, g)
            return np.linalg.solve(c.T, w)
        except np.linalg.LinAlgError:
            lam = max(2.0 * lam, 1e-10 * scale)
    return g / scale  # last resort: gradient step


# ---------------------------------------------------------------------------
# Gaussian families


class MeanModel(EmissionModel):
    """Intercept-only normal: theta = (mu, log sigma). Covariates are ignored."""

    name = "mean"
    kind = ResponseKind.CONTINUOUS
    exact_mle = True

    def dim(self, data: Dataset) -> int:
        return 2

    def log_density_all(self, data, theta):
        mu, s = theta
        sig2 = np.exp(2.0 * s)
        r = data.y - mu
        return -0.5 * np.log(2.0 * np.pi) - s - r * r / (2.0 * sig2)

    def emission_matrix(self, data, thetas):
        thetas = np.atleast_2d(thetas)
        mu, s = thetas[:, 0], thetas[:, 1]
        r = data.y[:, None] - mu[None, :]
        return -0.5 * np.log(2.0 * np.pi) - s[None, :] - r * r / (2.0 * np.exp(2.0 * s))[None, :]

    def score_all(self, data, theta):
        mu, s = theta
        sig2 = np.exp(2.0 * s)
        r = data.y - mu
        return np.column_stack([r / sig2, r * r / sig2 - 1.0])

    def hessian_sum(self, data, idx, theta):
        mu, s = theta
        sig2 = np.exp(2.0 * s)
        y = data.y if idx is None else data.y[_as_index(data, idx)]
        r = y - mu
        m = y.size
        sr = float(np.sum(r))
        sr2 = float(np.sum(r * r))
        return np.array([[-m / sig2, -2.0 * sr / sig2],
                         [-2.0 * sr / sig2, -2.0 * sr2 / sig2]])

    def initial_theta(self, data, idx):
        y = data.y[idx]
        return np.array([float(np.mean(y)), float(np.log(max(np.std(y), 1.0)))])

    def fit_mle(self, data, idx=None, ridge=0.0, init=None):
        if ridge:
            return super().fit_mle(data, idx, ridge, init)
        idx = _as_index(data, idx)
        y = data.y[idx]
        return _gaussian_closed_form(float(np.mean(y)), float(np.mean(y * y)), y.size, None)

    def range_fitter(self, data):
        return _MeanRangeFitter(self, data)

    def prefix_fit_logliks(self, data, rows, lengths):
        y = data.y[rows]
        c1 = np.cumsum(y)
        c2 = np.cumsum(y * y)
        m = lengths.astype(float)
        mean = c1[lengths - 1] / m
        mss = np.maximum(c2[lengths - 1] / m - mean * mean, 0.0)
        sig = np.sqrt(mss)
        deg = sig < SIGMA_FLOOR
        sig = np.maximum(sig, SIGMA_FLOOR)
        ll = -m * (0.5 * np.log(2.0 * np.pi) + np.log(sig)) - m * mss / (2.0 * sig * sig)
        return ll, deg

    def fl_dim(self, data):
        return 1

    def fl_value_grad(self, data, b):
        r = b[:, 0] - data.y
        return 0.5 * float(r @ r), r[:, None]

    def _project(self, theta):
        return _floor_log_scale(theta)

    def _at_boundary(self, theta):
        return theta[-1] <= np.log(SIGMA_FLOOR) + 1e-12


def _floor_log_scale(theta: np.ndarray) -> np.ndarray:
    if theta[-1] < np.log(SIGMA_FLOOR):
        theta = theta.copy()
        theta[-1] = np.log(SIGMA_FLOOR)
    return theta


def _gaussian_closed_form(mean: float, mean_sq: float, m: int, beta) -> FitResult:
    mss = max(mean_sq - mean * mean, 0.0)
    sig = np.sqrt(mss)
    floored = sig < SIGMA_FLOOR
    sig = max(sig, SIGMA_FLOOR)
    ll = -m * (0.5 * np.log(2.0 * np.pi) + np.log(sig)) - m * mss / (2.0 * sig * sig)
    theta = np.array([mean, np.log(sig)]) if beta is None else np.append(beta, np.log(sig))
    return FitResult(theta, float(ll), bool(floored), 0,
                     "sigma floored" if floored else "")


class _MeanRangeFitter(RangeFitter):
    def __init__(self, model, data):
        super().__init__(model, data)
        self._c1 = np.concatenate([[0.0], np.cumsum(data.y)])
        self._c2 = np.concatenate([[0.0], np.cumsum(data.y * data.y)])

    def fit(self, start, end, init=None):
        m = end - start
        mean = (self._c1[end] - self._c1[start]) / m
        mean_sq = (self._c2[end] - self._c2[start]) / m
        res = _gaussian_closed_form(mean, mean_sq, m, None)
        if m < 2:
            res = FitResult(res.theta, res.loglik, True, 0, "fewer rows than parameters")
        return res


class LinearModel(EmissionModel):
    """Gaussian linear regression: theta = (intercept, beta_1..p, log sigma)."""

    name = "linear"
    kind = ResponseKind.CONTINUOUS
    exact_mle = True

    def dim(self, data: Dataset) -> int:
        return data.p + 2

    def _split(self, theta):
        return theta[:-1], theta[-1]

    def log_density_all(self, data, theta):
        beta, s = self._split(theta)
        sig2 = np.exp(2.0 * s)
        r = data.y - _design(data) @ beta
        return -0.5 * np.log(2.0 * np.pi) - s - r * r / (2.0 * sig2)

    def emission_matrix(self, data, thetas):
        thetas = np.atleast_2d(thetas)
        d = _design(data)
        resid = data.y[:, None] - d @ thetas[:, :-1].T
        s = thetas[:, -1]
        return -0.5 * np.log(2.0 * np.pi) - s[None, :] - resid * resid / (2.0 * np.exp(2.0 * s)[None, :])

    def score_all(self, data, theta):
        beta, s = self._split(theta)
        sig2 = np.exp(2.0 * s)
        d = _design(data)
        r = data.y - d @ beta
        return np.column_stack([d * (r / sig2)[:, None], r * r / sig2 - 1.0])

    def hessian_sum(self, data, idx, theta):
        beta, s = self._split(theta)
        sig2 = np.exp(2.0 * s)
        if idx is not None:
            data = subset_rows(data, idx)
        d = _design(data)
        r = data.y - d @ beta
        q = d.shape[1]
        h = np.empty((q + 1, q + 1))
        h[:q, :q] = -(d.T @ d) / sig2
        h[:q, q] = h[q, :q] = -2.0 * (d.T @ r) / sig2
        h[q, q] = -2.0 * float(r @ r) / sig2
        return h

    def initial_theta(self, data, idx):
        return np.append(np.zeros(data.p + 1), 0.0)

    def fit_mle(self, data, idx=None, ridge=0.0, init=None):
        if ridge:
            return super().fit_mle(data, idx, ridge, init)
        idx = _as_index(data, idx)
        sub = subset_rows(data, idx)
        d = _design(sub)
        beta, *_ = np.linalg.lstsq(d, sub.y, rcond=None)
        r = sub.y - d @ beta
        m = idx.size
        res = _gaussian_closed_form(0.0, float(r @ r) / m, m, beta)
        if m < self.dim(data):
            res = FitResult(res.theta, res.loglik, True, 0, "fewer rows than parameters")
        return res

    def range_fitter(self, data):
        return _LinearRangeFitter(self, data)

    def prefix_fit_logliks(self, data, rows, lengths):
        d = _design(data)[rows]
        y = data.y[rows]
        q = d.shape[1]
        top = int(lengths.max())
        gram = np.cumsum(d[:top, :, None] * d[:top, None, :], axis=0)[lengths - 1]
        xty = np.cumsum(d[:top] * y[:top, None], axis=0)[lengths - 1]
        yty = np.cumsum(y[:top] * y[:top])[lengths - 1]
        m = lengths.astype(float)
        ll = np.empty(len(lengths))
        deg = np.zeros(len(lengths), dtype=bool)
        for j in range(len(lengths)):
            try:
                beta = np.linalg.solve(gram[j], xty[j])
            except np.linalg.LinAlgError:
                beta = np.linalg.pinv(gram[j]) @ xty[j]
                deg[j] = True
            mss = max((yty[j] - beta @ xty[j]) / m[j], 0.0)
            sig = max(np.sqrt(mss), SIGMA_FLOOR)
            deg[j] |= sig <= SIGMA_FLOOR or lengths[j] < q + 1
            ll[j] = -m[j] * (0.5 * np.log(2.0 * np.pi) + np.log(sig)) - m[j] * mss / (2.0 * sig * sig)
        return ll, deg

    def fl_dim(self, data):
        return data.p + 1

    def fl_value_grad(self, data, b):
        d = _design(data)
        r = np.einsum("ij,ij->i", d, b) - data.y
        return 0.5 * float(r @ r), d * r[:, None]

    def _project(self, theta):
        return _floor_log_scale(theta)

    def _at_boundary(self, theta):
        return theta[-1] <= np.log(SIGMA_FLOOR) + 1e-12


class _LinearRangeFitter(RangeFitter):
    def __init__(self, model, data):
        super().__init__(model, data)
        d = _design(data)
        q = d.shape[1]
        self._q = q
        self._gram = np.zeros((data.n + 1, q, q))
        np.cumsum(d[:, :, None] * d[:, None, :], axis=0, out=self._gram[1:])
        self._xty = np.zeros((data.n + 1, q))
        np.cumsum(d * data.y[:, None], axis=0, out=self._xty[1:])
        self._yty = np.concatenate([[0.0], np.cumsum(data.y * data.y)])

    def fit(self, start, end, init=None):
        m = end - start
        g = self._gram[end] - self._gram[start]
        b = self._xty[end] - self._xty[start]
        singular = False
        try:
            beta = np.linalg.solve(g, b)
        except np.linalg.LinAlgError:
            beta = np.linalg.pinv(g) @ b
            singular = True
        mss = max((self._yty[end] - self._yty[start] - beta @ b) / m, 0.0)
        res = _gaussian_closed_form(0.0, mss, m, beta)
        if singular or m < self._q + 1:
            res = FitResult(res.theta, res.loglik, True, 0, "fewer rows than parameters")
        return res


# ---------------------------------------------------------------------------
# GLM families


class LogisticModel(EmissionModel):
    """Bernoulli regression on the logit scale: theta = (intercept, beta_1..p)."""

    name = "logistic"
    kind = ResponseKind.BINARY

    def dim(self, data: Dataset) -> int:
        return data.p + 1

    def log_density_all(self, data, theta):
        eta = _design(data) @ theta
        # y*eta - log(1+exp(eta)), stable for |eta| large
        return data.y * eta - np.logaddexp(0.0, eta)

    def score_all(self, data, theta):
        d = _design(data)
        p = expit(d @ theta)
        return d * (data.y - p)[:, None]

    def hessian_sum(self, data, idx, theta):
        if idx is not None:
            data = subset_rows(data, idx)
        d = _design(data)
        p = expit(d @ theta)
        w = p * (1.0 - p)
        return -(d * w[:, None]).T @ d

    def initial_theta(self, data, idx):
        m = idx.size
        pbar = np.clip(np.mean(data.y[idx]), 1.0 / (m + 2.0), (m + 1.0) / (m + 2.0))
        th = np.zeros(data.p + 1)
        th[0] = np.log(pbar / (1.0 - pbar))
        return th

    def fl_dim(self, data):
        return data.p + 1

    def fl_value_grad(self, data, b):
        d = _design(data)
        eta = np.einsum("ij,ij->i", d, b)
        value = float(np.sum(np.logaddexp(0.0, eta) - data.y * eta))
        return value, d * (expit(eta) - data.y)[:, None]

    def _project(self, theta):
        return theta

    def _at_boundary(self, theta):
        return False


class PoissonModel(EmissionModel):
    """Log-linear count regression: theta = (intercept, beta_1..p)."""

    name = "poisson"
    kind = ResponseKind.COUNT

    def dim(self, data: Dataset) -> int:
        return data.p + 1

    def log_density_all(self, data, theta):
        eta = _design(data) @ theta
        return data.y * eta - np.exp(np.minimum(eta, 700.0)) - gammaln(data.y + 1.0)

    def score_all(self, data, theta):
        d = _design(data)
        lam = np.exp(np.minimum(d @ theta, 700.0))
        return d * (data.y - lam)[:, None]

    def hessian_sum(self, data, idx, theta):
        if idx is not None:
            data = subset_rows(data, idx)
        d = _design(data)
        lam = np.exp(np.minimum(d @ theta, 700.0))
        return -(d * lam[:, None]).T @ d

    def initial_theta(self, data, idx):
        th = np.zeros(data.p + 1)
        th[0] = np.log(max(np.mean(data.y[idx]), 1e-8))
        return th

    def fl_dim(self, data):
        return data.p + 1

    def fl_value_grad(self, data, b):
        d = _design(data)
        eta = np.einsum("ij,ij->i", d, b)
        lam = np.exp(np.minimum(eta, 700.0))
        return float(np.sum(lam - data.y * eta)), d * (lam - data.y)[:, None]

    def _project(self, theta):
        return theta

    def _at_boundary(self, theta):
        return False


class WeibullAftModel(EmissionModel):
    """Weibull AFT for right-censored times: theta = (intercept, beta_1..p, log sigma).

    With w = (log t - x'beta)/sigma the event contribution is
    -log sigma - log t + w - exp(w) and a censored row contributes the
    log-survival -exp(w).
    """

    name = "aft"
    kind = ResponseKind.CENSORED_TIME

    def dim(self, data: Dataset) -> int:
        return data.p + 2

    def _w(self, data, theta):
        beta, s = theta[:-1], theta[-1]
        sig = np.exp(s)
        w = (np.log(data.y) - _design(data) @ beta) / sig
        return w, sig, s

    def log_density_all(self, data, theta):
        w, sig, s = self._w(data, theta)
        delta = data.event.astype(float)
        ew = np.exp(np.minimum(w, 700.0))
        return delta * (-s - np.log(data.y) + w) - ew

    def score_all(self, data, theta):
        w, sig, _ = self._w(data, theta)
        delta = data.event.astype(float)
        ew = np.exp(np.minimum(w, 700.0))
        d = _design(data)
        g_beta = d * ((ew - delta) / sig)[:, None]
        g_s = -delta * (1.0 + w) + w * ew
        return np.column_stack([g_beta, g_s])

    def hessian_sum(self, data, idx, theta):
        if idx is not None:
            data = subset_rows(data, idx)
        w, sig, _ = self._w(data, theta)
        delta = data.event.astype(float)
        ew = np.exp(np.minimum(w, 700.0))
        d = _design(data)
        q = d.shape[1]
        h = np.empty((q + 1, q + 1))
        h[:q, :q] = -(d * (ew / sig**2)[:, None]).T @ d
        hbs = -(d * ((ew * (1.0 + w) - delta) / sig)[:, None]).sum(axis=0)
        h[:q, q] = h[q, :q] = hbs
        h[q, q] = float(np.sum(delta * w - w * (1.0 + w) * ew))
        return h

    def initial_theta(self, data, idx):
        lt = np.log(data.y[idx])
        th = np.zeros(data.p + 2)
        th[0] = float(np.mean(lt))
        th[-1] = float(np.log(max(np.std(lt), 0.5)))
        return th

    def fl_dim(self, data):
        return data.p + 1

    def fl_value_grad(self, data, b):
        d = _design(data)
        w = np.log(data.y) - np.einsum("ij,ij->i", d, b)
        delta = data.event.astype(float)
        ew = np.exp(np.minimum(w, 700.0))
        return float(np.sum(ew - delta * w)), d * (delta - ew)[:, None]

    def _project(self, theta):
        return _floor_log_scale(theta)

    def _at_boundary(self, theta):
        return theta[-1] <= np.log(SIGMA_FLOOR) + 1e-12


_MODELS = {m.name: m for m in (MeanModel(), LinearModel(), LogisticModel(),
                               PoissonModel(), WeibullAftModel())}


def get_model(name: str) -> EmissionModel:
    """Model registry lookup: mean | linear | logistic | poisson | aft."""
    try:
        return _MODELS[name.lower()]
    except KeyError:
        raise DataError(f"unknown model {name!r}; choose from {sorted(_MODELS)}") from None
