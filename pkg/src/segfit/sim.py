"""Scenario generators and evaluation metrics for replication studies.

Scenarios are declarative (JSON-friendly dicts, bundled presets under
``segfit/presets``) and generation is counter-based: replicate r of seed s
draws from a Philox stream keyed by (s, r), so any replicate is reproducible
in isolation. Parameters live in "report space", the per-segment vectors the
metrics are computed on:

* mean: (mu,), shared ``sigma``
* linear: (intercept, b_1..b_p), shared ``sigma``
* logistic / poisson: (intercept, b_1..b_p)
* aft: (intercept, scale, b_1..b_p), per-segment scale, plus
  ``censoring_rate`` of the exponential censoring law
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.special import expit

from .candidates import bs_candidates, combination_search, fl_candidates
from .data import Dataset, ResponseKind, Segmentation
from .exceptions import DataError
from .maxem import SegmentedFit
from .models import get_model
from .oracle import brute_force

_COVARIATE_LAWS = ("uniform", "bernoulli", "index")
METHODS = ("maxem-bs", "maxem-fl", "brute")


@dataclass(frozen=True)
class Scenario:
    """A data-generating configuration with known segment structure."""

    name: str
    model: str
    n: int
    breakpoints: tuple[int, ...]
    segments: tuple[tuple[float, ...], ...]
    covariates: tuple[str, ...] = ()
    sigma: float | None = None
    censoring_rate: float | None = None
    description: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "breakpoints", tuple(int(b) for b in self.breakpoints))
        object.__setattr__(self, "segments",
                           tuple(tuple(float(v) for v in s) for s in self.segments))
        object.__setattr__(self, "covariates", tuple(self.covariates))
        Segmentation(self.n, self.breakpoints)  # validates ordering
        if len(self.segments) != len(self.breakpoints) + 1:
            raise DataError("need exactly one parameter vector per segment")
        for law in self.covariates:
            if law not in _COVARIATE_LAWS:
                raise DataError(f"unknown covariate law {law!r}")
        p = len(self.covariates)
        q = {"mean": 1, "linear": p + 1, "logistic": p + 1,
             "poisson": p + 1, "aft": p + 2}.get(self.model)
        if q is None:
            raise DataError(f"unknown model {self.model!r}")
        if any(len(s) != q for s in self.segments):
            raise DataError(f"{self.model} scenario needs {q} parameters per segment")
        if self.model in ("mean", "linear") and self.sigma is None:
            raise DataError(f"{self.model} scenario requires sigma")
        if self.model == "aft" and self.censoring_rate is None:
            raise DataError("aft scenario requires censoring_rate")

    @property
    def k(self) -> int:
        return len(self.segments)

    def segmentation(self) -> Segmentation:
        return Segmentation(self.n, self.breakpoints)

    def true_labels(self) -> np.ndarray:
        return self.segmentation().labels()

    def true_params(self) -> np.ndarray:
        return np.asarray(self.segments)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items()
                if v is not None and (k != "description" or v)}

    @classmethod
    def from_dict(cls, raw: dict) -> "Scenario":
        allowed = {"name", "model", "n", "breakpoints", "segments",
                   "covariates", "sigma", "censoring_rate", "description"}
        unknown = set(raw) - allowed
        if unknown:
            raise DataError(f"unknown scenario keys {sorted(unknown)}")
        return cls(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in raw.items()})


def _rng(seed: int, replicate: int) -> np.random.Generator:
    key = np.array([seed, replicate], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def generate(scenario: Scenario, seed: int, replicate: int = 0
             ) -> tuple[Dataset, np.ndarray]:
    """Draw one sample; deterministic given (seed, replicate)."""
    rng = _rng(seed, replicate)
    n = scenario.n
    cols = []
    for law in scenario.covariates:
        if law == "uniform":
            cols.append(rng.random(n))
        elif law == "bernoulli":
            cols.append(rng.integers(0, 2, n).astype(float))
        else:  # index
            cols.append((np.arange(n) + 1.0) / n)
    x = np.column_stack(cols) if cols else np.empty((n, 0))
    labels = scenario.true_labels()
    params = scenario.true_params()[labels - 1]  # n x q, row-wise truth
    design = np.column_stack([np.ones(n), x])

    model = scenario.model
    if model == "mean":
        y = params[:, 0] + scenario.sigma * rng.standard_normal(n)
        return Dataset(ResponseKind.CONTINUOUS, y, x), labels
    if model == "linear":
        eta = np.einsum("ij,ij->i", design, params)
        y = eta + scenario.sigma * rng.standard_normal(n)
        return Dataset(ResponseKind.CONTINUOUS, y, x), labels
    if model == "logistic":
        eta = np.einsum("ij,ij->i", design, params)
        y = (rng.random(n) < expit(eta)).astype(float)
        return Dataset(ResponseKind.BINARY, y, x), labels
    if model == "poisson":
        eta = np.einsum("ij,ij->i", design, params)
        y = rng.poisson(np.exp(np.minimum(eta, 30.0))).astype(float)
        return Dataset(ResponseKind.COUNT, y, x), labels
    # aft: log Y = x'beta + scale * w with extreme-value w, censored by Exp(rate)
    beta = np.column_stack([params[:, 0], params[:, 2:]])
    scale = params[:, 1]
    eta = np.einsum("ij,ij->i", design, beta)
    w = np.log(-np.log(rng.random(n)))
    y = np.exp(eta + scale * w)
    censor = rng.exponential(1.0 / scenario.censoring_rate, n)
    t = np.minimum(y, censor)
    event = (y <= censor).astype(np.int8)
    return Dataset(ResponseKind.CENSORED_TIME, t, x, event), labels


def report_params(model_name: str, theta: np.ndarray) -> np.ndarray:
    """Map a fitted parameter vector into the scenario's report space."""
    theta = np.asarray(theta, dtype=float)
    if model_name == "mean":
        return theta[:1]
    if model_name == "linear":
        return theta[:-1]
    if model_name in ("logistic", "poisson"):
        return theta.copy()
    if model_name == "aft":
        return np.concatenate([[theta[0], np.exp(theta[-1])], theta[1:-1]])
    raise DataError(f"unknown model {model_name!r}")


@dataclass(frozen=True)
class MetricsReport:
    """Replication metrics; mse = bias2 + var holds exactly by construction."""

    mse: float
    bias2: float
    var: float
    mape: float
    acce: float
    j: int
    mape_skipped: int = 0
    excluded: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(fits: Sequence[SegmentedFit], scenario: Scenario) -> MetricsReport:
    """Parameter and allocation error of per-replicate fits against the truth.

    Replicates whose segment count differs from the truth are excluded and
    counted. MAPE skips truth coordinates smaller than 1e-12 in magnitude
    and reports how many (segment, coordinate) cells were skipped.
    """
    truth = scenario.true_params()
    k, q = truth.shape
    true_labels = scenario.true_labels()
    excluded = 0
    est = []
    mismatches = 0.0
    for fit in fits:
        if fit.k != k:
            excluded += 1
            continue
        est.append(np.stack([report_params(scenario.model, th) for th in fit.thetas]))
        mismatches += float(np.sum(fit.segmentation.labels() != true_labels))
    j = len(est)
    if j == 0:
        raise DataError("no replicate produced the true number of segments")
    est = np.stack(est)  # j x k x q

    err = est - truth[None, :, :]
    mse = float(np.sum(err * err) / (k * j))
    mean_est = est.mean(axis=0)
    bias = mean_est - truth
    bias2 = float(np.sum(bias * bias) / k)
    dev = est - mean_est[None, :, :]
    var = float(np.sum(dev * dev) / (k * j))

    keep = np.abs(truth) >= 1e-12
    mape_skipped = int(np.sum(~keep))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(err) / np.abs(truth)[None, :, :]
    mape = float(np.sum(rel[:, keep]) / (k * j))

    acce = mismatches / (scenario.n * j)
    return MetricsReport(mse, bias2, var, mape, acce, j, mape_skipped, excluded)


def run_one(scenario: Scenario, method: str, seed: int, replicate: int, *,
            bs_depth: int = 4, max_enumerations: int = 10_000_000) -> SegmentedFit:
    """Generate replicate data and fit it with the requested method."""
    if method not in METHODS:
        raise DataError(f"method must be one of {METHODS}, got {method!r}")
    data, _ = generate(scenario, seed, replicate)
    model = get_model(scenario.model)
    if method == "brute":
        return brute_force(data, model, scenario.k, max_enumerations=max_enumerations)
    if scenario.k == 1:
        return combination_search(data, model, 1, bs_candidates(data, model, depth=1))
    if method == "maxem-bs":
        pool = bs_candidates(data, model, depth=bs_depth)
    else:
        pool = fl_candidates(data, model, scenario.k)
    return combination_search(data, model, scenario.k, pool)


def _replicate_chunk(scenario, method, seed, indices, bs_depth, max_enumerations):
    return [run_one(scenario, method, seed, r, bs_depth=bs_depth,
                    max_enumerations=max_enumerations) for r in indices]


def run_replicates(scenario: Scenario, method: str = "maxem-bs", j: int = 100,
                   seed: int = 0, *, n_jobs: int = 1, bs_depth: int = 4,
                   max_enumerations: int = 10_000_000
                   ) -> tuple[MetricsReport, list[dict], list[SegmentedFit]]:
    """J independent replicates; returns metrics, raw records and the fits."""
    indices = list(range(j))
    if n_jobs != 1 and j >= 4:
        n_chunks = min(j, 4 * abs(n_jobs))
        chunks = [indices[c::n_chunks] for c in range(n_chunks) if indices[c::n_chunks]]
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_replicate_chunk)(scenario, method, seed, c, bs_depth,
                                      max_enumerations)
            for c in chunks
        )
        fits: list[SegmentedFit] = [None] * j
        for chunk, part in zip(chunks, parts):
            for r, fit in zip(chunk, part):
                fits[r] = fit
    else:
        fits = _replicate_chunk(scenario, method, seed, indices, bs_depth,
                                max_enumerations)
    records = [
        {"replicate": r, "breakpoints": list(fit.breakpoints),
         "loglik": fit.loglik, "converged": fit.converged,
         "degenerate": fit.degenerate}
        for r, fit in enumerate(fits)
    ]
    return evaluate(fits, scenario), records, fits


# ---------------------------------------------------------------------------
# Presets


def list_presets() -> list[str]:
    root = resources.files("segfit").joinpath("presets")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> Scenario:
    """Load a bundled preset by name, or any scenario JSON by path."""
    if os.path.exists(name):
        with open(name) as fh:
            return Scenario.from_dict(json.load(fh))
    ref = resources.files("segfit").joinpath("presets", f"{name}.json")
    try:
        raw = ref.read_text()
    except FileNotFoundError:
        raise DataError(
            f"unknown preset {name!r}; available: {', '.join(list_presets())}"
        ) from None
    return Scenario.from_dict(json.loads(raw))
