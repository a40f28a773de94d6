"""Ordered-dataset model and CSV ingestion.

Rows are taken in the order they arrive; the library never sorts. Breakpoints
follow the 1-based "last index of a segment" convention: a breakpoint ``b``
means rows ``1..b`` form one segment and row ``b+1`` starts the next.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DataError


class ResponseKind(Enum):
    """Supported response families.

    ``CENSORED_TIME`` carries a strictly positive observed time plus an event
    indicator (1 = event, 0 = censored); the other kinds are plain vectors.
    """

    CONTINUOUS = "continuous"
    BINARY = "binary"
    COUNT = "count"
    CENSORED_TIME = "censored_time"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Ordered observations: a response vector plus an n x p covariate matrix.

    Immutable after construction; safe to share read-only across workers.
    The intercept column is added inside the models, never stored here.
    """

    kind: ResponseKind
    y: np.ndarray
    covariates: np.ndarray
    event: np.ndarray | None = None

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1 or y.shape[0] < 2:
            raise DataError("response must be a 1-d vector with n >= 2")
        n = y.shape[0]
        x = np.asarray(self.covariates, dtype=float)
        if x.size == 0:
            x = np.empty((n, 0))
        if x.ndim != 2 or x.shape[0] != n:
            raise DataError(f"covariate matrix must be {n} x p, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DataError("covariate matrix contains non-finite entries")
        if not np.all(np.isfinite(y)):
            raise DataError("response vector contains non-finite entries")

        ev = self.event
        if self.kind is ResponseKind.CENSORED_TIME:
            if ev is None:
                raise DataError("censored-time data requires an event indicator")
            ev = np.asarray(ev)
            if ev.shape != (n,) or not np.isin(ev, (0, 1)).all():
                raise DataError("event indicator must be a length-n vector in {0,1}")
            if np.any(y <= 0):
                raise DataError("censored-time responses must be strictly positive")
            ev = _readonly(ev.astype(np.int8))
        else:
            if ev is not None:
                raise DataError("event indicator only applies to censored-time data")
            if self.kind is ResponseKind.BINARY and not np.isin(y, (0.0, 1.0)).all():
                raise DataError("binary responses must take values in {0,1}")
            if self.kind is ResponseKind.COUNT:
                if np.any(y < 0) or not np.allclose(y, np.round(y)):
                    raise DataError("count responses must be non-negative integers")

        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "covariates", _readonly(x))
        object.__setattr__(self, "event", ev)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    def slice(self, start: int, end: int) -> "Dataset":
        """Sub-dataset of rows ``start..end-1`` (0-based, half-open)."""
        ev = None if self.event is None else self.event[start:end]
        return Dataset(self.kind, self.y[start:end], self.covariates[start:end], ev)

    def permuted(self, order: np.ndarray) -> "Dataset":
        """Rows reordered by the given index array."""
        ev = None if self.event is None else self.event[order]
        return Dataset(self.kind, self.y[order], self.covariates[order], ev)


@dataclass(frozen=True)
class Segmentation:
    """Strictly increasing breakpoints splitting rows 1..n into K segments.

    ``breakpoints[k-1]`` is the (1-based) last row index of segment k, so
    0 < b_1 < ... < b_{K-1} < n and segment k covers rows b_{k-1}+1 .. b_k.
    """

    n: int
    breakpoints: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DataError("segmentation length must be positive")
        bps = tuple(int(b) for b in self.breakpoints)
        prev = 0
        for b in bps:
            if not prev < b < self.n:
                raise DataError(
                    f"breakpoints must satisfy 0 < b_1 < ... < b_K-1 < n, got {bps}"
                )
            prev = b
        object.__setattr__(self, "breakpoints", bps)

    @property
    def k(self) -> int:
        return len(self.breakpoints) + 1

    def bounds(self, k: int) -> tuple[int, int]:
        """0-based half-open row range of segment ``k`` (1-based k)."""
        if not 1 <= k <= self.k:
            raise DataError(f"segment index {k} out of range 1..{self.k}")
        edges = (0, *self.breakpoints, self.n)
        return edges[k - 1], edges[k]

    def labels(self) -> np.ndarray:
        """Per-row segment index in 1..K."""
        lab = np.ones(self.n, dtype=np.int64)
        for b in self.breakpoints:
            lab[b:] += 1
        return lab

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Segmentation":
        lab = np.asarray(labels)
        steps = np.flatnonzero(np.diff(lab) != 0) + 1
        if np.any(np.diff(lab) < 0) or np.any(np.diff(lab) > 1):
            raise DataError("labels must be non-decreasing with unit steps")
        return cls(len(lab), tuple(int(s) for s in steps))


def segment_members(seg: Segmentation, k: int) -> range:
    """1-based inclusive row indices of segment ``k``: {b_{k-1}+1, ..., b_k}."""
    start, end = seg.bounds(k)
    return range(start + 1, end + 1)


_KIND_ALIASES = {
    "continuous": ResponseKind.CONTINUOUS,
    "binary": ResponseKind.BINARY,
    "count": ResponseKind.COUNT,
    "censored_time": ResponseKind.CENSORED_TIME,
    "censored": ResponseKind.CENSORED_TIME,
}


def _parse_float(value: str, row: int, column: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise DataError(f"non-numeric value {value!r} in row {row}, column {column!r}") from None


def load_csv(
    path: str,
    kind: ResponseKind | str,
    response: str = "y",
    time: str = "time",
    status: str = "status",
    covariates: Sequence[str] | None = None,
) -> Dataset:
    """Read an ordered dataset from a headed CSV file.

    Censored-time schema names both a time and a status column
    (``time,status,<covariates...>``, status 1 = event, 0 = censored);
    other kinds name a single response column. When ``covariates`` is None
    every remaining column is used, in file order. Rows keep file order.
    Row numbers in error messages count data rows from 1.
    """
    if isinstance(kind, str):
        try:
            kind = _KIND_ALIASES[kind.lower()]
        except KeyError:
            raise DataError(f"unknown response kind {kind!r}") from None

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = list(reader)

    header = [h.strip() for h in header]
    col = {name: j for j, name in enumerate(header)}
    wanted = [time, status] if kind is ResponseKind.CENSORED_TIME else [response]
    for name in wanted:
        if name not in col:
            raise DataError(f"missing column {name!r} (header: {header})")
    if covariates is None:
        covariates = [h for h in header if h not in wanted]
    else:
        for name in covariates:
            if name not in col:
                raise DataError(f"missing covariate column {name!r}")

    n = len(rows)
    y = np.empty(n)
    ev = np.empty(n, dtype=np.int8) if kind is ResponseKind.CENSORED_TIME else None
    x = np.empty((n, len(covariates)))
    for i, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise DataError(f"row {i} has {len(row)} fields, expected {len(header)}")
        if kind is ResponseKind.CENSORED_TIME:
            t = _parse_float(row[col[time]], i, time)
            if t <= 0:
                raise DataError(f"non-positive time {t} in row {i}")
            s = _parse_float(row[col[status]], i, status)
            if s not in (0.0, 1.0):
                raise DataError(f"status outside {{0,1}} in row {i}")
            y[i - 1] = t
            ev[i - 1] = int(s)
        else:
            v = _parse_float(row[col[response]], i, response)
            if kind is ResponseKind.BINARY and v not in (0.0, 1.0):
                raise DataError(f"binary value outside {{0,1}} in row {i}")
            if kind is ResponseKind.COUNT and (v < 0 or v != round(v)):
                raise DataError(f"count value must be a non-negative integer in row {i}")
            y[i - 1] = v
        for j, name in enumerate(covariates):
            x[i - 1, j] = _parse_float(row[col[name]], i, name)

    return Dataset(kind, y, x, ev)


def write_csv(data: Dataset, path: str, covariate_names: Iterable[str] | None = None) -> None:
    """Emit a dataset back to CSV with full-precision floats (round-trip safe)."""
    names = list(covariate_names) if covariate_names is not None else [
        f"x{j + 1}" for j in range(data.p)
    ]
    if len(names) != data.p:
        raise DataError(f"expected {data.p} covariate names, got {len(names)}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if data.kind is ResponseKind.CENSORED_TIME:
            writer.writerow(["time", "status", *names])
            for i in range(data.n):
                writer.writerow([repr(data.y[i].item()), int(data.event[i]),
                                 *(repr(v.item()) for v in data.covariates[i])])
        else:
            writer.writerow(["y", *names])
            for i in range(data.n):
                writer.writerow([repr(data.y[i].item()),
                                 *(repr(v.item()) for v in data.covariates[i])])
