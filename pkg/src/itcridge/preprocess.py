"""Column-wise transforms applied before clustering and regression.

Two distinct chains share this module.  Ahead of the two-way clustering the
raw matrix is screened with the constant-cosine filter and mean-normalized.
Ahead of the ridge fit the selected raw columns go through the shifted log
and are standardized to zero mean, unit sample standard deviation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset

# |mean| below this fraction of the column's max |value| is treated as zero
# and the normalization divisor falls back to 1.
MEAN_GUARD = 1e-8

# Sample sd at or below this (relative to the column scale) counts as zero
# variance; such columns cannot be standardized.
SD_GUARD = 1e-12


@dataclass
class NormalizedMatrix:
    """Mean-normalized values plus bookkeeping about the normalization.

    ``kept_predictor_indices`` are column indices into the originating
    dataset.  ``guard_log`` records, per guarded column, that the divisor
    fell back to 1 because the mean was effectively zero.
    """

    values: np.ndarray
    kept_predictor_indices: list[int]
    guard_log: list[tuple[int, bool]] = field(default_factory=list)


@dataclass
class StandardizationParams:
    """Per-column and response location/scale frozen at fit time."""

    means: np.ndarray
    sds: np.ndarray
    response_mean: float
    response_sd: float


def normalize_predictors(d: Dataset) -> NormalizedMatrix:
    """Shift each column by its mean and divide by |mean|.

    Columns whose mean is effectively zero are divided by 1 instead and an
    entry is appended to the guard log.  An all-zero column normalizes to all
    zeros and triggers a warning, not an error.
    """
    w = d.values
    mu = w.mean(axis=0)
    col_max = np.abs(w).max(axis=0) if d.m else np.zeros(d.n)
    guarded = np.abs(mu) <= MEAN_GUARD * col_max
    all_zero = col_max == 0.0
    guarded = guarded | all_zero
    divisor = np.where(guarded, 1.0, np.abs(mu))
    values = (w - mu) / divisor

    if np.any(all_zero):
        cols = [d.predictor_ids[j] for j in np.flatnonzero(all_zero)]
        warnings.warn(f"all-zero predictor columns normalized to zeros: {cols}")

    return NormalizedMatrix(
        values=values,
        kept_predictor_indices=list(range(d.n)),
        guard_log=[(int(j), True) for j in np.flatnonzero(guarded)],
    )


def constant_cosine_filter(
    d: Dataset, threshold: float = 0.9
) -> tuple[list[int], list[int], np.ndarray]:
    """Drop raw columns nearly parallel to the all-ones vector.

    The cosine |<g, 1>| / (||g|| * ||1||) is computed on raw values; a column
    is removed when it meets or exceeds ``threshold``.  A zero-norm column is
    removed and reported with cosine 1.  Returns (kept, removed, cosines)
    with indices in original column order.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    w = d.values
    norms = np.sqrt((w * w).sum(axis=0))
    sums = np.abs(w.sum(axis=0))
    cosines = np.ones(d.n)
    nz = norms > 0.0
    cosines[nz] = sums[nz] / (norms[nz] * np.sqrt(d.m))
    removed_mask = (cosines >= threshold) | ~nz
    kept = [int(j) for j in np.flatnonzero(~removed_mask)]
    removed = [int(j) for j in np.flatnonzero(removed_mask)]
    return kept, removed, cosines


def log_shift_transform(values) -> np.ndarray:
    """Shifted natural log x' = ln(x + C(x)) applied element-wise.

    C(x) is 1 for x > 0 and otherwise the negated largest integer strictly
    below x, so the argument of the log is always positive: x = -1.7617 gives
    C = 2 and ln(0.2383); x = 0 gives C = 1 and ln(1) = 0.
    """
    x = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("log shift requires finite values")
    floor = np.floor(x)
    strict_floor = np.where(x == floor, floor - 1.0, floor)
    shift = np.where(x > 0.0, 1.0, -strict_floor)
    return np.log(x + shift)


def zero_variance_columns(values: np.ndarray) -> list[int]:
    """Indices of columns whose sample sd is (numerically) zero."""
    v = np.asarray(values, dtype=np.float64)
    sds = v.std(axis=0, ddof=1)
    scale = np.maximum(np.abs(v).max(axis=0), 1.0)
    return [int(j) for j in np.flatnonzero(sds <= SD_GUARD * scale)]


def standardize(
    values: np.ndarray, response: np.ndarray
) -> tuple[np.ndarray, np.ndarray, StandardizationParams]:
    """Center and scale columns and response by mean and sample sd (ddof=1).

    Zero-variance columns cannot be scaled; the error message lists every
    offending column index.  A constant response is rejected the same way.
    """
    v = np.asarray(values, dtype=np.float64)
    y = np.asarray(response, dtype=np.float64)
    if v.shape[0] != y.shape[0]:
        raise ValueError("values and response disagree on sample count")
    if v.shape[0] < 2:
        raise ValueError("standardization needs at least 2 samples")

    bad = zero_variance_columns(v)
    if bad:
        raise ValueError(f"zero-variance columns cannot be standardized: {bad}")
    means = v.mean(axis=0)
    sds = v.std(axis=0, ddof=1)

    r_mean = float(y.mean())
    r_sd = float(y.std(ddof=1))
    if r_sd <= SD_GUARD:
        raise ValueError("constant response cannot be standardized")

    params = StandardizationParams(means=means, sds=sds, response_mean=r_mean, response_sd=r_sd)
    return (v - means) / sds, (y - r_mean) / r_sd, params
