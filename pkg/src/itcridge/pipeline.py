"""End-to-end model fitting: class subset, filter, thinning, transform, fit.

The same pipeline backs the fit command and both cross-validation protocols,
so everything a holdout prediction needs (selected columns, transform
parameters, cutoff) lives on the returned FittedPipeline.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import ALL_CLASSES, Dataset, PredictorClass, take_columns
from .itc import ITCConfig, ITCResult, run_itc
from .preprocess import (
    constant_cosine_filter,
    log_shift_transform,
    standardize,
    zero_variance_columns,
)
from .ridge import Criterion, RidgeFit, RidgeSearchConfig, predict_class, ridge_fit, select_k


class Thinning(enum.Enum):
    """Predictor selection stage of the pipeline."""

    NONE = "none"
    ITC = "itc"


@dataclass
class PipelineSpec:
    """Declarative description of one modeling pipeline.

    ``itc`` may be omitted only when thinning is NONE.  The kmeans seed inside
    ``itc`` is the stochastic root of the whole pipeline.
    """

    classes: frozenset[PredictorClass] = ALL_CLASSES
    thinning: Thinning = Thinning.ITC
    itc: ITCConfig | None = None
    ridge_search: RidgeSearchConfig = field(default_factory=RidgeSearchConfig)
    cutoff: float = 0.5
    cosine_filter: bool = True
    cosine_threshold: float = 0.9

    def __post_init__(self) -> None:
        if not 0.0 < self.cutoff < 1.0:
            raise ValueError("cutoff must be in (0, 1)")
        if not self.classes:
            raise ValueError("classes must be non-empty")
        if self.thinning is Thinning.ITC and self.itc is None:
            raise ValueError("thinning=ITC requires an ITCConfig")


@dataclass
class FittedPipeline:
    """A fitted model plus the bookkeeping needed to score raw rows.

    ``column_positions`` index into the dataset the pipeline was fitted on,
    so a holdout row from the same table can be subset directly.
    """

    predictor_ids: tuple[str, ...]
    column_positions: tuple[int, ...]
    fit: RidgeFit
    criterion: Criterion
    criterion_curve: np.ndarray
    grid: np.ndarray
    cutoff: float
    itc_result: ITCResult | None = None
    filter_removed: tuple[str, ...] = ()
    zero_variance_dropped: tuple[str, ...] = ()

    @property
    def n_predictors(self) -> int:
        return len(self.predictor_ids)

    def predict_full_row(self, row) -> tuple[int, float]:
        """Classify one raw row aligned with the fitting dataset's columns."""
        row = np.asarray(row, dtype=np.float64)
        return predict_class(self.fit, row[list(self.column_positions)], self.cutoff)


def fit_pipeline(d: Dataset, spec: PipelineSpec) -> FittedPipeline:
    """Run every configured stage on ``d`` and fit the final ridge model.

    Stage order: class subset, constant-cosine filter, two-way thinning,
    shifted log, zero-variance drop, standardization, ridge-constant search,
    final fit.  Selection stages see only ``d``.
    """
    positions = [
        j for j, pid in enumerate(d.predictor_ids) if d.class_map[pid] in spec.classes
    ]
    if not positions:
        raise ValueError("no predictors left after the class subset")
    ds = take_columns(d, positions)

    filter_removed: tuple[str, ...] = ()
    if spec.cosine_filter:
        kept, removed, _ = constant_cosine_filter(ds, spec.cosine_threshold)
        if not kept:
            raise ValueError("constant-cosine filter removed every predictor")
        filter_removed = tuple(ds.predictor_ids[j] for j in removed)
        positions = [positions[j] for j in kept]
        ds = take_columns(ds, kept)

    itc_result: ITCResult | None = None
    if spec.thinning is Thinning.ITC:
        itc_result = run_itc(ds, spec.itc)
        if itc_result.iterations:
            sel = list(itc_result.iterations[-1].selected)
            positions = [positions[j] for j in sel]
            ds = take_columns(ds, sel)

    logged = log_shift_transform(ds.values)
    zv = zero_variance_columns(logged)
    zv_dropped: tuple[str, ...] = ()
    if zv:
        zv_dropped = tuple(ds.predictor_ids[j] for j in zv)
        keep = [j for j in range(ds.n) if j not in set(zv)]
        if not keep:
            raise ValueError("every selected predictor has zero variance")
        positions = [positions[j] for j in keep]
        ds = take_columns(ds, keep)
        logged = logged[:, keep]

    xs, ys, params = standardize(logged, ds.response.astype(np.float64))
    k_star, curve = select_k(xs, ys, spec.ridge_search)
    fit = ridge_fit(xs, ys, k_star, standardization=params)

    return FittedPipeline(
        predictor_ids=ds.predictor_ids,
        column_positions=tuple(positions),
        fit=fit,
        criterion=spec.ridge_search.criterion,
        criterion_curve=curve,
        grid=spec.ridge_search.grid,
        cutoff=spec.cutoff,
        itc_result=itc_result,
        filter_removed=filter_removed,
        zero_variance_dropped=zv_dropped,
    )


def fold_spec(spec: PipelineSpec, kmeans_seed: int) -> PipelineSpec:
    """Copy of ``spec`` whose thinning draws from the given kmeans seed."""
    if spec.itc is None:
        return spec
    return replace(spec, itc=replace(spec.itc, kmeans=replace(spec.itc.kmeans, seed=kmeans_seed)))
