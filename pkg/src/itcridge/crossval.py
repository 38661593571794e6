"""Honest and naive leave-one-out evaluation, metrics, and synthetic data.

The proper protocol reruns the entire pipeline (filter, thinning, transform,
standardization, ridge-constant search, fit) inside every fold, so the
holdout row influences nothing; an access audit on the raw matrix records
that no fold read its holdout before prediction.  The naive protocol runs
the selection stages once on the full matrix and only cross-validates the
ridge stage, which is exactly the shortcut the proper protocol exists to
expose.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .dataset import CLASS_ORDER, Dataset, PredictorClass, subset_by_class, take_columns
from .pipeline import FittedPipeline, PipelineSpec, Thinning, fit_pipeline, fold_spec
from .itc import run_itc
from .preprocess import constant_cosine_filter
from .seeding import rng_for, subseed


class CVMode(enum.Enum):
    """Which protocol produced a report."""

    NAIVE = "naive"
    PROPER = "proper"


@dataclass
class FoldPrediction:
    """One holdout's outcome."""

    compound_id: str
    true_label: int
    score: float
    predicted: int
    ridge_constant: float
    n_predictors: int


@dataclass
class CVReport:
    """Confusion counts and rounded percentages for one evaluation run.

    ``sensitivity_pct``/``specificity_pct`` are None when the corresponding
    class is absent.  ``audit_clean`` is True when the access audit saw no
    holdout read before prediction, and None for protocols that are not
    instrumented.  ``protocol`` is a display label such as "Two-deep CV".
    """

    tp: int
    fn: int
    tn: int
    fp: int
    correct_pct: float
    sensitivity_pct: float | None
    specificity_pct: float | None
    per_compound: tuple[FoldPrediction, ...]
    mode: CVMode
    protocol: str = ""
    audit_clean: bool | None = None


class AccessAudit:
    """Records which raw-matrix rows were handed out, and when.

    Fold training data is materialized through take_rows(); the holdout row
    is only released by read_holdout().  clean(i) asserts that row i was
    never part of any earlier read.
    """

    def __init__(self, values: np.ndarray):
        self._values = values
        self.rows_read: set[int] = set()

    def take_rows(self, rows) -> np.ndarray:
        rows = list(rows)
        self.rows_read.update(int(r) for r in rows)
        return self._values[rows].copy()

    def clean(self, holdout: int) -> bool:
        return holdout not in self.rows_read

    def read_holdout(self, holdout: int) -> np.ndarray:
        return self._values[holdout].copy()


def round_half_up(x: float, places: int = 2) -> float:
    """Decimal rounding where .005 goes up, as report tables expect."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(float(x))).quantize(quantum, rounding=ROUND_HALF_UP))


def metrics(
    per_compound,
    mode: CVMode,
    protocol: str = "",
    audit_clean: bool | None = None,
) -> CVReport:
    """Confusion counts and percentages from per-holdout outcomes.

    sensitivity = 100 * tp / (tp + fn), specificity = 100 * tn / (tn + fp),
    correct = 100 * (tp + tn) / m, each rounded half-up to 2 decimals.
    """
    per_compound = tuple(per_compound)
    if not per_compound:
        raise ValueError("no predictions to score")
    tp = sum(1 for p in per_compound if p.true_label == 1 and p.predicted == 1)
    fn = sum(1 for p in per_compound if p.true_label == 1 and p.predicted == 0)
    tn = sum(1 for p in per_compound if p.true_label == 0 and p.predicted == 0)
    fp = sum(1 for p in per_compound if p.true_label == 0 and p.predicted == 1)
    m = len(per_compound)
    sensitivity = round_half_up(100.0 * tp / (tp + fn)) if tp + fn else None
    specificity = round_half_up(100.0 * tn / (tn + fp)) if tn + fp else None
    return CVReport(
        tp=tp,
        fn=fn,
        tn=tn,
        fp=fp,
        correct_pct=round_half_up(100.0 * (tp + tn) / m),
        sensitivity_pct=sensitivity,
        specificity_pct=specificity,
        per_compound=per_compound,
        mode=mode,
        protocol=protocol,
        audit_clean=audit_clean,
    )


def _counts_from_confusion(tp: int, fn: int, tn: int, fp: int) -> CVReport:
    """Report from bare confusion counts (no per-compound detail)."""
    preds = []
    for label, pred, count in ((1, 1, tp), (1, 0, fn), (0, 0, tn), (0, 1, fp)):
        preds.extend(
            FoldPrediction(f"c{label}{pred}{i}", label, float(pred), pred, 0.0, 0)
            for i in range(count)
        )
    return metrics(preds, CVMode.PROPER)


def _drop_row(d: Dataset, i: int, values_rows: np.ndarray) -> Dataset:
    rows = [r for r in range(d.m) if r != i]
    return Dataset(
        tuple(d.compound_ids[r] for r in rows),
        d.predictor_ids,
        values_rows,
        d.response[rows],
        dict(d.class_map),
    )


def _protocol_label(spec: PipelineSpec, mode: CVMode) -> str:
    if mode is CVMode.PROPER and spec.thinning is Thinning.ITC:
        return "Two-deep CV"
    return "Leave-one-out CV"


def _run_folds(worker, m: int, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, range(m)))
    return [worker(i) for i in range(m)]


def proper_loo_cv(d: Dataset, spec: PipelineSpec, threads: int = 1) -> CVReport:
    """Leave-one-out evaluation with the whole pipeline inside each fold.

    Each fold refits selection, transforms, and the ridge search on the m-1
    training rows and only then reads the holdout row; the access audit
    verifies that ordering.  Fold f draws its thinning seed from
    (seed, "fold", f).
    """
    if d.m < 5:
        raise ValueError(f"leave-one-out needs at least 5 samples, got {d.m}")
    base_seed = spec.itc.kmeans.seed if spec.itc is not None else 0

    def worker(i: int) -> tuple[FoldPrediction, bool]:
        audit = AccessAudit(d.values)
        train_rows = [r for r in range(d.m) if r != i]
        try:
            d_train = _drop_row(d, i, audit.take_rows(train_rows))
            fitted = fit_pipeline(d_train, fold_spec(spec, subseed(base_seed, "fold", i)))
            clean = audit.clean(i)
            label, score = fitted.predict_full_row(audit.read_holdout(i))
        except Exception as exc:
            raise RuntimeError(f"fold {d.compound_ids[i]!r} failed: {exc}") from exc
        pred = FoldPrediction(
            compound_id=d.compound_ids[i],
            true_label=int(d.response[i]),
            score=score,
            predicted=label,
            ridge_constant=fitted.fit.ridge_constant,
            n_predictors=fitted.n_predictors,
        )
        return pred, clean

    results = _run_folds(worker, d.m, threads)
    preds = [p for p, _ in results]
    clean = all(c for _, c in results)
    return metrics(preds, CVMode.PROPER, _protocol_label(spec, CVMode.PROPER), clean)


def naive_loo_cv(d: Dataset, spec: PipelineSpec, threads: int = 1) -> CVReport:
    """Leave-one-out evaluation with selection done once on the full data.

    The cosine filter and the thinning see every row (including each future
    holdout); only the ridge stage is cross-validated.  With thinning NONE
    and the filter off there is nothing to leak and the result matches
    proper_loo_cv fold for fold.
    """
    if d.m < 5:
        raise ValueError(f"leave-one-out needs at least 5 samples, got {d.m}")

    ds = subset_by_class(d, spec.classes)
    if spec.cosine_filter:
        kept, _, _ = constant_cosine_filter(ds, spec.cosine_threshold)
        if not kept:
            raise ValueError("constant-cosine filter removed every predictor")
        ds = take_columns(ds, kept)
    if spec.thinning is Thinning.ITC:
        result = run_itc(ds, spec.itc)
        if result.iterations:
            ds = take_columns(ds, list(result.iterations[-1].selected))

    inner = replace(spec, classes=frozenset(PredictorClass), thinning=Thinning.NONE,
                    cosine_filter=False)
    base_seed = spec.itc.kmeans.seed if spec.itc is not None else 0

    def worker(i: int) -> FoldPrediction:
        train_rows = [r for r in range(ds.m) if r != i]
        try:
            d_train = _drop_row(ds, i, ds.values[train_rows])
            fitted = fit_pipeline(d_train, fold_spec(inner, subseed(base_seed, "fold", i)))
            label, score = fitted.predict_full_row(ds.values[i])
        except Exception as exc:
            raise RuntimeError(f"fold {ds.compound_ids[i]!r} failed: {exc}") from exc
        return FoldPrediction(
            compound_id=ds.compound_ids[i],
            true_label=int(ds.response[i]),
            score=score,
            predicted=label,
            ridge_constant=fitted.fit.ridge_constant,
            n_predictors=fitted.n_predictors,
        )

    preds = _run_folds(worker, ds.m, threads)
    return metrics(preds, CVMode.NAIVE, _protocol_label(spec, CVMode.NAIVE), None)


def holdout_validation(
    d: Dataset, spec: PipelineSpec, fraction: float, seed: int, threads: int = 1
) -> CVReport:
    """Single random train/test split evaluated with the proper pipeline."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    n_test = max(1, round(fraction * d.m))
    if n_test >= d.m - 1:
        raise ValueError("holdout fraction leaves too few training rows")
    rng = rng_for(seed, "holdout")
    test_rows = sorted(int(r) for r in rng.choice(d.m, size=n_test, replace=False))
    train_rows = [r for r in range(d.m) if r not in set(test_rows)]

    d_train = Dataset(
        tuple(d.compound_ids[r] for r in train_rows),
        d.predictor_ids,
        d.values[train_rows],
        d.response[train_rows],
        dict(d.class_map),
    )
    fitted = fit_pipeline(d_train, spec)
    preds = []
    for r in test_rows:
        label, score = fitted.predict_full_row(d.values[r])
        preds.append(
            FoldPrediction(
                compound_id=d.compound_ids[r],
                true_label=int(d.response[r]),
                score=score,
                predicted=label,
                ridge_constant=fitted.fit.ridge_constant,
                n_predictors=fitted.n_predictors,
            )
        )
    label = f"Holdout validation ({round_half_up(100 * fraction, 1)}% test)"
    return metrics(preds, CVMode.PROPER, label, None)


@dataclass
class SynthConfig:
    """Planted-signal generator settings.

    Informative predictors are shifted by +delta/2 for class 1 and -delta/2
    for class 0 around ``base_offset``; everything else is N(base_offset, 1).
    ``class_assignment`` maps predictor classes to proportions of columns.
    The default offset keeps column means positive (the mean normalization
    divides by them) without pushing columns so close to constant that the
    cosine screen would drop them.
    """

    m: int
    n: int
    n_informative: int
    delta: float
    seed: int
    class_balance: float = 0.5
    class_assignment: dict[PredictorClass, float] | None = None
    base_offset: float = 1.0

    def __post_init__(self) -> None:
        if self.m < 2 or self.n < 1:
            raise ValueError("need m >= 2 and n >= 1")
        if not 0 <= self.n_informative <= self.n:
            raise ValueError("n_informative must be in [0, n]")
        if self.delta < 0.0:
            raise ValueError("delta must be >= 0")
        if not 0.0 < self.class_balance < 1.0:
            raise ValueError("class_balance must be in (0, 1)")
        if self.base_offset <= 0.0:
            raise ValueError("base_offset must be > 0")
        if self.class_assignment is None:
            third = 1.0 / 3.0
            self.class_assignment = {
                PredictorClass.TS: third,
                PredictorClass.TC: third,
                PredictorClass.AP: third,
            }
        total = sum(self.class_assignment.values())
        if total <= 0.0 or any(v < 0.0 for v in self.class_assignment.values()):
            raise ValueError("class proportions must be non-negative with positive sum")


def _class_counts(assignment: dict[PredictorClass, float], n: int) -> list[tuple[PredictorClass, int]]:
    # largest-remainder apportionment in fixed class order
    items = [(cls, assignment[cls]) for cls in CLASS_ORDER if cls in assignment]
    total = sum(frac for _, frac in items)
    raw = [(cls, n * frac / total) for cls, frac in items]
    counts = {cls: int(r) for cls, r in raw}
    short = n - sum(counts.values())
    remainders = sorted(raw, key=lambda cr: cr[1] - int(cr[1]), reverse=True)
    for cls, _ in remainders[:short]:
        counts[cls] += 1
    return [(cls, counts[cls]) for cls, _ in items]


def generate_synthetic(cfg: SynthConfig) -> tuple[Dataset, tuple[str, ...]]:
    """Sample a planted-signal dataset; returns (dataset, informative ids).

    Fully deterministic for a given seed: the same configuration reproduces
    the same matrix bit for bit.
    """
    rng = rng_for(cfg.seed, "synth")
    n_pos = min(max(1, round(cfg.m * cfg.class_balance)), cfg.m - 1)
    response = np.zeros(cfg.m, dtype=np.int64)
    response[:n_pos] = 1
    rng.shuffle(response)

    informative = np.sort(rng.choice(cfg.n, size=cfg.n_informative, replace=False))
    values = rng.normal(cfg.base_offset, 1.0, size=(cfg.m, cfg.n))
    shift = np.where(response == 1, cfg.delta / 2.0, -cfg.delta / 2.0)
    values[:, informative] += shift[:, None]

    labels: list[PredictorClass] = []
    for cls, count in _class_counts(cfg.class_assignment, cfg.n):
        labels.extend([cls] * count)
    labels = list(np.array(labels, dtype=object)[rng.permutation(cfg.n)])

    width = len(str(cfg.n))
    predictor_ids = tuple(f"p{j + 1:0{width}d}" for j in range(cfg.n))
    cwidth = len(str(cfg.m))
    compound_ids = tuple(f"c{i + 1:0{cwidth}d}" for i in range(cfg.m))
    class_map = {pid: labels[j] for j, pid in enumerate(predictor_ids)}

    d = Dataset(compound_ids, predictor_ids, values, response, class_map)
    truth = tuple(predictor_ids[int(j)] for j in informative)
    return d, truth
