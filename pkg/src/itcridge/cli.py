"""Command-line interface: ingest, preprocess, itc, fit, cv, synth, report.

Options resolve in three layers: a built-in default, then the `key = value`
config file named by --config, then the command line.  One global --seed
fans out to every stochastic stage through named substreams, so a run is
reproduced byte for byte by its inputs, config, and seed alone.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime or
numeric failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import artifacts
from .crossval import (
    CVMode,
    SynthConfig,
    generate_synthetic,
    holdout_validation,
    naive_loo_cv,
    proper_loo_cv,
)
from .cluster import KMeansConfig
from .dataset import (
    ALL_CLASSES,
    DatasetError,
    PredictorClass,
    load_dataset,
    save_dataset,
    subset_by_class,
    take_columns,
    validate,
)
from .itc import ITCConfig, run_itc
from .pipeline import PipelineSpec, Thinning, fit_pipeline
from .preprocess import constant_cosine_filter, normalize_predictors
from .ridge import Criterion, RidgeSearchConfig, T_SIGNIFICANCE, predict_class
from .seeding import subseed


class ConfigError(ValueError):
    """Raised for malformed config files or option values."""


@dataclass
class RunConfig:
    """Resolved global settings shared by the subcommands."""

    matrix: str | None
    classmap: str | None
    out: Path
    seed: int | None
    threads: int
    config: dict[str, str]


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a flat `section.key = value` config file."""
    out: dict[str, str] = {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    for lineno, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{p}:{lineno}: expected 'key = value', got {raw!r}")
        out[key.strip()] = value.strip()
    return out


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_classes(text: str) -> frozenset[PredictorClass]:
    labels = [t.strip() for t in text.split(",") if t.strip()]
    if not labels:
        raise ConfigError("expected a comma-separated list of predictor classes")
    return frozenset(PredictorClass.from_label(lbl) for lbl in labels)


def _parse_grid(text: str) -> np.ndarray:
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"expected 'low,high,count', got {text!r}")
    low, high, count = float(parts[0]), float(parts[1]), int(parts[2])
    if low <= 0.0 or high <= low or count < 2:
        raise ConfigError("grid needs 0 < low < high and count >= 2")
    return np.logspace(math.log10(low), math.log10(high), count)


def _parse_proportions(text: str) -> dict[PredictorClass, float]:
    out: dict[PredictorClass, float] = {}
    for item in text.split(","):
        label, sep, frac = item.partition("=")
        if not sep:
            raise ConfigError(f"expected 'CLASS=fraction', got {item!r}")
        out[PredictorClass.from_label(label.strip())] = float(frac)
    return out


def _resolve(args, config: dict[str, str], attr: str, key: str, parse, default):
    """CLI flag beats config key beats default."""
    value = getattr(args, attr, None)
    if value is not None:
        return value
    if key in config:
        return parse(config[key])
    return default


def _add_data_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--matrix", help="matrix CSV (compound_id,response,<predictor ids>)")
    p.add_argument("--classmap", help="class-map CSV (predictor_id,class)")


def _add_common(p: argparse.ArgumentParser, seed: bool = False) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, help="worker threads (default: machine cores)")
    if seed:
        p.add_argument("--seed", type=int, help="global seed; substreams derive from it")


def _add_pipeline_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--classes", help="comma-separated predictor classes to keep")
    p.add_argument("--cutoff", type=float, help="classification cutoff (default 0.5)")
    p.add_argument("--cosine-filter", action="store_true", default=None,
                   help="enable the constant-cosine filter")
    p.add_argument("--no-cosine-filter", dest="cosine_filter", action="store_false",
                   help="disable the constant-cosine filter")
    p.add_argument("--cosine-threshold", type=float,
                   help="constant-cosine removal threshold (default 0.9)")


def _add_itc_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--occ-threshold", type=float, help="stop when occ-ratio reaches this")
    p.add_argument("--min-predictors", type=int, help="stop at or below this pool size")
    p.add_argument("--keep-fraction", type=float, help="fraction kept per pattern")
    p.add_argument("--max-iterations", type=int, help="iteration budget")
    p.add_argument("--kmeans-seed", type=int, help="override the derived k-means seed")
    p.add_argument("--kmeans-restarts", type=int, help="k-means restarts (default 10)")
    p.add_argument("--kmeans-max-iter", type=int, help="k-means iteration cap (default 300)")


def _add_ridge_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--criterion", choices=["press", "gcv"],
                   help="ridge-constant criterion (default press)")
    p.add_argument("--k-grid", help="ridge grid as 'low,high,count' (default 1e-6,1e3,181)")


def _run_config(args) -> RunConfig:
    config = read_config(args.config) if getattr(args, "config", None) else {}
    matrix = _resolve(args, config, "matrix", "data.matrix", str, None)
    classmap = _resolve(args, config, "classmap", "data.classmap", str, None)
    out = Path(_resolve(args, config, "out", "run.out", str, "."))
    seed = _resolve(args, config, "seed", "run.seed", int, None)
    threads = _resolve(args, config, "threads", "run.threads", int, os.cpu_count() or 1)
    return RunConfig(matrix=matrix, classmap=classmap, out=out, seed=seed,
                     threads=max(1, threads), config=config)


def _require_dataset(run: RunConfig):
    if not run.matrix or not run.classmap:
        raise ConfigError("--matrix and --classmap are required (or data.* config keys)")
    return load_dataset(run.matrix, run.classmap)


def _require_seed(run: RunConfig) -> int:
    if run.seed is None:
        raise ConfigError("--seed is required (or run.seed config key)")
    return run.seed


def _kmeans_config(args, run: RunConfig, base_seed: int) -> KMeansConfig:
    cfg = run.config
    seed = _resolve(args, cfg, "kmeans_seed", "kmeans.seed", int, subseed(base_seed, "kmeans"))
    return KMeansConfig(
        k=2,
        seed=seed,
        max_iterations=_resolve(args, cfg, "kmeans_max_iter", "kmeans.max_iterations", int, 300),
        restarts=_resolve(args, cfg, "kmeans_restarts", "kmeans.restarts", int, 10),
    )


def _itc_config(args, run: RunConfig, base_seed: int) -> ITCConfig:
    cfg = run.config
    return ITCConfig(
        kmeans=_kmeans_config(args, run, base_seed),
        occ_threshold=_resolve(args, cfg, "occ_threshold", "itc.occ_threshold", float, 0.9),
        min_predictors=_resolve(args, cfg, "min_predictors", "itc.min_predictors", int, 100),
        keep_fraction=_resolve(args, cfg, "keep_fraction", "itc.keep_fraction", float, 1.0 / 3.0),
        max_iterations=_resolve(args, cfg, "max_iterations", "itc.max_iterations", int, 20),
    )


def _ridge_config(args, run: RunConfig) -> RidgeSearchConfig:
    cfg = run.config
    grid = _resolve(args, cfg, "k_grid", "ridge.k_grid", _parse_grid, None)
    if isinstance(grid, str):
        grid = _parse_grid(grid)
    criterion = Criterion(_resolve(args, cfg, "criterion", "ridge.criterion", str, "press"))
    if grid is None:
        return RidgeSearchConfig(criterion=criterion)
    return RidgeSearchConfig(grid=grid, criterion=criterion)


def _classes(args, run: RunConfig) -> frozenset[PredictorClass]:
    raw = _resolve(args, run.config, "classes", "pipeline.classes", str, None)
    if raw is None:
        return ALL_CLASSES
    if isinstance(raw, frozenset):
        return raw
    return _parse_classes(raw)


def _pipeline_spec(args, run: RunConfig, thinning: Thinning, filter_default: bool) -> PipelineSpec:
    cfg = run.config
    cosine = _resolve(args, cfg, "cosine_filter", "pipeline.cosine_filter", _parse_bool,
                      filter_default)
    itc_cfg = None
    if thinning is Thinning.ITC:
        itc_cfg = _itc_config(args, run, _require_seed(run))
    return PipelineSpec(
        classes=_classes(args, run),
        thinning=thinning,
        itc=itc_cfg,
        ridge_search=_ridge_config(args, run),
        cutoff=_resolve(args, cfg, "cutoff", "pipeline.cutoff", float, 0.5),
        cosine_filter=cosine,
        cosine_threshold=_resolve(args, cfg, "cosine_threshold", "pipeline.cosine_threshold",
                                  float, 0.9),
    )


def _model_description(spec: PipelineSpec) -> str:
    base = (
        "Ridge regression with two-way-clustering thinning"
        if spec.thinning is Thinning.ITC
        else "Ridge regression without predictor thinning"
    )
    if spec.classes != ALL_CLASSES:
        labels = ",".join(c.label for c in sorted(spec.classes, key=lambda c: c.label))
        base += f" ({labels})"
    return base


def cmd_ingest(args) -> int:
    run = _run_config(args)
    d = _require_dataset(run)
    report = validate(d)
    counts: dict[str, int] = {}
    for cls in d.predictor_classes():
        counts[cls.label] = counts.get(cls.label, 0) + 1
    print(f"compounds = {d.m}")
    print(f"predictors = {d.n}")
    print(f"response_1 = {int((d.response == 1).sum())}")
    print(f"response_0 = {int((d.response == 0).sum())}")
    for label in sorted(counts):
        print(f"class.{label} = {counts[label]}")
    for loc, msg in report.warnings:
        print(f"warning: {loc}: {msg}", file=sys.stderr)
    return 0


def cmd_preprocess(args) -> int:
    run = _run_config(args)
    d = _require_dataset(run)
    threshold = _resolve(args, run.config, "cosine_threshold", "pipeline.cosine_threshold",
                         float, 0.9)
    kept, removed, cosines = constant_cosine_filter(d, threshold)
    normalized = normalize_predictors(take_columns(d, kept))
    run.out.mkdir(parents=True, exist_ok=True)
    lines = [
        f"cosine_threshold = {artifacts.fmt(threshold)}",
        f"kept = {len(kept)}",
        f"removed = {len(removed)}",
        f"guarded = {len(normalized.guard_log)}",
    ]
    for j in removed:
        lines.append(f"removed.{d.predictor_ids[j]} = cosine {artifacts.fmt(cosines[j])}")
    for j, _ in normalized.guard_log:
        pid = d.predictor_ids[kept[j]]
        lines.append(f"guard.{pid} = divisor fell back to 1")
    artifacts.write_lines(run.out / "preprocess_report.txt", lines)
    print(f"kept {len(kept)} of {d.n} predictors (threshold {threshold})")
    return 0


def cmd_itc(args) -> int:
    run = _run_config(args)
    d = _require_dataset(run)
    seed = _require_seed(run)
    spec = _pipeline_spec(args, run, Thinning.ITC, filter_default=True)

    ds = subset_by_class(d, spec.classes)
    if spec.cosine_filter:
        kept, _, _ = constant_cosine_filter(ds, spec.cosine_threshold)
        ds = take_columns(ds, kept)
    result = run_itc(ds, _itc_config(args, run, seed))

    for rec in result.iterations:
        print(f"iteration {rec.index}: occ_ratio = {artifacts.fmt(rec.occ_ratio)}, "
              f"selected = {len(rec.selected)}")
    print(f"termination = {result.termination.value}")

    run.out.mkdir(parents=True, exist_ok=True)
    artifacts.write_itc_trace(result, ds.predictor_ids, run.out / "trace.txt")
    for rec in result.iterations:
        ids = [ds.predictor_ids[j] for j in rec.selected]
        artifacts.write_selected(ids, run.out / f"selected_iter_{rec.index}.txt")
    if result.iterations:
        snapshot = args.iteration
        ids = [ds.predictor_ids[j] for j in result.selected(snapshot)]
        artifacts.write_selected(ids, run.out / "selected.txt")
    return 0


def cmd_fit(args) -> int:
    run = _run_config(args)
    d = _require_dataset(run)
    spec = _pipeline_spec(args, run, Thinning.NONE, filter_default=False)

    ds = subset_by_class(d, spec.classes)
    if args.selected:
        wanted = artifacts.read_selected(args.selected)
        missing = [pid for pid in wanted if pid not in ds.predictor_ids]
        if missing:
            raise DatasetError(f"selected predictors not in dataset: {missing}")
        index = {pid: j for j, pid in enumerate(ds.predictor_ids)}
        ds = take_columns(ds, [index[pid] for pid in wanted])

    fitted = fit_pipeline(ds, spec)
    run.out.mkdir(parents=True, exist_ok=True)
    artifacts.write_fit_artifact(fitted, run.out / "fit.txt")
    artifacts.write_lines(run.out / "t_ratios.txt",
                          artifacts.t_ratio_lines(fitted, ds.class_map))
    n_sig = int((np.abs(fitted.fit.t_ratios) >= T_SIGNIFICANCE).sum())
    print(f"ridge_constant = {artifacts.fmt(fitted.fit.ridge_constant)}")
    print(f"predictors = {fitted.n_predictors}")
    print(f"significant = {n_sig}")
    return 0


def cmd_cv(args) -> int:
    run = _run_config(args)
    d = _require_dataset(run)
    _require_seed(run)
    thinning = Thinning(_resolve(args, run.config, "thinning", "pipeline.thinning", str, "itc"))
    spec = _pipeline_spec(args, run, thinning, filter_default=True)
    mode = CVMode(_resolve(args, run.config, "mode", "cv.mode", str, "proper"))
    holdout = _resolve(args, run.config, "holdout_fraction", "cv.holdout_fraction", float, None)

    if holdout is not None:
        report = holdout_validation(d, spec, holdout, _require_seed(run), threads=run.threads)
    elif mode is CVMode.PROPER:
        report = proper_loo_cv(d, spec, threads=run.threads)
    else:
        report = naive_loo_cv(d, spec, threads=run.threads)

    run.out.mkdir(parents=True, exist_ok=True)
    artifacts.write_cv_report(report, run.out / "cv_report.txt")
    summary = artifacts.summary_lines(report, _model_description(spec))
    artifacts.write_lines(run.out / "cv_summary.txt", summary)
    for line in summary:
        print(line)
    return 0


def _require_option(value, flag: str):
    if value is None:
        raise ConfigError(f"{flag} is required")
    return value


def cmd_synth(args) -> int:
    run = _run_config(args)
    cfg = run.config
    proportions = _resolve(args, cfg, "class_proportions", "synth.class_proportions",
                           _parse_proportions, None)
    if isinstance(proportions, str):
        proportions = _parse_proportions(proportions)
    synth = SynthConfig(
        m=_require_option(_resolve(args, cfg, "m", "synth.m", int, None), "--m"),
        n=_require_option(_resolve(args, cfg, "n", "synth.n", int, None), "--n"),
        n_informative=_require_option(
            _resolve(args, cfg, "n_informative", "synth.n_informative", int, None),
            "--n-informative",
        ),
        delta=_require_option(
            _resolve(args, cfg, "delta", "synth.delta", float, None), "--delta"
        ),
        seed=_require_seed(run),
        class_balance=_resolve(args, cfg, "class_balance", "synth.class_balance", float, 0.5),
        class_assignment=proportions,
        base_offset=_resolve(args, cfg, "base_offset", "synth.base_offset", float, 1.0),
    )
    d, truth = generate_synthetic(synth)
    run.out.mkdir(parents=True, exist_ok=True)
    save_dataset(d, run.out / "matrix.csv", run.out / "classmap.csv")
    artifacts.write_selected(truth, run.out / "truth.txt")
    print(f"wrote {d.m} compounds x {d.n} predictors, {len(truth)} informative")
    return 0


def cmd_report(args) -> int:
    run = _run_config(args)
    report = artifacts.read_cv_report(args.cv_report)
    description = args.description
    if description is None:
        description = (
            "Ridge regression with two-way-clustering thinning"
            if report.protocol == "Two-deep CV"
            else "Ridge regression"
        )
    summary = artifacts.summary_lines(report, description)
    for line in summary:
        print(line)
    if args.out is not None:
        run.out.mkdir(parents=True, exist_ok=True)
        artifacts.write_lines(run.out / "cv_summary.txt", summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itcridge",
        description="Two-way-clustering predictor thinning and ridge classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and validate a dataset, print a summary")
    _add_data_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("preprocess", help="run the constant-cosine filter and normalization")
    _add_data_options(p)
    _add_common(p)
    p.add_argument("--cosine-threshold", type=float, help="removal threshold (default 0.9)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("itc", help="run the two-way thinning loop, write trace and selections")
    _add_data_options(p)
    _add_common(p, seed=True)
    _add_pipeline_options(p)
    _add_itc_options(p)
    p.add_argument("--iteration", type=int, default=None,
                   help="iteration snapshot written to selected.txt (default: last)")
    p.set_defaults(func=cmd_itc)

    p = sub.add_parser("fit", help="fit the ridge model on a predictor selection")
    _add_data_options(p)
    _add_common(p)
    _add_pipeline_options(p)
    _add_ridge_options(p)
    p.add_argument("--selected", help="file of predictor ids to fit on (one per line)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("cv", help="leave-one-out evaluation, honest or naive")
    _add_data_options(p)
    _add_common(p, seed=True)
    _add_pipeline_options(p)
    _add_itc_options(p)
    _add_ridge_options(p)
    p.add_argument("--mode", choices=["proper", "naive"], help="protocol (default proper)")
    p.add_argument("--thinning", choices=["itc", "none"], help="selection stage (default itc)")
    p.add_argument("--holdout-fraction", type=float,
                   help="single split with this test fraction instead of leave-one-out")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("synth", help="generate a planted-signal dataset")
    _add_common(p, seed=True)
    p.add_argument("--m", type=int, help="number of compounds")
    p.add_argument("--n", type=int, help="number of predictors")
    p.add_argument("--n-informative", type=int, help="number of informative predictors")
    p.add_argument("--delta", type=float, help="class separation of informative predictors")
    p.add_argument("--class-balance", type=float, help="fraction of class-1 compounds")
    p.add_argument("--class-proportions", help="e.g. TS=0.4,TC=0.4,AP=0.2")
    p.add_argument("--base-offset", type=float, help="raw mean level (default 1)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", help="format a stored CV report as a summary table")
    _add_common(p)
    p.add_argument("--cv-report", required=True, help="cv_report.txt to summarize")
    p.add_argument("--description", help="model description column override")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # numeric or unexpected runtime failure
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
