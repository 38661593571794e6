"""Plain-text artifact formats for traces, fits, and evaluation reports.

Every writer emits `key = value` lines in a fixed key order with shortest
round-trip float text and no timestamps, so identical runs produce byte
identical files and diffs stay readable.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .crossval import CVMode, CVReport, FoldPrediction
from .dataset import CLASS_ORDER
from .itc import ITCResult
from .pipeline import FittedPipeline
from .preprocess import StandardizationParams
from .ridge import Criterion, RidgeFit, T_SIGNIFICANCE


def fmt(x) -> str:
    """Shortest decimal text that round-trips the value."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _join(values) -> str:
    return ",".join(fmt(v) for v in values)


def write_lines(path: str | Path, lines) -> None:
    Path(path).write_text("".join(f"{line}\n" for line in lines))


def read_kv(path: str | Path) -> dict[str, str]:
    """Parse a `key = value` artifact back into a dict."""
    out: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def itc_trace_lines(result: ITCResult, predictor_ids) -> list[str]:
    lines = [
        f"iterations = {len(result.iterations)}",
        f"termination = {result.termination.value}",
    ]
    for rec in result.iterations:
        p = f"iteration.{rec.index}"
        groups = " ".join(
            f"{cls.label}:{size}" for cls, size in zip(rec.group_classes, rec.group_sizes)
        )
        lines.append(f"{p}.groups = {groups}")
        lines.append(f"{p}.occ_ratio = {fmt(rec.occ_ratio)}")
        for stat in rec.pair_stats:
            key = f"{p}.pair.{stat.left_signature}|{stat.right_signature}"
            lines.append(
                f"{key} = sizes {stat.left_size}+{stat.right_size} "
                f"error {fmt(stat.error_rate)}"
            )
        winner = next(
            s for s in rec.pair_stats if s.left_signature == rec.winning_signature
        )
        lines.append(f"{p}.winning_pair = {winner.left_signature}|{winner.right_signature}")
        counts = " ".join(
            f"{cls.label}:{rec.selected_class_counts[cls]}"
            for cls in CLASS_ORDER
            if cls in rec.selected_class_counts
        )
        lines.append(f"{p}.selected_count = {len(rec.selected)}")
        lines.append(f"{p}.selected_class_counts = {counts}")
        lines.append(f"{p}.selected_ids = {_join(predictor_ids[j] for j in rec.selected)}")
    return lines


def write_itc_trace(result: ITCResult, predictor_ids, path: str | Path) -> None:
    write_lines(path, itc_trace_lines(result, predictor_ids))


def write_selected(ids, path: str | Path) -> None:
    write_lines(path, ids)


def read_selected(path: str | Path) -> list[str]:
    return [line.strip() for line in Path(path).read_text().splitlines() if line.strip()]


def fit_artifact_lines(fitted: FittedPipeline) -> list[str]:
    fit = fitted.fit
    params = fit.standardization
    return [
        f"criterion = {fitted.criterion.value}",
        f"ridge_constant = {fmt(fit.ridge_constant)}",
        f"cutoff = {fmt(fitted.cutoff)}",
        f"n_predictors = {fitted.n_predictors}",
        f"predictor_ids = {_join(fitted.predictor_ids)}",
        f"coefficients = {_join(fit.coefficients)}",
        f"t_ratios = {_join(fit.t_ratios)}",
        f"hat_trace = {fmt(fit.hat_trace)}",
        f"rss = {fmt(fit.rss)}",
        f"sigma2_hat = {fmt(fit.sigma2_hat)}",
        f"standardization.means = {_join(params.means)}",
        f"standardization.sds = {_join(params.sds)}",
        f"standardization.response_mean = {fmt(params.response_mean)}",
        f"standardization.response_sd = {fmt(params.response_sd)}",
    ]


def write_fit_artifact(fitted: FittedPipeline, path: str | Path) -> None:
    write_lines(path, fit_artifact_lines(fitted))


def load_fit_artifact(path: str | Path) -> tuple[tuple[str, ...], RidgeFit, float, Criterion]:
    """Rebuild (predictor_ids, fit, cutoff, criterion) from a fit artifact."""
    kv = read_kv(path)
    floats = lambda key: np.array([float(v) for v in kv[key].split(",")])
    params = StandardizationParams(
        means=floats("standardization.means"),
        sds=floats("standardization.sds"),
        response_mean=float(kv["standardization.response_mean"]),
        response_sd=float(kv["standardization.response_sd"]),
    )
    coefficients = floats("coefficients")
    fit = RidgeFit(
        coefficients=coefficients,
        ridge_constant=float(kv["ridge_constant"]),
        hat_diagonal=np.array([]),
        hat_trace=float(kv["hat_trace"]),
        rss=float(kv["rss"]),
        sigma2_hat=float(kv["sigma2_hat"]),
        t_ratios=floats("t_ratios"),
        standardization=params,
    )
    ids = tuple(kv["predictor_ids"].split(","))
    return ids, fit, float(kv["cutoff"]), Criterion(kv["criterion"])


def t_ratio_lines(fitted: FittedPipeline, class_map) -> list[str]:
    """Significance table: one predictor per line, largest |t| first."""
    fit = fitted.fit
    order = np.argsort(-np.abs(fit.t_ratios), kind="stable")
    lines = ["predictor_id\tt_ratio\tclass\tsignificant"]
    for j in order:
        pid = fitted.predictor_ids[j]
        t = fit.t_ratios[j]
        flag = "yes" if abs(t) >= T_SIGNIFICANCE else "no"
        lines.append(f"{pid}\t{fmt(t)}\t{class_map[pid].label}\t{flag}")
    return lines


def cv_report_lines(report: CVReport) -> list[str]:
    lines = [
        f"mode = {report.mode.value}",
        f"protocol = {report.protocol}",
        f"tp = {report.tp}",
        f"fn = {report.fn}",
        f"tn = {report.tn}",
        f"fp = {report.fp}",
        f"correct_pct = {fmt(report.correct_pct)}",
        f"sensitivity_pct = {'absent' if report.sensitivity_pct is None else fmt(report.sensitivity_pct)}",
        f"specificity_pct = {'absent' if report.specificity_pct is None else fmt(report.specificity_pct)}",
        f"audit_clean = {'not_instrumented' if report.audit_clean is None else str(report.audit_clean).lower()}",
        f"folds = {len(report.per_compound)}",
    ]
    for p in report.per_compound:
        lines.append(
            f"fold.{p.compound_id} = true {p.true_label} predicted {p.predicted} "
            f"score {fmt(p.score)} k {fmt(p.ridge_constant)} predictors {p.n_predictors}"
        )
    return lines


def write_cv_report(report: CVReport, path: str | Path) -> None:
    write_lines(path, cv_report_lines(report))


def read_cv_report(path: str | Path) -> CVReport:
    """Rebuild a CVReport (including folds) from its artifact."""
    kv = read_kv(path)
    preds = []
    for key, value in kv.items():
        if not key.startswith("fold."):
            continue
        parts = value.split()
        field_of = dict(zip(parts[0::2], parts[1::2]))
        preds.append(
            FoldPrediction(
                compound_id=key[len("fold."):],
                true_label=int(field_of["true"]),
                score=float(field_of["score"]),
                predicted=int(field_of["predicted"]),
                ridge_constant=float(field_of["k"]),
                n_predictors=int(field_of["predictors"]),
            )
        )
    opt = lambda v: None if v == "absent" else float(v)
    audit = kv.get("audit_clean", "not_instrumented")
    return CVReport(
        tp=int(kv["tp"]),
        fn=int(kv["fn"]),
        tn=int(kv["tn"]),
        fp=int(kv["fp"]),
        correct_pct=float(kv["correct_pct"]),
        sensitivity_pct=opt(kv["sensitivity_pct"]),
        specificity_pct=opt(kv["specificity_pct"]),
        per_compound=tuple(preds),
        mode=CVMode(kv["mode"]),
        protocol=kv.get("protocol", ""),
        audit_clean=None if audit == "not_instrumented" else audit == "true",
    )


def summary_lines(report: CVReport, model_description: str) -> list[str]:
    """One table row in the classic summary layout."""
    counts = sorted(p.n_predictors for p in report.per_compound)
    n_predictors = counts[len(counts) // 2] if counts else 0
    fmt_pct = lambda v: "absent" if v is None else f"{v:.2f}"
    header = (
        "Model description | No. of predictors | Type of cross validation | "
        "Correct classification, % | Sensitivity | Specificity"
    )
    row = (
        f"{model_description} | {n_predictors} | {report.protocol} | "
        f"{fmt_pct(report.correct_pct)} | {fmt_pct(report.sensitivity_pct)} | "
        f"{fmt_pct(report.specificity_pct)}"
    )
    return [header, row]
