"""Iterative two-way thinning of a wide predictor matrix.

Each iteration clusters the samples once per predictor class (k = 2), crosses
the per-class labels into signature cells, pairs each cell with its
complement, and scores every pair by a leave-one-out test of how well its two
sides can be told apart.  The winning pair's contrast pattern then ranks all
predictors and only the top fraction per pattern direction survives.  The
loop stops when one pair covers enough of the samples, the pool is small
enough, the iteration budget is spent, or the surviving predictors all belong
to a single class.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .cluster import KMeansConfig, kmeans, nearest_centroid
from .dataset import CLASS_ORDER, Dataset, PredictorClass
from .preprocess import NormalizedMatrix, normalize_predictors
from .seeding import subseed


class Termination(enum.Enum):
    """Why the thinning loop stopped."""

    OCC_RATIO_REACHED = "occ_ratio_reached"
    MIN_PREDICTORS_REACHED = "min_predictors_reached"
    MAX_ITERATIONS = "max_iterations"
    GROUPS_COLLAPSED = "groups_collapsed"


@dataclass
class ITCConfig:
    """Thinning loop settings; ``kmeans`` carries the seed."""

    kmeans: KMeansConfig
    occ_threshold: float = 0.9
    min_predictors: int = 100
    keep_fraction: float = 1.0 / 3.0
    max_iterations: int = 20

    def __post_init__(self) -> None:
        if not 0.0 < self.occ_threshold <= 1.0:
            raise ValueError("occ_threshold must be in (0, 1]")
        if self.min_predictors < 1:
            raise ValueError("min_predictors must be >= 1")
        if not 0.0 < self.keep_fraction <= 0.5:
            raise ValueError("keep_fraction must be in (0, 0.5]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class SampleCell:
    """Samples sharing one per-group label signature like "01"."""

    signature: str
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class HeterogeneousPair:
    """A signature cell and its bitwise complement."""

    left: SampleCell
    right: SampleCell

    def __post_init__(self) -> None:
        comp = "".join("1" if b == "0" else "0" for b in self.left.signature)
        if self.right.signature != comp:
            raise ValueError(
                f"signatures {self.left.signature!r} and {self.right.signature!r} "
                "are not complements"
            )

    @property
    def union_size(self) -> int:
        return self.left.size + self.right.size


@dataclass
class PairStat:
    """One row of an iteration's pair table."""

    left_signature: str
    right_signature: str
    left_size: int
    right_size: int
    error_rate: float


@dataclass
class IterationRecord:
    """Everything observed during one thinning iteration.

    ``occ_ratio`` is measured on the cells of this iteration, before the
    reduction; ``selected`` holds column indices into the dataset that was
    given to run_itc.
    """

    index: int
    group_classes: tuple[PredictorClass, ...]
    group_sizes: tuple[int, ...]
    occ_ratio: float
    pair_stats: tuple[PairStat, ...]
    winning_signature: str
    selected: tuple[int, ...]
    selected_class_counts: dict[PredictorClass, int] = field(default_factory=dict)


@dataclass
class ITCResult:
    """Full trace of the thinning loop."""

    iterations: tuple[IterationRecord, ...]
    termination: Termination

    def selected(self, iteration: int | None = None) -> tuple[int, ...]:
        """Selected column indices after ``iteration`` (default: the last)."""
        if not self.iterations:
            raise ValueError("no iterations recorded")
        if iteration is None:
            return self.iterations[-1].selected
        for rec in self.iterations:
            if rec.index == iteration:
                return rec.selected
        raise ValueError(f"no iteration {iteration}")


def cluster_samples_per_group(
    normalized: NormalizedMatrix, groups, cfg: KMeansConfig
) -> list[np.ndarray]:
    """Two-cluster the samples once per predictor group.

    ``groups`` is a list of column-index collections into the normalized
    matrix.  Labels are canonicalized so the cluster containing sample 0 is
    labeled 0.  Each group draws from a substream of (cfg.seed, group index).
    """
    if normalized.values.shape[0] < 2:
        raise ValueError("need at least 2 samples to cluster")
    assignments = []
    for gi, cols in enumerate(groups):
        cols = list(cols)
        if not cols:
            raise ValueError(f"group {gi} is empty")
        group_cfg = replace(cfg, k=2, seed=subseed(cfg.seed, "group", gi))
        clustering = kmeans(normalized.values[:, cols], group_cfg)
        labels = clustering.assignment
        if labels[0] == 1:
            labels = 1 - labels
        assignments.append(labels)
    return assignments


def combine_cells(assignments) -> list[SampleCell]:
    """Cross k two-way assignments into 2^k signature cells.

    Every signature appears in the output, empty or not, sorted by signature.
    """
    if not assignments:
        raise ValueError("need at least one assignment")
    lengths = {len(a) for a in assignments}
    if len(lengths) != 1:
        raise ValueError(f"assignments disagree on sample count: {sorted(lengths)}")
    k = len(assignments)
    m = lengths.pop()
    signatures = ["".join(str(int(a[s])) for a in assignments) for s in range(m)]
    members: dict[str, list[int]] = {
        "".join(bits): [] for bits in itertools.product("01", repeat=k)
    }
    for s, sig in enumerate(signatures):
        members[sig].append(s)
    return [SampleCell(sig, tuple(members[sig])) for sig in sorted(members)]


def heterogeneous_pairs(cells) -> list[HeterogeneousPair]:
    """Pair every cell with its bitwise complement.

    Each of the 2^(k-1) pairs appears once, left side being the
    lexicographically smaller signature, sorted by left signature.
    """
    by_sig = {c.signature: c for c in cells}
    pairs = []
    for sig in sorted(by_sig):
        comp = "".join("1" if b == "0" else "0" for b in sig)
        if sig < comp:
            pairs.append(HeterogeneousPair(by_sig[sig], by_sig[comp]))
    return pairs


def _pattern_cosines(
    values: np.ndarray, pair: HeterogeneousPair
) -> tuple[np.ndarray, np.ndarray]:
    # cosine of each column (restricted to the pair's samples, left block
    # first) against the 0...0/1...1 pattern and its flip; zero-norm columns
    # score 0 for both
    rows = list(pair.left.members) + list(pair.right.members)
    v = values[rows]
    norms = np.sqrt((v * v).sum(axis=0))
    sum_left = v[: pair.left.size].sum(axis=0)
    sum_right = v[pair.left.size :].sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos1 = np.where(norms > 0.0, sum_right / (norms * math.sqrt(pair.right.size)), 0.0)
        cos2 = np.where(norms > 0.0, sum_left / (norms * math.sqrt(pair.left.size)), 0.0)
    return cos1, cos2


def sort_and_reduce(
    normalized: NormalizedMatrix, pair: HeterogeneousPair, keep_fraction: float
) -> tuple[int, ...]:
    """Keep the columns most aligned with the pair's contrast patterns.

    Columns are ranked by signed cosine against the pattern that is 0 on the
    left cell and 1 on the right, and against its flip; the top
    ceil(keep_fraction * n) per pattern are kept (ties broken by ascending
    column index) and the union is returned sorted ascending.
    """
    if pair.left.size == 0 or pair.right.size == 0:
        raise ValueError("both sides of the pair must be non-empty")
    if not 0.0 < keep_fraction <= 0.5:
        raise ValueError("keep_fraction must be in (0, 0.5]")
    n = normalized.values.shape[1]
    cos1, cos2 = _pattern_cosines(normalized.values, pair)
    q = math.ceil(keep_fraction * n)
    idx = np.arange(n)
    top1 = np.lexsort((idx, -cos1))[:q]
    top2 = np.lexsort((idx, -cos2))[:q]
    return tuple(sorted(set(top1.tolist()) | set(top2.tolist())))


def pair_loo_error(
    normalized: NormalizedMatrix, pair: HeterogeneousPair, keep_fraction: float
) -> float:
    """Leave-one-out error of telling the pair's two sides apart.

    Each member is held out in turn; the reduction is recomputed without it
    and the member is assigned to the nearer side centroid in the reduced
    space.  A side with fewer than 2 members cannot be scored and the pair is
    disqualified with error 1.0 and a warning.
    """
    if pair.left.size < 2 or pair.right.size < 2:
        warnings.warn(
            f"pair {pair.left.signature}|{pair.right.signature} has a side with "
            "fewer than 2 members; error set to 1.0"
        )
        return 1.0
    values = normalized.values
    errors = 0
    for side, cell, other in ((0, pair.left, pair.right), (1, pair.right, pair.left)):
        for u in cell.members:
            kept = tuple(s for s in cell.members if s != u)
            reduced_cell = SampleCell(cell.signature, kept)
            if side == 0:
                sub_pair = HeterogeneousPair(reduced_cell, other)
            else:
                sub_pair = HeterogeneousPair(other, reduced_cell)
            cols = list(sort_and_reduce(normalized, sub_pair, keep_fraction))
            left_rows = sub_pair.left.members
            right_rows = sub_pair.right.members
            centroids = np.vstack(
                [
                    values[list(left_rows)][:, cols].mean(axis=0),
                    values[list(right_rows)][:, cols].mean(axis=0),
                ]
            )
            predicted = nearest_centroid(values[u, cols], centroids)
            if predicted != side:
                errors += 1
    return errors / pair.union_size


def occ_ratio(pairs, m: int) -> float:
    """Largest fraction of the m samples covered by any single pair."""
    if m < 1:
        raise ValueError("m must be >= 1")
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one pair")
    return max(p.union_size for p in pairs) / m


def _predictor_groups(
    classes: tuple[PredictorClass, ...], active: list[int]
) -> list[tuple[PredictorClass, list[int]]]:
    # class order is fixed so group indexing (and seeding) is reproducible
    groups = []
    for cls in CLASS_ORDER:
        cols = [c for c in active if classes[c] == cls]
        if cols:
            groups.append((cls, cols))
    return groups


def run_itc(d: Dataset, cfg: ITCConfig) -> ITCResult:
    """Run the full thinning loop on a dataset.

    Predictors are mean-normalized once up front; each iteration then works
    on the surviving columns.  The returned trace holds one record per
    iteration with the occ-ratio measured before that iteration's reduction.
    """
    if d.m < 4:
        raise ValueError(f"need at least 4 samples, got {d.m}")
    if d.n < 1:
        raise ValueError("need at least 1 predictor")

    normalized = normalize_predictors(d)
    classes = d.predictor_classes()
    active = list(range(d.n))
    records: list[IterationRecord] = []
    termination: Termination | None = None

    for index in range(1, cfg.max_iterations + 1):
        groups = _predictor_groups(classes, active)
        sub = NormalizedMatrix(
            values=normalized.values[:, active],
            kept_predictor_indices=list(active),
        )
        group_cols_local = []
        pos_of = {c: i for i, c in enumerate(active)}
        for _, cols in groups:
            group_cols_local.append([pos_of[c] for c in cols])

        iter_cfg = replace(cfg.kmeans, seed=subseed(cfg.kmeans.seed, "iteration", index))
        assignments = cluster_samples_per_group(sub, group_cols_local, iter_cfg)
        cells = combine_cells(assignments)
        pairs = heterogeneous_pairs(cells)
        occ = occ_ratio(pairs, d.m)

        stats = []
        for p in pairs:
            err = pair_loo_error(sub, p, cfg.keep_fraction)
            stats.append(
                PairStat(p.left.signature, p.right.signature, p.left.size, p.right.size, err)
            )

        eligible = [
            (p, s) for p, s in zip(pairs, stats) if p.left.size > 0 and p.right.size > 0
        ]
        if not eligible:
            # every pair has an empty side: no contrast left to reduce on
            termination = Termination.GROUPS_COLLAPSED
            break
        winner, _ = min(
            eligible, key=lambda ps: (ps[1].error_rate, -ps[0].union_size, ps[0].left.signature)
        )

        kept_local = sort_and_reduce(sub, winner, cfg.keep_fraction)
        selected = tuple(sorted(active[j] for j in kept_local))
        counts: dict[PredictorClass, int] = {}
        for c in selected:
            counts[classes[c]] = counts.get(classes[c], 0) + 1

        records.append(
            IterationRecord(
                index=index,
                group_classes=tuple(cls for cls, _ in groups),
                group_sizes=tuple(len(cols) for _, cols in groups),
                occ_ratio=occ,
                pair_stats=tuple(stats),
                winning_signature=winner.left.signature,
                selected=selected,
                selected_class_counts=counts,
            )
        )
        active = list(selected)

        if occ >= cfg.occ_threshold:
            termination = Termination.OCC_RATIO_REACHED
            break
        if len(active) <= cfg.min_predictors:
            termination = Termination.MIN_PREDICTORS_REACHED
            break
        if index == cfg.max_iterations:
            termination = Termination.MAX_ITERATIONS
            break
        if len({classes[c] for c in active}) <= 1:
            termination = Termination.GROUPS_COLLAPSED
            break

    return ITCResult(iterations=tuple(records), termination=termination)
