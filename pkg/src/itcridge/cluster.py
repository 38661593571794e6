"""Seedable k-means with k-means++ starts and deterministic tie-breaking.

Points are clustered in a canonical (lexicographically sorted) order so the
resulting partition does not depend on input row order; assignments are
mapped back to the caller's order afterwards.  All randomness flows through
substreams derived from (seed, restart index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import rng_for


@dataclass
class KMeansConfig:
    """Settings for one k-means run."""

    k: int
    seed: int
    max_iterations: int = 300
    tolerance: float = 1e-6
    restarts: int = 10

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class Clustering:
    """Result of a k-means run.

    ``objective`` is the sum of squared distances of each point to its
    centroid; ``objective_history`` holds the per-iteration objectives of the
    winning restart, which never increase.
    """

    assignment: np.ndarray
    centroids: np.ndarray
    objective: float
    objective_history: tuple[float, ...]


def _plus_plus_seeding(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = x.shape[0]
    chosen = [int(rng.integers(m))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(m, p=d2 / total))
        else:
            # all remaining distances zero: duplicate points, pick uniformly
            idx = int(rng.integers(m))
        chosen.append(idx)
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _squared_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (m, k) matrix of squared euclidean distances
    cross = x @ centroids.T
    x2 = (x * x).sum(axis=1)[:, None]
    c2 = (centroids * centroids).sum(axis=1)[None, :]
    return np.maximum(x2 - 2.0 * cross + c2, 0.0)


def _repair_empty(assignment: np.ndarray, centroids: np.ndarray, x: np.ndarray) -> np.ndarray:
    # move the point farthest from its own centroid into each empty cluster,
    # never draining a singleton cluster
    k = centroids.shape[0]
    for c in range(k):
        if np.any(assignment == c):
            continue
        dist = ((x - centroids[assignment]) ** 2).sum(axis=1)
        counts = np.bincount(assignment, minlength=k)
        movable = counts[assignment] > 1
        if not np.any(movable):
            break
        dist = np.where(movable, dist, -np.inf)
        assignment[int(np.argmax(dist))] = c
    return assignment


def _lloyd(
    x: np.ndarray, centroids: np.ndarray, max_iterations: int, tolerance: float
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    k = centroids.shape[0]
    assignment = np.full(x.shape[0], -1, dtype=np.int64)
    history: list[float] = []
    prev_objective = np.inf
    for _ in range(max_iterations):
        d2 = _squared_distances(x, centroids)
        new_assignment = d2.argmin(axis=1)
        new_assignment = _repair_empty(new_assignment, centroids, x)
        for c in range(k):
            members = x[new_assignment == c]
            if members.shape[0]:
                centroids[c] = members.mean(axis=0)
        objective = float(((x - centroids[new_assignment]) ** 2).sum())
        assert objective <= prev_objective * (1.0 + 1e-9) + 1e-9, "objective increased"
        history.append(objective)
        converged = np.array_equal(new_assignment, assignment)
        improved = prev_objective - objective
        assignment = new_assignment
        if converged or improved <= tolerance * max(prev_objective, 1e-300):
            prev_objective = objective
            break
        prev_objective = objective
    return assignment, centroids, prev_objective, history


def kmeans(points, config: KMeansConfig) -> Clustering:
    """Cluster rows of ``points`` into ``config.k`` groups.

    Runs ``config.restarts`` independent k-means++ starts and keeps the run
    with the lowest objective (ties resolved by lowest restart index).  Every
    cluster in the result is non-empty.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("points must be a 2-d array")
    if not np.all(np.isfinite(x)):
        raise ValueError("points must be finite")
    m = x.shape[0]
    if m < config.k:
        raise ValueError(f"need at least k={config.k} points, got {m}")

    # canonical processing order: partition becomes independent of row order
    order = np.lexsort(x.T[::-1])
    xc = x[order]

    best: tuple[np.ndarray, np.ndarray, float, list[float]] | None = None
    for restart in range(config.restarts):
        rng = rng_for(config.seed, "restart", restart)
        start = _plus_plus_seeding(xc, config.k, rng)
        result = _lloyd(xc, start, config.max_iterations, config.tolerance)
        if best is None or result[2] < best[2]:
            best = result

    assignment_canonical, centroids, objective, history = best
    assignment = np.empty(m, dtype=np.int64)
    assignment[order] = assignment_canonical
    return Clustering(
        assignment=assignment,
        centroids=centroids,
        objective=objective,
        objective_history=tuple(history),
    )


def nearest_centroid(point, centroids) -> int:
    """Index of the closest centroid; ties go to the lowest index."""
    p = np.asarray(point, dtype=np.float64)
    c = np.asarray(centroids, dtype=np.float64)
    if p.ndim != 1 or c.ndim != 2 or c.shape[1] != p.shape[0]:
        raise ValueError("point and centroids disagree on dimension")
    return int(((c - p) ** 2).sum(axis=1).argmin())
