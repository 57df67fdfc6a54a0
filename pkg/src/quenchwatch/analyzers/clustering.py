"""K-means and density clustering over feature vectors.

Both analyzers are deterministic: K-means from its seed (random distinct
starting points, best of a fixed number of restarts), density clustering
from its scan order (clusters are numbered by discovery, border points go
to the first cluster that reaches them).
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

import numpy as np

from quenchwatch.analyzers.base import AnalyzerResult, register
from quenchwatch.signals import FeatureVector

DEFAULT_RESTARTS = 10


class KTooLarge(ValueError):
    """More clusters requested than there are points."""


def _as_matrix(points: Sequence) -> np.ndarray:
    """Accepts FeatureVectors, per-point vectors, or bare numbers."""
    rows: list[np.ndarray] = []
    for p in points:
        if isinstance(p, FeatureVector):
            rows.append(p.as_array())
        else:
            arr = np.asarray(p, dtype=np.float64)
            rows.append(arr.reshape(1) if arr.ndim == 0 else arr.reshape(-1))
    if not rows:
        return np.empty((0, 0))
    width = rows[0].size
    for i, row in enumerate(rows):
        if row.size != width:
            raise ValueError(f"point {i} has {row.size} components, expected {width}")
    matrix = np.vstack(rows)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("points must be finite")
    return matrix


def _squared_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _lloyd(
    x: np.ndarray, init_idx: np.ndarray, max_iter: int
) -> tuple[np.ndarray, np.ndarray, float, int]:
    centers = x[init_idx].copy()
    k = centers.shape[0]
    assign = np.full(x.shape[0], -1, dtype=np.int64)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        d2 = _squared_distances(x, centers)
        new_assign = np.argmin(d2, axis=1)
        # An empty cluster takes the point currently worst-served by its
        # own center; ties break toward the lowest point index.
        for c in range(k):
            if not np.any(new_assign == c):
                worst = int(np.argmax(d2[np.arange(x.shape[0]), new_assign]))
                new_assign[worst] = c
                centers[c] = x[worst]
                d2[:, c] = np.einsum("nd,nd->n", x - centers[c], x - centers[c])
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            members = x[assign == c]
            if members.shape[0]:
                centers[c] = members.mean(axis=0)
    d2 = _squared_distances(x, centers)
    inertia = float(d2[np.arange(x.shape[0]), assign].sum())
    return assign, centers, inertia, iterations


@register("kmeans")
def kmeans(
    points: Sequence,
    k: int,
    seed: int = 0,
    max_iter: int = 100,
    restarts: int = DEFAULT_RESTARTS,
) -> AnalyzerResult:
    """Lloyd's iteration, best of ``restarts`` seeded random starts.

    Returns assignments plus final centers and inertia in the metadata.
    Raises :class:`KTooLarge` when ``k`` exceeds the point count.
    """
    x = _as_matrix(points)
    n = x.shape[0]
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if k > n:
        raise KTooLarge(f"k={k} with only {n} points")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    if restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {restarts}")

    rng = np.random.default_rng(seed)
    best: tuple[np.ndarray, np.ndarray, float, int] | None = None
    for _ in range(restarts):
        init_idx = rng.choice(n, size=k, replace=False)
        result = _lloyd(x, init_idx, max_iter)
        if best is None or result[2] < best[2]:
            best = result
    assign, centers, inertia, iterations = best
    return AnalyzerResult(
        kind="clustering",
        assignments=[int(a) for a in assign],
        metadata={
            "analyzer": "kmeans",
            "k": k,
            "seed": seed,
            "max_iter": max_iter,
            "restarts": restarts,
            "centers": [[float(v) for v in c] for c in centers],
            "inertia": inertia,
            "iterations": iterations,
        },
    )


@register("dbscan")
def dbscan(points: Sequence, eps: float, min_pts: int) -> AnalyzerResult:
    """Core/border/noise labelling with Euclidean distance, radius inclusive.

    A point is core when its closed eps-ball holds at least ``min_pts``
    points (itself included).  Clusters are numbered in discovery order;
    noise is −1.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if min_pts < 1:
        raise ValueError(f"min_pts must be at least 1, got {min_pts}")
    x = _as_matrix(points)
    n = x.shape[0]

    diff = x[:, None, :] - x[None, :, :]
    d2 = np.einsum("ijd,ijd->ij", diff, diff)
    reach = d2 <= eps * eps
    neighbors = [np.flatnonzero(reach[i]) for i in range(n)]
    core = np.array([len(nb) >= min_pts for nb in neighbors])

    UNCLASSIFIED = -2
    labels = np.full(n, UNCLASSIFIED, dtype=np.int64)
    cluster = 0
    for i in range(n):
        if labels[i] != UNCLASSIFIED or not core[i]:
            continue
        labels[i] = cluster
        queue = deque(int(j) for j in neighbors[i])
        while queue:
            j = queue.popleft()
            if labels[j] == -1:
                labels[j] = cluster
            if labels[j] != UNCLASSIFIED:
                continue
            labels[j] = cluster
            if core[j]:
                queue.extend(int(m) for m in neighbors[j])
        cluster += 1
    labels[labels == UNCLASSIFIED] = -1

    return AnalyzerResult(
        kind="clustering",
        assignments=[int(a) for a in labels],
        metadata={
            "analyzer": "dbscan",
            "eps": float(eps),
            "min_pts": int(min_pts),
            "cluster_count": cluster,
        },
    )
