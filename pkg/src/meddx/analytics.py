"""Trend fitting and clustering for patient time series.

The trend model is an ordinary least-squares line over (instant, value)
points, with time re-based to the earliest sample for numerical
conditioning. Clustering is batch k-means with a deterministic
farthest-point seeding, so identical inputs always give identical output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .store import Instant


class AnalyticsError(Exception):
    pass


@dataclass(frozen=True)
class TimePoint:
    t: Instant
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise AnalyticsError(f"non-finite value {self.value!r} at t={self.t}")


@dataclass(frozen=True)
class TrendModel:
    slope: float  # per second
    intercept: float  # value at t_ref
    t_ref: Instant  # earliest sample time
    t_max: Instant  # latest sample time; [t_ref, t_max] is the fit span
    n: int


@dataclass(frozen=True)
class Prediction:
    value: float
    extrapolated: bool  # True when t falls outside the fit span


@dataclass(frozen=True)
class Clustering:
    k: int
    centroids: tuple[tuple[float, ...], ...]
    assignment: tuple[int, ...]  # point index -> cluster index
    sse: float
    iterations: int


def fit_trend(points: list[TimePoint]) -> TrendModel:
    """Least-squares line minimizing sum (value - (slope*(t-t_ref) + intercept))^2.

    Needs at least two points with at least two distinct times.
    """
    if len(points) < 2:
        raise AnalyticsError(f"need at least 2 points, got {len(points)}")
    t_ref = min(p.t for p in points)
    t_max = max(p.t for p in points)
    if t_ref == t_max:
        raise AnalyticsError("all sample times identical; no trend is defined")

    xs = [float(p.t - t_ref) for p in points]
    ys = [p.value for p in points]
    n = len(points)
    x_mean = sum(xs) / n
    y_mean = sum(ys) / n
    sxx = sum((x - x_mean) ** 2 for x in xs)
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    if not (math.isfinite(slope) and math.isfinite(intercept)):
        raise AnalyticsError("degenerate fit produced non-finite coefficients")
    return TrendModel(slope, intercept, t_ref, t_max, n)


def predict(model: TrendModel, t: Instant) -> Prediction:
    """Evaluate the fitted line at t; flags whether t lies outside the span
    the model was fit on (extrapolation)."""
    value = model.slope * (t - model.t_ref) + model.intercept
    extrapolated = not model.t_ref <= t <= model.t_max
    return Prediction(value, extrapolated)


def residuals(model: TrendModel, points: list[TimePoint]) -> list[float]:
    return [p.value - predict(model, p.t).value for p in points]


# -- k-means --------------------------------------------------------------


def _sq_dist(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    return sum((x - y) ** 2 for x, y in zip(a, b))


def _nearest(point: tuple[float, ...], centroids: list[tuple[float, ...]]) -> int:
    best = 0
    best_d = _sq_dist(point, centroids[0])
    for idx in range(1, len(centroids)):
        d = _sq_dist(point, centroids[idx])
        if d < best_d:  # ties keep the lowest index
            best, best_d = idx, d
    return best


def _seed(points: list[tuple[float, ...]], k: int) -> list[tuple[float, ...]]:
    """Farthest-point seeding: start from the first point, then repeatedly
    take the point farthest from the chosen set (ties to lowest index)."""
    chosen = [0]
    while len(chosen) < k:
        best_idx = None
        best_d = -1.0
        for idx, point in enumerate(points):
            if idx in chosen:
                continue
            d = min(_sq_dist(point, points[c]) for c in chosen)
            if d > best_d:
                best_d = d
                best_idx = idx
        chosen.append(best_idx)
    return [points[i] for i in chosen]


def kmeans(vectors: list[list[float] | tuple[float, ...]], k: int, max_iter: int = 100) -> Clustering:
    """Batch k-means. Deterministic: farthest-point seeding, ties to the
    lowest index, empty clusters repaired with the point farthest from its
    centroid."""
    if not vectors:
        raise AnalyticsError("no vectors to cluster")
    if not 1 <= k <= len(vectors):
        raise AnalyticsError(f"k must lie in [1, {len(vectors)}], got {k}")
    if max_iter < 1:
        raise AnalyticsError(f"max_iter must be positive, got {max_iter}")
    dim = len(vectors[0])
    points = []
    for i, v in enumerate(vectors):
        if len(v) != dim:
            raise AnalyticsError(f"vector {i} has dimension {len(v)}, expected {dim}")
        points.append(tuple(float(x) for x in v))

    centroids = _seed(points, k)
    assignment = [_nearest(p, centroids) for p in points]
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        # recompute centroids from members
        sums = [[0.0] * dim for _ in range(k)]
        counts = [0] * k
        for p, c in zip(points, assignment):
            counts[c] += 1
            for j in range(dim):
                sums[c][j] += p[j]
        for c in range(k):
            if counts[c] == 0:
                # repair: steal the point farthest from its own centroid
                far_idx = max(
                    range(len(points)),
                    key=lambda i: (_sq_dist(points[i], centroids[assignment[i]]), -i),
                )
                assignment[far_idx] = c
                centroids[c] = points[far_idx]
                counts[c] = 1
            else:
                centroids[c] = tuple(s / counts[c] for s in sums[c])
        new_assignment = [_nearest(p, centroids) for p in points]
        if new_assignment == assignment:
            break
        assignment = new_assignment

    sse = sum(_sq_dist(p, centroids[c]) for p, c in zip(points, assignment))
    return Clustering(k, tuple(centroids), tuple(assignment), sse, iterations)
