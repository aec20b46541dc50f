"""Population statistics, Frechet-style descriptor scores, the MMD
baseline, and descriptor reconstruction losses.

A population is scored by mapping every pose through a descriptor,
fitting mean and covariance with the population (1/n) normalization,
and comparing two such fits:

    score = |mu1 - mu2|^2 + Tr(S1 + S2 - 2 (S1 S2)^(1/2))

The reduction over a population runs in a canonical order (descriptor
rows sorted lexicographically) so the statistics are bit-identical under
any permutation of the input poses.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .descriptors import DESCRIPTOR_DIMS, descriptor_jacobian, normalize_descriptor_id, values_function
from .errors import (
    DescriptorMismatch,
    EmptyPopulation,
    NumericalFailure,
    ParseError,
)
from .linalg import _check_symmetric, frechet_trace_term
from .poses import HandPose, PosePopulation

_SCORE_NOISE = 1e-6
_MMD_NOISE = 1e-9
_PAIR_BLOCK = 64  # rows per pairwise-distance block; bounds peak memory

STATS_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PopulationStats:
    """Mean and covariance of a descriptor-mapped population."""

    descriptor_id: str
    count: int
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = _check_symmetric(self.cov, "covariance")
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"mean/covariance shapes inconsistent: {mean.shape} vs {cov.shape}"
            )
        if not np.isfinite(mean).all():
            raise ValueError("mean contains non-finite entries")
        if self.count < 1:
            raise ValueError("count must be positive")
        mean.setflags(write=False)
        cov = cov.copy()
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class MetricReport:
    """A metric score plus provenance and timing."""

    metric_name: str
    descriptor_id: str
    score: float
    n_ref: int
    n_gen: int
    wall_time_seconds: float
    precompute_seconds: float = 0.0
    evaluate_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "metric": self.metric_name,
            "descriptor": self.descriptor_id,
            "score": self.score,
            "n_ref": self.n_ref,
            "n_gen": self.n_gen,
            "wall_time_seconds": self.wall_time_seconds,
            "precompute_seconds": self.precompute_seconds,
            "evaluate_seconds": self.evaluate_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def descriptor_matrix(
    population: PosePopulation, descriptor_id: str, threads: int = 1
) -> np.ndarray:
    """Map every pose through a descriptor into an (n, dim) matrix.

    Rows follow population order. With ``threads`` > 1 the mapping is
    chunked across a thread pool; rows land at fixed positions, so the
    result does not depend on scheduling.
    """
    key = normalize_descriptor_id(descriptor_id)
    fn = values_function(key)
    n = len(population)
    out = np.empty((n, DESCRIPTOR_DIMS[key]))
    if threads <= 1 or n < 2 * threads:
        for i, pose in enumerate(population):
            out[i] = fn(pose.points)
        return out

    def fill(start: int, stop: int) -> None:
        for i in range(start, stop):
            out[i] = fn(population[i].points)

    bounds = np.linspace(0, n, threads + 1, dtype=int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(fill, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])
        ]
        for f in futures:
            f.result()
    return out


def _canonical_order(matrix: np.ndarray) -> np.ndarray:
    """Rows sorted lexicographically: a value-determined reduction order."""
    if matrix.shape[0] < 2:
        return matrix
    return matrix[np.lexsort(matrix.T[::-1])]


def stats_from_matrix(matrix: np.ndarray, descriptor_id: str, count: int | None = None) -> PopulationStats:
    """Fit mean and covariance (1/n normalization) to descriptor rows."""
    n = matrix.shape[0]
    if n == 0:
        raise EmptyPopulation("cannot fit statistics to an empty population")
    ordered = _canonical_order(matrix)
    mean = ordered.mean(axis=0)
    centered = ordered - mean
    cov = centered.T @ centered / n
    cov = (cov + cov.T) / 2.0
    return PopulationStats(
        descriptor_id=descriptor_id, count=count if count is not None else n,
        mean=mean, cov=cov,
    )


def population_stats(
    population: PosePopulation, descriptor_id: str, threads: int = 1
) -> PopulationStats:
    """Two-pass mean and covariance of a descriptor-mapped population.

    The mean is the plain average of descriptor vectors; the covariance
    averages the outer products of the centered vectors with 1/n
    normalization (not 1/(n-1)).
    """
    if len(population) == 0:
        raise EmptyPopulation("population statistics need at least one pose")
    key = normalize_descriptor_id(descriptor_id)
    matrix = descriptor_matrix(population, key, threads=threads)
    return stats_from_matrix(matrix, key)


def save_stats(stats: PopulationStats, path) -> None:
    """Write a stats cache file (single JSON object)."""
    obj = {
        "version": STATS_SCHEMA_VERSION,
        "descriptor": stats.descriptor_id,
        "dim": stats.dim,
        "count": stats.count,
        "mean": [float(x) for x in stats.mean],
        "cov": [float(x) for x in stats.cov.ravel()],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load_stats(path) -> PopulationStats:
    """Read a stats cache file written by :func:`save_stats`."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"stats file {path}: invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict) or obj.get("version") != STATS_SCHEMA_VERSION:
        raise ParseError(f"stats file {path}: missing or unsupported version")
    try:
        dim = int(obj["dim"])
        mean = np.asarray(obj["mean"], dtype=np.float64)
        cov = np.asarray(obj["cov"], dtype=np.float64).reshape(dim, dim)
        return PopulationStats(
            descriptor_id=normalize_descriptor_id(obj["descriptor"]),
            count=int(obj["count"]),
            mean=mean,
            cov=cov,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"stats file {path}: {exc}") from exc


def is_stats_file(path) -> bool:
    """True if the file holds a stats cache rather than JSONL poses."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.loads(fh.readline())
    except (json.JSONDecodeError, OSError):
        return False
    return isinstance(obj, dict) and "mean" in obj and "cov" in obj


def _clamped_score(raw: float, what: str, noise: float = _SCORE_NOISE) -> float:
    if raw >= 0.0:
        return raw
    if raw >= -noise:
        return 0.0
    raise NumericalFailure(f"{what} came out {raw:.3e}, beyond rounding tolerance")


def ffid(stats1: PopulationStats, stats2: PopulationStats) -> MetricReport:
    """Frechet descriptor distance between two population fits."""
    if stats1.descriptor_id != stats2.descriptor_id:
        raise DescriptorMismatch(
            f"descriptors differ: {stats1.descriptor_id} vs {stats2.descriptor_id}"
        )
    if stats1.dim != stats2.dim:
        raise DescriptorMismatch(f"dimensions differ: {stats1.dim} vs {stats2.dim}")
    t0 = time.perf_counter()
    diff = stats1.mean - stats2.mean
    raw = float(diff @ diff) + frechet_trace_term(stats1.cov, stats2.cov)
    score = _clamped_score(raw, "f-FID score")
    elapsed = time.perf_counter() - t0
    return MetricReport(
        metric_name="ffid",
        descriptor_id=stats1.descriptor_id,
        score=score,
        n_ref=stats1.count,
        n_gen=stats2.count,
        wall_time_seconds=elapsed,
        evaluate_seconds=elapsed,
    )


def ffid_populations(
    ref: PosePopulation, gen: PosePopulation, descriptor_id: str, threads: int = 1
) -> MetricReport:
    """Fit both populations and score them; reports the phase split.

    The reference fit is the reusable precompute phase; mapping the
    generated population and scoring it against the cached fit is the
    evaluation phase.
    """
    t0 = time.perf_counter()
    ref_stats = population_stats(ref, descriptor_id, threads=threads)
    t1 = time.perf_counter()
    gen_stats = population_stats(gen, descriptor_id, threads=threads)
    report = ffid(ref_stats, gen_stats)
    t2 = time.perf_counter()
    return MetricReport(
        metric_name="ffid",
        descriptor_id=report.descriptor_id,
        score=report.score,
        n_ref=len(ref),
        n_gen=len(gen),
        wall_time_seconds=t2 - t0,
        precompute_seconds=t1 - t0,
        evaluate_seconds=t2 - t1,
    )


def pairwise_distance_mean(a: np.ndarray, b: np.ndarray) -> float:
    """Mean Euclidean distance over the full cartesian product of rows.

    Includes the diagonal (the V-statistic convention). Processed in row
    blocks so the full distance matrix is never materialized.
    """
    total = 0.0
    for start in range(0, a.shape[0], _PAIR_BLOCK):
        chunk = a[start : start + _PAIR_BLOCK]
        diffs = chunk[:, None, :] - b[None, :, :]
        total += float(np.sqrt((diffs * diffs).sum(axis=2)).sum())
    return total / (a.shape[0] * b.shape[0])


def mmd(
    ref: PosePopulation,
    gen: PosePopulation,
    descriptor_id: str = "identity",
    threads: int = 1,
) -> MetricReport:
    """Energy-form MMD between descriptor-mapped populations.

    V-statistic estimator: twice the cross mean distance minus both
    within-population mean distances, all means over full cartesian
    products. Identical populations score exactly zero. The descriptor
    defaults to raw coordinates.
    """
    if len(ref) == 0 or len(gen) == 0:
        raise EmptyPopulation("MMD needs two non-empty populations")
    key = normalize_descriptor_id(descriptor_id)
    t0 = time.perf_counter()
    ref_vecs = descriptor_matrix(ref, key, threads=threads)
    within_ref = pairwise_distance_mean(ref_vecs, ref_vecs)
    t1 = time.perf_counter()
    gen_vecs = descriptor_matrix(gen, key, threads=threads)
    cross = pairwise_distance_mean(ref_vecs, gen_vecs)
    within_gen = pairwise_distance_mean(gen_vecs, gen_vecs)
    raw = 2.0 * cross - within_ref - within_gen
    score = _clamped_score(raw, "MMD score", noise=_MMD_NOISE)
    t2 = time.perf_counter()
    return MetricReport(
        metric_name="mmd",
        descriptor_id=key,
        score=score,
        n_ref=len(ref),
        n_gen=len(gen),
        wall_time_seconds=t2 - t0,
        precompute_seconds=t1 - t0,
        evaluate_seconds=t2 - t1,
    )


def pose_loss(gt: HandPose, pred: HandPose, descriptor_id: str) -> float:
    """Squared L2 distance between the descriptor vectors of two poses."""
    fn = values_function(descriptor_id)
    residual = fn(pred.points) - fn(gt.points)
    return float(residual @ residual)


def pose_loss_gradient(gt: HandPose, pred: HandPose, descriptor_id: str) -> np.ndarray:
    """Gradient of :func:`pose_loss` w.r.t. the 42 predicted coordinates.

    Equals 2 J^T (f(pred) - f(gt)) with J the descriptor Jacobian at the
    prediction. Spectral is unsupported (no Jacobian).
    """
    jac = descriptor_jacobian(pred, descriptor_id)
    fn = values_function(jac.descriptor_id)
    residual = fn(pred.points) - fn(gt.points)
    return 2.0 * (jac.matrix.T @ residual)


def fd_gradient_oracle(
    gt: HandPose, pred: HandPose, descriptor_id: str, h: float = 1e-6
) -> np.ndarray:
    """Central finite differences of :func:`pose_loss` over pred's coordinates."""
    if h <= 0:
        raise ValueError("step size h must be positive")
    base = pred.points.copy()
    grad = np.empty(base.size)
    for k in range(base.size):
        i, axis = divmod(k, 2)
        plus = base.copy()
        plus[i, axis] += h
        minus = base.copy()
        minus[i, axis] -= h
        loss_plus = pose_loss(gt, HandPose(points=plus), descriptor_id)
        loss_minus = pose_loss(gt, HandPose(points=minus), descriptor_id)
        grad[k] = (loss_plus - loss_minus) / (2.0 * h)
    return grad
