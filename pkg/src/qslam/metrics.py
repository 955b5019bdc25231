"""Evaluation metrics for qualitative state estimates against ground truth."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .partition import SpacePartition


@dataclass(frozen=True)
class MetricReport:
    dmse: float
    gmd: float
    entropy: float
    gt_likelihood: float
    gt_likelihood_ratio: float
    likelihood_ratio: float
    gt_rating: int

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def dmse(est, gt_index: int) -> float:
    """Euclidean distance between the estimate and the GT one-hot vector."""
    est = np.asarray(est, dtype=float)
    onehot = np.zeros_like(est)
    onehot[gt_index - 1] = 1.0
    return float(np.linalg.norm(est - onehot))


def gmd(est, gt_index: int, partition: SpacePartition) -> float:
    """Probability-weighted centroid distance to the GT region, |AB| units."""
    est = np.asarray(est, dtype=float)
    centroids = partition.centroids()
    dists = np.linalg.norm(centroids - centroids[gt_index - 1], axis=1)
    return float(est @ dists)


def entropy(est) -> float:
    est = np.asarray(est, dtype=float)
    pos = est[est > 0.0]
    return float(-(pos * np.log(pos)).sum())


def gt_rating(est, gt_index: int) -> int:
    """Descending-probability rank of the GT state; ties take the best rank."""
    est = np.asarray(est, dtype=float)
    return int(np.sum(est > est[gt_index - 1])) + 1


def gt_likelihood(est, gt_index: int) -> float:
    return float(np.asarray(est, dtype=float)[gt_index - 1])


def gt_likelihood_ratio(est, gt_index: int) -> float:
    est = np.asarray(est, dtype=float)
    return float(est[gt_index - 1] / est.max())


def likelihood_ratio(est) -> float:
    """Second-most-likely over most-likely state probability."""
    est = np.sort(np.asarray(est, dtype=float))
    return float(est[-2] / est[-1])


def report(est, gt_index: int, partition: SpacePartition) -> MetricReport:
    return MetricReport(
        dmse=dmse(est, gt_index),
        gmd=gmd(est, gt_index, partition),
        entropy=entropy(est),
        gt_likelihood=gt_likelihood(est, gt_index),
        gt_likelihood_ratio=gt_likelihood_ratio(est, gt_index),
        likelihood_ratio=likelihood_ratio(est),
        gt_rating=gt_rating(est, gt_index),
    )
