"""Black-box indistinguishability evaluation.

Mixes real and fake feature records, standardizes, clusters with k-means
(k=2), and scores cluster/label agreement with the adjusted Rand index and
normalized mutual information.  Scores near zero mean the clustering cannot
separate fake from real.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb, log

import numpy as np
from sklearn.cluster import KMeans

from .errors import DegenerateData, LengthMismatch
from .masquerade import Corpus, TxFeatureRecord


@dataclass
class LabeledFeatureSet:
    features: np.ndarray  # (n, 5) in feature-vector order
    labels: list[str]     # "real" | "covert"

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise LengthMismatch("feature rows and labels differ in length")


def mix_datasets(
    real: Corpus,
    fake: list[TxFeatureRecord],
    ratio: float = 0.5,
    seed: int = 0,
) -> LabeledFeatureSet:
    """Shuffled union with the fake fraction as close to ratio as the pools allow."""
    if not real.records or (not fake and ratio > 0):
        raise ValueError("both datasets must be nonempty")
    rng = np.random.default_rng(seed)
    if ratio <= 0:
        chosen_fake = []
        chosen_real = list(real.records)
    else:
        n_fake = len(fake)
        n_real = min(len(real.records), int(round(n_fake * (1 - ratio) / ratio)))
        chosen_fake = list(fake)
        idx = rng.choice(len(real.records), size=n_real, replace=False)
        chosen_real = [real.records[i] for i in idx]
    rows = [(r.as_vector(), "real") for r in chosen_real] + [
        (r.as_vector(), "covert") for r in chosen_fake
    ]
    order = rng.permutation(len(rows))
    features = np.array([rows[i][0] for i in order], dtype=float)
    labels = [rows[i][1] for i in order]
    return LabeledFeatureSet(features=features, labels=labels)


def standardize(features: np.ndarray) -> np.ndarray:
    """Z-score per column; zero-variance columns are dropped with a warning."""
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    keep = std > 0
    if not keep.any():
        raise DegenerateData("every feature column is constant")
    if not keep.all():
        warnings.warn(f"dropping {int((~keep).sum())} zero-variance feature column(s)")
    return (features[:, keep] - mean[keep]) / std[keep]


def kmeans2(features: np.ndarray, seed: int = 0) -> np.ndarray:
    """Two-cluster k-means over standardized features; best of 10 restarts."""
    if len(features) < 2:
        raise ValueError("need at least two rows")
    X = standardize(np.asarray(features, dtype=float))
    km = KMeans(
        n_clusters=2,
        init="k-means++",
        n_init=10,
        max_iter=300,
        tol=1e-6,
        random_state=seed,
    )
    return km.fit_predict(X)


def _contingency(pred, truth) -> np.ndarray:
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(truth)} labels")
    pi = {lab: k for k, lab in enumerate(dict.fromkeys(pred))}
    ti = {lab: k for k, lab in enumerate(dict.fromkeys(truth))}
    table = np.zeros((len(pi), len(ti)), dtype=np.int64)
    for p, t in zip(pred, truth):
        table[pi[p], ti[t]] += 1
    return table


def ari(pred, truth) -> float:
    """Adjusted Rand index, pair-counting form with expected-index correction."""
    table = _contingency(pred, truth)
    n = int(table.sum())
    sum_cells = sum(comb(int(x), 2) for x in table.ravel())
    sum_rows = sum(comb(int(x), 2) for x in table.sum(axis=1))
    sum_cols = sum(comb(int(x), 2) for x in table.sum(axis=0))
    total = comb(n, 2)
    expected = sum_rows * sum_cols / total if total else 0.0
    max_index = (sum_rows + sum_cols) / 2
    if max_index == expected:
        return 1.0
    return (sum_cells - expected) / (max_index - expected)


def _entropy(counts: np.ndarray, n: int) -> float:
    probs = counts[counts > 0] / n
    return float(-(probs * np.log(probs)).sum())


def nmi(pred, truth) -> float:
    """Normalized mutual information with arithmetic-mean normalization."""
    table = _contingency(pred, truth)
    n = int(table.sum())
    h_pred = _entropy(table.sum(axis=1), n)
    h_truth = _entropy(table.sum(axis=0), n)
    mi = 0.0
    rows = table.sum(axis=1)
    cols = table.sum(axis=0)
    for a in range(table.shape[0]):
        for b in range(table.shape[1]):
            nab = int(table[a, b])
            if nab:
                mi += nab / n * log(n * nab / (int(rows[a]) * int(cols[b])))
    denom = (h_pred + h_truth) / 2
    if denom == 0:
        return 1.0
    return max(0.0, min(1.0, mi / denom))
