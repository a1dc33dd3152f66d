"""k-means clustering of reduced data and ACC / NMI scoring."""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidArgumentError


@dataclass
class ClusterReport:
    """ACC/NMI of repeated k-means runs.

    ACC is the best-matching accuracy (Hungarian assignment on the
    contingency table); NMI is ``I(pred; truth) / sqrt(H(pred) H(truth))``
    with natural logarithms.
    """

    acc: list = field(default_factory=list)
    nmi: list = field(default_factory=list)
    seeds: list = field(default_factory=list)

    @property
    def runs(self):
        return len(self.acc)

    @property
    def acc_mean(self):
        return float(np.mean(self.acc))

    @property
    def acc_std(self):
        return float(np.std(self.acc))

    @property
    def nmi_mean(self):
        return float(np.mean(self.nmi))

    @property
    def nmi_std(self):
        return float(np.std(self.nmi))


def _kmeanspp(X, K, rng):
    M = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[rng.integers(M)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for c in range(1, K):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(M, p=d2 / total)
        else:
            idx = rng.integers(M)
        centers[c] = X[idx]
        d2 = np.minimum(d2, np.sum((X - centers[c]) ** 2, axis=1))
    return centers


def _sq_dists(X, centers):
    return np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)


def kmeans(z, K, seed=0, max_iter=300):
    """Lloyd's algorithm from k-means++ seeding.

    Empty clusters are re-seeded with the point farthest from its current
    center. Stops when assignments no longer change or after ``max_iter``
    iterations.

    Returns
    -------
    ndarray of int
        Cluster label per row of ``z``, in ``0..K-1``.
    """
    X = np.asarray(z, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    M = X.shape[0]
    if not 1 <= K <= M:
        raise InvalidArgumentError(f"K={K} must lie in 1..{M}")
    if not np.all(np.isfinite(X)):
        raise InvalidArgumentError("k-means input contains non-finite values")
    rng = np.random.default_rng(seed)
    centers = _kmeanspp(X, K, rng)
    labels = None
    for _ in range(max_iter):
        D = _sq_dists(X, centers)
        new = np.argmin(D, axis=1)
        counts = np.bincount(new, minlength=K)
        for c in np.flatnonzero(counts == 0):
            far = int(np.argmax(D[np.arange(M), new]))
            new[far] = c
            D[far] = 0.0
            counts = np.bincount(new, minlength=K)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(K):
            centers[c] = X[labels == c].mean(axis=0)
    return labels


def _labels(a, name):
    a = np.asarray(a)
    if a.ndim != 1:
        raise InvalidArgumentError(f"{name} must be a 1-D label vector")
    return a


def contingency(pred, truth):
    pred = _labels(pred, "pred")
    truth = _labels(truth, "truth")
    if pred.shape != truth.shape:
        raise InvalidArgumentError(f"label vectors differ in length: {pred.size} vs {truth.size}")
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def clustering_accuracy(pred, truth):
    """Fraction of samples correctly labeled under the best one-to-one label matching."""
    table = contingency(pred, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / table.sum()


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(pred, truth):
    """Normalized mutual information with geometric-mean normalization."""
    table = contingency(pred, truth)
    n = table.sum()
    if n == 0:
        raise InvalidArgumentError("nmi needs at least one sample")
    hp = _entropy(table.sum(axis=1), n)
    ht = _entropy(table.sum(axis=0), n)
    if hp == 0 or ht == 0:
        # single-cluster partitions: identical only if both are single-cluster
        return 1.0 if hp == ht else 0.0
    nz = table > 0
    pij = table[nz] / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0))[nz] / n ** 2
    mi = float(np.sum(pij * np.log(pij / outer)))
    return min(max(mi / np.sqrt(hp * ht), 0.0), 1.0)


def evaluate_clustering(z, truth, K, runs=10, base_seed=0, max_iter=300):
    """Run k-means ``runs`` times (seeds ``base_seed + r``) and score each run."""
    if runs < 1:
        raise InvalidArgumentError("runs must be >= 1")
    truth = _labels(truth, "truth")
    if truth.shape[0] != np.shape(z)[0]:
        raise InvalidArgumentError("truth labels and embedding differ in sample count")
    report = ClusterReport()
    for r in range(runs):
        seed = base_seed + r
        pred = kmeans(z, K, seed=seed, max_iter=max_iter)
        report.acc.append(clustering_accuracy(pred, truth))
        report.nmi.append(nmi(pred, truth))
        report.seeds.append(seed)
    return report
