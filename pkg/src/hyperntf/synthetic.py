"""Known-structure nonnegative tensors for recovery and clustering checks."""
import numpy as np

from .tensor import cp_reconstruct, tucker_reconstruct

# rank-1 5x5 class prototypes given as (row pattern, column pattern)
PROTOTYPES = (
    ((1, 1, 0, 0, 0), (1, 1, 0, 0, 0)),
    ((0, 0, 1, 1, 0), (0, 0, 1, 1, 0)),
    ((0, 0, 0, 1, 1), (1, 0, 0, 0, 1)),
)


def cp_tensor(dims=(10, 10, 60), rank=3, seed=0):
    """Exact nonnegative CP tensor with uniform(0, 1) factors.

    Returns
    -------
    (ndarray, list of ndarray)
    """
    rng = np.random.default_rng(seed)
    factors = [rng.uniform(0.0, 1.0, size=(L, rank)) for L in dims]
    return cp_reconstruct(factors), factors


def tucker_tensor(dims=(10, 10, 60), ranks=(3, 3, 3), seed=0):
    """Exact nonnegative Tucker tensor.

    Factors are rectified Gaussians (about half the entries zero), which
    makes the factor columns well separated; the core is uniform(0, 1).

    Returns
    -------
    (ndarray, ndarray, list of ndarray)
        Tensor, core, factors.
    """
    rng = np.random.default_rng(seed)
    factors = [np.maximum(rng.standard_normal((L, r)), 0.0) for L, r in zip(dims, ranks)]
    core = rng.uniform(0.0, 1.0, size=ranks)
    return tucker_reconstruct(core, factors), core, factors


def class_tensor(per_class=50, seed=7, noise=0.05):
    """5 x 5 x (3 * per_class) tensor of three separated sample classes.

    Sample ``m`` of class ``c`` is the class prototype scaled by a
    uniform(0.5, 1.5) amplitude plus ``noise`` times uniform(0, 1) clutter.

    Returns
    -------
    (ndarray, ndarray)
        Tensor and integer labels.
    """
    rng = np.random.default_rng(seed)
    M = per_class * len(PROTOTYPES)
    x = np.empty((5, 5, M))
    labels = np.repeat(np.arange(len(PROTOTYPES)), per_class)
    for m, c in enumerate(labels):
        a, b = PROTOTYPES[c]
        proto = np.outer(a, b).astype(np.float64)
        x[:, :, m] = proto * rng.uniform(0.5, 1.5) + noise * rng.uniform(0.0, 1.0, (5, 5))
    return x, labels
