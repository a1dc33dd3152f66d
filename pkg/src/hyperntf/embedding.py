"""Synthetic 3-D manifolds and 2-D unfolding by spectral and LLE embeddings."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateSpectrumError, InvalidArgumentError, NumericFailureError
from .hypergraph import (
    build_knn_graph,
    build_knn_hypergraph,
    graph_laplacian,
    hypergraph_laplacian,
    knn_search,
)

MANIFOLDS = ("punctured_sphere", "gaussian", "twin_peaks", "toroidal_helix")

# default neighbor count per surface
DEFAULT_KNN = {
    "punctured_sphere": 44,
    "gaussian": 25,
    "twin_peaks": 15,
    "toroidal_helix": 10,
}

ZERO_EIG_RTOL = 1e-8


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    color: np.ndarray

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class EmbeddingResult:
    coords: np.ndarray
    method: str
    eigenvalues: np.ndarray = None


def sphere_point(px, py):
    """Lift planar points onto the unit sphere centred at (0, 0, 1).

    ``(a px, a py, 2 (1 - a))`` with ``a = 4 / (4 + px^2 + py^2)``: the
    origin maps to (0, 0, 0) and far points approach the pole (0, 0, 2).
    """
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    a = 4.0 / (4.0 + px ** 2 + py ** 2)
    return np.stack([a * px, a * py, 2.0 * (1.0 - a)], axis=-1)


def twin_peaks_point(x, y):
    """``(x, y, sin(pi x) tanh(3 y))``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.stack([x, y, np.sin(np.pi * x) * np.tanh(3.0 * y)], axis=-1)


def _punctured_sphere(rng, M):
    # uniform in the planar disk of radius 5
    r = 5.0 * np.sqrt(rng.uniform(0.0, 1.0, M))
    phi = rng.uniform(0.0, 2 * np.pi, M)
    return sphere_point(r * np.cos(phi), r * np.sin(phi)), r


def _gaussian(rng, M):
    x = rng.uniform(-2.0, 2.0, M)
    y = rng.uniform(-2.0, 2.0, M)
    return np.column_stack([x, y, np.exp(-(x ** 2 + y ** 2) / 2.0)]), x


def _twin_peaks(rng, M):
    x = rng.uniform(-1.0, 1.0, M)
    y = rng.uniform(-1.0, 1.0, M)
    return twin_peaks_point(x, y), x


def _toroidal_helix(rng, M):
    t = rng.uniform(0.0, 2 * np.pi, M)
    return helix_point(t), t


def helix_point(t):
    """Toroidal helix ``((2 + cos 8t) cos t, (2 + cos 8t) sin t, sin 8t)``."""
    t = np.asarray(t, dtype=np.float64)
    ring = 2.0 + np.cos(8.0 * t)
    return np.stack([ring * np.cos(t), ring * np.sin(t), np.sin(8.0 * t)], axis=-1)


_GENERATORS = {
    "punctured_sphere": _punctured_sphere,
    "gaussian": _gaussian,
    "twin_peaks": _twin_peaks,
    "toroidal_helix": _toroidal_helix,
}


def gen_manifold(kind, M, seed=0, noise_sd=0.0):
    """Sample ``M`` points from a named surface, plus isotropic Gaussian noise.

    ``color`` is the intrinsic parameter used for plotting (helix angle,
    planar radius for the sphere, first planar coordinate otherwise).
    """
    if kind not in _GENERATORS:
        raise InvalidArgumentError(f"unknown manifold {kind!r}; choose from {MANIFOLDS}")
    if M < 4:
        raise InvalidArgumentError("need at least 4 points")
    if not noise_sd >= 0:
        raise InvalidArgumentError("noise_sd must be >= 0")
    rng = np.random.default_rng(seed)
    points, color = _GENERATORS[kind](rng, M)
    if noise_sd > 0:
        points = points + rng.normal(0.0, noise_sd, size=points.shape)
    return PointCloud(points=points, color=np.asarray(color, dtype=np.float64))


def _points(pc):
    return pc.points if isinstance(pc, PointCloud) else np.asarray(pc, dtype=np.float64)


def _fix_signs(vecs):
    idx = np.argmax(np.abs(vecs), axis=0)
    return vecs * np.sign(vecs[idx, np.arange(vecs.shape[1])])


def _spectral(L, d, method):
    M = L.shape[0]
    if not 1 <= d <= M - 2:
        raise InvalidArgumentError(f"embedding dimension d={d} must lie in 1..{M - 2}")
    vals, vecs = scipy.linalg.eigh(L)
    cutoff = ZERO_EIG_RTOL * max(vals[-1], 0.0)
    nonzero = np.flatnonzero(vals > cutoff)
    n_zero = M - nonzero.size
    if nonzero.size < d:
        raise DegenerateSpectrumError(
            f"{n_zero} connected components leave only {nonzero.size} nonzero eigenvalues, need {d}"
        )
    keep = nonzero[:d]
    coords = vecs[:, keep]
    coords = coords / np.linalg.norm(coords, axis=0)
    return EmbeddingResult(coords=_fix_signs(coords), method=method, eigenvalues=vals[keep])


def hypergraph_spectral_embed(pc, k, d=2, weight_scheme="unit"):
    """Eigenvectors of the k-NN hypergraph Laplacian for the ``d`` smallest nonzero eigenvalues."""
    X = _points(pc)
    L = hypergraph_laplacian(build_knn_hypergraph(X, k, weight_scheme))
    return _spectral(L, d, "hypergraph-le")


def graph_spectral_embed(pc, k, d=2):
    """Laplacian eigenmap on the symmetric 0/1 k-NN graph."""
    X = _points(pc)
    L = graph_laplacian(build_knn_graph(X, k))
    return _spectral(L, d, "graph-le")


def lle_weights(X, k, reg=1e-3):
    """Locally linear reconstruction weights as a dense ``(M, M)`` matrix.

    Row ``i`` holds the affine weights (summing to one) that best rebuild
    ``X[i]`` from its ``k`` nearest neighbors; the local Gram matrix is
    regularized by ``reg * trace(G) / k`` on its diagonal.
    """
    X = np.asarray(X, dtype=np.float64)
    M = X.shape[0]
    nbrs = knn_search(X, k).indices
    W = np.zeros((M, M))
    ones = np.ones(k)
    for i in range(M):
        C = X[nbrs[i]] - X[i]
        G = C @ C.T
        tr = np.trace(G)
        G = G + (reg * tr / k if tr > 0 else reg) * np.eye(k)
        try:
            w = scipy.linalg.solve(G, ones, assume_a="pos")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise NumericFailureError(f"local Gram matrix of point {i} is singular") from exc
        if not np.all(np.isfinite(w)) or w.sum() == 0:
            raise NumericFailureError(f"local Gram matrix of point {i} is singular")
        W[i, nbrs[i]] = w / w.sum()
    return W


def lle_embed(pc, k, d=2, reg=1e-3):
    """Locally linear embedding: eigenvectors 2..d+1 of ``(I - W)^T (I - W)``."""
    X = _points(pc)
    M = X.shape[0]
    if d < 1 or d > M - 2:
        raise InvalidArgumentError(f"embedding dimension d={d} must lie in 1..{M - 2}")
    W = lle_weights(X, k, reg)
    A = np.eye(M) - W
    vals, vecs = scipy.linalg.eigh(A.T @ A, subset_by_index=[0, d])
    coords = _fix_signs(vecs[:, 1:d + 1])
    return EmbeddingResult(coords=coords, method="lle", eigenvalues=vals[1:d + 1])


def neighborhood_preservation(high, low, k):
    """Mean fraction of each point's k nearest neighbors shared by both spaces."""
    A = _points(high)
    B = low.coords if isinstance(low, EmbeddingResult) else np.asarray(low, dtype=np.float64)
    if A.shape[0] != B.shape[0]:
        raise InvalidArgumentError(f"point counts differ: {A.shape[0]} vs {B.shape[0]}")
    na = knn_search(A, k).indices
    nb = knn_search(B, k).indices
    shared = [np.intersect1d(na[i], nb[i], assume_unique=True).size for i in range(A.shape[0])]
    return float(np.mean(shared)) / k
