"""k-NN hypergraphs and graphs over samples, their Laplacians and penalties.

Samples are the rows of a 2-D array (one vectorized sample per row).
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist, pdist

from .errors import InvalidArgumentError

WEIGHT_SCHEMES = ("unit", "heat")


@dataclass(frozen=True)
class NeighborIndex:
    """k nearest neighbors of every sample, nearest first.

    ``indices[i]`` never contains ``i``; ties in distance go to the lower
    sample index.
    """

    indices: np.ndarray
    distances: np.ndarray

    @property
    def k(self):
        return self.indices.shape[1]

    def __len__(self):
        return self.indices.shape[0]


@dataclass(frozen=True)
class Hypergraph:
    """Weighted hypergraph given by its 0/1 incidence matrix.

    Attributes
    ----------
    incidence : scipy.sparse.csr_matrix
        ``H`` of shape (num_vertices, num_edges), ``H[i, e] = 1`` iff vertex
        ``i`` belongs to hyperedge ``e``.
    edge_weights : ndarray
        Positive weight ``w(e)`` per hyperedge.
    vertex_degrees : ndarray
        ``d_V(i) = sum_e w(e) H[i, e]``.
    edge_degrees : ndarray
        ``d_E(e) = sum_i H[i, e]``.
    """

    incidence: sp.csr_matrix
    edge_weights: np.ndarray
    vertex_degrees: np.ndarray
    edge_degrees: np.ndarray

    @classmethod
    def from_edges(cls, edges, num_vertices, weights=None):
        """Build from an iterable of vertex collections, one per hyperedge."""
        edges = [sorted(set(int(v) for v in e)) for e in edges]
        rows, cols = [], []
        for e, members in enumerate(edges):
            if len(members) < 2:
                raise InvalidArgumentError(f"hyperedge {e} has fewer than two vertices")
            if members[0] < 0 or members[-1] >= num_vertices:
                raise InvalidArgumentError(f"hyperedge {e} references a vertex out of range")
            rows.extend(members)
            cols.extend([e] * len(members))
        n_edges = len(edges)
        H = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(num_vertices, n_edges)
        )
        w = np.ones(n_edges) if weights is None else np.asarray(weights, dtype=np.float64)
        if w.shape != (n_edges,) or np.any(w <= 0):
            raise InvalidArgumentError("need one positive weight per hyperedge")
        return cls(
            incidence=H,
            edge_weights=w,
            vertex_degrees=np.asarray(H @ w).ravel(),
            edge_degrees=np.asarray(H.sum(axis=0)).ravel(),
        )

    @property
    def num_vertices(self):
        return self.incidence.shape[0]

    @property
    def num_edges(self):
        return self.incidence.shape[1]

    def edges(self):
        """Vertex index arrays, one per hyperedge."""
        Hc = self.incidence.tocsc()
        return [Hc.indices[Hc.indptr[e]:Hc.indptr[e + 1]] for e in range(self.num_edges)]


def _as_samples(samples):
    X = np.asarray(samples, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidArgumentError("samples must be a 2-D array with one sample per row")
    return X


def knn_search(samples, k):
    """Exact Euclidean k-nearest-neighbor search (brute force).

    Parameters
    ----------
    samples : array_like, shape (M, D)
    k : int
        ``1 <= k <= M - 1``.

    Returns
    -------
    NeighborIndex
    """
    X = _as_samples(samples)
    M = X.shape[0]
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= M - 1:
        raise InvalidArgumentError(f"k={k!r} out of range 1..{M - 1}")
    D = cdist(X, X)
    np.fill_diagonal(D, np.inf)
    # stable sort: equal distances keep ascending sample order
    order = np.argsort(D, axis=1, kind="stable")[:, :k]
    return NeighborIndex(indices=order, distances=np.take_along_axis(D, order, axis=1))


def _heat_weights(X, edges):
    sigma = np.median(pdist(X))
    if sigma == 0:
        return np.ones(len(edges))
    w = np.empty(len(edges))
    for e, members in enumerate(edges):
        d = pdist(X[members])
        w[e] = np.mean(np.exp(-(d ** 2) / sigma ** 2))
    return w


def build_knn_hypergraph(samples, k, weight_scheme="unit"):
    """One hyperedge per sample: the sample together with its k neighbors.

    ``weight_scheme="unit"`` gives ``w(e) = 1``; ``"heat"`` gives the mean of
    ``exp(-d^2 / sigma^2)`` over vertex pairs in the edge, with ``sigma`` the
    median pairwise distance of all samples.
    """
    if weight_scheme not in WEIGHT_SCHEMES:
        raise InvalidArgumentError(f"unknown weight scheme {weight_scheme!r}")
    X = _as_samples(samples)
    nbrs = knn_search(X, k)
    M = X.shape[0]
    members = np.hstack([np.arange(M)[:, None], nbrs.indices])
    edge_ids = np.repeat(np.arange(M), k + 1)
    H = sp.csr_matrix(
        (np.ones(M * (k + 1)), (members.ravel(), edge_ids)), shape=(M, M)
    )
    if weight_scheme == "unit":
        w = np.ones(M)
    else:
        w = _heat_weights(X, members)
    return Hypergraph(
        incidence=H,
        edge_weights=w,
        vertex_degrees=np.asarray(H @ w).ravel(),
        edge_degrees=np.full(M, float(k + 1)),
    )


def build_knn_graph(samples, k):
    """Symmetric 0/1 k-NN adjacency: ``w_ij = 1`` iff either is a neighbor of the other."""
    X = _as_samples(samples)
    nbrs = knn_search(X, k)
    M = X.shape[0]
    rows = np.repeat(np.arange(M), k)
    A = sp.csr_matrix((np.ones(M * k), (rows, nbrs.indices.ravel())), shape=(M, M))
    W = ((A + A.T) > 0).astype(np.float64)
    return sp.csr_matrix(W)


def incidence_product(g, z):
    """Sparse evaluation of ``H W D_E^{-1} H^T z``."""
    H = g.incidence
    return H @ ((g.edge_weights / g.edge_degrees)[:, None] * (H.T @ z))


def hypergraph_laplacian(g):
    """Dense unnormalized Laplacian ``D_V - H W D_E^{-1} H^T``."""
    H = g.incidence
    A = H @ sp.diags(g.edge_weights / g.edge_degrees) @ H.T
    L = np.diag(g.vertex_degrees) - A.toarray()
    return 0.5 * (L + L.T)


def graph_laplacian(W):
    """Dense ``D - W`` for a symmetric adjacency (sparse or dense)."""
    W = W.toarray() if sp.issparse(W) else np.asarray(W, dtype=np.float64)
    return np.diag(W.sum(axis=1)) - W


def regularizer_value(L, z):
    """``trace(z^T L z)`` for a dense Laplacian."""
    L = np.asarray(L, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 1:
        z = z[:, None]
    if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape[1] != z.shape[0]:
        raise InvalidArgumentError(f"shapes {L.shape} and {z.shape} are incompatible")
    return float(np.sum(z * (L @ z)))


def column_penalties(g, z):
    """Per-column penalty ``diag(z^T L z)`` evaluated edge by edge, without forming L.

    Uses ``sum_e w(e) sum_{i in e} (z_ij - c_ej)^2`` with ``c_e`` the mean of
    ``z`` over the edge. This equals the quadratic form exactly and avoids the
    cancellation of ``d_V``-minus-affinity expressions.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[0] != g.num_vertices:
        raise InvalidArgumentError(f"z has {z.shape[0]} rows, hypergraph has {g.num_vertices} vertices")
    H = g.incidence.tocoo()
    centers = (H.T @ z) / g.edge_degrees[:, None]
    diff = z[H.row] - centers[H.col]
    return g.edge_weights[H.col] @ (diff * diff)


def regularizer_sparse(g, z):
    """``trace(z^T L z)`` through the incidence matrix; see :func:`column_penalties`."""
    return float(np.sum(column_penalties(g, z)))
