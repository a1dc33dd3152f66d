"""Hypergraph-regularized nonnegative tensor factorization and friends."""
from .errors import (
    ConfigError,
    DataError,
    DegenerateRankError,
    DegenerateSpectrumError,
    FormatError,
    HyperNTFError,
    InvalidArgumentError,
    NumericFailureError,
    TruncationError,
)
from .factorization import (
    FactorModel,
    SolverConfig,
    SolveTrace,
    TuckerModel,
    hosvd,
    hyperntf_solve,
    ntd_solve,
    ntf_solve,
)
from .hypergraph import Hypergraph, build_knn_graph, build_knn_hypergraph, hypergraph_laplacian
from .embedding import (
    PointCloud,
    EmbeddingResult,
    gen_manifold,
    graph_spectral_embed,
    hypergraph_spectral_embed,
    lle_embed,
    neighborhood_preservation,
)
from .evaluation import ClusterReport, clustering_accuracy, evaluate_clustering, kmeans, nmi

__version__ = "0.1.0"
