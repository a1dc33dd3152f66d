"""HyperNTF multiplicative updates and the NTF / NTD / HOSVD baselines.

The input tensor has the sample mode last: ``x.shape == (L_1, ..., L_{N-1}, M)``.
A CP model stores the ``N - 1`` non-sample factors ``U_n`` (columns on the
probability simplex) and the sample factor ``Z`` of shape ``(M, J)``, which is
the reduced representation used downstream.
"""
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateRankError, InvalidArgumentError, ConfigError
from .hypergraph import (
    WEIGHT_SCHEMES,
    Hypergraph,
    build_knn_hypergraph,
    column_penalties,
    incidence_product,
    regularizer_sparse,
    regularizer_value,
)
from .tensor import (
    as_tensor,
    check_nonnegative,
    cp_reconstruct,
    mode_dot,
    mttkrp,
    tucker_reconstruct,
    unfold,
)

EPS_GUARD = 1e-12
TINY = np.finfo(np.float64).tiny

OBJECTIVE_CONVERGED = "objective-converged"
RSE_CONVERGED = "rse-converged"
MAX_ITER = "max-iter"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of a factorization run.

    ``objective_criterion`` selects how the objective-change stopping rule is
    measured: ``"relative"`` compares ``|O_k - O_{k-1}|`` against the first
    recorded objective, ``"absolute"`` compares it directly with ``tol_obj``
    (use ``tol_obj=0.1`` for the classic absolute rule). ``unit_hypergraph_coef``
    drops ``lam`` from the hypergraph terms of the ``Z`` update.
    """

    rank: int = 3
    lam: float = 0.0
    knn: int = 3
    max_iter: int = 500
    tol_rse: float = 1e-4
    tol_obj: float = 1e-6
    epsilon_guard: float = EPS_GUARD
    seed: int = 0
    weight_scheme: str = "unit"
    objective_criterion: str = "relative"
    unit_hypergraph_coef: bool = False

    def __post_init__(self):
        if int(self.rank) != self.rank or self.rank < 1:
            raise ConfigError(f"rank must be a positive integer, got {self.rank!r}")
        if not self.lam >= 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam!r}")
        if int(self.knn) != self.knn or self.knn < 1:
            raise ConfigError(f"knn must be a positive integer, got {self.knn!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        for name in ("tol_rse", "tol_obj", "epsilon_guard"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.weight_scheme not in WEIGHT_SCHEMES:
            raise ConfigError(f"weight_scheme must be one of {WEIGHT_SCHEMES}")
        if self.objective_criterion not in ("relative", "absolute"):
            raise ConfigError("objective_criterion must be 'relative' or 'absolute'")


@dataclass
class FactorModel:
    """Non-sample CP factors plus the reduced data ``z``."""

    factors: list
    z: np.ndarray

    @property
    def rank(self):
        return self.z.shape[1]

    @property
    def all_factors(self):
        return list(self.factors) + [self.z]

    def reconstruct(self):
        return cp_reconstruct(self.all_factors)

    def copy(self):
        return FactorModel([u.copy() for u in self.factors], self.z.copy())


@dataclass
class SolveTrace:
    """Per-sweep history of a solve."""

    objective: list = field(default_factory=list)
    rse: list = field(default_factory=list)
    wall_time: list = field(default_factory=list)
    termination: str = ""
    kkt_residual: float = float("nan")

    @property
    def iterations(self):
        return len(self.objective)

    def append(self, obj, err, elapsed):
        self.objective.append(float(obj))
        self.rse.append(float(err))
        self.wall_time.append(float(elapsed))


def init_factors(dims, rank, seed):
    """Random positive CP model for a tensor of shape ``dims``.

    Entries are i.i.d. uniform on (0.1, 1.1); each ``U_n`` is then scaled to
    unit column sums. Draw order is ``U_1, ..., U_{N-1}, Z``.
    """
    if rank < 1:
        raise InvalidArgumentError("rank must be >= 1")
    rng = np.random.default_rng(seed)
    factors = []
    for L in dims[:-1]:
        u = rng.uniform(0.1, 1.1, size=(L, rank))
        factors.append(u / u.sum(axis=0))
    z = rng.uniform(0.1, 1.1, size=(dims[-1], rank))
    return FactorModel(factors, z)


def _penalty(penalty, z):
    if penalty is None:
        return 0.0
    if isinstance(penalty, Hypergraph):
        return regularizer_sparse(penalty, z)
    return regularizer_value(penalty, z)


def objective(x, model, penalty, lam):
    """``||x - [[U_1, ..., U_{N-1}, Z]]||_F^2 + lam * trace(Z^T L Z)``.

    ``penalty`` is a dense Laplacian, a :class:`Hypergraph` (evaluated
    sparsely) or None.
    """
    x = np.asarray(x, dtype=np.float64)
    xhat = model.reconstruct()
    if xhat.shape != x.shape:
        raise InvalidArgumentError(f"model shape {xhat.shape} does not match tensor {x.shape}")
    fit = float(np.sum(np.square(x - xhat)))
    if lam == 0:
        return fit
    return fit + lam * _penalty(penalty, model.z)


def _gram_hadamard(matrices, skip):
    J = matrices[0].shape[1]
    G = np.ones((J, J))
    for n, m in enumerate(matrices):
        if n != skip:
            G *= m.T @ m
    return G


def update_factor(x, model, mode, epsilon_guard=EPS_GUARD):
    """Multiplicative update of the non-sample factor ``U_mode``.

    ``U <- U * mttkrp(x, others, mode) / (U @ hadamard_of_grams(others))``
    with the denominator clamped below at ``epsilon_guard``. Returns the new
    matrix; ``model`` is not modified.
    """
    mats = model.all_factors
    if not 0 <= mode < len(model.factors):
        raise InvalidArgumentError(f"mode {mode} is not a non-sample mode")
    u = mats[mode]
    num = mttkrp(x, mats, mode)
    den = u @ _gram_hadamard(mats, mode)
    return u * num / np.maximum(den, epsilon_guard)


def normalize_columns(u):
    """Scale columns of ``u`` to unit sums.

    Returns
    -------
    (ndarray, ndarray)
        The normalized matrix and the column sums; multiplying the sums into
        the matching columns of ``Z`` leaves the reconstruction unchanged.
    """
    u = np.asarray(u, dtype=np.float64)
    s = u.sum(axis=0)
    zero = np.flatnonzero(~(s > 0))
    if zero.size:
        raise DegenerateRankError(int(zero[0]))
    return u / s, s


def update_z(x, model, graph, lam, epsilon_guard=EPS_GUARD, unit_hypergraph_coef=False):
    """Multiplicative update of the reduced data ``Z``.

    Numerator ``mttkrp(x, U, N) + lam * H W D_E^-1 H^T Z`` and denominator
    ``Z @ hadamard_of_grams(U) + lam * D_V Z``; hypergraph products go
    through the sparse incidence matrix. With ``unit_hypergraph_coef`` the hypergraph
    terms enter with unit coefficient whenever ``lam > 0``.
    """
    mats = model.all_factors
    N = len(mats) - 1
    z = model.z
    num = mttkrp(x, mats, N)
    den = z @ _gram_hadamard(mats, N)
    coef = (1.0 if lam > 0 else 0.0) if unit_hypergraph_coef else lam
    if coef != 0 and graph is not None:
        num = num + coef * incidence_product(graph, z)
        den = den + coef * graph.vertex_degrees[:, None] * z
    return z * num / np.maximum(den, epsilon_guard)


def _factor_step(x, model, n, graph, lam, epsilon_guard):
    """Update ``U_n``, normalize its columns and keep the objective from rising.

    The multiplicative update is followed by column normalization with the
    scales absorbed into ``Z``. Absorption leaves the fit unchanged but scales
    each column's penalty by ``s_j**2``; when that would raise the objective,
    ``Z`` is kept and ``U_n`` moves instead towards the normalized update along
    the segment of column-stochastic matrices, with the exactly minimizing
    step length (the fit is a convex quadratic on that segment).
    """
    mats = model.all_factors
    u0 = mats[n]
    num = mttkrp(x, mats, n)
    G = _gram_hadamard(mats, n)
    grad_part = num - u0 @ G
    u_mur = u0 * num / np.maximum(u0 @ G, epsilon_guard)
    u_new, s = normalize_columns(u_mur)
    if lam == 0 or graph is None:
        model.factors[n] = u_new
        model.z = model.z * s
        return
    # objective change of MUR + absorption, from the quadratic expansion
    d = u_mur - u0
    fit_change = float(np.sum(d * (d @ G)) - 2.0 * np.sum(d * grad_part))
    pen_change = lam * float(np.dot(s * s - 1.0, column_penalties(graph, model.z)))
    if fit_change + pen_change <= 0:
        model.factors[n] = u_new
        model.z = model.z * s
        return
    d = u_new - u0
    curv = float(np.sum(d * (d @ G)))
    slope = float(np.sum(d * grad_part))
    alpha = min(1.0, slope / curv) if curv > 0 and slope > 0 else 0.0
    model.factors[n] = u0 + alpha * d


def sweep(x, model, graph, lam, epsilon_guard=EPS_GUARD, unit_hypergraph_coef=False):
    """One in-place pass: every ``U_n`` in ascending order, then ``Z``."""
    for n in range(len(model.factors)):
        _factor_step(x, model, n, graph, lam, epsilon_guard)
    model.z = update_z(x, model, graph, lam, epsilon_guard, unit_hypergraph_coef)
    return model


def kkt_residual(x, model, graph=None, lam=0.0):
    """Largest entry of ``min(F, |grad_F f|)`` over all factors ``F``.

    Zero at an exact KKT point of the nonnegativity-constrained objective.
    """
    mats = model.all_factors
    worst = 0.0
    for n, f in enumerate(mats):
        grad = 2.0 * (f @ _gram_hadamard(mats, n) - mttkrp(x, mats, n))
        if n == len(mats) - 1 and graph is not None and lam > 0:
            grad += 2.0 * lam * (graph.vertex_degrees[:, None] * f - incidence_product(graph, f))
        worst = max(worst, float(np.max(np.minimum(f, np.abs(grad)))))
    return worst


def _check_input(x):
    x = as_tensor(x)
    if x.ndim < 2:
        raise InvalidArgumentError("input tensor must have order >= 2 (sample mode last)")
    check_nonnegative(x, "input tensor")
    return x


def _converged(trace, config):
    k = trace.iterations
    if trace.rse[-1] < config.tol_rse:
        return RSE_CONVERGED
    if k >= 2:
        change = abs(trace.objective[-1] - trace.objective[-2])
        if config.objective_criterion == "relative":
            change /= max(trace.objective[0], TINY)
        if change < config.tol_obj:
            return OBJECTIVE_CONVERGED
    if k >= config.max_iter:
        return MAX_ITER
    return None


def sample_vectors(x):
    """Rows are the vectorized mode-N slices of ``x`` (first index fastest)."""
    return unfold(x, x.ndim - 1)


def hyperntf_solve(x, config, graph=None, init=None):
    """Hypergraph-regularized nonnegative CP factorization.

    Parameters
    ----------
    x : ndarray
        Nonnegative tensor with the sample mode last.
    config : SolverConfig
    graph : Hypergraph, optional
        Overrides the k-NN hypergraph built from the sample slices.
    init : FactorModel, optional
        Starting point; defaults to ``init_factors(x.shape, rank, seed)``.

    Returns
    -------
    (FactorModel, SolveTrace)
    """
    x = _check_input(x)
    xnorm = float(np.sqrt(np.sum(np.square(x))))
    if xnorm == 0:
        raise InvalidArgumentError("input tensor is identically zero")
    lam = float(config.lam)
    if lam > 0 and graph is None:
        graph = build_knn_hypergraph(sample_vectors(x), config.knn, config.weight_scheme)
    if lam == 0:
        graph = None
    model = init.copy() if init is not None else init_factors(x.shape, config.rank, config.seed)

    trace = SolveTrace()
    start = time.perf_counter()
    for it in range(1, config.max_iter + 1):
        try:
            sweep(x, model, graph, lam, config.epsilon_guard, config.unit_hypergraph_coef)
        except DegenerateRankError as exc:
            raise DegenerateRankError(exc.column, it) from None
        xhat = model.reconstruct()
        fit = float(np.sum(np.square(x - xhat)))
        obj = fit + (lam * regularizer_sparse(graph, model.z) if graph is not None else 0.0)
        trace.append(obj, np.sqrt(fit) / xnorm, time.perf_counter() - start)
        reason = _converged(trace, config)
        if reason:
            trace.termination = reason
            break
    trace.kkt_residual = kkt_residual(x, model, graph, lam)
    return model, trace


def ntf_solve(x, config, init=None):
    """Plain nonnegative CP factorization: :func:`hyperntf_solve` with ``lam = 0``."""
    return hyperntf_solve(x, replace(config, lam=0.0), init=init)


@dataclass
class TuckerModel:
    core: np.ndarray
    factors: list

    def reconstruct(self):
        return tucker_reconstruct(self.core, self.factors)

    @property
    def embedding(self):
        """Sample-mode factor, used as the reduced data for clustering."""
        return self.factors[-1]


def _check_ranks(dims, ranks):
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(dims):
        raise InvalidArgumentError(f"need {len(dims)} ranks, got {len(ranks)}")
    for n, (r, L) in enumerate(zip(ranks, dims)):
        if not 1 <= r <= L:
            raise InvalidArgumentError(f"rank {r} for mode {n} must lie in 1..{L}")
    return ranks


def _project_except(t, mats, skip):
    for n, m in enumerate(mats):
        if n != skip:
            t = mode_dot(t, m, n)
    return t


def ntd_solve(x, ranks, config):
    """Nonnegative Tucker decomposition by multiplicative updates.

    Each sweep updates ``U_1, ..., U_N`` then the core ``G``:

    * ``U_n <- U_n * [X_(n) B_n] / [U_n B_n^T B_n]``, ``B_n = (kron_{i!=n} U_i) G_(n)^T``
    * ``G <- G * (X x_i U_i^T) / (G x_i U_i^T U_i)``

    ``X_(n) B_n`` and ``B_n^T B_n`` are formed through mode products, never
    through the Kronecker matrix.

    Returns
    -------
    (TuckerModel, SolveTrace)
    """
    x = _check_input(x)
    ranks = _check_ranks(x.shape, ranks)
    xnorm = float(np.sqrt(np.sum(np.square(x))))
    if xnorm == 0:
        raise InvalidArgumentError("input tensor is identically zero")
    eps = config.epsilon_guard
    rng = np.random.default_rng(config.seed)
    factors = [rng.uniform(0.1, 1.1, size=(L, r)) for L, r in zip(x.shape, ranks)]
    core = rng.uniform(0.1, 1.1, size=ranks)
    N = x.ndim

    trace = SolveTrace()
    start = time.perf_counter()
    for it in range(1, config.max_iter + 1):
        for n in range(N):
            gram = [u.T @ u for u in factors]
            Gn = unfold(core, n)
            xb = unfold(_project_except(x, [u.T for u in factors], n), n) @ Gn.T
            btb = unfold(_project_except(core, gram, n), n) @ Gn.T
            u = factors[n]
            factors[n] = u * xb / np.maximum(u @ btb, eps)
        num = _project_except(x, [u.T for u in factors], -1)
        den = _project_except(core, [u.T @ u for u in factors], -1)
        core = core * num / np.maximum(den, eps)
        fit = float(np.sum(np.square(x - tucker_reconstruct(core, factors))))
        trace.append(fit, np.sqrt(fit) / xnorm, time.perf_counter() - start)
        reason = _converged(trace, config)
        if reason:
            trace.termination = reason
            break
    return TuckerModel(core, factors), trace


def hosvd(x, ranks):
    """Truncated higher-order SVD.

    ``U_n`` holds the leading left singular vectors of ``unfold(x, n)``, each
    column signed so its largest-magnitude entry is positive; the core is
    ``x x_1 U_1^T ... x_N U_N^T``.

    Returns
    -------
    TuckerModel
    """
    x = as_tensor(x)
    ranks = _check_ranks(x.shape, ranks)
    factors = []
    for n, r in enumerate(ranks):
        u = np.linalg.svd(unfold(x, n), full_matrices=False)[0]
        if u.shape[1] < r:
            raise InvalidArgumentError(
                f"rank {r} for mode {n} exceeds the {u.shape[1]} singular vectors available"
            )
        u = u[:, :r]
        idx = np.argmax(np.abs(u), axis=0)
        u = u * np.sign(u[idx, np.arange(r)])
        factors.append(u)
    core = _project_except(x, [u.T for u in factors], -1)
    return TuckerModel(core, factors)
