"""Dense multilinear-algebra kernels.

Tensors are plain :class:`numpy.ndarray` objects of dtype float64; matrices
are 2-D arrays. Modes are 0-based numpy axes.

Conventions used throughout the package:

* Unfolding: the mode-``n`` unfolding has shape ``(L_n, prod(L_i, i != n))``
  and its columns enumerate the remaining indices with the *lowest* mode
  varying fastest.
* Khatri-Rao products over several factors are taken in descending mode
  order, ``U_N (.) ... (.) U_1``, which is the column ordering matching the
  unfolding above.
* Linear storage (files, ``ravel``) is first-index-fastest (Fortran order).
"""
from functools import reduce

import numpy as np

from .errors import DataError, InvalidArgumentError

__all__ = [
    "as_tensor",
    "check_nonnegative",
    "unfold",
    "fold",
    "khatri_rao",
    "khatri_rao_list",
    "kronecker",
    "hadamard",
    "mode_vec_product",
    "mode_dot",
    "mttkrp",
    "superdiag",
    "cp_reconstruct",
    "tucker_reconstruct",
    "frobenius",
    "rse",
]


def as_tensor(x):
    """Return ``x`` as a float64 ndarray with at least one dimension."""
    t = np.asarray(x, dtype=np.float64)
    if t.ndim == 0 or t.size == 0:
        raise InvalidArgumentError("tensor must have order >= 1 and no zero extents")
    return t


def check_nonnegative(x, name="tensor"):
    """Raise :class:`DataError` naming the first negative entry of ``x``.

    "First" follows the first-index-fastest linear order.
    """
    flat = np.ravel(x, order="F")
    bad = np.flatnonzero(flat < 0)
    if bad.size:
        idx = np.unravel_index(bad[0], np.shape(x), order="F")
        idx = tuple(int(i) for i in idx)
        raise DataError(f"{name} has a negative entry {flat[bad[0]]!r} at index {idx}")
    if not np.all(np.isfinite(flat)):
        raise DataError(f"{name} contains non-finite values")


def _check_mode(ndim, mode):
    if not isinstance(mode, (int, np.integer)) or not 0 <= mode < ndim:
        raise InvalidArgumentError(f"mode {mode!r} out of range for an order-{ndim} tensor")


def unfold(t, mode):
    """Mode-``mode`` matricization of ``t``.

    Parameters
    ----------
    t : ndarray
        Order-N tensor.
    mode : int
        Axis to place along the rows, ``0 <= mode < N``.

    Returns
    -------
    ndarray
        Matrix of shape ``(t.shape[mode], t.size // t.shape[mode])``.
    """
    t = np.asarray(t)
    _check_mode(t.ndim, mode)
    return np.moveaxis(t, mode, 0).reshape((t.shape[mode], -1), order="F")


def fold(m, mode, dims):
    """Inverse of :func:`unfold` for the given ``mode`` and tensor ``dims``."""
    m = np.asarray(m)
    dims = tuple(int(d) for d in dims)
    _check_mode(len(dims), mode)
    rest = int(np.prod([d for i, d in enumerate(dims) if i != mode], dtype=np.int64))
    if m.ndim != 2 or m.shape != (dims[mode], rest):
        raise InvalidArgumentError(
            f"matrix of shape {m.shape} cannot be folded along mode {mode} into {dims}"
        )
    moved = (dims[mode],) + tuple(d for i, d in enumerate(dims) if i != mode)
    return np.moveaxis(m.reshape(moved, order="F"), 0, mode)


def khatri_rao(a, b):
    """Column-wise Kronecker product; column ``j`` is ``kron(a[:, j], b[:, j])``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise InvalidArgumentError(
            f"khatri_rao needs matrices with equal column counts, got {a.shape} and {b.shape}"
        )
    return (a[:, None, :] * b[None, :, :]).reshape(a.shape[0] * b.shape[0], a.shape[1])


def khatri_rao_list(matrices):
    """Khatri-Rao product of several matrices, left to right."""
    if not matrices:
        raise InvalidArgumentError("khatri_rao_list needs at least one matrix")
    return reduce(khatri_rao, matrices)


def kronecker(a, b):
    return np.kron(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64))


def hadamard(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"hadamard needs equal shapes, got {a.shape} and {b.shape}")
    return a * b


def mode_vec_product(t, v, mode):
    """Contract mode ``mode`` of ``t`` with the vector ``v``.

    The result has order ``t.ndim - 1`` (a 0-d array for an order-1 input).
    """
    t = np.asarray(t, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    _check_mode(t.ndim, mode)
    if v.ndim != 1 or v.shape[0] != t.shape[mode]:
        raise InvalidArgumentError(
            f"vector of length {v.shape} does not match mode {mode} extent {t.shape[mode]}"
        )
    return np.tensordot(t, v, axes=([mode], [0]))


def mode_dot(t, m, mode):
    """Mode-``mode`` product ``t x_mode m`` with a matrix of shape ``(K, L_mode)``."""
    t = np.asarray(t, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    _check_mode(t.ndim, mode)
    if m.ndim != 2 or m.shape[1] != t.shape[mode]:
        raise InvalidArgumentError(
            f"matrix of shape {m.shape} does not match mode {mode} extent {t.shape[mode]}"
        )
    dims = list(t.shape)
    dims[mode] = m.shape[0]
    return fold(m @ unfold(t, mode), mode, dims)


def _factor_list(t, factors, mode):
    factors = list(factors)
    if len(factors) == t.ndim - 1:
        factors.insert(mode, None)
    if len(factors) != t.ndim:
        raise InvalidArgumentError(
            f"expected {t.ndim - 1} or {t.ndim} factors for an order-{t.ndim} tensor, got {len(factors)}"
        )
    rank = None
    for n, f in enumerate(factors):
        if n == mode:
            continue
        f = np.asarray(f, dtype=np.float64)
        if f.ndim != 2 or f.shape[0] != t.shape[n]:
            raise InvalidArgumentError(
                f"factor {n} has shape {f.shape}, expected ({t.shape[n]}, J)"
            )
        if rank is None:
            rank = f.shape[1]
        elif f.shape[1] != rank:
            raise InvalidArgumentError("all factors must have the same number of columns")
        factors[n] = f
    return factors, rank


def mttkrp(t, factors, mode):
    """Matricized tensor times Khatri-Rao product, one column at a time.

    Equivalent to ``unfold(t, mode) @ khatri_rao_list([U_{N-1}, ..., U_0])``
    (skipping ``mode``) but never materializes the Khatri-Rao matrix: column
    ``j`` is ``t`` contracted with column ``j`` of every other factor.

    Parameters
    ----------
    t : ndarray
        Order-N tensor, N >= 2.
    factors : list of ndarray
        Either N matrices (entry ``mode`` is ignored and may be None) or the
        N-1 non-mode matrices in ascending mode order. All share J columns.
    mode : int

    Returns
    -------
    ndarray of shape ``(t.shape[mode], J)``
    """
    t = np.asarray(t, dtype=np.float64)
    _check_mode(t.ndim, mode)
    if t.ndim < 2:
        raise InvalidArgumentError("mttkrp needs a tensor of order >= 2")
    factors, rank = _factor_list(t, factors, mode)
    out = np.empty((t.shape[mode], rank))
    # Descending contraction keeps lower axis positions valid and fixes the
    # summation order for every column.
    others = [n for n in reversed(range(t.ndim)) if n != mode]
    for j in range(rank):
        r = t
        for n in others:
            r = np.tensordot(r, factors[n][:, j], axes=([n], [0]))
        out[:, j] = r
    return out


def superdiag(J, N):
    """Order-N super-diagonal tensor of extent J with unit diagonal."""
    if J < 1 or N < 1:
        raise InvalidArgumentError("superdiag needs J >= 1 and N >= 1")
    s = np.zeros((J,) * N)
    idx = np.arange(J)
    s[(idx,) * N] = 1.0
    return s


def cp_reconstruct(factors):
    """Full tensor of the CP model ``sum_j u_{1j} o u_{2j} o ... o u_{Nj}``."""
    factors = [np.asarray(f, dtype=np.float64) for f in factors]
    if not factors or any(f.ndim != 2 for f in factors):
        raise InvalidArgumentError("cp_reconstruct needs a non-empty list of matrices")
    rank = factors[0].shape[1]
    if any(f.shape[1] != rank for f in factors):
        raise InvalidArgumentError("all CP factors must have the same number of columns")
    dims = [f.shape[0] for f in factors]
    if len(factors) == 1:
        return factors[0].sum(axis=1)
    kr = khatri_rao_list(factors[:0:-1])
    return fold(factors[0] @ kr.T, 0, dims)


def tucker_reconstruct(core, factors):
    """``core x_0 U_0 x_1 U_1 ... x_{N-1} U_{N-1}``."""
    t = np.asarray(core, dtype=np.float64)
    for n, u in enumerate(factors):
        t = mode_dot(t, u, n)
    return t


def frobenius(t):
    return float(np.sqrt(np.sum(np.square(t))))


def rse(x, xhat):
    """Relative Frobenius error ``||x - xhat|| / ||x||``."""
    x = np.asarray(x, dtype=np.float64)
    xhat = np.asarray(xhat, dtype=np.float64)
    if x.shape != xhat.shape:
        raise InvalidArgumentError(f"rse needs equal shapes, got {x.shape} and {xhat.shape}")
    nx = frobenius(x)
    if nx == 0:
        raise InvalidArgumentError("rse is undefined for a zero-norm reference tensor")
    return frobenius(x - xhat) / nx
