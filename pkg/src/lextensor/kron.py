"""Kronecker, Khatri-Rao and outer products, mode products and friends.

Vectors are 1-d arrays.  Where a vector meets a matrix inside a Kronecker
product it acts as a single column.
"""
from __future__ import annotations

import math
from functools import reduce
from typing import Sequence

import numpy as np

from .core import DenseTensor, _check_mode, as_tensor
from .errors import ShapeError

_TINY_DET = 1e-300


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        return a[:, None]
    if a.ndim != 2:
        raise ShapeError(f"expected a vector or matrix, got an array of shape {a.shape}")
    return a


def outer(*vectors) -> DenseTensor:
    """Outer product ``a_1 o ... o a_N`` as an order-N tensor.

    >>> outer([1, 2], [3, 4]).array
    array([[3., 4.],
           [6., 8.]])
    """
    if not vectors:
        raise ValueError("outer needs at least one vector")
    vs = [np.asarray(v, dtype=np.float64).reshape(-1) for v in vectors]
    for k, v in enumerate(vs):
        if v.size == 0:
            raise ValueError(f"vector {k} is empty")
    out = vs[0]
    for v in vs[1:]:
        out = np.multiply.outer(out, v)
    return DenseTensor.from_array(out)


def _kron2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    p1, q1 = a.shape
    p2, q2 = b.shape
    # block (i, j) of the result is a[i, j] * b
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(p1 * p2, q1 * q2)


def kron(*mats) -> np.ndarray:
    """Kronecker product, left-associated over any number of operands.

    If every operand is a vector the result is a vector; otherwise vectors
    are treated as columns and the result is a matrix.  With no operands the
    result is ``[[1.]]``.
    """
    if not mats:
        return np.ones((1, 1))
    all_vectors = all(np.ndim(m) == 1 for m in mats)
    out = reduce(_kron2, (_as_matrix(m) for m in mats))
    return out[:, 0] if all_vectors else out


def _khatri_rao2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"Khatri-Rao operands need equal column counts, got {a.shape[1]} and {b.shape[1]}")
    return (a[:, None, :] * b[None, :, :]).reshape(a.shape[0] * b.shape[0], a.shape[1])


def khatri_rao(*mats) -> np.ndarray:
    """Columnwise Kronecker product ``[A_1 kron B_1, ..., A_p kron B_p]``."""
    if not mats:
        raise ValueError("khatri_rao needs at least one matrix")
    return reduce(_khatri_rao2, (_as_matrix(m) for m in mats))


def mode_product(y, u, mode: int) -> DenseTensor:
    """Contract the columns of ``u`` with mode ``mode`` of ``y``.

    ``out[..., i, ...] = sum_j y[..., j, ...] * u[i, j]``; for a matrix ``M``,
    applying ``U`` on mode 0 and ``V`` on mode 1 gives ``U @ M @ V.T``.
    """
    y = as_tensor(y)
    mode = _check_mode(mode, y.order)
    u = _as_matrix(u)
    if u.shape[1] != y.shape[mode]:
        raise ShapeError(
            f"mode {mode}: operator has {u.shape[1]} columns but the tensor dimension is {y.shape[mode]}"
        )
    out = np.tensordot(u, y.array, axes=(1, mode))
    return DenseTensor.from_array(np.moveaxis(out, 0, mode))


def _check_factors(factors, shape) -> list[np.ndarray]:
    factors = [_as_matrix(u) for u in factors]
    if len(factors) != len(shape):
        raise ShapeError(f"{len(factors)} factors given for an order-{len(shape)} tensor")
    for k, (u, n) in enumerate(zip(factors, shape)):
        if u.shape[1] != n:
            raise ShapeError(f"mode {k}: factor has {u.shape[1]} columns but the tensor dimension is {n}")
    return factors


def multilinear_apply(factors: Sequence, y) -> DenseTensor:
    """Apply ``U_1 (x) ... (x) U_N`` to ``y`` as a chain of mode products.

    The Kronecker matrix is never formed.  Modes that shrink the tensor the
    most are contracted first.
    """
    y = as_tensor(y)
    factors = _check_factors(factors, y.shape)
    order = sorted(range(y.order), key=lambda k: (factors[k].shape[0] / factors[k].shape[1], k))
    for k in order:
        y = mode_product(y, factors[k], k)
    return y


def kron_slogdet(factors: Sequence) -> tuple[float, float]:
    """Sign and log-magnitude of ``det(U_1 kron ... kron U_N)``.

    Uses ``det(kron U_i) = prod_i det(U_i) ** prod_{j != i} n_j``.  The sign
    is 0 (and the log ``-inf``) when some factor is numerically singular.
    """
    mats = [np.asarray(u, dtype=np.float64) for u in factors]
    if not mats:
        raise ValueError("at least one factor is required")
    for k, u in enumerate(mats):
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ShapeError(f"factor {k} must be square, got shape {u.shape}")
    total = math.prod(u.shape[0] for u in mats)
    sign, logdet = 1.0, 0.0
    for u in mats:
        s, ld = np.linalg.slogdet(u)
        if s == 0 or ld < math.log(_TINY_DET):
            return 0.0, -math.inf
        power = total // u.shape[0]
        if s < 0 and power % 2:
            sign = -sign
        logdet += power * ld
    return sign, logdet


def kron_determinant(factors: Sequence) -> float:
    """Determinant of the Kronecker product of square factors, without forming it.

    Factors with ``|det| < 1e-300`` count as singular and give exactly 0.
    If the magnitude exceeds the float range the result is ``+-inf``; use
    :func:`kron_slogdet` to get the finite log-magnitude in that case.
    """
    sign, logdet = kron_slogdet(factors)
    if sign == 0:
        return 0.0
    if logdet > math.log(np.finfo(np.float64).max):
        return sign * math.inf
    total = math.prod(np.shape(u)[0] for u in factors)
    out = 1.0
    try:
        for u in factors:
            # direct powers keep integer-valued cases exact
            out *= float(np.linalg.det(np.asarray(u, dtype=np.float64))) ** (total // np.shape(u)[0])
    except OverflowError:
        out = math.inf
    if not math.isfinite(out) or out == 0.0:
        return sign * math.exp(logdet)
    return out


def cp_jacobian(vectors: Sequence, mode: int) -> np.ndarray:
    """Jacobian of ``vec(a_1 o ... o a_N)`` with respect to ``a_mode``.

    Equal to ``kron(a_1, ..., a_{mode-1}, I, a_{mode+1}, ..., a_N)`` with the
    vectors as columns; shape ``(prod n_k, n_mode)``.
    """
    vs = [np.asarray(v, dtype=np.float64).reshape(-1) for v in vectors]
    if not vs:
        raise ValueError("cp_jacobian needs at least one vector")
    if not 0 <= int(mode) < len(vs):
        raise ValueError(f"mode {mode} out of range for {len(vs)} vectors")
    mode = int(mode)
    parts = [v[:, None] for v in vs]
    parts[mode] = np.eye(vs[mode].size)
    return kron(*parts)


def sylvester_vec_operator(a, b) -> np.ndarray:
    """Matrix ``K`` with ``K @ vec(X) == vec(A @ X + X @ B)``.

    ``K = kron(A, I_n) + kron(I_m, B.T)`` for ``A`` m x m, ``B`` n x n.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    for name, m in (("A", a), ("B", b)):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"{name} must be square, got shape {m.shape}")
    m, n = a.shape[0], b.shape[0]
    return kron(a, np.eye(n)) + kron(np.eye(m), b.T)
