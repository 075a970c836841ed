"""CP and Tucker models: reconstruction, unfoldings and vectorized forms."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DenseTensor, _check_mode, as_tensor, matricize
from .errors import ShapeError
from .kron import khatri_rao, kron, multilinear_apply, outer


def _freeze(m) -> np.ndarray:
    m = np.array(m, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ShapeError(f"factor must be a matrix, got shape {m.shape}")
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class CPModel:
    """Sum of ``rank`` rank-1 terms; column ``r`` of factor ``i`` is ``a_r^(i)``.

    There are no separate weights; scaling lives in the factors.  A model
    with ``rank == 0`` is the zero tensor.
    """

    factors: tuple

    def __post_init__(self):
        factors = tuple(_freeze(a) for a in self.factors)
        if not factors:
            raise ShapeError("a CP model needs at least one factor")
        for k, a in enumerate(factors):
            if a.shape[1] != factors[0].shape[1]:
                raise ShapeError(f"mode {k}: factor has {a.shape[1]} columns, mode 0 has {factors[0].shape[1]}")
            if a.shape[0] < 1:
                raise ShapeError(f"mode {k}: factor has no rows")
        object.__setattr__(self, "factors", factors)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.shape[0] for a in self.factors)

    @property
    def rank(self) -> int:
        return self.factors[0].shape[1]

    @property
    def order(self) -> int:
        return len(self.factors)


@dataclass(frozen=True, eq=False)
class TuckerModel:
    """Core tensor ``G`` of shape ``(R_1, ..., R_N)`` and factors ``U_i`` (n_i x R_i)."""

    core: DenseTensor
    factors: tuple

    def __post_init__(self):
        core = as_tensor(self.core)
        factors = tuple(_freeze(u) for u in self.factors)
        if len(factors) != core.order:
            raise ShapeError(f"{len(factors)} factors given for an order-{core.order} core")
        for k, (u, r) in enumerate(zip(factors, core.shape)):
            if u.shape[1] != r:
                raise ShapeError(f"mode {k}: factor has {u.shape[1]} columns, core dimension is {r}")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "factors", factors)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.factors)

    @property
    def order(self) -> int:
        return len(self.factors)


def diagonal_tensor(rank: int, order: int) -> DenseTensor:
    """Order-``order`` tensor of shape ``(rank,) * order`` with ones on the superdiagonal.

    ``rank == 0`` has no valid dense shape and raises ``ShapeError``.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if rank < 1:
        raise ShapeError("a diagonal tensor needs rank >= 1")
    arr = np.zeros((rank,) * order)
    idx = np.arange(rank)
    arr[(idx,) * order] = 1.0
    return DenseTensor.from_array(arr)


def cp_reconstruct(m: CPModel) -> DenseTensor:
    """Full tensor as the explicit sum of ``rank`` outer products."""
    total = np.zeros(m.shape)
    for r in range(m.rank):
        total += outer(*(a[:, r] for a in m.factors)).array
    return DenseTensor.from_array(total)


def cp_unfolding(m: CPModel, mode: int) -> np.ndarray:
    """``A_mode @ khatri_rao(A_j for j != mode, ascending).T``."""
    mode = _check_mode(mode, m.order)
    others = [a for j, a in enumerate(m.factors) if j != mode]
    if not others:
        return m.factors[mode] @ np.ones((m.rank, 1))
    return m.factors[mode] @ khatri_rao(*others).T


def cp_vec(m: CPModel) -> np.ndarray:
    return khatri_rao(*m.factors) @ np.ones(m.rank)


def cp_normalize(m: CPModel) -> tuple[np.ndarray, CPModel]:
    """Scale factor columns to unit norm; return ``(weights, model)``.

    The weight of term ``r`` is the product of its column norms, so
    ``weights[r] * outer(unit columns)`` reproduces the original term.  Zero
    columns are left as they are and contribute a zero weight.
    """
    norms = [np.linalg.norm(a, axis=0) for a in m.factors]
    weights = np.prod(norms, axis=0) if m.rank else np.zeros(0)
    factors = [a / np.where(n == 0, 1.0, n) for a, n in zip(m.factors, norms)]
    return weights, CPModel(factors)


def tucker_reconstruct(m: TuckerModel) -> DenseTensor:
    return multilinear_apply(m.factors, m.core)


def tucker_unfolding(m: TuckerModel, mode: int) -> np.ndarray:
    """``U_mode @ G_(mode) @ kron(U_j.T for j != mode, ascending)``."""
    mode = _check_mode(mode, m.order)
    right = kron(*(u.T for j, u in enumerate(m.factors) if j != mode))
    return m.factors[mode] @ matricize(m.core, mode) @ right


def transform_cp(operators: Sequence, m: CPModel) -> CPModel:
    """CP model of ``(W_1 (x) ... (x) W_N) Y``: factors become ``W_i @ A_i``."""
    if len(operators) != m.order:
        raise ShapeError(f"{len(operators)} operators given for an order-{m.order} model")
    factors = []
    for k, (w, a) in enumerate(zip(operators, m.factors)):
        w = np.asarray(w, dtype=np.float64)
        if w.ndim != 2 or w.shape[1] != a.shape[0]:
            raise ShapeError(f"mode {k}: operator of shape {w.shape} cannot act on dimension {a.shape[0]}")
        factors.append(w @ a)
    return CPModel(factors)
