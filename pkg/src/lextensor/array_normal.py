"""Array normal distribution with separable covariance ``Sigma_1 kron ... kron Sigma_N``.

Nothing here forms the full covariance except :func:`vec_law`, which exists
for small cross-checks and refuses tensors above a size cap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .core import DenseTensor, _check_mode, as_tensor, dematricize, matricize
from .errors import CapacityError, DefinitenessError, ShapeError
from .kron import kron, multilinear_apply

SYMMETRY_RTOL = 1e-12
VEC_LAW_CAP = 4096
_LOG_2PI = math.log(2.0 * math.pi)


def spd_cholesky(sigma, label: str = "covariance") -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite matrix, or ``DefinitenessError``."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise DefinitenessError(f"{label} must be square, got shape {sigma.shape}")
    scale = np.max(np.abs(sigma))
    if np.max(np.abs(sigma - sigma.T)) > SYMMETRY_RTOL * scale:
        raise DefinitenessError(f"{label} is not symmetric")
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise DefinitenessError(f"{label} is not positive definite") from None


class SeparableGaussian:
    """Gaussian law on order-N arrays with mean ``mean`` and covariance factors.

    Parameters
    ----------
    mean : DenseTensor or array_like
        Mean tensor ``M`` of shape ``(n_1, ..., n_N)``.
    covariances : sequence of array_like
        One symmetric positive definite ``n_i x n_i`` matrix per mode.

    Raises
    ------
    ShapeError
        Covariance count or sizes do not match the mean.
    DefinitenessError
        A covariance is asymmetric beyond ``1e-12`` relative or fails Cholesky.
    """

    __slots__ = ("mean", "covariances", "cholesky_factors")

    def __init__(self, mean, covariances: Sequence):
        mean = as_tensor(mean)
        covs = [np.array(s, dtype=np.float64) for s in covariances]
        if len(covs) != mean.order:
            raise ShapeError(f"{len(covs)} covariance factors given for an order-{mean.order} mean")
        for k, (s, n) in enumerate(zip(covs, mean.shape)):
            if s.ndim == 2 and s.shape[0] == s.shape[1] and s.shape[0] != n:
                raise ShapeError(f"covariance of mode {k} is {s.shape[0]} x {s.shape[0]}, mean dimension is {n}")
        chols = [spd_cholesky(s, f"covariance of mode {k}") for k, s in enumerate(covs)]
        for m in covs + chols:
            m.flags.writeable = False
        self.mean = mean
        self.covariances = tuple(covs)
        self.cholesky_factors = tuple(chols)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mean.shape

    @property
    def order(self) -> int:
        return self.mean.order

    def logdet(self) -> float:
        """``log det(Sigma_1 kron ... kron Sigma_N)`` by the Kronecker determinant rule."""
        total = self.mean.size
        return sum(
            (total // L.shape[0]) * 2.0 * float(np.sum(np.log(np.diag(L))))
            for L in self.cholesky_factors
        )

    def whiten(self, x) -> DenseTensor:
        """Apply ``L_1^-1 (x) ... (x) L_N^-1`` to ``x - mean`` by triangular solves."""
        x = as_tensor(x)
        if x.shape != self.shape:
            raise ShapeError(f"tensor of shape {x.shape} does not match distribution shape {self.shape}")
        z = DenseTensor(x.data - self.mean.data, self.shape)
        for k, L in enumerate(self.cholesky_factors):
            solved = solve_triangular(L, matricize(z, k), lower=True)
            z = dematricize(solved, k, self.shape)
        return z

    def __repr__(self) -> str:
        return f"SeparableGaussian(shape={self.shape})"


def log_density(d: SeparableGaussian, x) -> float:
    """Log of the array normal density at ``x``.

    ``-|L^-1 (x - M)|^2 / 2 - log det(Gamma) / 2 - (prod n_i / 2) log(2 pi)``,
    computed mode by mode without forming ``Gamma``.
    """
    z = d.whiten(x)
    quad = float(np.dot(z.data, z.data))
    return -0.5 * quad - 0.5 * d.logdet() - 0.5 * d.mean.size * _LOG_2PI


def sample_array(d: SeparableGaussian, seed: int, count: int) -> np.ndarray:
    """Draw ``count`` samples stacked along a leading axis.

    Standard normals come from ``numpy.random.default_rng(seed)`` (PCG64 bit
    generator, ziggurat normals) in one block of shape ``(count, *shape)``,
    then each mode is coloured by its Cholesky factor.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count,) + d.shape)
    for k, L in enumerate(d.cholesky_factors):
        z = np.moveaxis(np.tensordot(L, z, axes=(1, k + 1)), 0, k + 1)
    return z + d.mean.array


def sample(d: SeparableGaussian, seed: int, count: int) -> list[DenseTensor]:
    """``count`` independent draws ``M + (L_1 (x) ... (x) L_N) Z``; same seed, same draws."""
    return [DenseTensor.from_array(s) for s in sample_array(d, seed, count)]


@dataclass(frozen=True, eq=False)
class MatrixNormalParams:
    mean: np.ndarray
    row_covariance: np.ndarray
    column_covariance: np.ndarray


def unfolding_law(d: SeparableGaussian, mode: int) -> MatrixNormalParams:
    """Matrix normal law of the mode-``mode`` unfolding.

    Row covariance ``Sigma_mode``, column covariance the Kronecker product of
    the other factors in ascending mode order.
    """
    mode = _check_mode(mode, d.order)
    return MatrixNormalParams(
        mean=matricize(d.mean, mode),
        row_covariance=d.covariances[mode],
        column_covariance=kron(*(s for j, s in enumerate(d.covariances) if j != mode)),
    )


def vec_law(d: SeparableGaussian, cap: int = VEC_LAW_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Mean and dense covariance of ``vec(X)``; refuses more than ``cap`` elements."""
    if d.mean.size > cap:
        raise CapacityError(f"vec_law would materialize a {d.mean.size}^2 covariance (cap {cap} elements)")
    return np.array(d.mean.data), kron(*d.covariances)


def transform(d: SeparableGaussian, operators: Sequence) -> SeparableGaussian:
    """Law of ``(W_1 (x) ... (x) W_N) X``.

    Each ``W_i`` must be square and invertible; the mean becomes the
    multilinear image of ``M`` and ``Sigma_i`` becomes ``W_i Sigma_i W_i^T``.
    """
    ws = [np.asarray(w, dtype=np.float64) for w in operators]
    if len(ws) != d.order:
        raise ShapeError(f"{len(ws)} operators given for an order-{d.order} distribution")
    covs = []
    for k, (w, s) in enumerate(zip(ws, d.covariances)):
        if w.ndim != 2 or w.shape != s.shape:
            raise DefinitenessError(
                f"mode {k}: operator must be square {s.shape[0]} x {s.shape[0]}, got shape {w.shape}"
            )
        if np.linalg.matrix_rank(w) < w.shape[0]:
            raise DefinitenessError(f"mode {k}: operator is singular")
        c = w @ s @ w.T
        covs.append(0.5 * (c + c.T))
    return SeparableGaussian(multilinear_apply(ws, d.mean), covs)
