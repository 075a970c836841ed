"""Dense tensors in lexicographic (last index fastest) layout.

All mode numbers and indices are 0-based here. The flat storage of a
:class:`DenseTensor` is already its vectorization, so :func:`vec` never moves
data; matricization puts the chosen mode first and keeps the remaining modes
in ascending order.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import CapacityError, ModeError, ShapeError, TensorIndexError

_INDEX_MAX = np.iinfo(np.intp).max


def check_shape(shape) -> tuple[int, ...]:
    """Validate a shape and return it as a tuple of ints."""
    dims = tuple(int(n) for n in shape)
    if len(dims) < 1:
        raise ShapeError("tensor order must be at least 1")
    for k, n in enumerate(dims):
        if n < 1:
            raise ShapeError(f"dimension of mode {k} must be >= 1, got {n}")
    if math.prod(dims) > _INDEX_MAX:
        raise CapacityError(
            f"shape {dims} holds {math.prod(dims)} elements, beyond the index range {_INDEX_MAX}"
        )
    return dims


def strides(shape) -> tuple[int, ...]:
    """Lexicographic element strides: ``stride_k = prod(shape[k+1:])``."""
    out = [1] * len(shape)
    for k in range(len(shape) - 2, -1, -1):
        out[k] = out[k + 1] * shape[k + 1]
    return tuple(out)


def _check_mode(mode: int, order: int) -> int:
    mode = int(mode)
    if not 0 <= mode < order:
        raise ModeError(f"mode {mode} out of range for order-{order} tensor (valid: 0..{order - 1})")
    return mode


class DenseTensor:
    """Immutable order-N real array stored in lexicographic order.

    Parameters
    ----------
    data : array_like
        Flat values, ``prod(shape)`` of them, last index varying fastest.
    shape : sequence of int
        Dimensions ``(n_1, ..., n_N)``, every one at least 1.
    """

    __slots__ = ("_data", "_shape")
    __hash__ = None

    def __init__(self, data, shape):
        shape = check_shape(shape)
        flat = np.array(data, dtype=np.float64).reshape(-1)
        if flat.size != math.prod(shape):
            raise ShapeError(f"data length {flat.size} does not match shape {shape} ({math.prod(shape)} elements)")
        flat.flags.writeable = False
        self._data = flat
        self._shape = shape

    @classmethod
    def from_array(cls, array) -> DenseTensor:
        """Wrap an n-d array; numpy's C order is the lexicographic order."""
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        return cls(np.ascontiguousarray(arr).ravel(), arr.shape)

    @classmethod
    def zeros(cls, shape) -> DenseTensor:
        shape = check_shape(shape)
        return cls(np.zeros(math.prod(shape)), shape)

    @property
    def shape(self) -> tuple[int, ...]:
        return self._shape

    @property
    def order(self) -> int:
        return len(self._shape)

    @property
    def size(self) -> int:
        return self._data.size

    @property
    def data(self) -> np.ndarray:
        """Read-only flat storage."""
        return self._data

    @property
    def array(self) -> np.ndarray:
        """Read-only n-d view of the storage."""
        return self._data.reshape(self._shape)

    def __getitem__(self, index) -> float:
        if isinstance(index, (int, np.integer)):
            index = (index,)
        return float(self._data[linear_index(self._shape, index)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self._shape == other._shape and np.array_equal(self._data, other._data)

    def __repr__(self) -> str:
        return f"DenseTensor(shape={self._shape}, data={np.array2string(self._data, threshold=16)})"


def as_tensor(t) -> DenseTensor:
    if isinstance(t, DenseTensor):
        return t
    return DenseTensor.from_array(t)


def linear_index(shape, index: Sequence[int]) -> int:
    """Flat offset of a multi-index.

    ``offset = sum_k index[k] * stride_k`` with ``stride_k = prod(shape[k+1:])``,
    i.e. position ``(i-1)JK + (j-1)K + k`` (1-based) for an I x J x K array.

    >>> linear_index((2, 2, 2), (1, 0, 1))
    5
    """
    shape = tuple(shape)
    index = tuple(int(i) for i in index)
    if len(index) != len(shape):
        raise TensorIndexError(f"index has {len(index)} components, tensor has order {len(shape)}")
    offset = 0
    for k, (i, n) in enumerate(zip(index, shape)):
        if not 0 <= i < n:
            raise TensorIndexError(f"index {i} out of range for mode {k} of size {n}")
        offset = offset * n + i
    return offset


def multi_index(shape, offset: int) -> tuple[int, ...]:
    """Inverse of :func:`linear_index`."""
    shape = tuple(shape)
    offset = int(offset)
    total = math.prod(shape)
    if not 0 <= offset < total:
        raise TensorIndexError(f"offset {offset} out of range [0, {total})")
    out = []
    for n in reversed(shape):
        offset, i = divmod(offset, n)
        out.append(i)
    return tuple(reversed(out))


def vec(t) -> np.ndarray:
    """Lexicographic vectorization; returns the flat storage (read-only)."""
    return as_tensor(t).data


def unvec(v, shape) -> DenseTensor:
    v = np.asarray(v, dtype=np.float64)
    shape = check_shape(shape)
    if v.ndim == 2 and v.shape[1] == 1:
        v = v[:, 0]
    if v.ndim != 1 or v.size != math.prod(shape):
        raise ShapeError(f"vector of shape {v.shape} cannot be folded into {shape}")
    return DenseTensor(v, shape)


def matricize(t, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding.

    Row ``r`` holds the entries with ``index[mode] == r``; the remaining
    modes, in ascending order, are packed lexicographically into the column.
    The result has shape ``(n_mode, prod(n_j, j != mode))``.
    """
    t = as_tensor(t)
    mode = _check_mode(mode, t.order)
    rest = math.prod(n for j, n in enumerate(t.shape) if j != mode)
    return np.moveaxis(t.array, mode, 0).reshape(t.shape[mode], rest)


def dematricize(m, mode: int, shape) -> DenseTensor:
    """Fold a mode-``mode`` unfolding back into a tensor of ``shape``."""
    shape = check_shape(shape)
    mode = _check_mode(mode, len(shape))
    m = np.asarray(m, dtype=np.float64)
    rest = tuple(n for j, n in enumerate(shape) if j != mode)
    if m.shape != (shape[mode], math.prod(rest)):
        raise ShapeError(
            f"matrix of shape {m.shape} is not a mode-{mode} unfolding of {shape}; "
            f"expected {(shape[mode], math.prod(rest))}"
        )
    arr = np.moveaxis(m.reshape((shape[mode],) + rest), 0, mode)
    return DenseTensor.from_array(arr)


def permute_modes(t, perm: Sequence[int]) -> DenseTensor:
    """Reorder modes: output mode ``k`` is input mode ``perm[k]`` (0-based)."""
    t = as_tensor(t)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(t.order)):
        raise ValueError(f"{perm} is not a permutation of 0..{t.order - 1}")
    return DenseTensor.from_array(np.transpose(t.array, perm))


def _reshape_column_major(arr: np.ndarray, shape) -> np.ndarray:
    # MATLAB reshape: first index varies fastest on both sides
    flat = np.transpose(arr).reshape(-1)
    return np.transpose(flat.reshape(tuple(reversed(shape))))


def matricize_oracle(t, mode: int) -> np.ndarray:
    """Unfolding through a column-major permute-and-reshape.

    Permutes the modes to ``(mode, N-1, N-2, ...)`` (remaining modes in
    descending order) and then reshapes with first-index-fastest semantics,
    as MATLAB's ``reshape(permute(Y, p), n_mode, [])`` would.  Kept as an
    independent construction to cross-check :func:`matricize`.
    """
    t = as_tensor(t)
    mode = _check_mode(mode, t.order)
    perm = [mode] + [j for j in range(t.order - 1, -1, -1) if j != mode]
    permuted = permute_modes(t, perm).array
    return _reshape_column_major(permuted, (t.shape[mode], t.size // t.shape[mode]))


def classic_vec_permutation(shape) -> np.ndarray:
    """Permutation ``p`` with ``classic_vec(Y) == vec(Y)[p]``.

    The classic vectorization stacks columns, first index fastest: element
    ``(i, j, k)`` of an I x J x K array sits at ``(k-1)IJ + (j-1)I + i``.
    """
    shape = check_shape(shape)
    col_strides = [1] * len(shape)
    for k in range(1, len(shape)):
        col_strides[k] = col_strides[k - 1] * shape[k - 1]
    # multi-indices enumerated in lexicographic order, one column per element
    idx = np.indices(shape).reshape(len(shape), -1)
    classic_pos = np.asarray(col_strides, dtype=np.intp) @ idx
    perm = np.empty(idx.shape[1], dtype=np.intp)
    perm[classic_pos] = np.arange(idx.shape[1])
    return perm


def classic_vec(t) -> np.ndarray:
    t = as_tensor(t)
    return t.data[classic_vec_permutation(t.shape)]
