"""Randomized checks of the Kronecker / vectorization identities.

Each registry entry evaluates two sides of one identity by different code
paths (tensor operations on one side, matrix and Kronecker algebra on the
other) on random instances and reports the worst relative Frobenius error.
Trial ``t`` of identity ``id`` draws from a generator seeded with
``(seed, crc32(id), t)``, so reports do not depend on execution order.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import DenseTensor, matricize, vec
from .errors import CapacityError, UnknownIdentityError
from .kron import (
    cp_jacobian,
    khatri_rao,
    kron,
    kron_determinant,
    mode_product,
    multilinear_apply,
    outer,
    sylvester_vec_operator,
)
from .models import CPModel, cp_reconstruct, cp_unfolding

REGISTRY_VERSION = 1
BASIS_CAP = 4096


@dataclass(frozen=True)
class TrialConfig:
    trials: int = 100
    seed: int = 0
    rtol: float = 1e-10
    max_order: int = 4
    max_dim: int = 5
    max_rank: int = 4

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.rtol >= 0:
            raise ValueError("tolerance must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if min(self.max_order, self.max_dim, self.max_rank) < 1:
            raise ValueError("dimension bounds must be >= 1")


@dataclass
class CheckReport:
    id: str
    trials: int
    max_rel_err: float
    passed: bool
    counterexample: dict | None = None
    note: str = ""

    def to_line(self) -> str:
        """One ``key=value`` record; the error carries 17 significant digits."""
        parts = [
            self.id,
            f"trials={self.trials}",
            f"max_rel_err={self.max_rel_err:.16e}",
            f"pass={'true' if self.passed else 'false'}",
        ]
        if self.counterexample is not None:
            ce = self.counterexample
            parts.append(f"counterexample_seed={ce['seed']}")
            parts.append(f"counterexample_trial={ce['trial']}")
            shapes = ";".join("x".join(map(str, s)) for s in ce["shapes"])
            parts.append(f"counterexample_shapes={shapes}")
        if self.note:
            parts.append(f"note={self.note}")
        return " ".join(parts)


def parse_report_line(line: str) -> dict:
    """Inverse of :meth:`CheckReport.to_line` (values stay strings except the core fields)."""
    head, *fields = line.split()
    out: dict = {"id": head}
    for item in fields:
        key, _, value = item.partition("=")
        out[key] = value
    out["trials"] = int(out["trials"])
    out["max_rel_err"] = float(out["max_rel_err"])
    out["pass"] = out["pass"] == "true"
    return out


def relative_error(lhs, rhs) -> float:
    """``|lhs - rhs|_F / max(|lhs|_F, 1e-30)``; ``inf`` on a shape mismatch."""
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    if lhs.shape != rhs.shape:
        return math.inf
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-30))


# ---------------------------------------------------------------- generators

def _uniform(rng, *shape) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=shape)


def _dim(rng, cfg) -> int:
    return int(rng.integers(1, cfg.max_dim + 1))


def _order(rng, cfg, low: int = 1) -> int:
    return int(rng.integers(low, max(low, cfg.max_order) + 1))


def _rank(rng, cfg) -> int:
    return int(rng.integers(1, cfg.max_rank + 1))


def _shape(rng, cfg, low: int = 1) -> tuple[int, ...]:
    return tuple(_dim(rng, cfg) for _ in range(_order(rng, cfg, low)))


def _rev(seq):
    return list(reversed(list(seq)))


# ---------------------------------------------------------------- trials
# Each trial returns (lhs, rhs, shapes).  With mutate=True the swappable side
# uses reversed factor order, i.e. the column-major convention.

def _t1(rng, cfg, mutate):
    a, b = _uniform(rng, _dim(rng, cfg)), _uniform(rng, _dim(rng, cfg))
    rhs = kron(b, a) if mutate else kron(a, b)
    return vec(outer(a, b)), rhs, [a.shape, b.shape]


def _t2(rng, cfg, mutate):
    p, q, r, s = (_dim(rng, cfg) for _ in range(4))
    A, X, B = _uniform(rng, p, q), _uniform(rng, q, s), _uniform(rng, r, s)
    return vec(A @ X @ B.T), kron(A, B) @ vec(X), [A.shape, X.shape, B.shape]


def _t3(rng, cfg, mutate):
    p1, q1, r1, p2, q2, r2 = (_dim(rng, cfg) for _ in range(6))
    A, C = _uniform(rng, p1, q1), _uniform(rng, q1, r1)
    B, D = _uniform(rng, p2, q2), _uniform(rng, q2, r2)
    return kron(A, B) @ kron(C, D), kron(A @ C, B @ D), [A.shape, B.shape, C.shape, D.shape]


def _t4(rng, cfg, mutate):
    shape = _shape(rng, cfg)
    vs = [_uniform(rng, n) for n in shape]
    us = [_uniform(rng, _dim(rng, cfg), n) for n in shape]
    lhs = multilinear_apply(us, outer(*vs)).array
    rhs = outer(*(u @ v for u, v in zip(us, vs))).array
    return lhs, rhs, [u.shape for u in us]


def _t5(rng, cfg, mutate):
    p1, q1, p2, q2 = (_dim(rng, cfg) for _ in range(4))
    r = _rank(rng, cfg)
    A, B = _uniform(rng, p1, q1), _uniform(rng, p2, q2)
    C, D = _uniform(rng, q1, r), _uniform(rng, q2, r)
    return kron(A, B) @ khatri_rao(C, D), khatri_rao(A @ C, B @ D), [A.shape, B.shape, C.shape, D.shape]


def _t6(rng, cfg, mutate):
    A = _uniform(rng, _dim(rng, cfg), _dim(rng, cfg))
    B = _uniform(rng, _dim(rng, cfg), _dim(rng, cfg))
    return kron(A, B).T, kron(A.T, B.T), [A.shape, B.shape]


def _t7(rng, cfg, mutate):
    m, n = _dim(rng, cfg), _dim(rng, cfg)
    A, B, X = _uniform(rng, m, m), _uniform(rng, n, n), _uniform(rng, m, n)
    return vec(A @ X + X @ B), sylvester_vec_operator(A, B) @ vec(X), [A.shape, B.shape, X.shape]


def _t8(rng, cfg, mutate):
    vs = [_uniform(rng, n) for n in _shape(rng, cfg)]
    rhs = kron(*_rev(vs)) if mutate else kron(*vs)
    return vec(outer(*vs)), rhs, [v.shape for v in vs]


def _t9(rng, cfg, mutate):
    shape = _shape(rng, cfg)
    mode = int(rng.integers(len(shape)))
    X = DenseTensor.from_array(_uniform(rng, *shape))
    U = _uniform(rng, _dim(rng, cfg), shape[mode])
    return matricize(mode_product(X, U, mode), mode), U @ matricize(X, mode), [shape, U.shape, (mode + 1,)]


def _t10(rng, cfg, mutate):
    shape = _shape(rng, cfg)
    Y = DenseTensor.from_array(_uniform(rng, *shape))
    us = [_uniform(rng, _dim(rng, cfg), n) for n in shape]
    return vec(multilinear_apply(us, Y)), kron(*us) @ vec(Y), [shape] + [u.shape for u in us]


def _multilinear_instance(rng, cfg):
    shape = _shape(rng, cfg)
    mode = int(rng.integers(len(shape)))
    Y = DenseTensor.from_array(_uniform(rng, *shape))
    us = [_uniform(rng, _dim(rng, cfg), n) for n in shape]
    return shape, mode, Y, us


def _t11(rng, cfg, mutate):
    shape, mode, Y, us = _multilinear_instance(rng, cfg)
    others = [u.T for j, u in enumerate(us) if j != mode]
    right = kron(*_rev(others)) if mutate else kron(*others)
    lhs = matricize(multilinear_apply(us, Y), mode)
    return lhs, us[mode] @ matricize(Y, mode) @ right, [shape, (mode + 1,)] + [u.shape for u in us]


def _t12(rng, cfg, mutate):
    shape, mode, Y, us = _multilinear_instance(rng, cfg)
    # order-2 operator U_mode (x) kron(U_j, j != mode) acting on the unfolding
    column_op = kron(*(u for j, u in enumerate(us) if j != mode))
    unfolded = DenseTensor.from_array(matricize(Y, mode))
    rhs = multilinear_apply([us[mode], column_op], unfolded).array
    lhs = matricize(multilinear_apply(us, Y), mode)
    return lhs, rhs, [shape, (mode + 1,)] + [u.shape for u in us]


def _cp_instance(rng, cfg):
    shape = _shape(rng, cfg)
    rank = _rank(rng, cfg)
    model = CPModel([_uniform(rng, n, rank) for n in shape])
    mode = int(rng.integers(len(shape)))
    return model, mode, [shape, (rank,), (mode + 1,)]


def _t13(rng, cfg, mutate):
    m, mode, shapes = _cp_instance(rng, cfg)
    rhs = np.zeros((m.shape[mode], math.prod(m.shape) // m.shape[mode]))
    for r in range(m.rank):
        rest = [a[:, r] for j, a in enumerate(m.factors) if j != mode]
        rhs += np.outer(m.factors[mode][:, r], kron(*rest) if rest else np.ones(1))
    return matricize(cp_reconstruct(m), mode), rhs, shapes


def _t14(rng, cfg, mutate):
    p, q, r = _dim(rng, cfg), _dim(rng, cfg), _rank(rng, cfg)
    A, B = _uniform(rng, p, r), _uniform(rng, q, r)
    lhs = sum(kron(A[:, k], B[:, k]) for k in range(r))
    return lhs, khatri_rao(A, B) @ np.ones(r), [A.shape, B.shape]


def _t15(rng, cfg, mutate):
    m, mode, shapes = _cp_instance(rng, cfg)
    if mutate:
        others = [a for j, a in enumerate(m.factors) if j != mode]
        rhs = m.factors[mode] @ (khatri_rao(*_rev(others)).T if others else np.ones((m.rank, 1)))
    else:
        rhs = cp_unfolding(m, mode)
    return matricize(cp_reconstruct(m), mode), rhs, shapes


def _t16(rng, cfg, mutate):
    shape = _shape(rng, cfg)
    vs = [_uniform(rng, n) for n in shape]
    mode = int(rng.integers(len(shape)))
    # vec(outer) is linear in vs[mode], so unit-step differences are exact
    fd = np.empty((math.prod(shape), shape[mode]))
    for j in range(shape[mode]):
        up, down = list(vs), list(vs)
        up[mode] = vs[mode] + np.eye(shape[mode])[j]
        down[mode] = vs[mode] - np.eye(shape[mode])[j]
        fd[:, j] = (vec(outer(*up)) - vec(outer(*down))) / 2.0
    jac = cp_jacobian(_rev(vs), len(vs) - 1 - mode) if mutate else cp_jacobian(vs, mode)
    return fd, jac, [shape, (mode + 1,)]


def _t17(rng, cfg, mutate):
    while True:
        dims = [_dim(rng, cfg) for _ in range(_order(rng, cfg))]
        if math.prod(dims) <= 64:
            break
    us = [_uniform(rng, n, n) for n in dims]
    return np.linalg.det(kron(*us)), kron_determinant(us), [u.shape for u in us]


def _elementary_basis(rows: int, cols: int) -> list[np.ndarray]:
    basis = []
    for a in range(rows):
        for b in range(cols):
            e = np.zeros((rows, cols))
            e[a, b] = 1.0
            basis.append(e)
    return basis


def _basis_family_rank(n: int, n2: int, m: int, m2: int, duplicate: bool = False) -> tuple[int, int]:
    if n * n2 * m * m2 > BASIS_CAP:
        raise CapacityError(f"family of {n * n2 * m * m2} operators exceeds the cap of {BASIS_CAP}")
    us = _elementary_basis(n2, n)
    vs = _elementary_basis(m2, m)
    if duplicate and len(us) > 1:
        us[-1] = us[0]
    elif duplicate:
        vs[-1] = vs[0] if len(vs) > 1 else 0.0 * vs[0]
    family = np.stack([kron(u, v).reshape(-1) for u in us for v in vs])
    s = np.linalg.svd(family, compute_uv=False)
    rank = int(np.sum(s > 1e-8 * s[0])) if s[0] > 0 else 0
    return rank, n * n2 * m * m2


def _app_a(rng, cfg, mutate):
    dims = tuple(_dim(rng, cfg) for _ in range(4))
    rank, expected = _basis_family_rank(*dims, duplicate=mutate)
    # rank deficit as a fraction, reported through the error channel
    return 1.0, rank / expected, [dims]


def operator_basis_independence(n: int, n2: int, m: int, m2: int, duplicate: bool = False) -> CheckReport:
    """Check that ``{kron(u_i, v_j)}`` is linearly independent.

    ``u_i`` runs over the elementary operators ``R^n -> R^n2`` (one nonzero
    entry each) and ``v_j`` over those of ``R^m -> R^m2``.  ``duplicate``
    replaces one basis element by a copy of another and must fail.
    """
    rank, expected = _basis_family_rank(n, n2, m, m2, duplicate)
    err = (expected - rank) / expected
    passed = rank == expected
    ce = None if passed else {"seed": 0, "trial": 0, "shapes": [(n, n2, m, m2)]}
    return CheckReport("APP-A", 1, err, passed, ce, note=f"rank={rank}/{expected}")


# ---------------------------------------------------------------- registry

@dataclass(frozen=True)
class IdentityCase:
    id: str
    description: str
    trial: Callable = field(repr=False)
    mutable: bool = False
    note: str = ""


_CASES = [
    IdentityCase("T1", "vec(a o b) = kron(a, b)", _t1, mutable=True),
    IdentityCase("T2", "vec(A X B^T) = kron(A, B) vec(X)", _t2),
    IdentityCase("T3", "kron(A, B) kron(C, D) = kron(AC, BD)", _t3),
    IdentityCase("T4", "(U_1 x ... x U_N)(a_1 o ... o a_N) = U_1 a_1 o ... o U_N a_N", _t4),
    IdentityCase("T5", "kron(A, B) khatri_rao(C, D) = khatri_rao(AC, BD)", _t5),
    IdentityCase("T6", "kron(A, B)^T = kron(A^T, B^T)", _t6),
    IdentityCase(
        "T7", "vec(AX + XB) = (kron(A, I) + kron(I, B^T)) vec(X)", _t7, note="corrected-form"
    ),
    IdentityCase("T8", "vec(a_1 o ... o a_N) = kron(a_1, ..., a_N), same order", _t8, mutable=True),
    IdentityCase("T9", "unfold_i(X x_i U) = U unfold_i(X)", _t9),
    IdentityCase("T10", "vec((U_1 x ... x U_N) Y) = kron(U_1, ..., U_N) vec(Y)", _t10),
    IdentityCase(
        "T11", "unfold_i((x_j U_j) Y) = U_i unfold_i(Y) kron(U_j^T, j != i)", _t11, mutable=True
    ),
    IdentityCase("T12", "unfold_i((x_j U_j) Y) = (U_i x kron(U_j, j != i)) unfold_i(Y)", _t12),
    IdentityCase(
        "T13", "unfold_i(sum_r o_j a_r^j) = sum_r a_r^i o kron(a_r^j, j != i)", _t13,
        note="right-factor-indexed-by-j",
    ),
    IdentityCase("T14", "sum_r kron(a_r, b_r) = khatri_rao(A, B) 1", _t14),
    IdentityCase(
        "T15", "unfold_i(CP model) = A_i khatri_rao(A_j, j != i)^T", _t15, mutable=True
    ),
    IdentityCase(
        "T16", "d vec(o_j a_j) / d a_i = kron(a_1, ..., I, ..., a_N)", _t16, mutable=True
    ),
    IdentityCase("T17", "det(kron(U_1, ..., U_N)) = prod_i det(U_i)^(prod_{j != i} n_j)", _t17),
    IdentityCase("APP-A", "kron of elementary operator bases is a free family", _app_a),
]
REGISTRY: dict[str, IdentityCase] = {c.id: c for c in _CASES}


def run_identity(identity: str, cfg: TrialConfig = TrialConfig(), mutate: bool = False) -> CheckReport:
    """Run ``cfg.trials`` random trials of one identity.

    ``mutate=True`` swaps the factor order on one side (the column-major
    convention); only identities with ``mutable`` set support it.
    """
    try:
        case = REGISTRY[identity]
    except KeyError:
        raise UnknownIdentityError(identity) from None
    if mutate and not (case.mutable or case.id == "APP-A"):
        raise ValueError(f"identity {identity} has no mutation")
    id_key = zlib.crc32(case.id.encode())
    worst, counterexample = 0.0, None
    for t in range(cfg.trials):
        rng = np.random.default_rng([cfg.seed, id_key, t])
        lhs, rhs, shapes = case.trial(rng, cfg, mutate)
        err = relative_error(lhs, rhs)
        failed = not err <= cfg.rtol
        if failed and counterexample is None:
            counterexample = {"seed": cfg.seed, "trial": t, "shapes": [tuple(s) for s in shapes]}
        worst = max(worst, math.inf if math.isnan(err) else err)
    note = ",".join(filter(None, [case.note, "mutated" if mutate else ""]))
    return CheckReport(case.id, cfg.trials, worst, counterexample is None, counterexample, note)


def run_all(cfg: TrialConfig = TrialConfig(), ids=None) -> list[CheckReport]:
    ids = list(REGISTRY) if ids is None else list(ids)
    return [run_identity(i, cfg) for i in ids]
