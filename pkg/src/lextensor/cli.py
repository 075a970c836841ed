"""``lextensor`` command line.

Modes and indices are 1-based on the command line.  Results go to stdout,
diagnostics to stderr.  Exit codes: 0 success, 1 identity check failed,
2 usage or parse error, 3 numeric or definiteness error.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import array_normal, harness, io
from .core import (
    DenseTensor,
    check_shape,
    classic_vec_permutation,
    linear_index,
    matricize,
    matricize_oracle,
    multi_index,
    vec,
)
from .errors import CapacityError, DefinitenessError, ModeError, ShapeError, TensorIndexError
from .models import CPModel, TuckerModel, cp_reconstruct, cp_unfolding, cp_vec, tucker_reconstruct, tucker_unfolding

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def format_number(x: float) -> str:
    """Shortest round-trip decimal; integral values print without a fraction."""
    x = float(x)
    if math.isfinite(x) and x.is_integer() and abs(x) < 2**53:
        return "-0" if x == 0 and math.copysign(1.0, x) < 0 else str(int(x))
    return repr(x)


def format_vector(v) -> str:
    return " ".join(format_number(x) for x in np.ravel(v))


def format_matrix(m) -> str:
    return "\n".join(format_vector(row) for row in np.atleast_2d(m))


def _mode_arg(k: int, order: int) -> int:
    if not 1 <= k <= order:
        raise UsageError(f"mode {k} out of range; valid modes are 1..{order}")
    return k - 1


def _emit(args, result) -> None:
    """Print a vector/matrix/tensor, or write it as a tensor file with ``-o``."""
    if getattr(args, "output", None):
        t = result if isinstance(result, DenseTensor) else DenseTensor.from_array(result)
        io.write_tensor(args.output, t)
    elif isinstance(result, DenseTensor):
        print(io.encode_text(result))
    elif np.ndim(result) == 1:
        print(format_vector(result))
    else:
        print(format_matrix(result))


def _matrix_from_file(path, label: str) -> np.ndarray:
    t = io.read_tensor(path)
    if t.order == 1:
        return t.array[:, None]
    if t.order != 2:
        raise UsageError(f"{label} ({path}) must be a matrix, got an order-{t.order} tensor")
    return np.array(t.array)


def cmd_vec(args) -> int:
    t = io.read_tensor(args.input)
    v = t.data[classic_vec_permutation(t.shape)] if args.classic else vec(t)
    _emit(args, v)
    return EXIT_OK


def cmd_unfold(args) -> int:
    t = io.read_tensor(args.input)
    mode = _mode_arg(args.mode, t.order)
    _emit(args, matricize_oracle(t, mode) if args.oracle else matricize(t, mode))
    return EXIT_OK


def cmd_index(args) -> int:
    shape = check_shape(int(n) for n in args.shape.split(","))
    if args.at is not None:
        idx = [int(i) - 1 for i in args.at.split(",")]
        if len(idx) != len(shape):
            raise UsageError(f"index has {len(idx)} components, shape has {len(shape)} modes")
        for k, (i, n) in enumerate(zip(idx, shape)):
            if not 0 <= i < n:
                raise TensorIndexError(f"index {i + 1} out of range 1..{n} for mode {k + 1}")
        if args.classic:
            perm = classic_vec_permutation(shape)
            pos = int(np.flatnonzero(perm == linear_index(shape, idx))[0])
        else:
            pos = linear_index(shape, idx)
        print(pos + 1)
    else:
        offset = args.offset - 1
        if not 0 <= offset < math.prod(shape):
            raise TensorIndexError(f"position {args.offset} out of range 1..{math.prod(shape)}")
        if args.classic:
            offset = int(classic_vec_permutation(shape)[offset])
        print(" ".join(str(i + 1) for i in multi_index(shape, offset)))
    return EXIT_OK


def cmd_verify(args) -> int:
    ids = args.id or list(harness.REGISTRY)
    unknown = [i for i in ids if i not in harness.REGISTRY]
    if unknown:
        raise UsageError(f"unknown identity id(s): {', '.join(unknown)}; known: {', '.join(harness.REGISTRY)}")
    cfg = harness.TrialConfig(trials=args.trials, seed=args.seed, rtol=args.tol)
    ok = True
    for i in ids:
        report = harness.run_identity(i, cfg, mutate=args.mutate)
        print(report.to_line(), flush=True)
        ok &= report.passed
    return EXIT_OK if ok else EXIT_FAIL


def _model_output(args, order, reconstruct, unfold, vectorize):
    if args.reconstruct:
        _emit(args, reconstruct())
    elif args.vec:
        _emit(args, vectorize())
    else:
        _emit(args, unfold(_mode_arg(args.unfold, order)))
    return EXIT_OK


def cmd_cp(args) -> int:
    factors = [_matrix_from_file(p, f"factor {k + 1}") for k, p in enumerate(args.factors)]
    for k, a in enumerate(factors):
        if a.shape[1] != factors[0].shape[1]:
            raise ShapeError(
                f"mode {k + 1}: factor has {a.shape[1]} columns, mode 1 factor has {factors[0].shape[1]}"
            )
    m = CPModel(factors)
    return _model_output(args, m.order, lambda: cp_reconstruct(m), lambda i: cp_unfolding(m, i), lambda: cp_vec(m))


def cmd_tucker(args) -> int:
    core = io.read_tensor(args.core)
    factors = [_matrix_from_file(p, f"factor {k + 1}") for k, p in enumerate(args.factors)]
    if len(factors) != core.order:
        raise ShapeError(f"{len(factors)} factor files given for an order-{core.order} core")
    for k, (u, r) in enumerate(zip(factors, core.shape)):
        if u.shape[1] != r:
            raise ShapeError(f"mode {k + 1}: factor has {u.shape[1]} columns, core dimension is {r}")
    m = TuckerModel(core, factors)
    return _model_output(
        args, m.order, lambda: tucker_reconstruct(m), lambda i: tucker_unfolding(m, i),
        lambda: vec(tucker_reconstruct(m)),
    )


def cmd_an(args) -> int:
    mean = io.read_tensor(args.mean)
    covs = [_matrix_from_file(p, f"covariance {k + 1}") for k, p in enumerate(args.covariances)]
    if len(covs) != mean.order:
        raise ShapeError(f"{len(covs)} covariance files given for an order-{mean.order} mean")
    for k, (s, n) in enumerate(zip(covs, mean.shape)):
        if s.shape != (n, n):
            raise ShapeError(f"mode {k + 1}: covariance has shape {s.shape}, expected ({n}, {n})")
        array_normal.spd_cholesky(s, f"covariance {k + 1} ({args.covariances[k]})")
    d = array_normal.SeparableGaussian(mean, covs)
    if args.sample is not None:
        if args.sample < 0:
            raise UsageError("--sample needs a non-negative count")
        draws = array_normal.sample(d, args.seed, args.sample)
        if args.output:
            io.write_tensors(args.output, draws)
        else:
            for t in draws:
                print(io.encode_text(t))
    elif args.logpdf is not None:
        x = io.read_tensor(args.logpdf)
        print(format_number(array_normal.log_density(d, x)))
    else:
        law = array_normal.unfolding_law(d, _mode_arg(args.unfold_law, d.order))
        print("mean:")
        print(format_matrix(law.mean))
        print("row_covariance:")
        print(format_matrix(law.row_covariance))
        print("column_covariance:")
        print(format_matrix(law.column_covariance))
    return EXIT_OK


def cmd_convert(args) -> int:
    tensors = io.read_tensors(args.input)
    binary = True if args.binary else False if args.text else None
    io.write_tensors(args.output, tensors, binary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lextensor",
        description="Lexicographic tensor vectorization, unfoldings, models and identity checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vec", help="vectorize a tensor file")
    p.add_argument("input")
    p.add_argument("--classic", action="store_true", help="column-major (first index fastest) order")
    p.add_argument("-o", "--output", help="write a tensor file instead of printing")
    p.set_defaults(func=cmd_vec)

    p = sub.add_parser("unfold", help="mode-k matricization of a tensor file")
    p.add_argument("input")
    p.add_argument("--mode", "-k", type=int, required=True, help="1-based mode")
    p.add_argument("--oracle", action="store_true", help="use the column-major permute/reshape construction")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_unfold)

    p = sub.add_parser("index", help="convert between 1-based multi-indices and vector positions")
    p.add_argument("--shape", required=True, help="comma-separated dims, e.g. 2,2,2")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--at", help="comma-separated 1-based multi-index")
    g.add_argument("--offset", type=int, help="1-based position in the vectorized tensor")
    p.add_argument("--classic", action="store_true", help="positions in column-major order")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("verify", help="run the randomized identity suite")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--id", action="append", help="identity id (repeatable); default all")
    p.add_argument("--mutate", action="store_true", help="swap factor order on one side (must fail)")
    p.set_defaults(func=cmd_verify)

    for name, helptext in (("cp", "CP model from factor matrix files"), ("tucker", "Tucker model from core and factors")):
        p = sub.add_parser(name, help=helptext)
        if name == "tucker":
            p.add_argument("core")
        p.add_argument("factors", nargs="+")
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--unfold", type=int, metavar="K", help="1-based mode")
        g.add_argument("--vec", action="store_true")
        g.add_argument("--reconstruct", action="store_true")
        p.add_argument("-o", "--output")
        p.set_defaults(func=cmd_cp if name == "cp" else cmd_tucker)

    p = sub.add_parser("an", help="array normal law: sample, log-density, unfolding law")
    p.add_argument("mean")
    p.add_argument("covariances", nargs="+")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--sample", type=int, metavar="N")
    g.add_argument("--logpdf", metavar="X_FILE")
    g.add_argument("--unfold-law", type=int, metavar="K", help="1-based mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="sample output file (binary for .lext/.bin)")
    p.set_defaults(func=cmd_an)

    p = sub.add_parser("convert", help="rewrite a tensor file as text or binary")
    p.add_argument("input")
    p.add_argument("output")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--binary", action="store_true")
    g.add_argument("--text", action="store_true")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DefinitenessError, CapacityError, np.linalg.LinAlgError) as exc:
        print(f"lextensor {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ModeError, ShapeError, TensorIndexError, io.TensorFileError, OSError, ValueError) as exc:
        print(f"lextensor {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
