"""Tensor files, text and binary.

Text: a JSON object ``{"shape": [...], "data": [...]}`` with data in
lexicographic order.  Several records may follow one another (one per line
when written here).

Binary: ``b"LEXT"``, version byte ``0x01``, order N as little-endian uint32,
N little-endian uint32 dims, then ``prod(dims)`` little-endian float64.
Records may be concatenated.
"""
from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from .core import DenseTensor
from .errors import CapacityError, ShapeError

MAGIC = b"LEXT"
VERSION = 1
BINARY_SUFFIXES = (".lext", ".bin")


class TensorFileError(ValueError):
    """Malformed tensor file; the message names the byte offset or field."""


def encode_binary(t: DenseTensor) -> bytes:
    header = MAGIC + bytes([VERSION]) + struct.pack(f"<I{t.order}I", t.order, *t.shape)
    return header + t.data.astype("<f8").tobytes()


def decode_binary(buf: bytes) -> list[DenseTensor]:
    out = []
    pos = 0
    while pos < len(buf):
        rec = len(out)
        if buf[pos:pos + 4] != MAGIC:
            raise TensorFileError(f"byte {pos}: record {rec} does not start with magic {MAGIC!r}")
        if pos + 9 > len(buf):
            raise TensorFileError(f"byte {pos + 4}: record {rec} header truncated")
        if buf[pos + 4] != VERSION:
            raise TensorFileError(f"byte {pos + 4}: unsupported version {buf[pos + 4]}")
        (order,) = struct.unpack_from("<I", buf, pos + 5)
        pos += 9
        if order < 1:
            raise TensorFileError(f"byte {pos - 4}: record {rec} declares order 0")
        if pos + 4 * order > len(buf):
            raise TensorFileError(f"byte {pos}: record {rec} dims truncated ({order} expected)")
        dims = struct.unpack_from(f"<{order}I", buf, pos)
        for k, n in enumerate(dims):
            if n < 1:
                raise TensorFileError(f"byte {pos + 4 * k}: record {rec} dim {k} is 0")
        pos += 4 * order
        count = math.prod(dims)
        if pos + 8 * count > len(buf):
            raise TensorFileError(
                f"byte {pos}: record {rec} data truncated, need {8 * count} bytes, have {len(buf) - pos}"
            )
        data = np.frombuffer(buf, dtype="<f8", count=count, offset=pos).astype(np.float64)
        pos += 8 * count
        out.append(DenseTensor(data, dims))
    return out


def encode_text(t: DenseTensor) -> str:
    # json writes floats with repr(), the shortest round-trip form
    return json.dumps({"shape": list(t.shape), "data": t.data.tolist()})


def _record_from_json(obj, rec: int) -> DenseTensor:
    if not isinstance(obj, dict):
        raise TensorFileError(f"record {rec}: expected an object with 'shape' and 'data'")
    for key in ("shape", "data"):
        if key not in obj:
            raise TensorFileError(f"record {rec}: missing field '{key}'")
    shape, data = obj["shape"], obj["data"]
    if not isinstance(shape, list) or not shape:
        raise TensorFileError(f"record {rec}: field 'shape' must be a non-empty array")
    for k, n in enumerate(shape):
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise TensorFileError(f"record {rec}: field 'shape'[{k}] must be a positive integer, got {n!r}")
    if not isinstance(data, list):
        raise TensorFileError(f"record {rec}: field 'data' must be an array")
    for k, x in enumerate(data):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise TensorFileError(f"record {rec}: field 'data'[{k}] must be a number, got {x!r}")
    if len(data) != math.prod(shape):
        raise TensorFileError(
            f"record {rec}: field 'data' has {len(data)} values, shape {shape} needs {math.prod(shape)}"
        )
    try:
        return DenseTensor(data, shape)
    except (ShapeError, CapacityError) as exc:
        raise TensorFileError(f"record {rec}: {exc}") from None


def decode_text(text: str) -> list[DenseTensor]:
    decoder = json.JSONDecoder()
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        try:
            obj, pos = decoder.raw_decode(text, pos)
        except json.JSONDecodeError as exc:
            raise TensorFileError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        out.append(_record_from_json(obj, len(out)))
    return out


def decode(buf: bytes) -> list[DenseTensor]:
    if buf[:4] == MAGIC:
        return decode_binary(buf)
    try:
        text = buf.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TensorFileError(f"byte {exc.start}: not a binary tensor file and not UTF-8 text") from None
    return decode_text(text)


def read_tensors(path) -> list[DenseTensor]:
    tensors = decode(Path(path).read_bytes())
    if not tensors:
        raise TensorFileError(f"{path}: no tensor records")
    return tensors


def read_tensor(path) -> DenseTensor:
    """First (usually only) record of a tensor file, text or binary."""
    return read_tensors(path)[0]


def is_binary_path(path) -> bool:
    return str(path).endswith(BINARY_SUFFIXES)


def write_tensors(path, tensors, binary: bool | None = None) -> None:
    """Write records; format follows ``binary`` or else the file suffix."""
    if binary is None:
        binary = is_binary_path(path)
    if binary:
        Path(path).write_bytes(b"".join(encode_binary(t) for t in tensors))
    else:
        Path(path).write_text("".join(encode_text(t) + "\n" for t in tensors))


def write_tensor(path, t: DenseTensor, binary: bool | None = None) -> None:
    write_tensors(path, [t], binary)
