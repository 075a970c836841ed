import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lextensor import DenseTensor
from lextensor.io import (
    TensorFileError,
    decode,
    decode_binary,
    decode_text,
    encode_binary,
    encode_text,
    read_tensor,
    read_tensors,
    write_tensor,
    write_tensors,
)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def test_binary_layout():
    t = DenseTensor([1.0, 2.0], (1, 2))
    buf = encode_binary(t)
    assert buf[:4] == b"LEXT" and buf[4] == 1
    assert struct.unpack("<III", buf[5:17]) == (2, 1, 2)
    assert struct.unpack("<2d", buf[17:]) == (1.0, 2.0)
    assert len(buf) == 4 + 1 + 4 + 8 + 16


def test_text_layout():
    obj = json.loads(encode_text(DenseTensor(np.arange(1, 9), (2, 2, 2))))
    assert obj == {"shape": [2, 2, 2], "data": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]}


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.data())
def test_round_trips(shape, data):
    n = int(np.prod(shape))
    values = data.draw(st.lists(finite, min_size=n, max_size=n))
    t = DenseTensor(values, shape)
    back = decode_binary(encode_binary(t))[0]
    assert back == t and back.data.tobytes() == t.data.tobytes()
    assert decode_text(encode_text(t))[0] == t


def test_text_keeps_negative_zero_and_extremes():
    t = DenseTensor([-0.0, 5e-324, 1.7976931348623157e308, 0.1], (4,))
    back = decode_text(encode_text(t))[0]
    assert back.data.tobytes() == t.data.tobytes()


def test_multiple_records(tmp_path):
    ts = [DenseTensor(np.arange(k + 1.0), (k + 1,)) for k in range(3)]
    for name in ("many.json", "many.lext"):
        write_tensors(tmp_path / name, ts)
        assert read_tensors(tmp_path / name) == ts
    assert (tmp_path / "many.lext").read_bytes()[:4] == b"LEXT"


def test_pretty_json_accepted(tmp_path):
    p = tmp_path / "t.json"
    p.write_text('{\n  "shape": [2],\n  "data": [1, 2.5]\n}\n')
    assert read_tensor(p) == DenseTensor([1.0, 2.5], (2,))


def test_write_binary_flag(tmp_path):
    t = DenseTensor([1.0], (1,))
    write_tensor(tmp_path / "x.json", t, binary=True)
    assert decode((tmp_path / "x.json").read_bytes()) == [t]


@pytest.mark.parametrize(
    "text, fragment",
    [
        ('{"shape": [2], "data": [1]}', "'data' has 1 values"),
        ('{"shape": [2, 0], "data": []}', "'shape'[1]"),
        ('{"shape": [2], "data": [1, "x"]}', "'data'[1]"),
        ('{"data": [1]}', "missing field 'shape'"),
        ('{"shape": [1], "data": [1]', "line 1"),
        ("[1, 2]", "record 0"),
        ('{"shape": [true], "data": [1]}', "'shape'[0]"),
    ],
)
def test_text_errors(text, fragment):
    with pytest.raises(TensorFileError, match=fragment.replace("[", r"\[")):
        decode_text(text)


def test_binary_errors():
    good = encode_binary(DenseTensor([1.0, 2.0], (2,)))
    with pytest.raises(TensorFileError, match="byte 4: unsupported version"):
        decode_binary(good[:4] + b"\x02" + good[5:])
    with pytest.raises(TensorFileError, match="byte 13: record 0 data truncated"):
        decode_binary(good[:-1])
    with pytest.raises(TensorFileError, match="byte 29: record 1"):
        decode_binary(good + b"XXXX")
    zero_dim = good[:9] + struct.pack("<I", 0)
    with pytest.raises(TensorFileError, match="dim 0 is 0"):
        decode_binary(zero_dim)


def test_empty_file(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text("  \n")
    with pytest.raises(TensorFileError, match="no tensor records"):
        read_tensor(p)
