"""Reader/writer for NPY v1.0 arrays (little-endian float32/float64, C order)."""

from __future__ import annotations

import ast
import struct

import numpy as np

from ..errors import NpyParseError

_MAGIC = b"\x93NUMPY"
_DTYPES = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}


def parse_npy(blob: bytes) -> np.ndarray:
    """Decode an NPY v1.0 payload.

    Accepts only little-endian "<f4"/"<f8" C-ordered arrays; anything else is
    rejected with a coded error (bad_magic, bad_version, bad_header,
    fortran_order, bad_dtype, truncated, trailing_data).
    """
    if len(blob) < 10:
        raise NpyParseError("truncated", f"file is {len(blob)} bytes, preamble needs 10")
    if blob[:6] != _MAGIC:
        raise NpyParseError("bad_magic", f"bad magic {blob[:6]!r}")
    major, minor = blob[6], blob[7]
    if (major, minor) != (1, 0):
        raise NpyParseError("bad_version", f"unsupported NPY version {major}.{minor}")
    (header_len,) = struct.unpack("<H", blob[8:10])
    if 10 + header_len > len(blob):
        raise NpyParseError("truncated", "file ends inside the header")
    try:
        header = ast.literal_eval(blob[10 : 10 + header_len].decode("latin1").strip())
        descr = header["descr"]
        fortran = header["fortran_order"]
        shape = tuple(header["shape"])
    except (ValueError, SyntaxError, KeyError, TypeError) as exc:
        raise NpyParseError("bad_header", f"unparseable header: {exc}") from exc
    if fortran:
        raise NpyParseError("fortran_order", "fortran order unsupported")
    if descr not in _DTYPES:
        raise NpyParseError("bad_dtype", f"unsupported dtype {descr!r}")
    dtype = _DTYPES[descr]
    n_elems = 1
    for d in shape:
        if not isinstance(d, int) or d < 0:
            raise NpyParseError("bad_header", f"invalid shape {shape}")
        n_elems *= d
    data_start = 10 + header_len
    expected = n_elems * dtype.itemsize
    actual = len(blob) - data_start
    if actual < expected:
        raise NpyParseError("truncated", f"expected {expected} data bytes, found {actual}")
    if actual > expected:
        raise NpyParseError("trailing_data", f"{actual - expected} unexpected bytes after data")
    return np.frombuffer(blob, dtype=dtype, offset=data_start).reshape(shape).copy()


def load_npy(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return parse_npy(fh.read())


def write_npy(arr: np.ndarray) -> bytes:
    """Encode a float32/float64 array as NPY v1.0 (header padded to 64 bytes)."""
    arr = np.ascontiguousarray(arr)
    if arr.dtype == np.float32:
        descr = "<f4"
    elif arr.dtype == np.float64:
        descr = "<f8"
    else:
        raise NpyParseError("bad_dtype", f"only float32/float64 supported, got {arr.dtype}")
    header = f"{{'descr': '{descr}', 'fortran_order': False, 'shape': {tuple(arr.shape)}, }}"
    pad = (64 - (10 + len(header) + 1) % 64) % 64
    header = header + " " * pad + "\n"
    return _MAGIC + bytes([1, 0]) + struct.pack("<H", len(header)) + header.encode("latin1") + arr.tobytes()


def save_npy(arr: np.ndarray, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_npy(arr))
