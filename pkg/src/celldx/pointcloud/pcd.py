"""ASCII PCD v0.7 emission, a matching reader, and OBJ conversion.

Formatting is deterministic byte-for-byte: coordinates print in
6-significant-digit shortest form ("%.6g") and lines end with "\\n".
"""

from __future__ import annotations

import numpy as np

from ..errors import PcdParseError
from .fuse import PointCloud

_HEADER_COMMENT = "# .PCD v0.7 - Point Cloud Data file format"


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def write_pcd(cloud: PointCloud) -> bytes:
    n = len(cloud)
    lines = [
        _HEADER_COMMENT,
        "VERSION 0.7",
        "FIELDS x y z",
        "SIZE 4 4 4",
        "TYPE F F F",
        "COUNT 1 1 1",
        f"WIDTH {n}",
        "HEIGHT 1",
        "VIEWPOINT 0 0 0 1 0 0 0",
        f"POINTS {n}",
        "DATA ascii",
    ]
    for x, y, z in cloud.points:
        lines.append(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}")
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_pcd(blob: bytes) -> PointCloud:
    """Read back the ASCII x/y/z dialect produced by :func:`write_pcd`."""
    try:
        text = blob.decode("ascii")
    except UnicodeDecodeError as exc:
        raise PcdParseError("bad_encoding", f"PCD is not ASCII: {exc}") from exc
    lines = text.splitlines()
    header: dict[str, str] = {}
    data_start = None
    for i, line in enumerate(lines):
        if line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        header[key] = rest
        if key == "DATA":
            data_start = i + 1
            break
    if data_start is None:
        raise PcdParseError("missing_data", "no DATA line in PCD header")
    if header.get("VERSION") != "0.7":
        raise PcdParseError("bad_version", f"unsupported PCD version {header.get('VERSION')!r}")
    if header.get("FIELDS") != "x y z":
        raise PcdParseError("bad_fields", f"unsupported fields {header.get('FIELDS')!r}")
    if header.get("DATA") != "ascii":
        raise PcdParseError("bad_data_kind", f"only ascii DATA supported, got {header.get('DATA')!r}")
    try:
        count = int(header["POINTS"])
    except (KeyError, ValueError) as exc:
        raise PcdParseError("bad_count", f"missing or invalid POINTS: {exc}") from exc
    rows = [line for line in lines[data_start:] if line.strip()]
    if len(rows) != count:
        raise PcdParseError("bad_count", f"POINTS says {count} but found {len(rows)} rows")
    points = np.zeros((count, 3), dtype=np.float32)
    for i, row in enumerate(rows):
        parts = row.split()
        if len(parts) != 3:
            raise PcdParseError("bad_row", f"point row {i} has {len(parts)} fields")
        try:
            points[i] = [float(p) for p in parts]
        except ValueError as exc:
            raise PcdParseError("bad_row", f"point row {i} is not numeric: {exc}") from exc
    return PointCloud(points)


def pcd_to_obj(source: bytes | PointCloud) -> bytes:
    """Render a cloud as a vertex-only OBJ (one "v x y z" line per point)."""
    cloud = parse_pcd(source) if isinstance(source, (bytes, bytearray)) else source
    lines = ["# point cloud"]
    for x, y, z in cloud.points:
        lines.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}")
    return ("\n".join(lines) + "\n").encode("ascii")
