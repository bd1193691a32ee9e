"""Versioned binary container used for datasets and checkpoints.

Layout (documented here and in the README):

  * an ASCII header of ``key=value`` lines, one per line, starting with
    ``magic=<MAGIC>`` and ``version=<int>``;
  * a line ``array=<name>:<dtype>:<dim0>x<dim1>x...`` per stored array, in
    write order;
  * a terminating line ``end_header``;
  * the raw array bytes, little-endian, concatenated in declared order.

All floats are stored as little-endian float64 (``<f8``); integer arrays as
little-endian int64 (``<i8``). Round trips are bitwise lossless.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .errors import FormatError, VersionError

_ALLOWED_DTYPES = {"<f8", "<i8"}


def write_container(path, magic: str, version: int, meta: dict, arrays: dict) -> None:
    """Write metadata plus named arrays to ``path``.

    ``meta`` values are stringified; keys must not contain '=' or newlines.
    ``arrays`` maps name -> ndarray (float64 or int64).
    """
    lines = [f"magic={magic}", f"version={version}"]
    for key, value in meta.items():
        if "=" in key or "\n" in key or "\n" in str(value):
            raise FormatError(f"illegal metadata key/value: {key!r}")
        lines.append(f"{key}={value}")
    blobs = []
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        dtype = "<i8" if np.issubdtype(arr.dtype, np.integer) else "<f8"
        arr = np.ascontiguousarray(arr, dtype=np.dtype(dtype))
        shape = "x".join(str(d) for d in arr.shape) if arr.ndim else "0"
        lines.append(f"array={name}:{dtype}:{shape}")
        blobs.append(arr.tobytes())
    lines.append("end_header")
    header = ("\n".join(lines) + "\n").encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def read_container(path, magic: str, version: int) -> tuple[dict, dict]:
    """Read a container back; returns (meta, arrays).

    Raises :class:`FormatError` on a malformed or truncated file and
    :class:`VersionError` when the file's version differs from ``version``.
    """
    data = Path(path).read_bytes()
    end = data.find(b"end_header\n")
    if end < 0:
        raise FormatError(f"{path}: no end_header marker (truncated or not a container)")
    body = data[end + len(b"end_header\n"):]
    meta: dict[str, str] = {}
    declared: list[tuple[str, str, tuple[int, ...]]] = []
    for raw in io.BytesIO(data[:end]).read().decode("ascii").splitlines():
        key, _, value = raw.partition("=")
        if not _:
            raise FormatError(f"{path}: malformed header line {raw!r}")
        if key == "array":
            name, dtype, shape_s = value.split(":")
            if dtype not in _ALLOWED_DTYPES:
                raise FormatError(f"{path}: unsupported dtype {dtype}")
            shape = tuple(int(d) for d in shape_s.split("x")) if shape_s != "0" else ()
            declared.append((name, dtype, shape))
        else:
            meta[key] = value
    if meta.get("magic") != magic:
        raise FormatError(f"{path}: magic {meta.get('magic')!r}, expected {magic!r}")
    found = int(meta.get("version", "-1"))
    if found != version:
        raise VersionError(f"{path}: format version {found}, supported version {version}")
    arrays: dict[str, np.ndarray] = {}
    offset = 0
    for name, dtype, shape in declared:
        nbytes = int(np.prod(shape, dtype=np.int64)) * 8 if shape else 0
        chunk = body[offset: offset + nbytes]
        if len(chunk) < nbytes:
            raise FormatError(f"{path}: truncated array {name!r}")
        arrays[name] = np.frombuffer(chunk, dtype=np.dtype(dtype)).reshape(shape).copy()
        offset += nbytes
    if offset != len(body):
        raise FormatError(f"{path}: {len(body) - offset} trailing bytes after arrays")
    return meta, arrays
