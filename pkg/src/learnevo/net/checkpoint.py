"""Binary checkpoint format for :class:`~learnevo.net.network.NetworkParams`.

Layout (all integers little-endian)::

    magic       8 bytes  b"LEVOCKPT"
    version     u32      format version (1)
    head_id     u16 length + UTF-8 bytes
    kind        u16 length + UTF-8 bytes
    reduction   u16 length + UTF-8 bytes
    channels    u32      raw actor channels
    in_channels u32
    filters     u32
    depth       u32
    params_ver  u64      parameter version tag
    n_arrays    u32
    shape table n_arrays x (u16 name length, name, u8 ndim, ndim x u32)
    payload     float32 values of every array, table order, C order

Parameters are stored as 32-bit floats, so a float32 ``NetworkParams``
round-trips bit-exactly.
"""
from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from ..exceptions import InvalidArgumentError
from .network import HeadSpec, NetworkParams

MAGIC = b"LEVOCKPT"
FORMAT_VERSION = 1


def _put_str(buf, s):
    b = s.encode("utf-8")
    buf.write(struct.pack("<H", len(b)))
    buf.write(b)


def _get_str(buf):
    (n,) = struct.unpack("<H", _read(buf, 2))
    return _read(buf, n).decode("utf-8")


def _read(buf, n):
    b = buf.read(n)
    if len(b) != n:
        raise InvalidArgumentError("checkpoint is truncated")
    return b


def dumps_params(params: NetworkParams) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", FORMAT_VERSION))
    h = params.head
    for s in (h.head_id, h.kind, h.reduction):
        _put_str(buf, s)
    buf.write(struct.pack("<IIIIQ", h.channels, params.in_channels, params.filters, params.depth, params.version))
    names = params.names()
    buf.write(struct.pack("<I", len(names)))
    for name in names:
        shape = params.arrays[name].shape
        _put_str(buf, name)
        buf.write(struct.pack("<B", len(shape)))
        buf.write(struct.pack(f"<{len(shape)}I", *shape))
    for name in names:
        buf.write(np.ascontiguousarray(params.arrays[name], dtype="<f4").tobytes())
    return buf.getvalue()


def loads_params(data: bytes) -> NetworkParams:
    buf = io.BytesIO(data)
    if _read(buf, 8) != MAGIC:
        raise InvalidArgumentError("not a learnevo checkpoint (bad magic)")
    (version,) = struct.unpack("<I", _read(buf, 4))
    if version != FORMAT_VERSION:
        raise InvalidArgumentError(f"unsupported checkpoint version {version}")
    head_id, kind, reduction = _get_str(buf), _get_str(buf), _get_str(buf)
    channels, in_channels, filters, depth, pver = struct.unpack("<IIIIQ", _read(buf, 24))
    (count,) = struct.unpack("<I", _read(buf, 4))
    table = []
    for _ in range(count):
        name = _get_str(buf)
        (ndim,) = struct.unpack("<B", _read(buf, 1))
        table.append((name, struct.unpack(f"<{ndim}I", _read(buf, 4 * ndim))))
    arrays = {}
    for name, shape in table:
        n = int(np.prod(shape))
        arrays[name] = np.frombuffer(_read(buf, 4 * n), dtype="<f4").astype(np.float32).reshape(shape)
    if buf.read(1):
        raise InvalidArgumentError("trailing bytes after checkpoint payload")
    head = HeadSpec(head_id, kind, channels, reduction)
    return NetworkParams(arrays, head, in_channels, filters, depth, version=pver)


def save_params(params: NetworkParams, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_params(params))
    return path


def load_params(path) -> NetworkParams:
    path = Path(path)
    if not path.exists():
        raise InvalidArgumentError(f"checkpoint {path} does not exist")
    return loads_params(path.read_bytes())
