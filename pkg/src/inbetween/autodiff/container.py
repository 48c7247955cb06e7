"""Binary named-tensor container shared by checkpoints and clip caches.

Layout (all integers little-endian)::

    b"RSMT"  version:u32  count:u32
    repeat count times:
        name_len:u16  name:utf-8  rank:u8  dims:u32*rank  data:f32*prod(dims)

Text (metadata, manifests, labels) travels as a rank-1 tensor holding the
UTF-8 byte values, see :func:`encode_text`.
"""

import io
import struct

import numpy as np

from ..errors import ContainerError

MAGIC = b"RSMT"
VERSION = 1


def encode_text(text):
    return np.frombuffer(text.encode("utf-8"), dtype=np.uint8).astype(np.float32)


def decode_text(arr):
    return np.asarray(arr).astype(np.uint8).tobytes().decode("utf-8")


def dumps(tensors):
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<II", VERSION, len(tensors)))
    for name, value in tensors.items():
        arr = np.array(value, dtype="<f4", order="C")
        raw = name.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ContainerError(f"tensor name too long: {name[:40]}...")
        if arr.ndim > 0xFF:
            raise ContainerError(f"tensor {name} has rank {arr.ndim}")
        buf.write(struct.pack("<H", len(raw)))
        buf.write(raw)
        buf.write(struct.pack("<B", arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        buf.write(arr.tobytes())
    return buf.getvalue()


def loads(data):
    if data[:4] != MAGIC:
        raise ContainerError("bad magic, not a container file")
    pos = 4
    try:
        version, count = struct.unpack_from("<II", data, pos)
        pos += 8
        if version != VERSION:
            raise ContainerError(f"unsupported container version {version}")
        out = {}
        for _ in range(count):
            (n,) = struct.unpack_from("<H", data, pos)
            pos += 2
            name = data[pos:pos + n].decode("utf-8")
            pos += n
            (rank,) = struct.unpack_from("<B", data, pos)
            pos += 1
            dims = struct.unpack_from(f"<{rank}I", data, pos)
            pos += 4 * rank
            size = int(np.prod(dims, dtype=np.int64))
            if pos + 4 * size > len(data):
                raise ContainerError(f"truncated data for tensor {name}")
            arr = np.frombuffer(data, dtype="<f4", count=size, offset=pos).reshape(dims)
            pos += 4 * size
            out[name] = arr.astype(np.float32)
    except struct.error as exc:
        raise ContainerError(f"truncated container: {exc}") from None
    return out


def write_container(path, tensors):
    with open(path, "wb") as fh:
        fh.write(dumps(tensors))


def read_container(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
