"""Binary artifact encodings shared across modules.

All files are little-endian. Grid files carry a fixed header
(magic, version u32, dims 3xu32, cell_size f32, origin 3xf32); checkpoints
and datasets carry a length-prefixed JSON config block followed by named
f64 tensors.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import FormatError, VersionMismatchError

VOXEL_MAGIC = b"RNVX"
FIELD_MAGIC = b"RNGF"
CHECKPOINT_MAGIC = b"RNCK"
DATASET_MAGIC = b"RNDS"
FORMAT_VERSION = 1

def write_grid_header(fh, magic: bytes, dims, cell_size: float, origin):
    fh.write(magic)
    fh.write(struct.pack("<I", FORMAT_VERSION))
    fh.write(struct.pack("<3I", *[int(d) for d in dims]))
    fh.write(struct.pack("<f", float(cell_size)))
    fh.write(struct.pack("<3f", *[float(o) for o in origin]))


def read_grid_header(fh, magic: bytes):
    raw = fh.read(36)
    if len(raw) < 36:
        raise FormatError(f"truncated header: expected 36 bytes, got {len(raw)}")
    got_magic = raw[:4]
    if got_magic != magic:
        raise FormatError(f"bad magic {got_magic!r}, expected {magic!r}")
    version = struct.unpack_from("<I", raw, 4)[0]
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported version {version}")
    dims = struct.unpack_from("<3I", raw, 8)
    cell_size = struct.unpack_from("<f", raw, 20)[0]
    origin = struct.unpack_from("<3f", raw, 24)
    return dims, cell_size, origin


def _write_block(fh, magic: bytes, meta: dict, tensors: dict):
    fh.write(magic)
    fh.write(struct.pack("<I", FORMAT_VERSION))
    blob = json.dumps(meta, sort_keys=True).encode()
    fh.write(struct.pack("<I", len(blob)))
    fh.write(blob)
    fh.write(struct.pack("<I", len(tensors)))
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr)
        nb = name.encode()
        fh.write(struct.pack("<I", len(nb)))
        fh.write(nb)
        fh.write(struct.pack("<B", _DTYPE_CODES[arr.dtype.str.lstrip("<>=|")]))
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())


_DTYPE_CODES = {"f8": 0, "f4": 1, "i8": 2, "i4": 3, "u8": 4, "u1": 5}
_CODE_DTYPES = {v: np.dtype("<" + k) for k, v in _DTYPE_CODES.items()}


def _read_exact(fh, n: int) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise FormatError(f"truncated file: wanted {n} bytes, got {len(raw)}")
    return raw


def _read_block(fh, magic: bytes):
    got = _read_exact(fh, 4)
    if got != magic:
        raise FormatError(f"bad magic {got!r}, expected {magic!r}")
    version = struct.unpack("<I", _read_exact(fh, 4))[0]
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported version {version}")
    meta_len = struct.unpack("<I", _read_exact(fh, 4))[0]
    try:
        meta = json.loads(_read_exact(fh, meta_len).decode())
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise FormatError(f"corrupt metadata block: {e}") from e
    n_tensors = struct.unpack("<I", _read_exact(fh, 4))[0]
    tensors = {}
    for _ in range(n_tensors):
        name_len = struct.unpack("<I", _read_exact(fh, 4))[0]
        name = _read_exact(fh, name_len).decode()
        code = struct.unpack("<B", _read_exact(fh, 1))[0]
        if code not in _CODE_DTYPES:
            raise FormatError(f"unknown dtype code {code}")
        dtype = _CODE_DTYPES[code]
        ndim = struct.unpack("<I", _read_exact(fh, 4))[0]
        shape = struct.unpack(f"<{ndim}I", _read_exact(fh, 4 * ndim))
        count = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(_read_exact(fh, count * dtype.itemsize), dtype=dtype)
        tensors[name] = data.reshape(shape).copy()
    return meta, tensors


def save_tensors(path, magic: bytes, meta: dict, tensors: dict):
    with open(path, "wb") as fh:
        _write_block(fh, magic, meta, tensors)


def load_tensors(path, magic: bytes):
    with open(path, "rb") as fh:
        return _read_block(fh, magic)
