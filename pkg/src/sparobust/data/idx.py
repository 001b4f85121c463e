"""Reader/writer for the IDX binary format used by MNIST-style archives."""

import gzip
import struct

import numpy as np

_DTYPES = {
    0x08: np.uint8,
    0x09: np.int8,
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}
_CODES = {np.dtype(np.uint8): 0x08}


def read_idx(path):
    """Read an IDX file (transparently gunzips *.gz) into a numpy array."""
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[0] != 0 or data[1] != 0:
        raise ValueError(f"{path}: not an IDX file (bad magic)")
    type_code, ndim = data[2], data[3]
    if type_code not in _DTYPES:
        raise ValueError(f"{path}: unsupported IDX type code 0x{type_code:02x}")
    dims = struct.unpack(f">{ndim}I", data[4 : 4 + 4 * ndim])
    dtype = np.dtype(_DTYPES[type_code])
    count = int(np.prod(dims)) if dims else 0
    body = data[4 + 4 * ndim :]
    if len(body) < count * dtype.itemsize:
        raise ValueError(f"{path}: truncated IDX payload")
    arr = np.frombuffer(body, dtype=dtype, count=count).reshape(dims)
    return arr.astype(arr.dtype.newbyteorder("="))


def write_idx(path, array):
    """Write a uint8 numpy array as IDX; gzip if the path ends in .gz."""
    array = np.ascontiguousarray(array)
    if array.dtype != np.uint8:
        raise ValueError("only uint8 IDX writing is supported")
    header = bytes([0, 0, _CODES[array.dtype], array.ndim])
    header += struct.pack(f">{array.ndim}I", *array.shape)
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as fh:
        fh.write(header)
        fh.write(array.tobytes())
