"""Binary file formats: SWIM raw grids, SWV1 volumes, and MNIST IDX.

SWIM: magic ``SWIM``, u32-LE version (=1), u32-LE rows, u32-LE cols,
payload rows*cols float64-LE row-major.

SWV1: magic ``SWV1``, three u32-LE dims, payload float64-LE.

IDX: big-endian magic 0x00000803 (images, u8 pixels) / 0x00000801 (labels).
"""

import struct

import numpy as np

from .errors import BadMagicError, DimMismatchError

__all__ = [
    "write_swim",
    "read_swim",
    "write_swv",
    "read_swv",
    "read_idx_images",
    "read_idx_labels",
    "write_idx_images",
    "write_idx_labels",
]

SWIM_MAGIC = b"SWIM"
SWV_MAGIC = b"SWV1"
IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def write_swim(path, data):
    data = np.ascontiguousarray(data, dtype="<f8")
    if data.ndim != 2:
        raise ValueError(f"SWIM stores 2-D grids, got shape {data.shape}")
    rows, cols = data.shape
    with open(path, "wb") as fh:
        fh.write(SWIM_MAGIC)
        fh.write(struct.pack("<III", 1, rows, cols))
        fh.write(data.tobytes())


def read_swim(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SWIM_MAGIC:
            raise BadMagicError(f"{path}: expected SWIM magic, got {magic!r}")
        version, rows, cols = struct.unpack("<III", fh.read(12))
        if version != 1:
            raise DimMismatchError(f"{path}: unsupported SWIM version {version}")
        payload = fh.read()
    expected = rows * cols * 8
    if len(payload) != expected:
        raise DimMismatchError(
            f"{path}: payload is {len(payload)} bytes, header implies {expected}"
        )
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()


def write_swv(path, grid):
    grid = np.ascontiguousarray(grid, dtype="<f8")
    if grid.ndim != 3:
        raise ValueError(f"SWV1 stores 3-D grids, got shape {grid.shape}")
    with open(path, "wb") as fh:
        fh.write(SWV_MAGIC)
        fh.write(struct.pack("<III", *grid.shape))
        fh.write(grid.tobytes())


def read_swv(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SWV_MAGIC:
            raise BadMagicError(f"{path}: expected SWV1 magic, got {magic!r}")
        dims = struct.unpack("<III", fh.read(12))
        payload = fh.read()
    expected = dims[0] * dims[1] * dims[2] * 8
    if len(payload) != expected:
        raise DimMismatchError(
            f"{path}: payload is {len(payload)} bytes, header implies {expected}"
        )
    return np.frombuffer(payload, dtype="<f8").reshape(dims).copy()


def read_idx_images(path):
    """u8 image stack from an IDX file, shape (count, rows, cols)."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16:
            raise BadMagicError(f"{path}: truncated IDX header")
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGES_MAGIC:
            raise BadMagicError(f"{path}: expected IDX image magic, got {magic:#010x}")
        payload = fh.read()
    expected = count * rows * cols
    if len(payload) != expected:
        raise DimMismatchError(
            f"{path}: payload is {len(payload)} bytes, header implies {expected}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols).copy()


def read_idx_labels(path):
    with open(path, "rb") as fh:
        header = fh.read(8)
        if len(header) < 8:
            raise BadMagicError(f"{path}: truncated IDX header")
        magic, count = struct.unpack(">II", header)
        if magic != IDX_LABELS_MAGIC:
            raise BadMagicError(f"{path}: expected IDX label magic, got {magic:#010x}")
        payload = fh.read()
    if len(payload) != count:
        raise DimMismatchError(
            f"{path}: payload is {len(payload)} bytes, header implies {count}"
        )
    return np.frombuffer(payload, dtype=np.uint8).copy()


def write_idx_images(path, images):
    images = np.ascontiguousarray(images, dtype=np.uint8)
    count, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, count, rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(path, labels):
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, labels.shape[0]))
        fh.write(labels.tobytes())
