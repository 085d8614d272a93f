"""
TBNF tensor file format.

Layout, little-endian throughout:

    bytes 0-3   magic b"TBNF"
    byte  4     version (1)
    byte  5     element type (1 = IEEE float32)
    byte  6     rank r in [1, 4]
    byte  7     reserved (0)
    r bytes     axis labels (T=0, H=1, W=2, C=3)
    r uint32    extents
    prod(dims)  float32 values, row-major

Anything else is rejected. A one-element rank-1 tensor is 17 bytes.
"""
import logging
import math
import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.core.errors import DataError, FormatError, TensorIOError, TruncationError
from src.core.tensor import Axis, Tensor, canonical_order
from src.utils.file_utils import atomic_write_bytes

logger = logging.getLogger(__name__)

MAGIC = b"TBNF"
VERSION = 1
ELEMENT_FLOAT32 = 1
_HEADER = struct.Struct("<4sBBBB")
_FLOAT32_MAX = float(np.finfo(np.float32).max)


def encode_tensor(t: Tensor) -> bytes:
    """Serialize a tensor to TBNF bytes."""
    values = t.flat()
    if np.any(np.abs(values) > _FLOAT32_MAX):
        raise DataError("Tensor values overflow float32 storage")
    payload = values.astype("<f4")
    if not np.all(np.isfinite(payload)):
        raise DataError("Tensor contains non-finite values")
    header = _HEADER.pack(MAGIC, VERSION, ELEMENT_FLOAT32, t.rank, 0)
    axes = bytes(int(a) for a in t.axes)
    extents = np.asarray(t.dims, dtype="<u4").tobytes()
    return header + axes + extents + payload.tobytes()


def decode_tensor(raw: bytes, source: str = "<bytes>") -> Tensor:
    """Parse TBNF bytes into a tensor."""
    if len(raw) < _HEADER.size:
        raise FormatError(f"{source}: file shorter than the {_HEADER.size}-byte header")
    magic, version, element, rank, reserved = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"{source}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{source}: unsupported version {version}")
    if element != ELEMENT_FLOAT32:
        raise FormatError(f"{source}: unsupported element type {element}")
    if not 1 <= rank <= 4:
        raise FormatError(f"{source}: rank {rank} outside [1, 4]")
    if reserved != 0:
        raise FormatError(f"{source}: reserved byte is {reserved}, expected 0")

    offset = _HEADER.size
    if len(raw) < offset + 5 * rank:
        raise FormatError(f"{source}: header truncated before extents")
    codes = raw[offset:offset + rank]
    offset += rank
    dims = [int(d) for d in np.frombuffer(raw, dtype="<u4", count=rank, offset=offset)]
    offset += 4 * rank

    try:
        axes = [Axis(code) for code in codes]
    except ValueError:
        raise FormatError(f"{source}: unknown axis code in {list(codes)}") from None
    if len(set(axes)) != rank:
        raise FormatError(f"{source}: duplicate axis labels {[a.name for a in axes]}")
    if min(dims) < 1:
        raise FormatError(f"{source}: non-positive extent in {dims}")

    count = math.prod(dims)
    payload_bytes = len(raw) - offset
    if payload_bytes != 4 * count:
        raise TruncationError(
            f"{source}: dims {dims} declare {count} values, payload holds {payload_bytes / 4:g}"
        )
    values = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
    if not np.all(np.isfinite(values)):
        raise DataError(f"{source}: payload contains non-finite values")

    canonical = canonical_order(axes)
    if tuple(axes) != canonical:
        logger.warning(
            f"{source}: axes {[a.name for a in axes]} are not in canonical order; "
            f"relabeling as {[a.name for a in canonical]} without transposing"
        )
        axes = list(canonical)
    return Tensor(values.astype(np.float64).reshape(tuple(dims)), axes)


def write_tensor(t: Tensor, path: Union[str, Path]) -> None:
    """
    Write a tensor as a TBNF file.

    Nothing is written when the tensor cannot be stored (non-finite or
    float32-overflowing values).
    """
    atomic_write_bytes(path, encode_tensor(t))


def read_tensor(path: Union[str, Path]) -> Tensor:
    """Read a TBNF file; float32 values are widened to float64."""
    file_path = Path(path)
    try:
        raw = file_path.read_bytes()
    except FileNotFoundError as e:
        raise DataError(f"Tensor file not found: {file_path}") from e
    except OSError as e:
        raise TensorIOError(f"Cannot read {file_path}: {e}") from e
    return decode_tensor(raw, source=str(file_path))
