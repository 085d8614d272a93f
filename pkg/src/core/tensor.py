"""
Dense tensors with semantic axis labels.

A Tensor is an immutable row-major float64 array of rank 1-4 whose axes are
labeled from {T, H, W, C} in canonical relative order (T before H before W
before C). Operations never mutate; they return new tensors.
"""
from enum import IntEnum
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import AxisError, DataError, DimensionError


class Axis(IntEnum):
    """Axis labels; the integer value is the on-disk code and the canonical position."""

    T = 0
    H = 1
    W = 2
    C = 3

    @classmethod
    def parse(cls, label: Union[str, int, "Axis"]) -> "Axis":
        if isinstance(label, Axis):
            return label
        if isinstance(label, str):
            try:
                return cls[label.upper()]
            except KeyError:
                raise AxisError(f"Unknown axis label: {label!r}") from None
        try:
            return cls(label)
        except ValueError:
            raise AxisError(f"Unknown axis code: {label!r}") from None


AxisLike = Union[str, int, Axis]


def canonical_order(axes: Iterable[AxisLike]) -> Tuple[Axis, ...]:
    """The same axis set sorted into canonical (T, H, W, C) order."""
    return tuple(sorted(Axis.parse(a) for a in axes))


class Tensor:
    """
    Immutable labeled tensor.

    Args:
        data: Array-like whose shape gives the extents; widened to float64
        axes: One label per dimension, canonical order, no duplicates
    """

    __slots__ = ("_data", "_axes")

    def __init__(self, data, axes: Sequence[AxisLike]):
        array = np.array(data, dtype=np.float64, order="C")
        labels = tuple(Axis.parse(a) for a in axes)

        if not 1 <= array.ndim <= 4:
            raise DimensionError(f"Tensor rank must be between 1 and 4, got {array.ndim}")
        if len(labels) != array.ndim:
            raise AxisError(f"{len(labels)} axis labels given for a rank-{array.ndim} tensor")
        if len(set(labels)) != len(labels):
            raise AxisError(f"Duplicate axis labels: {[a.name for a in labels]}")
        if labels != canonical_order(labels):
            raise AxisError(f"Axes must follow T,H,W,C order, got {[a.name for a in labels]}")
        if any(extent < 1 for extent in array.shape):
            raise DimensionError(f"All extents must be positive, got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise DataError("Tensor values must be finite")

        array.setflags(write=False)
        self._data = array
        self._axes = labels

    @classmethod
    def from_flat(cls, dims: Sequence[int], axes: Sequence[AxisLike], values) -> "Tensor":
        """Build a tensor from a row-major flat value list."""
        flat = np.asarray(values, dtype=np.float64).reshape(-1)
        expected = int(np.prod(dims)) if len(dims) else 0
        if flat.size != expected:
            raise DimensionError(f"{flat.size} values given for dims {list(dims)}")
        return cls(flat.reshape(tuple(dims)), axes)

    @property
    def data(self) -> np.ndarray:
        """Read-only float64 view shaped by dims."""
        return self._data

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(int(d) for d in self._data.shape)

    @property
    def axes(self) -> Tuple[Axis, ...]:
        return self._axes

    @property
    def rank(self) -> int:
        return len(self._axes)

    def has_axes(self, *labels: AxisLike) -> bool:
        """True when the tensor's axes are exactly the given labels."""
        return self._axes == tuple(Axis.parse(a) for a in labels)

    def extent(self, label: AxisLike) -> int:
        axis = Axis.parse(label)
        if axis not in self._axes:
            raise AxisError(f"Tensor has no {axis.name} axis")
        return self.dims[self._axes.index(axis)]

    def flat(self) -> np.ndarray:
        """Row-major values as a 1-D array."""
        return self._data.reshape(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return self._axes == other._axes and np.array_equal(self._data, other._data)

    def __repr__(self) -> str:
        axes = "".join(a.name for a in self._axes)
        return f"Tensor(axes={axes}, dims={list(self.dims)})"


def reduce_mean(t: Tensor, axes_to_reduce: Iterable[AxisLike]) -> Tensor:
    """
    Arithmetic mean over the given axes.

    Reducing the empty set returns the tensor unchanged. Reducing every axis
    is rejected because rank-0 tensors are not representable.
    """
    targets = {Axis.parse(a) for a in axes_to_reduce}
    missing = targets.difference(t.axes)
    if missing:
        raise AxisError(f"Cannot reduce absent axes: {sorted(a.name for a in missing)}")
    if not targets:
        return t
    if len(targets) == t.rank:
        raise AxisError("Cannot reduce every axis of a tensor")
    positions = tuple(i for i, a in enumerate(t.axes) if a in targets)
    kept = [a for a in t.axes if a not in targets]
    return Tensor(t.data.mean(axis=positions), kept)


class FeatureSequence:
    """
    A per-second descriptor stream: a Tensor whose leading axis is T.

    Args:
        tensor: Tensor with axes (T, C) or (T, H, W, C)
        frame_rate: Samples per second (informational)
    """

    __slots__ = ("tensor", "frame_rate")

    def __init__(self, tensor: Tensor, frame_rate: float = 1.0):
        if not (tensor.has_axes("T", "C") or tensor.has_axes("T", "H", "W", "C")):
            axes = "".join(a.name for a in tensor.axes)
            raise AxisError(f"A feature sequence needs axes TC or THWC, got {axes}")
        if not frame_rate > 0:
            raise DataError(f"frame_rate must be positive, got {frame_rate}")
        self.tensor = tensor
        self.frame_rate = float(frame_rate)

    @classmethod
    def from_array(cls, data, frame_rate: float = 1.0) -> "FeatureSequence":
        """Build from a (t, c) or (t, h, w, c) array."""
        array = np.asarray(data, dtype=np.float64)
        axes = ("T", "C") if array.ndim == 2 else ("T", "H", "W", "C")
        return cls(Tensor(array, axes), frame_rate)

    @property
    def length(self) -> int:
        return self.tensor.dims[0]

    @property
    def channels(self) -> int:
        return self.tensor.dims[-1]

    @property
    def is_spatial(self) -> bool:
        return self.tensor.rank == 4

    @property
    def data(self) -> np.ndarray:
        return self.tensor.data

    def select(self, indices: Sequence[int], frame_rate: Optional[float] = None) -> "FeatureSequence":
        """A new sequence made of the frames at the given indices, in order."""
        rate = self.frame_rate if frame_rate is None else frame_rate
        return FeatureSequence(Tensor(self.data[list(indices)], self.tensor.axes), rate)

    def descriptors(self) -> np.ndarray:
        """All local descriptors as an (n, c) array, frame-major."""
        return self.data.reshape(-1, self.channels)

    def __repr__(self) -> str:
        return f"FeatureSequence({self.tensor!r}, frame_rate={self.frame_rate})"
