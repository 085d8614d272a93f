"""
Multimodal fusion.

Early fusion concatenates per-modality video vectors before training one
head. Late fusion sums the final-layer activations of per-modality heads
(optionally weighted) before the decision; it works on pre-softmax
activations, not on probabilities.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.core.errors import DataError, DimensionError


@dataclass(frozen=True)
class ModalityVector:
    """One modality's encoded vector for a video."""

    modality: str
    values: np.ndarray

    def __post_init__(self):
        if not self.modality:
            raise DataError("A modality vector needs a non-empty tag")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or not np.all(np.isfinite(values)):
            raise DataError(f"Modality {self.modality!r} values must be a finite vector")
        object.__setattr__(self, "values", values)


def concat_features(parts: Sequence[ModalityVector]) -> np.ndarray:
    """Concatenate modality vectors in the given order."""
    if not parts:
        raise DataError("Nothing to concatenate")
    return np.concatenate([part.values for part in parts])


def modality_offsets(parts: Sequence[ModalityVector]) -> List[int]:
    """Start offset of every part inside the concatenated vector."""
    offsets, position = [], 0
    for part in parts:
        offsets.append(position)
        position += part.values.shape[0]
    return offsets


def late_fuse(activation_sets: Sequence[np.ndarray], weights: Optional[Sequence[float]] = None) -> np.ndarray:
    """
    Weighted sum of activation vectors over one label space.

    Args:
        activation_sets: One logit vector per modality, all the same length
        weights: Non-negative, not all zero; defaults to all ones
    """
    if not activation_sets:
        raise DataError("Nothing to fuse")
    sets = [np.asarray(a, dtype=np.float64) for a in activation_sets]
    shapes = {a.shape for a in sets}
    if len(shapes) != 1:
        raise DimensionError(f"Activation vectors differ in shape: {sorted(shapes)}")

    if weights is None:
        w = np.ones(len(sets))
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (len(sets),):
            raise DimensionError(f"{len(sets)} activation sets but {w.size} weights")
        if np.any(w < 0) or not np.any(w > 0):
            raise DataError(f"Fusion weights must be non-negative and not all zero, got {w.tolist()}")

    fused = np.zeros_like(sets[0])
    for weight, activations in zip(w, sets):
        fused = fused + weight * activations
    return fused
