"""
Evaluation metrics: Hit@k, frame-prediction averaging and split means.

Top-k ranking sorts by descending score; equal scores rank the lower class
id first, so results never depend on sort stability of the platform.
"""
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from src.core.errors import ConfigError, DataError, DimensionError, LabelError


def top_k(scores: np.ndarray, k: int) -> np.ndarray:
    """Class ids of the k best scores, best first, ties to the lower id."""
    values = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((np.arange(values.shape[0]), -values))
    return order[:k]


def hit_at_k(scores: np.ndarray, true_label: int, k: int) -> bool:
    """True when ``true_label`` is among the k highest-scoring classes."""
    values = np.asarray(scores, dtype=np.float64)
    num_classes = values.shape[0]
    if not 1 <= k <= num_classes:
        raise ConfigError(f"k={k} outside [1, {num_classes}]")
    if not 0 <= true_label < num_classes:
        raise LabelError(f"Label {true_label} outside [0, {num_classes})")
    return bool(true_label in top_k(values, k))


def evaluate(predictions: Sequence[Tuple[np.ndarray, int]], ks: Iterable[int]) -> Dict[int, float]:
    """
    Hit@k percentages over a prediction list.

    Args:
        predictions: (scores, true label) pairs
        ks: Cut-offs to report

    Returns:
        {k: 100 * hits / count}, rounded to two decimals
    """
    if not predictions:
        raise DataError("Cannot evaluate an empty prediction list")
    cutoffs = list(ks)
    if not cutoffs:
        raise ConfigError("At least one Hit@k cut-off is required")
    hits = {k: 0 for k in cutoffs}
    for scores, label in predictions:
        values = np.asarray(scores, dtype=np.float64)
        if not 0 <= label < values.shape[0]:
            raise LabelError(f"Label {label} outside [0, {values.shape[0]})")
        ranked = top_k(values, max(cutoffs))
        position = np.nonzero(ranked == label)[0]
        for k in cutoffs:
            if not 1 <= k <= values.shape[0]:
                raise ConfigError(f"k={k} outside [1, {values.shape[0]}]")
            if position.size and position[0] < k:
                hits[k] += 1
    count = len(predictions)
    return {k: round(100.0 * hits[k] / count, 2) for k in cutoffs}


def average_frame_predictions(frame_scores: Sequence[np.ndarray]) -> np.ndarray:
    """Arithmetic mean of per-frame probability vectors."""
    if not frame_scores:
        raise DataError("No frame predictions to average")
    lengths = {np.asarray(s).shape for s in frame_scores}
    if len(lengths) != 1:
        raise DimensionError(f"Frame predictions have different shapes: {sorted(lengths)}")
    stacked = np.stack([np.asarray(s, dtype=np.float64) for s in frame_scores])
    sums = stacked.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        raise DataError("Every frame prediction must be a probability vector")
    return stacked.mean(axis=0)


def split_mean(values: Sequence[float]) -> float:
    """Mean of per-split percentages."""
    if not values:
        raise DataError("split_mean needs at least one value")
    return float(np.mean(np.asarray(values, dtype=np.float64)))


def format_table(results: Dict[int, float]) -> str:
    """Render a Hit@k result table."""
    header = "  ".join(f"{'Hit@' + str(k):>8}" for k in results)
    row = "  ".join(f"{v:8.2f}" for v in results.values())
    return f"{header}\n{row}"


def usable_ks(ks: Sequence[int], num_labels: int) -> List[int]:
    """Cut-offs not exceeding the label count."""
    return [k for k in ks if 1 <= k <= num_labels]
