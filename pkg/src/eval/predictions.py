"""
Per-video predictions and prediction files.

A prediction file is JSON lines sorted by video id, one object per video:

    {"id": "v00012", "label": 3, "parent": 0,
     "scores": [...], "logits": [...]}

``label`` is the class evaluated by Hit@k (the child for hierarchical
heads, which also store ``parent``). ``scores`` are probabilities over that
label space; ``logits`` are the pre-softmax activations late fusion sums
(log joint probabilities for hierarchical heads).
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import DataError, LabelError
from src.data.manifest import ManifestEntry
from src.eval.metrics import average_frame_predictions
from src.models.heads import LinearHead, label_activations, label_scores
from src.utils.file_utils import read_jsonl, write_jsonl


@dataclass
class VideoPrediction:
    video_id: str
    label: int
    scores: np.ndarray
    logits: np.ndarray
    parent: Optional[int] = None

    def to_record(self) -> Dict:
        record = {"id": self.video_id, "label": self.label}
        if self.parent is not None:
            record["parent"] = self.parent
        record["scores"] = [float(v) for v in self.scores]
        record["logits"] = [float(v) for v in self.logits]
        return record


def entry_label(entry: ManifestEntry, hierarchical: bool) -> Union[int, Tuple[int, int]]:
    """Training label of an entry: class id, or (parent, child) for hierarchical heads."""
    labels = entry.labels
    if hierarchical:
        if labels.child is None:
            raise LabelError(f"Video {entry.video_id} has no parent/child labels")
        return labels.parent, labels.child
    if labels.flat is None:
        raise LabelError(f"Video {entry.video_id} has no flat label")
    return labels.flat


def predict_video(head: LinearHead, rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Scores and activations of one video from its sample rows.

    A video encoded as several windows gets the average of the window
    probability vectors and the mean of the window activations.
    """
    scores = label_scores(head, rows)
    logits = label_activations(head, rows)
    if rows.shape[0] == 1:
        return scores[0], logits[0]
    return average_frame_predictions(list(scores)), logits.mean(axis=0)


def predict_entries(
    head: LinearHead, entries: Sequence[ManifestEntry], features: Dict[str, np.ndarray]
) -> List[VideoPrediction]:
    hierarchical = head.hierarchy is not None
    predictions = []
    for entry in sorted(entries, key=lambda e: e.video_id):
        label = entry_label(entry, hierarchical)
        scores, logits = predict_video(head, features[entry.video_id])
        if hierarchical:
            predictions.append(VideoPrediction(entry.video_id, label[1], scores, logits, parent=label[0]))
        else:
            predictions.append(VideoPrediction(entry.video_id, label, scores, logits))
    return predictions


def write_predictions(path: Union[str, Path], predictions: Sequence[VideoPrediction]) -> int:
    ordered = sorted(predictions, key=lambda p: p.video_id)
    return write_jsonl(path, (p.to_record() for p in ordered))


def read_predictions(path: Union[str, Path]) -> List[VideoPrediction]:
    """Read a prediction file, checking every record's fields."""
    predictions = []
    for record in read_jsonl(path):
        try:
            predictions.append(VideoPrediction(
                video_id=str(record["id"]),
                label=int(record["label"]),
                scores=np.asarray(record["scores"], dtype=np.float64),
                logits=np.asarray(record["logits"], dtype=np.float64),
                parent=record.get("parent"),
            ))
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"Malformed prediction record in {path}: {e}") from e
    if not predictions:
        raise DataError(f"Prediction file {path} is empty")
    ids = [p.video_id for p in predictions]
    if len(set(ids)) != len(ids):
        raise DataError(f"Prediction file {path} repeats video ids")
    return predictions
