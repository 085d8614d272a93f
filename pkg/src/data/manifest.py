"""
Dataset manifests and encoded-feature indexes.

A manifest (manifest.json) binds per-video tensor files to labels and
splits:

    {
      "version": 1,
      "hierarchy_path": "hierarchy.json" | null,
      "entries": [
        {"video_id": "v00000", "split": "train",
         "labels": {"flat": 3, "parent": 0, "child": 3},
         "modalities": {"visual": "videos/v00000.tbnf"},
         "frame_rate": 1.0},
        ...
      ]
    }

A feature index (index.json, written by ``encode``) maps video ids to the
encoded vector files of one modality and records the pipeline that
produced them. All relative paths resolve against the directory of the
file that contains them.
"""
import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, PrivateAttr, ValidationError, field_validator, model_validator

from src.core.errors import ConfigError, DataError, DimensionError, TensorIOError
from src.core.tbnf import read_tensor
from src.eval.fusion import ModalityVector, concat_features
from src.models.hierarchy import Hierarchy
from src.utils.file_utils import read_json, resolve_relative, write_json

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1
INDEX_VERSION = 1
SPLITS = ("train", "val", "test")
_VIDEO_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

Split = Literal["train", "val", "test"]


class EntryLabels(BaseModel):
    """Labels of one video; parent and child always appear together."""

    flat: Optional[int] = Field(None, ge=0)
    parent: Optional[int] = Field(None, ge=0)
    child: Optional[int] = Field(None, ge=0)

    @model_validator(mode="after")
    def check_pair(self) -> "EntryLabels":
        if (self.parent is None) != (self.child is None):
            raise ValueError("parent and child labels must be given together")
        return self


class ManifestEntry(BaseModel):
    """One video of a dataset."""

    video_id: str
    split: Split
    labels: EntryLabels = Field(default_factory=EntryLabels)
    modalities: Dict[str, str]
    frame_rate: float = Field(1.0, gt=0.0)

    @field_validator("video_id")
    @classmethod
    def validate_video_id(cls, v: str) -> str:
        if not _VIDEO_ID.match(v):
            raise ValueError(f"video_id {v!r} must match {_VIDEO_ID.pattern}")
        return v

    @field_validator("modalities")
    @classmethod
    def validate_modalities(cls, v: Dict[str, str]) -> Dict[str, str]:
        if not v:
            raise ValueError("an entry needs at least one modality")
        return v


class Manifest(BaseModel):
    """Dataset index: entries plus an optional hierarchy file."""

    version: int = MANIFEST_VERSION
    hierarchy_path: Optional[str] = None
    entries: List[ManifestEntry]

    _base_dir: Path = PrivateAttr(default_factory=Path.cwd)
    _hierarchy: Optional[Hierarchy] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def check_unique_ids(self) -> "Manifest":
        seen, duplicates = set(), set()
        for entry in self.entries:
            if entry.video_id in seen:
                duplicates.add(entry.video_id)
            seen.add(entry.video_id)
        if duplicates:
            raise ValueError(f"duplicate video ids: {sorted(duplicates)}")
        return self

    @property
    def base_dir(self) -> Path:
        return self._base_dir

    def resolve(self, relative: str) -> Path:
        path = Path(relative)
        return path if path.is_absolute() else self._base_dir / path

    def entry_map(self) -> Dict[str, ManifestEntry]:
        return {e.video_id: e for e in self.entries}

    def split_entries(self, split: str) -> List[ManifestEntry]:
        """Entries of one split, sorted by video id."""
        if split not in SPLITS:
            raise ConfigError(f"Unknown split {split!r}; expected one of {', '.join(SPLITS)}")
        return sorted((e for e in self.entries if e.split == split), key=lambda e: e.video_id)

    def modality_path(self, entry: ManifestEntry, modality: str) -> Path:
        if modality not in entry.modalities:
            raise DataError(f"Video {entry.video_id} has no {modality!r} modality")
        return self.resolve(entry.modalities[modality])

    @property
    def hierarchy(self) -> Optional[Hierarchy]:
        return self._hierarchy

    def num_flat_classes(self) -> int:
        labels = [e.labels.flat for e in self.entries if e.labels.flat is not None]
        return max(labels) + 1 if labels else 0


def load_manifest(path: Union[str, Path], check_files: bool = True) -> Manifest:
    """
    Load and validate a manifest.

    Raises:
        DataError: malformed JSON or schema violations
        TensorIOError: a referenced file does not exist
        LabelError: labels inconsistent with the hierarchy
    """
    manifest_path = Path(path)
    payload = read_json(manifest_path)
    try:
        manifest = Manifest.model_validate(payload)
    except ValidationError as e:
        raise DataError(f"Invalid manifest {manifest_path}: {e}") from e
    if manifest.version != MANIFEST_VERSION:
        raise DataError(f"{manifest_path}: unsupported manifest version {manifest.version}")
    manifest._base_dir = manifest_path.resolve().parent

    if check_files:
        missing = [
            f"{entry.video_id}:{tag}"
            for entry in manifest.entries
            for tag, rel in sorted(entry.modalities.items())
            if not manifest.resolve(rel).is_file()
        ]
        if missing:
            raise TensorIOError(f"{manifest_path}: missing tensor files for {', '.join(missing)}")

    if manifest.hierarchy_path:
        hierarchy_file = manifest.resolve(manifest.hierarchy_path)
        if not hierarchy_file.is_file():
            raise TensorIOError(f"{manifest_path}: hierarchy file {hierarchy_file} does not exist")
        manifest._hierarchy = Hierarchy.load(hierarchy_file)
        for entry in manifest.entries:
            if entry.labels.child is not None:
                manifest._hierarchy.check_label(entry.labels.parent, entry.labels.child)

    logger.info(f"Loaded manifest {manifest_path} with {len(manifest.entries)} entries")
    return manifest


def save_manifest(manifest: Manifest, path: Union[str, Path]) -> None:
    """Write a manifest; entries are stored sorted by video id."""
    payload = manifest.model_dump(mode="json")
    payload["entries"] = sorted(payload["entries"], key=lambda e: e["video_id"])
    write_json(path, payload)


class FeatureIndex(BaseModel):
    """Index of one modality's encoded vectors."""

    version: int = INDEX_VERSION
    modality: str
    pipeline: Dict[str, Any]
    dim: int = Field(gt=0)
    windowed: bool = False
    entries: Dict[str, str]
    timing_ns: Optional[Dict[str, int]] = None

    _base_dir: Path = PrivateAttr(default_factory=Path.cwd)

    def vector_path(self, video_id: str) -> Path:
        return resolve_relative(self._base_dir / "index.json", self.entries[video_id])

    def describe(self) -> Dict[str, Any]:
        return {"modality": self.modality, "pipeline": self.pipeline, "dim": self.dim, "windowed": self.windowed}


def index_path_for(path: Union[str, Path]) -> Path:
    """Accept either an index file or the directory containing index.json."""
    candidate = Path(path)
    return candidate / "index.json" if candidate.is_dir() else candidate


def load_feature_index(path: Union[str, Path]) -> FeatureIndex:
    index_file = index_path_for(path)
    try:
        index = FeatureIndex.model_validate(read_json(index_file))
    except ValidationError as e:
        raise DataError(f"Invalid feature index {index_file}: {e}") from e
    index._base_dir = index_file.resolve().parent
    return index


def save_feature_index(index: FeatureIndex, path: Union[str, Path]) -> None:
    payload = index.model_dump(mode="json")
    payload["entries"] = dict(sorted(payload["entries"].items()))
    if payload["timing_ns"] is not None:
        payload["timing_ns"] = dict(sorted(payload["timing_ns"].items()))
    write_json(path, payload)


def load_video_features(indexes: Sequence[FeatureIndex], video_ids: Sequence[str]) -> Dict[str, np.ndarray]:
    """
    Encoded features of each video, one row per sample.

    Unwindowed indexes give one row per video; windowed ones give one row
    per window. With several indexes the rows are concatenated modality by
    modality in the given order (early fusion), which needs matching row
    counts.

    Raises:
        DataError: some ids have no vector in some index; the message lists them
        DimensionError: row counts or vector lengths disagree
    """
    missing = sorted({vid for index in indexes for vid in video_ids if vid not in index.entries})
    if missing:
        shown = ", ".join(missing[:20]) + (" ..." if len(missing) > 20 else "")
        raise DataError(f"Missing encoded features for {len(missing)} videos: {shown}")

    features: Dict[str, np.ndarray] = {}
    for vid in video_ids:
        parts = []
        for index in indexes:
            data = read_tensor(index.vector_path(vid)).data
            rows = data[np.newaxis, :] if data.ndim == 1 else data.reshape(data.shape[0], -1)
            if rows.shape[1] != index.dim:
                raise DimensionError(
                    f"Video {vid}: {index.modality} vector has length {rows.shape[1]}, index says {index.dim}"
                )
            parts.append(rows)
        counts = {p.shape[0] for p in parts}
        if len(counts) != 1:
            raise DimensionError(f"Video {vid}: modalities have different window counts {sorted(counts)}")
        features[vid] = np.stack([
            concat_features([ModalityVector(index.modality, part[row]) for index, part in zip(indexes, parts)])
            for row in range(parts[0].shape[0])
        ])
    return features
