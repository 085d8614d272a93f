import json

import numpy as np
import pytest

from src.core.errors import ConfigError, DataError, DimensionError, LabelError, TensorIOError
from src.core.tbnf import write_tensor
from src.core.tensor import Tensor
from src.data.manifest import (
    EntryLabels,
    FeatureIndex,
    Manifest,
    ManifestEntry,
    load_feature_index,
    load_manifest,
    load_video_features,
    save_feature_index,
    save_manifest,
)
from src.models.hierarchy import Hierarchy


def _entry(video_id, split="train", flat=0, parent=None, child=None):
    return ManifestEntry(
        video_id=video_id,
        split=split,
        labels=EntryLabels(flat=flat, parent=parent, child=child),
        modalities={"visual": f"videos/{video_id}.tbnf"},
    )


def _write_videos(root, ids, shape=(3, 4)):
    (root / "videos").mkdir(exist_ok=True)
    for vid in ids:
        write_tensor(Tensor(np.ones(shape), ("T", "C")), root / "videos" / f"{vid}.tbnf")


class TestManifest:
    def test_save_and_load(self, tmp_path):
        _write_videos(tmp_path, ["b", "a"])
        save_manifest(Manifest(entries=[_entry("b", "test", 1), _entry("a")]), tmp_path / "manifest.json")
        payload = json.loads((tmp_path / "manifest.json").read_text())
        assert [e["video_id"] for e in payload["entries"]] == ["a", "b"]

        manifest = load_manifest(tmp_path / "manifest.json")
        assert manifest.num_flat_classes() == 2
        assert [e.video_id for e in manifest.split_entries("test")] == ["b"]
        assert manifest.modality_path(manifest.entry_map()["a"], "visual") == tmp_path.resolve() / "videos" / "a.tbnf"

    def test_missing_tensor_file(self, tmp_path):
        save_manifest(Manifest(entries=[_entry("a")]), tmp_path / "manifest.json")
        with pytest.raises(TensorIOError):
            load_manifest(tmp_path / "manifest.json")
        assert load_manifest(tmp_path / "manifest.json", check_files=False).entries[0].video_id == "a"

    def test_duplicate_ids(self, tmp_path):
        entry = _entry("a").model_dump()
        (tmp_path / "manifest.json").write_text(json.dumps({"entries": [entry, entry]}))
        with pytest.raises(DataError, match="duplicate"):
            load_manifest(tmp_path / "manifest.json", check_files=False)

    @pytest.mark.parametrize("video_id", ["", "../x", "a b"])
    def test_invalid_video_id(self, video_id):
        with pytest.raises(ValueError):
            _entry(video_id)

    def test_parent_needs_child(self):
        with pytest.raises(ValueError):
            EntryLabels(parent=1)

    def test_labels_checked_against_hierarchy(self, tmp_path):
        Hierarchy(2, [0, 0, 1]).save(tmp_path / "hierarchy.json")
        manifest = Manifest(hierarchy_path="hierarchy.json", entries=[_entry("a", flat=2, parent=0, child=2)])
        save_manifest(manifest, tmp_path / "manifest.json")
        with pytest.raises(LabelError):
            load_manifest(tmp_path / "manifest.json", check_files=False)

    def test_unknown_split(self, tmp_path):
        with pytest.raises(ConfigError):
            Manifest(entries=[_entry("a")]).split_entries("dev")

    def test_invalid_json(self, tmp_path):
        (tmp_path / "manifest.json").write_text("{not json")
        with pytest.raises(DataError):
            load_manifest(tmp_path / "manifest.json")


def _index(root, modality, vectors, dim):
    (root / "vectors").mkdir(parents=True, exist_ok=True)
    entries = {}
    for vid, values in vectors.items():
        values = np.asarray(values, dtype=float)
        axes = ("C",) if values.ndim == 1 else ("T", "C")
        write_tensor(Tensor(values, axes), root / "vectors" / f"{vid}.tbnf")
        entries[vid] = f"vectors/{vid}.tbnf"
    save_feature_index(FeatureIndex(modality=modality, pipeline={"pipeline": "stap"}, dim=dim, entries=entries),
                       root / "index.json")
    return load_feature_index(root)


class TestFeatures:
    def test_single_index(self, tmp_path):
        index = _index(tmp_path, "visual", {"a": [1.0, 2.0]}, 2)
        features = load_video_features([index], ["a"])
        np.testing.assert_array_equal(features["a"], [[1.0, 2.0]])

    def test_concatenates_modalities_in_order(self, tmp_path):
        visual = _index(tmp_path / "v", "visual", {"a": [1.0, 2.0]}, 2)
        audio = _index(tmp_path / "a", "audio", {"a": [3.0]}, 1)
        np.testing.assert_array_equal(load_video_features([visual, audio], ["a"])["a"], [[1.0, 2.0, 3.0]])
        np.testing.assert_array_equal(load_video_features([audio, visual], ["a"])["a"], [[3.0, 1.0, 2.0]])

    def test_windowed_rows(self, tmp_path):
        index = _index(tmp_path, "visual", {"a": [[1.0, 2.0], [3.0, 4.0]]}, 2)
        assert load_video_features([index], ["a"])["a"].shape == (2, 2)

    def test_missing_ids_are_listed(self, tmp_path):
        index = _index(tmp_path, "visual", {"a": [1.0, 2.0]}, 2)
        with pytest.raises(DataError, match="b, c"):
            load_video_features([index], ["a", "b", "c"])

    def test_length_mismatch(self, tmp_path):
        index = _index(tmp_path, "visual", {"a": [1.0, 2.0, 3.0]}, 2)
        with pytest.raises(DimensionError):
            load_video_features([index], ["a"])
