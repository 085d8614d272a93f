import json

import numpy as np
import pytest

from src.core.errors import ConfigError
from src.models.heads import LinearHead
from src.models.hierarchy import Hierarchy
from src.models.model_io import load_head, save_head


def _float32(values: np.ndarray) -> np.ndarray:
    return values.astype(np.float32).astype(np.float64)


class TestModelFiles:
    def test_flat_head(self, tmp_path, rng):
        head = LinearHead(rng.normal(size=(3, 5)), rng.normal(size=3), num_classes=3)
        header_path = save_head(head, tmp_path / "model", train_config={"epochs": 2})
        header = json.loads(header_path.read_text())
        assert header["mode"] == "flat" and header["num_classes"] == 3
        assert header["train_config"] == {"epochs": 2}

        loaded = load_head(tmp_path / "model")
        assert loaded.num_classes == 3 and loaded.hierarchy is None
        np.testing.assert_array_equal(loaded.weights, _float32(head.weights))
        np.testing.assert_array_equal(loaded.bias, _float32(head.bias))

    def test_hier_head(self, tmp_path, rng):
        h = Hierarchy(2, [0, 1, 1])
        head = LinearHead(rng.normal(size=(5, 4)), rng.normal(size=5), hierarchy=h)
        header_path = save_head(head, tmp_path / "model")
        loaded = load_head(header_path)
        assert loaded.hierarchy == h
        assert loaded.num_outputs == 5

    def test_rejects_foreign_header(self, tmp_path):
        (tmp_path / "model.json").write_text(json.dumps({"format": "other", "version": 1}))
        with pytest.raises(ConfigError):
            load_head(tmp_path)

    def test_rejects_mismatched_parameters(self, tmp_path, rng):
        head = LinearHead(rng.normal(size=(3, 5)), rng.normal(size=3), num_classes=3)
        header_path = save_head(head, tmp_path)
        header = json.loads(header_path.read_text())
        header["in_dim"] = 6
        header_path.write_text(json.dumps(header))
        with pytest.raises(ConfigError):
            load_head(tmp_path)
