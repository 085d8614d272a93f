import json
import threading

import pytest

from src.config.settings import Settings, parse_int_list
from src.core.errors import DataError, FormatError
from src.utils.error_monitor import ErrorMonitor, ErrorSeverity
from src.utils.file_utils import read_jsonl, write_jsonl
from src.utils.progress import ProgressTracker


class TestProgressTracker:
    def test_threads_advance_once_each(self):
        tracker = ProgressTracker("job", 100)

        def work(failed):
            for _ in range(25):
                tracker.advance(failed=failed)

        threads = [threading.Thread(target=work, args=(i == 0,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        summary = tracker.finish()
        assert (summary["done"], summary["failed"]) == (75, 25)
        assert summary["status"] == "partial"
        assert tracker.progress == 100

    def test_statuses(self):
        ok = ProgressTracker("ok", 1)
        ok.advance()
        assert ok.finish()["status"] == "complete"
        bad = ProgressTracker("bad", 1)
        bad.advance(failed=True)
        assert bad.finish()["status"] == "error"


class TestErrorMonitor:
    def test_report(self, tmp_path):
        monitor = ErrorMonitor("encode")
        assert not monitor.has_errors
        monitor.track_error("v2", FormatError("bad magic"))
        try:
            raise RuntimeError("boom")
        except RuntimeError as e:
            monitor.track_error("v1", e, ErrorSeverity.HIGH)

        assert monitor.failed_ids == ["v1", "v2"]
        report = json.loads(monitor.write_report(tmp_path / "errors.json").read_text())
        assert report["total_errors"] == 2
        assert report["error_counts"] == {"FormatError": 1, "RuntimeError": 1}
        by_id = {e["item_id"]: e for e in report["errors"]}
        assert by_id["v2"]["traceback"] == ""
        assert "boom" in by_id["v1"]["traceback"]


class TestJsonLines:
    def test_write_and_read(self, tmp_path):
        path = tmp_path / "records.jsonl"
        assert write_jsonl(path, [{"b": 1, "a": 2}, {"c": 3}]) == 2
        assert path.read_text().splitlines()[0] == '{"a": 2, "b": 1}'
        assert read_jsonl(path) == [{"a": 2, "b": 1}, {"c": 3}]

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "records.jsonl"
        path.write_text('{"a": 1}\nnot json\n')
        with pytest.raises(DataError):
            read_jsonl(path)


class TestSettings:
    def test_defaults(self):
        settings = Settings()
        assert settings.split_ratios == (0.7, 0.1, 0.2)
        assert settings.default_ks == (1, 5)

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("TBEN_DEFAULT_PROJ_DIM", "512")
        assert Settings().DEFAULT_PROJ_DIM == 512

    def test_invalid_split_ratios(self, monkeypatch):
        monkeypatch.setenv("TBEN_SPLIT_RATIOS", "0.5,0.5,0.5")
        with pytest.raises(ValueError):
            Settings()

    def test_parse_int_list(self):
        assert parse_int_list("1, 5,") == (1, 5)
