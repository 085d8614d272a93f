import numpy as np
import pytest

from src.core.errors import ConfigError
from src.core.tensor import FeatureSequence
from src.encoding.sampling import mid_frame, resample_fps, sliding_windows


def _frames(t: int, rate: float = 1.0) -> FeatureSequence:
    return FeatureSequence.from_array(np.arange(t, dtype=float)[:, None], frame_rate=rate)


def _indices(seq: FeatureSequence) -> list:
    return [int(v) for v in seq.data[:, 0]]


class TestMidFrame:
    @pytest.mark.parametrize("t,expected", [(5, 2), (4, 2), (1, 0)])
    def test_index(self, t, expected):
        out = mid_frame(_frames(t))
        assert _indices(out) == [expected]


class TestSlidingWindows:
    def test_exact_fit(self):
        windows = sliding_windows(_frames(7), 7, 2)
        assert [_indices(w) for w in windows] == [list(range(7))]

    def test_covered_sequence_has_no_tail(self):
        windows = sliding_windows(_frames(11), 7, 2)
        assert [_indices(w)[0] for w in windows] == [0, 2, 4]
        assert all(w.length == 7 for w in windows)

    def test_uncovered_frames_get_a_tail(self):
        windows = sliding_windows(_frames(12), 7, 2)
        assert [_indices(w)[0] for w in windows] == [0, 2, 4, 6]
        assert _indices(windows[-1]) == list(range(6, 12))

    def test_short_sequence_is_one_window(self):
        windows = sliding_windows(_frames(3), 7, 2)
        assert [_indices(w) for w in windows] == [[0, 1, 2]]

    def test_stride_longer_than_window(self):
        windows = sliding_windows(_frames(8), 2, 5)
        assert [_indices(w) for w in windows] == [[0, 1], [5, 6]]

    def test_window_in_seconds_uses_frame_rate(self):
        windows = sliding_windows(_frames(8, rate=2.0), 2, 2)
        assert [w.length for w in windows] == [4, 4]

    @pytest.mark.parametrize("window,stride", [(0.5, 1), (7, 0)])
    def test_rejects_sub_second_parameters(self, window, stride):
        with pytest.raises(ConfigError):
            sliding_windows(_frames(10), window, stride)


class TestResampleFps:
    def test_downsample(self):
        out = resample_fps(_frames(10), 0.5)
        assert _indices(out) == [0, 2, 4, 6, 8]
        assert out.frame_rate == 0.5

    def test_upsample_repeats_frames(self):
        assert _indices(resample_fps(_frames(3), 2.0)) == [0, 0, 1, 1, 2, 2]

    def test_keeps_at_least_one_frame(self):
        assert _indices(resample_fps(_frames(1), 0.1)) == [0]

    def test_rejects_non_positive_target(self):
        with pytest.raises(ConfigError):
            resample_fps(_frames(4), 0)
