"""
Frame selection on feature sequences: middle frame, sliding windows and
frame-rate resampling. All of them pick frame indices; none interpolates.
"""
import math
from typing import List

from src.core.errors import ConfigError
from src.core.tensor import FeatureSequence


def mid_frame(seq: FeatureSequence) -> FeatureSequence:
    """The single frame at index floor(t / 2)."""
    return seq.select([seq.length // 2])


def sliding_windows(seq: FeatureSequence, window_s: float, stride_s: float) -> List[FeatureSequence]:
    """
    Windows of window_s seconds every stride_s seconds.

    Full windows start at 0, s, 2s, ... while they fit. A trailing window
    shorter than window_s is kept when it contains frames no full window
    covered, so short sequences yield one window with all their frames.
    """
    if window_s < 1 or stride_s < 1:
        raise ConfigError(f"window and stride must be at least 1 second, got {window_s}, {stride_s}")
    t = seq.length
    if t == 0:
        return []
    size = max(1, int(round(window_s * seq.frame_rate)))
    step = max(1, int(round(stride_s * seq.frame_rate)))

    windows = []
    start = 0
    covered = 0
    while start + size <= t:
        windows.append(seq.select(range(start, start + size)))
        covered = start + size
        start += step
    if covered < t and start < t:
        windows.append(seq.select(range(start, t)))
    return windows


def resample_fps(seq: FeatureSequence, target_fps: float) -> FeatureSequence:
    """
    Resample to ``target_fps`` by index selection.

    Keeps max(1, floor(t * target / rate)) frames at indices
    floor(j * rate / target), clipped to the last frame.
    """
    if not target_fps > 0:
        raise ConfigError(f"target fps must be positive, got {target_fps}")
    t = seq.length
    count = max(1, int(math.floor(t * target_fps / seq.frame_rate + 1e-9)))
    ratio = seq.frame_rate / target_fps
    indices = [min(t - 1, int(math.floor(j * ratio + 1e-9))) for j in range(count)]
    return seq.select(indices, frame_rate=target_fps)
