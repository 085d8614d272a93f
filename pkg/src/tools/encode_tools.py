"""
encode: run a pooling pipeline over every video of a manifest.

Each video's vector is written as a rank-1 TBNF tensor (or a (T, C) tensor
with one row per window when --window is given) under <out>/vectors/, and
<out>/index.json maps video ids to those files. Videos are encoded in a
thread pool sharing one immutable pipeline; the index is sorted by video id
so its content does not depend on scheduling.
"""
import argparse
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.config.settings import get_settings
from src.core.errors import DataError, PartialFailure, TbenError
from src.core.tbnf import read_tensor, write_tensor
from src.core.tensor import FeatureSequence, Tensor
from src.core.registry import registry
from src.data.manifest import FeatureIndex, Manifest, ManifestEntry, load_manifest, save_feature_index
from src.encoding.pooling import PoolingPipeline, build_pipeline, run_pipeline
from src.encoding.projection import Normalization
from src.encoding.sampling import mid_frame, resample_fps, sliding_windows
from src.utils.error_monitor import ErrorMonitor, ErrorSeverity
from src.utils.file_utils import ensure_directory_exists
from src.utils.progress import ProgressTracker

logger = logging.getLogger(__name__)


def configure_encode(parser: argparse.ArgumentParser) -> None:
    settings = get_settings()
    parser.add_argument("--manifest", required=True, help="Dataset manifest.json")
    parser.add_argument("--out", required=True, help="Output directory for vectors and index.json")
    parser.add_argument("--pipeline", required=True,
                        help="stap, sap+tcbp, scbp+tap, scbp+tcbp or stcbp")
    parser.add_argument("--modality", default="visual", help="Manifest modality to encode")
    parser.add_argument("--proj-dim", type=int, default=settings.DEFAULT_PROJ_DIM)
    parser.add_argument("--proj-seed", type=int, default=settings.DEFAULT_PROJ_SEED)
    parser.add_argument("--norm", default=settings.DEFAULT_NORM,
                        help="identity, ssqrt, sigmoid or scale:<k>")
    parser.add_argument("--spatial-dim", type=int, default=None, help="SCBP output dimension (default --proj-dim)")
    parser.add_argument("--spatial-norm", default=None, help="SCBP normalization (default --norm)")
    parser.add_argument("--post-norm", choices=("none", "l2"), default="none")
    parser.add_argument("--sampling", choices=("all", "mid"), default="all",
                        help="mid keeps only the middle frame of train-split videos")
    parser.add_argument("--window", type=float, default=None, help="Encode sliding windows of this many seconds")
    parser.add_argument("--stride", type=float, default=None, help="Window stride in seconds (default --window)")
    parser.add_argument("--fps", type=float, default=None, help="Resample sequences to this frame rate first")
    parser.add_argument("--split", action="append", choices=("train", "val", "test"),
                        help="Only encode these splits (repeatable)")
    parser.add_argument("--workers", type=int, default=settings.ENCODE_WORKERS)
    parser.add_argument("--timing", action="store_true", help="Record per-video encode time in the index")


class VideoEncoder:
    """Turns one manifest entry into its encoded rows."""

    def __init__(self, manifest: Manifest, pipeline: PoolingPipeline, modality: str,
                 sampling: str = "all", window: Optional[float] = None, stride: Optional[float] = None,
                 fps: Optional[float] = None):
        self.manifest = manifest
        self.pipeline = pipeline
        self.modality = modality
        self.sampling = sampling
        self.window = window
        self.stride = stride if stride is not None else window
        self.fps = fps

    def load(self, entry: ManifestEntry) -> FeatureSequence:
        tensor = read_tensor(self.manifest.modality_path(entry, self.modality))
        return FeatureSequence(tensor, entry.frame_rate)

    def encode(self, entry: ManifestEntry) -> Tuple[np.ndarray, int]:
        """
        Returns:
            (vector or (windows, d) rows, encode time in ns excluding file I/O)
        """
        seq = self.load(entry)
        start = time.perf_counter_ns()
        if self.fps is not None:
            seq = resample_fps(seq, self.fps)
        if self.sampling == "mid" and entry.split == "train":
            seq = mid_frame(seq)
        if self.window is not None:
            encoded = np.stack([run_pipeline(self.pipeline, w) for w in sliding_windows(seq, self.window, self.stride)])
        else:
            encoded = run_pipeline(self.pipeline, seq)
        return encoded, time.perf_counter_ns() - start


def _probe_channels(encoder: VideoEncoder, entries: List[ManifestEntry]) -> int:
    """Channel count of the first readable video."""
    for entry in entries:
        try:
            return encoder.load(entry).channels
        except TbenError as e:
            logger.debug(f"Cannot probe {entry.video_id}: {e}")
    raise PartialFailure(f"None of the {len(entries)} videos could be read")


@registry.register_command("encode", "Encode videos with a pooling pipeline", configure_encode)
def cmd_encode(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    entries = sorted(manifest.entries, key=lambda e: e.video_id)
    if args.split:
        entries = [e for e in entries if e.split in args.split]
    if not entries:
        raise DataError(f"No videos to encode in {args.manifest}")
    out_dir = ensure_directory_exists(args.out)
    ensure_directory_exists(out_dir / "vectors")

    norm = Normalization.parse(args.norm)
    spatial_norm = Normalization.parse(args.spatial_norm) if args.spatial_norm else None
    encoder = VideoEncoder(manifest, None, args.modality, args.sampling, args.window, args.stride, args.fps)
    channels = _probe_channels(encoder, entries)
    encoder.pipeline = build_pipeline(
        args.pipeline, channels, args.proj_dim, args.proj_seed, norm,
        spatial_dim=args.spatial_dim, spatial_norm=spatial_norm, post_norm=args.post_norm,
        chunk_rows=get_settings().PROJECTION_CHUNK_ROWS,
    )
    dim = encoder.pipeline.output_dim or channels
    logger.info(f"Encoding {len(entries)} videos with {args.pipeline} (c={channels}, out={dim})")

    monitor = ErrorMonitor("encode")
    tracker = ProgressTracker("encode", len(entries))
    written: Dict[str, str] = {}
    timing: Dict[str, int] = {}

    def encode_one(entry: ManifestEntry) -> None:
        try:
            encoded, elapsed = encoder.encode(entry)
            axes = ("T", "C") if encoded.ndim == 2 else ("C",)
            rel = f"vectors/{entry.video_id}.tbnf"
            write_tensor(Tensor(encoded, axes), out_dir / rel)
        except TbenError as e:
            monitor.track_error(entry.video_id, e)
            tracker.advance(failed=True)
            return
        except Exception as e:
            monitor.track_error(entry.video_id, e, ErrorSeverity.HIGH)
            tracker.advance(failed=True)
            return
        written[entry.video_id] = rel
        timing[entry.video_id] = elapsed
        tracker.advance()

    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        list(pool.map(encode_one, entries))
    summary = tracker.finish()

    index = FeatureIndex(
        modality=args.modality,
        pipeline=encoder.pipeline.describe(),
        dim=dim,
        windowed=args.window is not None,
        entries=written,
        timing_ns=timing if args.timing else None,
    )
    save_feature_index(index, Path(out_dir) / "index.json")

    print(f"Encoded {summary['done']}/{len(entries)} videos with {args.pipeline} -> {out_dir} (dim {dim})")
    if args.timing and timing:
        values = np.asarray(list(timing.values()), dtype=np.float64)
        print(f"  encode time per video: median {np.median(values) / 1e6:.3f} ms, "
              f"mean {values.mean() / 1e6:.3f} ms")
    if monitor.has_errors:
        monitor.write_report(Path(out_dir) / "errors.json")
        raise PartialFailure(
            f"{len(monitor.failed_ids)} videos failed to encode: {', '.join(monitor.failed_ids)}"
        )
    return 0
