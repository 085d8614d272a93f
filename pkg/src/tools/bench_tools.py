"""
bench: encode-time latency of the pooling pipelines.

Every pipeline encodes the same seeded random (T, H, W, C) tensor; the
projectors are built before timing starts. Runs single-threaded.
"""
import argparse
import logging
from typing import List, Sequence

from src.config.settings import get_settings
from src.core.errors import ConfigError
from src.core.registry import registry
from src.core.rng import SplitMix64
from src.core.tensor import FeatureSequence
from src.encoding.pooling import PipelineVariant, build_pipeline, run_pipeline
from src.encoding.projection import Normalization
from src.utils.benchmark import LatencyStats, format_table, time_callable
from src.utils.file_utils import write_json

logger = logging.getLogger(__name__)

ALL_PIPELINES = tuple(v.value for v in PipelineVariant)


def random_sequence(t: int, h: int, w: int, c: int, seed: int) -> FeatureSequence:
    """Seeded standard-Gaussian (t, h, w, c) input."""
    for name, value in (("t", t), ("h", h), ("w", w), ("c", c)):
        if value < 1:
            raise ConfigError(f"Benchmark shape needs {name} >= 1, got {value}")
    values = SplitMix64(seed).gaussian(t * h * w * c).reshape(t, h, w, c)
    return FeatureSequence.from_array(values)


def bench_pipelines(
    pipelines: Sequence[str],
    t: int,
    h: int,
    w: int,
    c: int,
    proj_dim: int,
    reps: int,
    warmup: int = 2,
    seed: int = 0,
    norm: str = "ssqrt",
) -> List[LatencyStats]:
    """Latency of each pipeline on one shared input, in the given order."""
    seq = random_sequence(t, h, w, c, seed)
    normalization = Normalization.parse(norm)
    stats = []
    for spec in pipelines:
        pipeline = build_pipeline(spec, c, proj_dim, seed, normalization,
                                  chunk_rows=get_settings().PROJECTION_CHUNK_ROWS)
        result = time_callable(spec, lambda: run_pipeline(pipeline, seq), reps, warmup)
        logger.info(f"{spec}: median {result.median_ns:.0f} ns over {reps} reps")
        stats.append(result)
    return stats


def configure_bench(parser: argparse.ArgumentParser) -> None:
    settings = get_settings()
    parser.add_argument("--pipeline", default=",".join(ALL_PIPELINES),
                        help="Comma-separated pipelines to time (default: all five)")
    parser.add_argument("--frames", type=int, default=130)
    parser.add_argument("--height", type=int, default=7)
    parser.add_argument("--width", type=int, default=7)
    parser.add_argument("--channels", type=int, default=2048)
    parser.add_argument("--proj-dim", type=int, default=settings.DEFAULT_PROJ_DIM)
    parser.add_argument("--norm", default=settings.DEFAULT_NORM)
    parser.add_argument("--reps", type=int, default=10, help="Timed repetitions per pipeline (>= 10)")
    parser.add_argument("--warmup", type=int, default=settings.BENCH_WARMUP)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="Write the latency table as JSON")


@registry.register_command("bench", "Measure pipeline encode latency", configure_bench)
def cmd_bench(args: argparse.Namespace) -> int:
    if args.reps < 10:
        raise ConfigError(f"--reps must be at least 10, got {args.reps}")
    pipelines = [p.strip() for p in args.pipeline.split(",") if p.strip()]
    for p in pipelines:
        PipelineVariant.parse(p)
    stats = bench_pipelines(pipelines, args.frames, args.height, args.width, args.channels,
                            args.proj_dim, args.reps, args.warmup, args.seed, args.norm)

    print(f"shape t={args.frames} h={args.height} w={args.width} c={args.channels}, d={args.proj_dim}, "
          f"{args.reps} reps")
    print(format_table(stats))
    if args.out:
        write_json(args.out, {
            "shape": {"t": args.frames, "h": args.height, "w": args.width, "c": args.channels},
            "proj_dim": args.proj_dim,
            "reps": args.reps,
            "warmup": args.warmup,
            "results": [s.to_dict() for s in stats],
        })
    return 0
