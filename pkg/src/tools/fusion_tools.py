"""
fuse: late fusion of per-modality prediction files.
"""
import argparse
import logging
from typing import List, Optional, Sequence

import numpy as np

from src.core.errors import ConfigError, DataError, DimensionError
from src.core.registry import registry
from src.eval.fusion import late_fuse
from src.eval.metrics import evaluate, format_table
from src.eval.predictions import VideoPrediction, read_predictions, write_predictions
from src.tools.train_tools import checked_ks, parse_ks
from src.utils.file_utils import write_json

logger = logging.getLogger(__name__)


def parse_weights(value: Optional[str], count: int) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        weights = [float(w) for w in value.split(",")]
    except ValueError:
        raise ConfigError(f"Invalid --weights {value!r}; expected comma-separated numbers") from None
    if len(weights) != count:
        raise ConfigError(f"{count} prediction files but {len(weights)} weights")
    return weights


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = np.exp(z - z.max())
    return shifted / shifted.sum()


def fuse_predictions(files: Sequence[List[VideoPrediction]], names: Sequence[str],
                     weights: Optional[Sequence[float]] = None) -> List[VideoPrediction]:
    """
    Late-fuse aligned prediction lists video by video.

    Raises:
        DataError: the files cover different videos or disagree on a label
        DimensionError: activation lengths differ
    """
    by_id = [{p.video_id: p for p in preds} for preds in files]
    reference = set(by_id[0])
    for name, mapping in zip(names[1:], by_id[1:]):
        if set(mapping) != reference:
            only_first = sorted(reference - set(mapping))
            only_other = sorted(set(mapping) - reference)
            raise DataError(
                f"{names[0]} and {name} cover different videos: "
                f"only in {names[0]}: {only_first[:10]}, only in {name}: {only_other[:10]}"
            )

    fused = []
    for video_id in sorted(reference):
        preds = [mapping[video_id] for mapping in by_id]
        labels = {p.label for p in preds}
        if len(labels) != 1:
            raise DataError(f"Video {video_id} has different labels across files: {sorted(labels)}")
        lengths = {p.logits.shape[0] for p in preds}
        if len(lengths) != 1:
            raise DimensionError(f"Video {video_id}: label spaces differ across files ({sorted(lengths)})")
        logits = late_fuse([p.logits for p in preds], weights)
        fused.append(VideoPrediction(video_id, preds[0].label, _softmax(logits), logits, parent=preds[0].parent))
    return fused


def configure_fuse(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--predictions", required=True, nargs="+", help="Prediction files written by eval")
    parser.add_argument("--weights", default=None, help="Comma-separated non-negative weights, one per file")
    parser.add_argument("--ks", default=None, help="Hit@k cut-offs, e.g. 1,5")
    parser.add_argument("--out", default=None, help="Write fused predictions (JSON lines)")
    parser.add_argument("--metrics-out", default=None, help="Write the Hit@k table as JSON")


@registry.register_command("fuse", "Late-fuse prediction files and evaluate", configure_fuse)
def cmd_fuse(args: argparse.Namespace) -> int:
    files = [read_predictions(p) for p in args.predictions]
    weights = parse_weights(args.weights, len(files))
    fused = fuse_predictions(files, args.predictions, weights)

    ks = checked_ks(parse_ks(args.ks), fused[0].logits.shape[0])
    # Ranking by fused activations; the softmax keeps the order.
    results = evaluate([(p.logits, p.label) for p in fused], ks)

    print(f"fused {len(files)} files over {len(fused)} videos")
    print(format_table(results))
    if args.out:
        write_predictions(args.out, fused)
    if args.metrics_out:
        write_json(args.metrics_out, {
            "count": len(fused),
            "inputs": list(args.predictions),
            "weights": weights,
            "hit_at": {str(k): v for k, v in results.items()},
        })
    return 0
