"""
eval and split-mean: Hit@k of a trained head, and averages over splits.
"""
import argparse
import logging
from typing import Dict, List

from src.core.errors import ConfigError, DataError
from src.core.registry import registry
from src.data.manifest import load_manifest, load_video_features
from src.eval.metrics import evaluate, format_table, split_mean
from src.eval.predictions import predict_entries, write_predictions
from src.models.model_io import load_head
from src.tools.train_tools import checked_ks, load_indexes, parse_ks
from src.utils.file_utils import read_json, write_json

logger = logging.getLogger(__name__)


def configure_eval(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True, help="Model directory or model.json")
    parser.add_argument("--manifest", required=True, help="Dataset manifest.json")
    parser.add_argument("--features", required=True, nargs="+",
                        help="Feature index files, in the order used for training")
    parser.add_argument("--split", choices=("train", "val", "test"), default="test")
    parser.add_argument("--ks", default=None, help="Hit@k cut-offs, e.g. 1,5")
    parser.add_argument("--out", default=None, help="Write per-video predictions (JSON lines)")
    parser.add_argument("--metrics-out", default=None, help="Write the Hit@k table as JSON")


@registry.register_command("eval", "Evaluate a trained head with Hit@k", configure_eval)
def cmd_eval(args: argparse.Namespace) -> int:
    head = load_head(args.model)
    manifest = load_manifest(args.manifest, check_files=False)
    indexes = load_indexes(args.features)

    if head.hierarchy is not None:
        if manifest.hierarchy is None or manifest.hierarchy != head.hierarchy:
            raise ConfigError("The model's hierarchy does not match the manifest's hierarchy")
    elif manifest.num_flat_classes() > head.num_classes:
        raise ConfigError(
            f"Manifest labels reach class {manifest.num_flat_classes() - 1} "
            f"but the model has {head.num_classes} classes"
        )
    feature_dim = sum(i.dim for i in indexes)
    if feature_dim != head.in_dim:
        raise ConfigError(f"Features have dimension {feature_dim}, the model expects {head.in_dim}")

    entries = manifest.split_entries(args.split)
    if not entries:
        raise DataError(f"{args.manifest} has no {args.split}-split videos")
    ks = checked_ks(parse_ks(args.ks), head.num_labels)
    features = load_video_features(indexes, [e.video_id for e in entries])
    predictions = predict_entries(head, entries, features)
    results = evaluate([(p.scores, p.label) for p in predictions], ks)

    print(f"{args.split}: {len(predictions)} videos")
    print(format_table(results))
    if args.out:
        write_predictions(args.out, predictions)
        logger.info(f"Wrote {len(predictions)} predictions to {args.out}")
    if args.metrics_out:
        write_json(args.metrics_out, {
            "split": args.split,
            "count": len(predictions),
            "hit_at": {str(k): v for k, v in results.items()},
        })
    return 0


def configure_split_mean(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--metrics", required=True, nargs="+", help="Metrics JSON files written by eval")
    parser.add_argument("--out", default=None, help="Write the averaged table as JSON")


def read_hit_table(path: str) -> Dict[int, float]:
    payload = read_json(path)
    try:
        return {int(k): float(v) for k, v in payload["hit_at"].items()}
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise DataError(f"{path} is not an eval metrics file: {e}") from e


@registry.register_command("split-mean", "Average Hit@k over several evaluated splits", configure_split_mean)
def cmd_split_mean(args: argparse.Namespace) -> int:
    tables: List[Dict[int, float]] = [read_hit_table(p) for p in args.metrics]
    ks = sorted(tables[0])
    for path, table in zip(args.metrics, tables):
        if sorted(table) != ks:
            raise DataError(f"{path} reports cut-offs {sorted(table)}, expected {ks}")
    means = {k: round(split_mean([t[k] for t in tables]), 2) for k in ks}

    print(f"mean over {len(tables)} splits")
    print(format_table(means))
    if args.out:
        write_json(args.out, {"splits": list(args.metrics), "hit_at": {str(k): v for k, v in means.items()}})
    return 0
