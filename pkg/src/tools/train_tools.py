"""
train: fit a flat or hierarchical linear head on encoded features.
"""
import argparse
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config.settings import get_settings, parse_int_list
from src.core.errors import ConfigError, DataError, LabelError
from src.core.registry import registry
from src.data.manifest import FeatureIndex, ManifestEntry, load_feature_index, load_manifest, load_video_features
from src.eval.metrics import evaluate, format_table, usable_ks
from src.eval.predictions import entry_label, predict_entries
from src.models.heads import LinearHead
from src.models.model_io import save_head
from src.models.trainer import TrainConfig, train
from src.utils.file_utils import ensure_directory_exists, write_jsonl

logger = logging.getLogger(__name__)


def parse_ks(value: Optional[str]) -> List[int]:
    """Hit@k cut-offs from a flag value, or the configured defaults."""
    if value is None:
        return list(get_settings().default_ks)
    try:
        ks = list(parse_int_list(value))
    except ValueError:
        raise ConfigError(f"Invalid --ks {value!r}; expected comma-separated integers") from None
    if not ks or any(k < 1 for k in ks):
        raise ConfigError(f"--ks must list positive integers, got {value!r}")
    return ks


def checked_ks(ks: Sequence[int], num_labels: int) -> List[int]:
    """Drop cut-offs above the label count, warning about each."""
    kept = usable_ks(ks, num_labels)
    dropped = [k for k in ks if k not in kept]
    if dropped:
        logger.warning(f"Ignoring Hit@k cut-offs {dropped}: only {num_labels} labels")
    if not kept:
        raise ConfigError(f"No usable Hit@k cut-off among {list(ks)} for {num_labels} labels")
    return kept


def load_indexes(paths: Sequence[str]) -> List[FeatureIndex]:
    indexes = [load_feature_index(p) for p in paths]
    modalities = [i.modality for i in indexes]
    if len(set(modalities)) != len(modalities):
        logger.warning(f"Feature indexes repeat a modality: {modalities}")
    return indexes


def stack_samples(entries: Sequence[ManifestEntry], features: Dict[str, np.ndarray],
                  hierarchical: bool) -> Tuple[np.ndarray, np.ndarray]:
    """One training sample per feature row; windowed videos contribute every window."""
    rows, labels = [], []
    for entry in entries:
        block = features[entry.video_id]
        label = entry_label(entry, hierarchical)
        rows.append(block)
        labels.extend([label] * block.shape[0])
    return np.concatenate(rows, axis=0), np.asarray(labels, dtype=np.int64)


def configure_train(parser: argparse.ArgumentParser) -> None:
    defaults = TrainConfig()
    parser.add_argument("--manifest", required=True, help="Dataset manifest.json")
    parser.add_argument("--features", required=True, nargs="+",
                        help="Feature index files or directories; several are concatenated per video")
    parser.add_argument("--out", required=True, help="Model output directory")
    parser.add_argument("--mode", choices=("flat", "hier"), default="flat")
    parser.add_argument("--epochs", type=int, default=defaults.epochs)
    parser.add_argument("--lr", type=float, default=defaults.learning_rate)
    parser.add_argument("--momentum", type=float, default=defaults.momentum)
    parser.add_argument("--batch-size", type=int, default=defaults.batch_size)
    parser.add_argument("--init-scale", type=float, default=defaults.weight_init_scale)
    parser.add_argument("--seed", type=int, default=defaults.seed)
    parser.add_argument("--ks", default=None, help="Validation Hit@k cut-offs, e.g. 1,5")


@registry.register_command("train", "Train a linear head on encoded features", configure_train)
def cmd_train(args: argparse.Namespace) -> int:
    cfg = TrainConfig(
        learning_rate=args.lr,
        momentum=args.momentum,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        weight_init_scale=args.init_scale,
    )
    ks = parse_ks(args.ks)
    manifest = load_manifest(args.manifest, check_files=False)
    hierarchical = args.mode == "hier"
    if hierarchical and manifest.hierarchy is None:
        raise ConfigError(f"Hierarchical training needs a hierarchy_path in {args.manifest}")

    indexes = load_indexes(args.features)
    train_entries = manifest.split_entries("train")
    if not train_entries:
        raise DataError(f"{args.manifest} has no train-split videos")
    features = load_video_features(indexes, [e.video_id for e in train_entries])
    x, y = stack_samples(train_entries, features, hierarchical)

    num_classes = None
    if not hierarchical:
        num_classes = manifest.num_flat_classes()
        if num_classes == 0:
            raise LabelError(f"{args.manifest} has no flat labels")

    val_entries = manifest.split_entries("val")
    val_features = _try_load(indexes, val_entries)
    num_labels = manifest.hierarchy.num_children if hierarchical else num_classes
    val_ks = checked_ks(ks, num_labels) if val_features is not None else []
    log_records = []

    def on_epoch(epoch: int, loss: float, head: LinearHead) -> None:
        record = {"epoch": epoch, "loss": loss}
        if val_features is not None:
            predictions = predict_entries(head, val_entries, val_features)
            results = evaluate([(p.scores, p.label) for p in predictions], val_ks)
            record["val"] = {f"hit@{k}": v for k, v in results.items()}
            logger.info(f"epoch {epoch}: val " + ", ".join(f"Hit@{k}={v:.2f}" for k, v in results.items()))
        log_records.append(record)

    logger.info(f"Training {args.mode} head on {x.shape[0]} samples of dimension {x.shape[1]}")
    head = train(x, y, cfg, num_classes=num_classes,
                 hierarchy=manifest.hierarchy if hierarchical else None, on_epoch=on_epoch)

    out_dir = ensure_directory_exists(args.out)
    save_head(head, out_dir, train_config=cfg.model_dump(), features=[i.describe() for i in indexes])
    write_jsonl(Path(out_dir) / "train_log.jsonl", log_records)

    final = log_records[-1]
    print(f"Trained {args.mode} head ({head.num_outputs} outputs, in_dim {head.in_dim}) -> {out_dir}")
    print(f"  final train loss: {final['loss']:.6f}")
    if "val" in final:
        print(format_table({int(k.split("@")[1]): v for k, v in final["val"].items()}))
    return 0


def _try_load(indexes: Sequence[FeatureIndex], entries: Sequence[ManifestEntry]) -> Optional[Dict[str, np.ndarray]]:
    """Validation features, or None when there is no complete validation set."""
    if not entries:
        logger.warning("No val-split videos; skipping per-epoch validation")
        return None
    try:
        return load_video_features(indexes, [e.video_id for e in entries])
    except DataError as e:
        logger.warning(f"Skipping per-epoch validation: {e}")
        return None
