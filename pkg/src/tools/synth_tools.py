"""
gen-synth: write a seeded synthetic dataset as TBNF tensors plus a manifest.
"""
import argparse
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from src.config.settings import get_settings
from src.core.errors import ConfigError
from src.core.registry import registry
from src.core.tbnf import write_tensor
from src.core.tensor import Tensor
from src.data.manifest import EntryLabels, Manifest, ManifestEntry, save_manifest
from src.data.synth import SynthSpec, gen_covariance_classes, gen_hier_dataset, gen_second_modality
from src.utils.file_utils import ensure_directory_exists

logger = logging.getLogger(__name__)

PRIMARY_MODALITY = "visual"


def split_counts(n: int, ratios: Sequence[float]) -> Tuple[int, int, int]:
    """Train/val/test sizes of a class with n videos; test takes the remainder."""
    n_train = int(round(n * ratios[0]))
    n_val = min(n - n_train, int(round(n * ratios[1])))
    return n_train, n_val, n - n_train - n_val


def assign_splits(class_ids: Sequence[int], ratios: Sequence[float]) -> List[str]:
    """
    Split label per video.

    Videos of each class are split in generation order: the first share goes
    to train, the next to val, the rest to test.
    """
    totals: Dict[int, int] = {}
    for k in class_ids:
        totals[k] = totals.get(k, 0) + 1
    seen: Dict[int, int] = {}
    splits = []
    for k in class_ids:
        position = seen.get(k, 0)
        seen[k] = position + 1
        n_train, n_val, _ = split_counts(totals[k], ratios)
        if position < n_train:
            splits.append("train")
        elif position < n_train + n_val:
            splits.append("val")
        else:
            splits.append("test")
    return splits


def _parse_ratios(value: Optional[str]) -> Tuple[float, float, float]:
    if value is None:
        return get_settings().split_ratios
    try:
        parts = tuple(float(p) for p in value.split(","))
    except ValueError:
        raise ConfigError(f"Invalid split ratios {value!r}") from None
    if len(parts) != 3 or any(p < 0 for p in parts) or abs(sum(parts) - 1.0) > 1e-9:
        raise ConfigError(f"Split ratios must be three non-negative numbers summing to 1, got {value!r}")
    return parts


def configure_gen_synth(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument("--kind", choices=("covariance", "hier"), default="covariance",
                        help="Covariance-separable classes or hierarchical classes")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--classes", type=int, default=4, help="Number of classes (covariance)")
    parser.add_argument("--videos-per-class", type=int, default=200)
    parser.add_argument("--frames", type=int, default=20, help="Frames per video (t)")
    parser.add_argument("--channels", type=int, default=32, help="Channels per descriptor (c)")
    parser.add_argument("--strength", type=float, default=1.5, help="Covariance strength a")
    parser.add_argument("--mean-offset", type=float, default=0.0)
    parser.add_argument("--height", type=int, default=1)
    parser.add_argument("--width", type=int, default=1)
    parser.add_argument("--parents", type=int, default=8, help="Parent classes (hier)")
    parser.add_argument("--children-per-parent", type=int, default=4, help="Children per parent (hier)")
    parser.add_argument("--parent-scale", type=float, default=2.0)
    parser.add_argument("--child-scale", type=float, default=1.0)
    parser.add_argument("--noise", type=float, default=1.0)
    parser.add_argument("--second-modality-snr", type=float, default=None,
                        help="Also write a second modality with this signal-to-noise ratio")
    parser.add_argument("--second-modality-dim", type=int, default=8)
    parser.add_argument("--second-modality-tag", default="audio")
    parser.add_argument("--second-modality-seed", type=int, default=None,
                        help="Seed of the second modality (default: --seed + 1)")
    parser.add_argument("--split-ratios", default=None, help="train,val,test ratios (default from settings)")


@registry.register_command("gen-synth", "Generate a seeded synthetic dataset", configure_gen_synth)
def cmd_gen_synth(args: argparse.Namespace) -> int:
    """Write tensors, the optional hierarchy and manifest.json under --out."""
    ratios = _parse_ratios(args.split_ratios)
    out_dir = ensure_directory_exists(args.out)

    hierarchy = None
    if args.kind == "covariance":
        spec = SynthSpec(
            num_classes=args.classes,
            videos_per_class=args.videos_per_class,
            t=args.frames,
            c=args.channels,
            seed=args.seed,
            covariance_strength=args.strength,
            mean_offset=args.mean_offset,
            height=args.height,
            width=args.width,
        )
        dataset = gen_covariance_classes(spec)
    else:
        dataset, hierarchy = gen_hier_dataset(
            args.parents, args.children_per_parent, args.videos_per_class, args.frames, args.channels,
            args.seed, parent_scale=args.parent_scale, child_scale=args.child_scale, noise=args.noise,
        )

    second = None
    if args.second_modality_snr is not None:
        seed = args.second_modality_seed if args.second_modality_seed is not None else args.seed + 1
        second = gen_second_modality(dataset, args.second_modality_snr, args.second_modality_dim, seed,
                                     modality=args.second_modality_tag)

    class_ids = [label[1] if isinstance(label, tuple) else label for _, label in dataset]
    splits = assign_splits(class_ids, ratios)

    ensure_directory_exists(out_dir / "videos")
    if second is not None:
        ensure_directory_exists(out_dir / args.second_modality_tag)

    entries = []
    for i, (seq, label) in enumerate(dataset):
        video_id = f"v{i:05d}"
        modalities = {PRIMARY_MODALITY: f"videos/{video_id}.tbnf"}
        write_tensor(seq.tensor, out_dir / modalities[PRIMARY_MODALITY])
        if second is not None:
            rel = f"{args.second_modality_tag}/{video_id}.tbnf"
            # One pseudo-frame so the vector is a valid (T, C) sequence.
            write_tensor(Tensor(second[i].values[None, :], ("T", "C")), out_dir / rel)
            modalities[args.second_modality_tag] = rel
        if isinstance(label, tuple):
            labels = EntryLabels(flat=label[1], parent=label[0], child=label[1])
        else:
            labels = EntryLabels(flat=label)
        entries.append(ManifestEntry(video_id=video_id, split=splits[i], labels=labels, modalities=modalities))

    hierarchy_path = None
    if hierarchy is not None:
        hierarchy_path = "hierarchy.json"
        hierarchy.save(out_dir / hierarchy_path)

    manifest_path = Path(out_dir) / "manifest.json"
    save_manifest(Manifest(hierarchy_path=hierarchy_path, entries=entries), manifest_path)

    counts = {s: splits.count(s) for s in ("train", "val", "test")}
    print(f"Wrote {len(entries)} videos ({len(set(class_ids))} classes) to {out_dir}")
    print(f"  splits: train={counts['train']} val={counts['val']} test={counts['test']}")
    print(f"  modalities: {', '.join(sorted(entries[0].modalities))}")
    print(f"  manifest: {manifest_path}")
    return 0
