"""
Model files.

A trained head is stored as a JSON header plus one TBNF tensor per
parameter, side by side in a directory:

    model.json            header (see below)
    weights.tbnf          (out, in) weight matrix, axes (T, C) = (row, column)
    bias.tbnf             (out,) bias vector, axis C

Header fields:

    format        "tben-linear-head"
    version       1
    mode          "flat" | "hier"
    in_dim        input length
    out_dim       number of outputs
    num_classes   flat heads only
    hierarchy     hierarchical heads only: {"num_parents", "parent_of"}
    weights, bias parameter file names relative to the header
    train_config  echo of the TrainConfig used
    features      echo of the feature indexes the head was trained on

Parameters are stored at float32 precision.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from src.core.errors import ConfigError
from src.core.tbnf import read_tensor, write_tensor
from src.core.tensor import Tensor
from src.models.heads import LinearHead
from src.models.hierarchy import Hierarchy
from src.utils.file_utils import ensure_directory_exists, read_json, resolve_relative, write_json

logger = logging.getLogger(__name__)

MODEL_FORMAT = "tben-linear-head"
MODEL_VERSION = 1
HEADER_NAME = "model.json"


def save_head(
    head: LinearHead,
    directory: Union[str, Path],
    train_config: Optional[Dict[str, Any]] = None,
    features: Optional[Any] = None,
) -> Path:
    """
    Write a head to ``directory``.

    Returns:
        Path of the JSON header
    """
    out_dir = ensure_directory_exists(directory)
    write_tensor(Tensor(head.weights, ("T", "C")), out_dir / "weights.tbnf")
    write_tensor(Tensor(head.bias, ("C",)), out_dir / "bias.tbnf")
    header: Dict[str, Any] = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "mode": head.mode,
        "in_dim": head.in_dim,
        "out_dim": head.num_outputs,
        "weights": "weights.tbnf",
        "bias": "bias.tbnf",
        "train_config": train_config or {},
        "features": features or [],
    }
    if head.hierarchy is not None:
        header["hierarchy"] = head.hierarchy.to_dict()
    else:
        header["num_classes"] = head.num_classes
    header_path = out_dir / HEADER_NAME
    write_json(header_path, header)
    logger.info(f"Saved {head.mode} head ({head.num_outputs}x{head.in_dim}) to {out_dir}")
    return header_path


def load_head(path: Union[str, Path]) -> LinearHead:
    """Load a head from its directory or its JSON header."""
    header_path = Path(path)
    if header_path.is_dir():
        header_path = header_path / HEADER_NAME
    header = load_header(header_path)

    weights = read_tensor(resolve_relative(header_path, header["weights"])).data
    bias = read_tensor(resolve_relative(header_path, header["bias"])).data
    if weights.shape != (header["out_dim"], header["in_dim"]) or bias.shape != (header["out_dim"],):
        raise ConfigError(f"{header_path}: parameter files do not match the header dimensions")

    if header["mode"] == "hier":
        return LinearHead(weights, bias, hierarchy=Hierarchy.from_dict(header["hierarchy"]))
    return LinearHead(weights, bias, num_classes=int(header["num_classes"]))


def load_header(header_path: Union[str, Path]) -> Dict[str, Any]:
    """Read and validate a model header."""
    header = read_json(header_path)
    if header.get("format") != MODEL_FORMAT or header.get("version") != MODEL_VERSION:
        raise ConfigError(f"{header_path} is not a version-{MODEL_VERSION} {MODEL_FORMAT} file")
    if header.get("mode") not in ("flat", "hier"):
        raise ConfigError(f"{header_path}: unknown mode {header.get('mode')!r}")
    return header
