"""
File utility functions for tben.
"""
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Union

from src.core.errors import DataError, TensorIOError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def ensure_directory_exists(directory: PathLike) -> Path:
    """
    Ensure a directory exists, creating it if necessary.

    Args:
        directory: Path to the directory

    Returns:
        The directory as a Path

    Raises:
        TensorIOError: if the directory cannot be created
    """
    directory_path = Path(directory)
    try:
        directory_path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise TensorIOError(f"Cannot create directory {directory_path}: {e}") from e
    return directory_path


def atomic_write_bytes(file_path: PathLike, payload: bytes) -> None:
    """
    Write bytes to a file so that readers never observe a partial file.

    The payload goes to a temporary file in the destination directory which
    is then renamed over the target.
    """
    path = Path(file_path)
    ensure_directory_exists(path.parent)
    try:
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(payload)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
    except OSError as e:
        raise TensorIOError(f"Cannot write {path}: {e}") from e


def write_json(file_path: PathLike, payload: Any) -> None:
    """Write a JSON document with sorted keys and a trailing newline."""
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    atomic_write_bytes(file_path, text.encode("utf-8"))


def read_json(file_path: PathLike) -> Any:
    """Read a JSON document, converting failures into toolkit errors."""
    path = Path(file_path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise DataError(f"File not found: {path}") from e
    except json.JSONDecodeError as e:
        raise DataError(f"Invalid JSON in {path}: {e}") from e
    except OSError as e:
        raise TensorIOError(f"Cannot read {path}: {e}") from e


def write_jsonl(file_path: PathLike, records: Iterable[Dict[str, Any]]) -> int:
    """
    Write one compact JSON object per line.

    Returns:
        Number of records written
    """
    lines = [json.dumps(record, sort_keys=True) for record in records]
    atomic_write_bytes(file_path, ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8"))
    return len(lines)


def iter_jsonl(file_path: PathLike) -> Iterator[Dict[str, Any]]:
    """Yield the objects of a JSON-lines file, skipping blank lines."""
    path = Path(file_path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as e:
                    raise DataError(f"Invalid JSON on line {line_no} of {path}: {e}") from e
    except FileNotFoundError as e:
        raise DataError(f"File not found: {path}") from e


def read_jsonl(file_path: PathLike) -> List[Dict[str, Any]]:
    """Read a whole JSON-lines file."""
    return list(iter_jsonl(file_path))


def resolve_relative(base_file: PathLike, target: PathLike) -> Path:
    """Resolve a path stored inside a file relative to that file's directory."""
    target_path = Path(target)
    if target_path.is_absolute():
        return target_path
    return Path(base_file).resolve().parent / target_path
