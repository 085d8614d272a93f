"""
Two-level label hierarchy: every child class belongs to exactly one parent.
"""
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from src.core.errors import ConfigError, LabelError
from src.utils.file_utils import read_json, write_json


class Hierarchy:
    """
    Parent/child label structure.

    Args:
        num_parents: Number of parent (coarse) classes P
        parent_of: parent_of[child] for every child id in [0, num_children)
    """

    def __init__(self, num_parents: int, parent_of: Sequence[int]):
        if num_parents < 1:
            raise ConfigError(f"A hierarchy needs at least one parent, got {num_parents}")
        if len(parent_of) < 1:
            raise ConfigError("A hierarchy needs at least one child")
        parents = tuple(int(p) for p in parent_of)
        bad = [c for c, p in enumerate(parents) if not 0 <= p < num_parents]
        if bad:
            raise ConfigError(f"Children {bad} point at parents outside [0, {num_parents})")

        groups: List[List[int]] = [[] for _ in range(num_parents)]
        for child, parent in enumerate(parents):
            groups[parent].append(child)
        empty = [p for p, g in enumerate(groups) if not g]
        if empty:
            raise ConfigError(f"Parents {empty} have no children")

        self.num_parents = int(num_parents)
        self.parent_of: Tuple[int, ...] = parents
        self.children_of: Tuple[Tuple[int, ...], ...] = tuple(tuple(g) for g in groups)
        self._parent_index = np.asarray(parents, dtype=np.int64)

    @property
    def num_children(self) -> int:
        return len(self.parent_of)

    @property
    def num_outputs(self) -> int:
        """Width of a hierarchical head: P parent plus C child activations."""
        return self.num_parents + self.num_children

    @property
    def parent_index(self) -> np.ndarray:
        """parent_of as an int array."""
        return self._parent_index

    def check_label(self, parent: int, child: int) -> None:
        """Raise LabelError unless (parent, child) is a valid pair."""
        if not 0 <= child < self.num_children:
            raise LabelError(f"Child label {child} outside [0, {self.num_children})")
        if not 0 <= parent < self.num_parents:
            raise LabelError(f"Parent label {parent} outside [0, {self.num_parents})")
        if self.parent_of[child] != parent:
            raise LabelError(f"Child {child} belongs to parent {self.parent_of[child]}, not {parent}")

    @classmethod
    def uniform(cls, num_parents: int, children_per_parent: int) -> "Hierarchy":
        """Hierarchy where parent p owns children p*k .. p*k + k - 1."""
        return cls(num_parents, [c // children_per_parent for c in range(num_parents * children_per_parent)])

    def to_dict(self) -> Dict[str, Any]:
        return {"num_parents": self.num_parents, "parent_of": list(self.parent_of)}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "Hierarchy":
        try:
            return cls(int(payload["num_parents"]), list(payload["parent_of"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed hierarchy: {e}") from e

    def save(self, path: Union[str, Path]) -> None:
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Hierarchy":
        return cls.from_dict(read_json(path))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hierarchy):
            return NotImplemented
        return self.num_parents == other.num_parents and self.parent_of == other.parent_of

    def __repr__(self) -> str:
        return f"Hierarchy(parents={self.num_parents}, children={self.num_children})"
