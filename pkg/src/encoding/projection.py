"""
Random Maclaurin compact bilinear projection.

An RMProjector maps a descriptor x in R^c to sigma((W1 x) * (W2 x)) in R^d,
where W1, W2 are fixed d x c Rademacher matrices drawn from a SplitMix64
stream (W1 first, then W2, each row-major) and sigma is a per-element
normalization. For sigma = identity, (1/d) <f(x), f(y)> is an unbiased
estimate of <x, y>^2, the kernel of the full bilinear (outer product) form.
The 1/d factor is not applied by the projector.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from src.core.errors import ConfigError, DataError, DimensionError
from src.core.rng import SplitMix64

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_ROWS = 2048


class NormKind(str, Enum):
    IDENTITY = "identity"
    SIGNED_SQRT = "ssqrt"
    SIGMOID = "sigmoid"
    SCALE = "scale"


@dataclass(frozen=True)
class Normalization:
    """
    Elementwise normalization applied to every projected descriptor.

    ``Scale(k)`` divides by k; it is how the d*h*w*7 rescaling is expressed.
    """

    kind: NormKind = NormKind.IDENTITY
    factor: float = 1.0

    def __post_init__(self):
        if self.kind is NormKind.SCALE and not (math.isfinite(self.factor) and self.factor > 0):
            raise ConfigError(f"Scale factor must be positive and finite, got {self.factor}")

    @classmethod
    def identity(cls) -> "Normalization":
        return cls(NormKind.IDENTITY)

    @classmethod
    def signed_sqrt(cls) -> "Normalization":
        return cls(NormKind.SIGNED_SQRT)

    @classmethod
    def sigmoid(cls) -> "Normalization":
        return cls(NormKind.SIGMOID)

    @classmethod
    def scale(cls, k: float) -> "Normalization":
        return cls(NormKind.SCALE, float(k))

    @classmethod
    def parse(cls, name: str) -> "Normalization":
        """Parse "identity", "ssqrt", "sigmoid" or "scale:<k>"."""
        text = name.strip().lower()
        if text.startswith("scale:"):
            try:
                return cls.scale(float(text.split(":", 1)[1]))
            except ValueError:
                raise ConfigError(f"Invalid scale factor in {name!r}") from None
        try:
            kind = NormKind(text)
        except ValueError:
            raise ConfigError(
                f"Unknown normalization {name!r}; expected identity, ssqrt, sigmoid or scale:<k>"
            ) from None
        if kind is NormKind.SCALE:
            raise ConfigError("The scale normalization needs a factor, e.g. scale:49")
        return cls(kind)

    @property
    def name(self) -> str:
        if self.kind is NormKind.SCALE:
            return f"scale:{self.factor:g}"
        return self.kind.value

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return apply_normalization(v, self)


def apply_normalization(v: np.ndarray, norm: Normalization) -> np.ndarray:
    """Apply a normalization elementwise; works on arrays of any shape."""
    values = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DataError("Cannot normalize non-finite values")
    if norm.kind is NormKind.IDENTITY:
        return values.copy()
    if norm.kind is NormKind.SIGNED_SQRT:
        return np.sign(values) * np.sqrt(np.abs(values))
    if norm.kind is NormKind.SIGMOID:
        # split by sign so exp never overflows
        out = np.empty_like(values)
        pos = values >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-values[pos]))
        e = np.exp(values[~pos])
        out[~pos] = e / (1.0 + e)
        return out
    return values / norm.factor


@dataclass(frozen=True)
class RMProjector:
    """
    Seeded Random Maclaurin projector R^c -> R^d.

    Use :func:`new_projector` to build one; the sign matrices are a pure
    function of (seed, input_dim, output_dim).
    """

    seed: int
    input_dim: int
    output_dim: int
    norm: Normalization
    w1: np.ndarray = field(repr=False, compare=False)
    w2: np.ndarray = field(repr=False, compare=False)
    chunk_rows: int = field(default=DEFAULT_CHUNK_ROWS, repr=False, compare=False)
    _w1f: np.ndarray = field(init=False, repr=False, compare=False)
    _w2f: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for matrix in (self.w1, self.w2):
            matrix.setflags(write=False)
        # float64 copies transposed for (n, c) @ (c, d) products
        w1f = np.ascontiguousarray(self.w1.T, dtype=np.float64)
        w2f = np.ascontiguousarray(self.w2.T, dtype=np.float64)
        w1f.setflags(write=False)
        w2f.setflags(write=False)
        object.__setattr__(self, "_w1f", w1f)
        object.__setattr__(self, "_w2f", w2f)

    def describe(self) -> dict:
        return {
            "seed": self.seed,
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
            "norm": self.norm.name,
        }

    def project(self, x: np.ndarray) -> np.ndarray:
        """Project one descriptor of length c to a vector of length d."""
        vector = np.asarray(x, dtype=np.float64)
        if vector.ndim != 1 or vector.shape[0] != self.input_dim:
            raise DimensionError(f"Expected a vector of length {self.input_dim}, got shape {vector.shape}")
        return self.project_rows(vector[np.newaxis, :])[0]

    def project_rows(self, rows: np.ndarray) -> np.ndarray:
        """Project every row of an (n, c) array; returns (n, d)."""
        block = self._check_rows(rows)
        out = np.empty((block.shape[0], self.output_dim), dtype=np.float64)
        for start in range(0, block.shape[0], self.chunk_rows):
            stop = min(block.shape[0], start + self.chunk_rows)
            out[start:stop] = self._project_block(block[start:stop])
        return out

    def project_sum(self, rows: np.ndarray) -> np.ndarray:
        """Sum of the projections of every row of an (n, c) array, without materializing (n, d)."""
        block = self._check_rows(rows)
        total = np.zeros(self.output_dim, dtype=np.float64)
        for start in range(0, block.shape[0], self.chunk_rows):
            stop = min(block.shape[0], start + self.chunk_rows)
            total += self._project_block(block[start:stop]).sum(axis=0)
        return total

    def _check_rows(self, rows: np.ndarray) -> np.ndarray:
        block = np.asarray(rows, dtype=np.float64)
        if block.ndim != 2 or block.shape[1] != self.input_dim:
            raise DimensionError(
                f"Projector expects descriptors of length {self.input_dim}, got shape {block.shape}"
            )
        if not np.all(np.isfinite(block)):
            raise DataError("Cannot project non-finite descriptors")
        return block

    def _project_block(self, block: np.ndarray) -> np.ndarray:
        product = (block @ self._w1f) * (block @ self._w2f)
        if self.norm.kind is NormKind.IDENTITY:
            return product
        return apply_normalization(product, self.norm)


def new_projector(
    seed: int,
    c: int,
    d: int,
    norm: Optional[Normalization] = None,
    chunk_rows: int = DEFAULT_CHUNK_ROWS,
) -> RMProjector:
    """
    Build a projector from its seed and dimensions.

    Raises:
        DimensionError: if c or d is not positive
    """
    if c < 1 or d < 1:
        raise DimensionError(f"Projector dimensions must be positive, got c={c}, d={d}")
    if d <= c:
        logger.warning(f"Projector output dim d={d} does not exceed input dim c={c}; proceeding")
    stream = SplitMix64(seed)
    w1 = stream.signs(d * c).reshape(d, c)
    w2 = stream.signs(d * c).reshape(d, c)
    return RMProjector(
        seed=seed,
        input_dim=c,
        output_dim=d,
        norm=norm or Normalization.identity(),
        w1=w1,
        w2=w2,
        chunk_rows=chunk_rows,
    )


def project(p: RMProjector, x: np.ndarray) -> np.ndarray:
    """sigma((W1 x) * (W2 x)) for one descriptor."""
    return p.project(x)


def full_bilinear(vectors: Iterable[np.ndarray], c: Optional[int] = None) -> np.ndarray:
    """
    Exact bilinear pooling: the sum of outer products x x^T.

    The empty set yields the zero matrix; its size comes from ``c``.
    """
    rows = [np.asarray(v, dtype=np.float64) for v in vectors]
    if not rows:
        if c is None:
            raise DimensionError("full_bilinear of an empty set needs the descriptor length c")
        return np.zeros((c, c), dtype=np.float64)
    lengths = {r.shape for r in rows}
    if len(lengths) != 1 or rows[0].ndim != 1:
        raise DimensionError(f"All descriptors must be vectors of one length, got {sorted(lengths)}")
    if c is not None and rows[0].shape[0] != c:
        raise DimensionError(f"Descriptors have length {rows[0].shape[0]}, expected {c}")
    block = np.stack(rows)
    return block.T @ block
