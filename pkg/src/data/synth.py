"""
Seeded synthetic datasets.

- Covariance classes: every class has the same frame mean; class k adds
  variance a^2 along a unit vector u_k whose support (channels 2k, 2k+1)
  is disjoint from every other class. Temporal averages cannot separate
  such classes; second-order pooling can.
- Hierarchical classes: a parent fixes a coarse mean direction, each child
  adds a smaller offset, so siblings are closer than non-siblings.
- Second modality: a per-class prototype plus noise scaled by 1/snr.

All draws come from SplitMix64 streams (Gaussians by Box-Muller), so a
spec and seed always produce bit-identical data.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from src.core.errors import DataError, SpecError
from src.core.rng import SplitMix64
from src.core.tensor import FeatureSequence
from src.eval.fusion import ModalityVector
from src.models.hierarchy import Hierarchy

logger = logging.getLogger(__name__)

Label = Union[int, Tuple[int, int]]
Dataset = List[Tuple[FeatureSequence, Label]]


class SynthSpec(BaseModel):
    """Parameters of the covariance-class generator."""

    num_classes: int = Field(4, gt=0)
    videos_per_class: int = Field(200, gt=0)
    t: int = Field(20, gt=0, description="Frames per video")
    c: int = Field(32, gt=0, description="Channels per descriptor")
    seed: int = Field(0, ge=0, lt=2**64)
    covariance_strength: float = Field(1.5, ge=0.0, description="a in x = mu + z + a*g*u_k")
    mean_offset: float = Field(0.0, description="Every channel of the shared mean mu")
    height: int = Field(1, gt=0)
    width: int = Field(1, gt=0)


def _check_covariance_spec(spec: SynthSpec) -> None:
    if spec.c < 4:
        raise SpecError(f"The covariance generator needs c >= 4, got {spec.c}")
    if 2 * spec.num_classes > spec.c:
        raise SpecError(
            f"{spec.num_classes} classes need {2 * spec.num_classes} channels for disjoint supports, "
            f"only {spec.c} available"
        )


def class_direction(k: int, c: int) -> np.ndarray:
    """u_k: unit vector on channels 2k and 2k+1."""
    u = np.zeros(c)
    u[2 * k] = u[2 * k + 1] = 1.0 / math.sqrt(2.0)
    return u


def gen_covariance_classes(spec: SynthSpec) -> Dataset:
    """
    Videos whose classes differ only in channel covariance.

    Each descriptor is x = mu + z + a * g * u_k with z ~ N(0, I) and
    g ~ N(0, 1) drawn per descriptor. Videos are generated class by class;
    for each video the stream yields all z values, then all g values.
    Sequences are (T, C) when height = width = 1, else (T, H, W, C).
    """
    _check_covariance_spec(spec)
    stream = SplitMix64(spec.seed)
    mu = np.full(spec.c, float(spec.mean_offset))
    spatial = spec.height > 1 or spec.width > 1
    n_desc = spec.t * spec.height * spec.width

    dataset: Dataset = []
    for k in range(spec.num_classes):
        u = class_direction(k, spec.c)
        for _ in range(spec.videos_per_class):
            z = stream.gaussian(n_desc * spec.c).reshape(n_desc, spec.c)
            g = stream.gaussian(n_desc)
            frames = mu + z + spec.covariance_strength * g[:, np.newaxis] * u
            if spatial:
                frames = frames.reshape(spec.t, spec.height, spec.width, spec.c)
            dataset.append((FeatureSequence.from_array(frames), k))
    logger.info(
        f"Generated {len(dataset)} covariance-class videos "
        f"({spec.num_classes} classes, t={spec.t}, c={spec.c}, a={spec.covariance_strength})"
    )
    return dataset


def _unit_rows(values: np.ndarray) -> np.ndarray:
    return values / np.linalg.norm(values, axis=1, keepdims=True)


def hier_means(parents: int, children_per_parent: int, c: int, seed: int,
               parent_scale: float = 2.0, child_scale: float = 1.0) -> np.ndarray:
    """
    Class means of the hierarchical generator, one row per child.

    Parent directions are drawn first, then child offsets, both as unit
    Gaussian directions.
    """
    stream = SplitMix64(seed)
    parent_dirs = _unit_rows(stream.gaussian(parents * c).reshape(parents, c))
    child_dirs = _unit_rows(
        stream.gaussian(parents * children_per_parent * c).reshape(parents * children_per_parent, c)
    )
    owners = np.repeat(np.arange(parents), children_per_parent)
    return parent_scale * parent_dirs[owners] + child_scale * child_dirs


def gen_hier_dataset(
    parents: int,
    children_per_parent: int,
    videos_per_child: int,
    t: int,
    c: int,
    seed: int,
    parent_scale: float = 2.0,
    child_scale: float = 1.0,
    noise: float = 1.0,
) -> Tuple[List[Tuple[FeatureSequence, Tuple[int, int]]], Hierarchy]:
    """
    Videos labeled (parent, child) around hierarchical class means.

    Child j of parent p has id p * children_per_parent + j. Frames are the
    child mean plus N(0, noise^2) noise. The means consume the stream of
    ``seed``; frame noise uses a second stream seeded with seed + 1.
    """
    for name, value in (("parents", parents), ("children_per_parent", children_per_parent),
                        ("videos_per_child", videos_per_child), ("t", t), ("c", c)):
        if value < 1:
            raise SpecError(f"{name} must be positive, got {value}")
    if not 0 < child_scale < parent_scale:
        raise SpecError(f"child_scale must be in (0, parent_scale), got {child_scale} vs {parent_scale}")
    if noise < 0:
        raise SpecError(f"noise must be non-negative, got {noise}")

    hierarchy = Hierarchy.uniform(parents, children_per_parent)
    means = hier_means(parents, children_per_parent, c, seed, parent_scale, child_scale)
    stream = SplitMix64((seed + 1) & ((1 << 64) - 1))

    dataset = []
    for child, mean in enumerate(means):
        parent = hierarchy.parent_of[child]
        for _ in range(videos_per_child):
            frames = mean + noise * stream.gaussian(t * c).reshape(t, c)
            dataset.append((FeatureSequence.from_array(frames), (parent, child)))
    logger.info(
        f"Generated {len(dataset)} hierarchical videos ({parents} parents x {children_per_parent} children)"
    )
    return dataset, hierarchy


def _class_of(label: Label) -> int:
    return label[1] if isinstance(label, tuple) else int(label)


def gen_second_modality(
    dataset: Sequence[Tuple[object, Label]],
    snr: float,
    dim: int,
    seed: int,
    modality: str = "audio",
    num_classes: Optional[int] = None,
) -> List[ModalityVector]:
    """
    A second per-video modality aligned with ``dataset``.

    Class prototypes have N(0, 1) entries; each video adds N(0, 1/snr^2)
    noise per entry. snr may be infinite (noise-free prototypes).
    Hierarchical labels use the child id as the class.
    """
    if not dataset:
        raise DataError("gen_second_modality needs a non-empty dataset")
    if not snr > 0:
        raise SpecError(f"snr must be positive, got {snr}")
    if dim < 1:
        raise SpecError(f"dim must be positive, got {dim}")

    classes = [_class_of(label) for _, label in dataset]
    count = num_classes if num_classes is not None else max(classes) + 1
    stream = SplitMix64(seed)
    prototypes = stream.gaussian(count * dim).reshape(count, dim)
    noise_scale = 0.0 if math.isinf(snr) else 1.0 / snr

    vectors = []
    for k in classes:
        noise = stream.gaussian(dim)
        vectors.append(ModalityVector(modality, prototypes[k] + noise_scale * noise))
    return vectors
