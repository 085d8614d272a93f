"""
Spatial and temporal pooling pipelines.

Five compositions are supported, spatial stage always first:

    stap       average over T, H and W
    sap+tcbp   spatial average, then temporal compact bilinear pooling
    scbp+tap   spatial compact bilinear pooling, then temporal average
    scbp+tcbp  spatial CBP, then temporal CBP on the per-frame CBP vectors
    stcbp      joint CBP over every (t, h, w) descriptor

Every CBP stage sums projected descriptors, so all pipelines are invariant
to permutations of frames and of spatial positions.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from src.core.errors import AxisError, ConfigError, DimensionError
from src.core.rng import derive_seed
from src.core.tensor import FeatureSequence, Tensor
from src.encoding.projection import Normalization, RMProjector, new_projector

logger = logging.getLogger(__name__)


class PipelineVariant(str, Enum):
    STAP = "stap"
    SAP_TCBP = "sap+tcbp"
    SCBP_TAP = "scbp+tap"
    SCBP_TCBP = "scbp+tcbp"
    STCBP = "stcbp"

    @classmethod
    def parse(cls, spec: str) -> "PipelineVariant":
        try:
            return cls(spec.strip().lower().replace(" ", ""))
        except ValueError:
            choices = ", ".join(v.value for v in cls)
            raise ConfigError(f"Unknown pipeline {spec!r}; expected one of {choices}") from None

    @property
    def uses_spatial_cbp(self) -> bool:
        return self in (PipelineVariant.SCBP_TAP, PipelineVariant.SCBP_TCBP)

    @property
    def uses_temporal_cbp(self) -> bool:
        return self in (PipelineVariant.SAP_TCBP, PipelineVariant.SCBP_TCBP, PipelineVariant.STCBP)


class PostNorm(str, Enum):
    NONE = "none"
    L2 = "l2"


def _require_axes(seq: FeatureSequence, *axes: str) -> None:
    if not seq.tensor.has_axes(*axes):
        got = "".join(a.name for a in seq.tensor.axes)
        raise AxisError(f"Expected a sequence over ({','.join(axes)}), got {got}")


def _require_input_dim(p: RMProjector, c: int, stage: str) -> None:
    if p.input_dim != c:
        raise DimensionError(f"{stage}: projector expects c={p.input_dim}, sequence has c={c}")


def tap(seq: FeatureSequence) -> np.ndarray:
    """Temporal average pooling of a (T, C) sequence."""
    _require_axes(seq, "T", "C")
    return seq.data.mean(axis=0)


def sap(seq: FeatureSequence) -> FeatureSequence:
    """Per-frame spatial average of a (T, H, W, C) sequence."""
    _require_axes(seq, "T", "H", "W", "C")
    return FeatureSequence(Tensor(seq.data.mean(axis=(1, 2)), ("T", "C")), seq.frame_rate)


def scbp(seq: FeatureSequence, p: RMProjector) -> FeatureSequence:
    """Per-frame sum of projected spatial descriptors; output is (T, d)."""
    _require_axes(seq, "T", "H", "W", "C")
    _require_input_dim(p, seq.channels, "scbp")
    t, h, w, c = seq.tensor.dims
    per_frame = np.empty((t, p.output_dim), dtype=np.float64)
    # whole frames per block keep the (rows, d) intermediate bounded
    frames_per_block = max(1, p.chunk_rows // (h * w))
    for start in range(0, t, frames_per_block):
        stop = min(t, start + frames_per_block)
        projected = p.project_rows(seq.data[start:stop].reshape(-1, c))
        per_frame[start:stop] = projected.reshape(stop - start, h * w, p.output_dim).sum(axis=1)
    return FeatureSequence(Tensor(per_frame, ("T", "C")), seq.frame_rate)


def tcbp(seq: FeatureSequence, p: RMProjector) -> np.ndarray:
    """Sum over frames of the projected frame descriptors of a (T, C) sequence."""
    _require_axes(seq, "T", "C")
    _require_input_dim(p, seq.channels, "tcbp")
    return p.project_sum(seq.data)


def stcbp(seq: FeatureSequence, p: RMProjector) -> np.ndarray:
    """One sum of projections over all t*h*w descriptors."""
    _require_axes(seq, "T", "H", "W", "C")
    _require_input_dim(p, seq.channels, "stcbp")
    return p.project_sum(seq.descriptors())


@dataclass(frozen=True)
class PoolingPipeline:
    """
    Declarative description of one pooling composition.

    Args:
        variant: Which composition to run
        spatial_proj: Projector of the SCBP stage (scbp+tap, scbp+tcbp)
        temporal_proj: Projector of the TCBP stage (sap+tcbp, scbp+tcbp) or of stcbp
        post_norm: Optional normalization of the final vector
    """

    variant: PipelineVariant
    spatial_proj: Optional[RMProjector] = None
    temporal_proj: Optional[RMProjector] = None
    post_norm: PostNorm = PostNorm.NONE

    def __post_init__(self):
        v = self.variant
        if v.uses_spatial_cbp and self.spatial_proj is None:
            raise ConfigError(f"Pipeline {v.value} needs a spatial projector")
        if not v.uses_spatial_cbp and self.spatial_proj is not None:
            raise ConfigError(f"Pipeline {v.value} takes no spatial projector")
        if v.uses_temporal_cbp and self.temporal_proj is None:
            raise ConfigError(f"Pipeline {v.value} needs a temporal projector")
        if not v.uses_temporal_cbp and self.temporal_proj is not None:
            raise ConfigError(f"Pipeline {v.value} takes no temporal projector")
        if v is PipelineVariant.SCBP_TCBP and self.temporal_proj.input_dim != self.spatial_proj.output_dim:
            raise DimensionError(
                f"scbp+tcbp: temporal projector input {self.temporal_proj.input_dim} "
                f"!= spatial projector output {self.spatial_proj.output_dim}"
            )

    @property
    def output_dim(self) -> Optional[int]:
        """Length of the encoded vector, or None for stap (equals the channel count)."""
        if self.temporal_proj is not None:
            return self.temporal_proj.output_dim
        if self.spatial_proj is not None:
            return self.spatial_proj.output_dim
        return None

    def describe(self) -> dict:
        return {
            "pipeline": self.variant.value,
            "spatial_proj": self.spatial_proj.describe() if self.spatial_proj else None,
            "temporal_proj": self.temporal_proj.describe() if self.temporal_proj else None,
            "post_norm": self.post_norm.value,
        }


def run_pipeline(pp: PoolingPipeline, seq: FeatureSequence) -> np.ndarray:
    """
    Encode one sequence into a single vector.

    (T, C) input is accepted by stap and sap+tcbp, whose spatial stage is
    then the identity; every other variant needs (T, H, W, C).
    """
    v = pp.variant
    if v is PipelineVariant.STAP:
        if seq.is_spatial:
            out = seq.data.mean(axis=(0, 1, 2))
        else:
            out = tap(seq)
    elif v is PipelineVariant.SAP_TCBP:
        frames = sap(seq) if seq.is_spatial else seq
        out = tcbp(frames, pp.temporal_proj)
    elif v is PipelineVariant.SCBP_TAP:
        out = tap(scbp(seq, pp.spatial_proj))
    elif v is PipelineVariant.SCBP_TCBP:
        out = tcbp(scbp(seq, pp.spatial_proj), pp.temporal_proj)
    else:
        out = stcbp(seq, pp.temporal_proj)

    if pp.post_norm is PostNorm.L2:
        norm = np.linalg.norm(out)
        if norm > 0:
            out = out / norm
    return out


def build_pipeline(
    spec: str,
    channels: int,
    proj_dim: int,
    proj_seed: int,
    norm: Normalization,
    spatial_dim: Optional[int] = None,
    spatial_norm: Optional[Normalization] = None,
    post_norm: str = PostNorm.NONE.value,
    chunk_rows: int = 2048,
) -> PoolingPipeline:
    """
    Build a pipeline from its spec string and projector parameters.

    The first projector (spatial where present, otherwise temporal) uses
    ``proj_seed``; the temporal projector of scbp+tcbp uses proj_seed + 1.

    Args:
        spec: "stap", "sap+tcbp", "scbp+tap", "scbp+tcbp" or "stcbp"
        channels: Descriptor length c of the input sequences
        proj_dim: Output dimension d of the final CBP stage
        proj_seed: Seed of the first projector
        norm: Normalization of the temporal (or joint) projector
        spatial_dim: Output dimension of the SCBP stage (default proj_dim)
        spatial_norm: Normalization of the SCBP stage (default norm)
        post_norm: "none" or "l2"
        chunk_rows: Descriptors projected per matrix product
    """
    variant = PipelineVariant.parse(spec)
    try:
        post = PostNorm(post_norm)
    except ValueError:
        raise ConfigError(f"Unknown post-norm {post_norm!r}; expected none or l2") from None

    spatial = temporal = None
    if variant.uses_spatial_cbp:
        spatial = new_projector(
            proj_seed, channels, spatial_dim or proj_dim, spatial_norm or norm, chunk_rows=chunk_rows
        )
    if variant is PipelineVariant.SCBP_TCBP:
        temporal = new_projector(
            derive_seed(proj_seed, 1), spatial.output_dim, proj_dim, norm, chunk_rows=chunk_rows
        )
    elif variant.uses_temporal_cbp:
        temporal = new_projector(proj_seed, channels, proj_dim, norm, chunk_rows=chunk_rows)

    logger.debug(f"Built pipeline {variant.value} for c={channels}, d={proj_dim}")
    return PoolingPipeline(variant, spatial, temporal, post)
