import numpy as np
import pytest

from src.core.errors import AxisError, ConfigError, DimensionError
from src.core.tensor import FeatureSequence
from src.encoding.pooling import (
    PipelineVariant,
    PoolingPipeline,
    PostNorm,
    build_pipeline,
    run_pipeline,
    sap,
    scbp,
    stcbp,
    tap,
    tcbp,
)
from src.encoding.projection import Normalization, new_projector

from tests.conftest import make_projector

ALL_VARIANTS = [v.value for v in PipelineVariant]


def _relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.linalg.norm(b), 1e-300)
    return float(np.linalg.norm(a - b) / scale)


class TestStages:
    def test_tap(self):
        seq = FeatureSequence.from_array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(tap(seq), [2.0, 3.0])

    def test_sap(self):
        seq = FeatureSequence.from_array(np.array([1.0, 2.0, 3.0, 6.0]).reshape(1, 2, 2, 1))
        np.testing.assert_allclose(sap(seq).data, [[3.0]])

    def test_scbp_sums_each_frame(self):
        p = make_projector([[1, -1]], [[1, 1]])
        seq = FeatureSequence.from_array(np.array([[[[1.0, 2.0], [2.0, 1.0]]]]))
        out = scbp(seq, p)
        assert out.tensor.dims == (1, 1)
        np.testing.assert_allclose(out.data, [[0.0]])

    def test_scbp_frames_stay_separate(self, rng):
        p = new_projector(2, 3, 12, chunk_rows=5)
        data = rng.normal(size=(4, 2, 3, 3))
        out = scbp(FeatureSequence.from_array(data), p)
        for t in range(4):
            expected = p.project_rows(data[t].reshape(-1, 3)).sum(axis=0)
            np.testing.assert_allclose(out.data[t], expected, rtol=1e-10)

    def test_tcbp_hand_case(self):
        p = make_projector([[1, -1]], [[1, 1]])
        seq = FeatureSequence.from_array([[1.0, 2.0], [3.0, 0.0]])
        # (1-2)(1+2) + (3-0)(3+0)
        np.testing.assert_allclose(tcbp(seq, p), [6.0])

    def test_stcbp_of_identical_descriptors(self, rng):
        p = new_projector(5, 4, 16)
        x = rng.normal(size=4)
        seq = FeatureSequence.from_array(np.tile(x, (2, 1, 2, 1)).reshape(2, 1, 2, 4))
        np.testing.assert_allclose(stcbp(seq, p), 4.0 * p.project(x), rtol=1e-12)

    def test_tcbp_is_additive_over_frames(self, rng):
        p = new_projector(1, 5, 20)
        a, b = rng.normal(size=(3, 5)), rng.normal(size=(4, 5))
        joined = tcbp(FeatureSequence.from_array(np.vstack([a, b])), p)
        separate = tcbp(FeatureSequence.from_array(a), p) + tcbp(FeatureSequence.from_array(b), p)
        np.testing.assert_allclose(joined, separate, rtol=1e-10)

    def test_axis_checks(self):
        spatial = FeatureSequence.from_array(np.zeros((2, 2, 2, 3)))
        frames = FeatureSequence.from_array(np.zeros((2, 3)))
        with pytest.raises(AxisError):
            tap(spatial)
        with pytest.raises(AxisError):
            sap(frames)
        with pytest.raises(AxisError):
            stcbp(frames, new_projector(0, 3, 8))

    def test_projector_input_dim_must_match(self):
        frames = FeatureSequence.from_array(np.zeros((2, 3)))
        with pytest.raises(DimensionError):
            tcbp(frames, new_projector(0, 4, 8))


class TestPipelines:
    def test_stap_of_constant_video(self):
        seq = FeatureSequence.from_array(np.full((3, 2, 2, 4), 1.25))
        pp = build_pipeline("stap", 4, 16, 0, Normalization.identity())
        np.testing.assert_allclose(run_pipeline(pp, seq), np.full(4, 1.25))

    def test_stap_equals_global_mean(self, rng):
        data = rng.normal(size=(5, 3, 2, 4))
        pp = build_pipeline("stap", 4, 16, 0, Normalization.identity())
        np.testing.assert_allclose(run_pipeline(pp, FeatureSequence.from_array(data)),
                                   data.reshape(-1, 4).mean(axis=0), rtol=1e-12)

    def test_single_cell_scbp_tcbp_composes_stages(self, rng):
        seq = FeatureSequence.from_array(rng.normal(size=(1, 1, 1, 4)))
        pp = build_pipeline("scbp+tcbp", 4, 16, 3, Normalization.signed_sqrt(), spatial_dim=8)
        expected = tcbp(scbp(seq, pp.spatial_proj), pp.temporal_proj)
        np.testing.assert_allclose(run_pipeline(pp, seq), expected)
        assert pp.temporal_proj.seed == 4
        assert pp.output_dim == 16

    def test_joint_and_factorized_differ(self, rng):
        seq = FeatureSequence.from_array(rng.normal(size=(3, 2, 2, 4)))
        joint = run_pipeline(build_pipeline("stcbp", 4, 16, 0, Normalization.identity()), seq)
        factored = run_pipeline(build_pipeline("scbp+tcbp", 4, 16, 0, Normalization.identity()), seq)
        assert not np.allclose(joint, factored)

    def test_sap_tcbp_accepts_frame_sequences(self, rng):
        data = rng.normal(size=(6, 4))
        pp = build_pipeline("sap+tcbp", 4, 32, 1, Normalization.signed_sqrt())
        out = run_pipeline(pp, FeatureSequence.from_array(data))
        np.testing.assert_allclose(out, tcbp(FeatureSequence.from_array(data), pp.temporal_proj))

    def test_post_norm_l2(self, rng):
        seq = FeatureSequence.from_array(rng.normal(size=(4, 2, 2, 3)))
        pp = build_pipeline("sap+tcbp", 3, 24, 0, Normalization.signed_sqrt(), post_norm="l2")
        assert np.linalg.norm(run_pipeline(pp, seq)) == pytest.approx(1.0)

    @pytest.mark.parametrize("variant", ALL_VARIANTS)
    def test_permutation_invariance(self, variant):
        gen = np.random.default_rng(3)
        data = gen.normal(size=(4, 3, 2, 5))
        pp = build_pipeline(variant, 5, 16, 0, Normalization.signed_sqrt(), spatial_dim=12)
        reference = run_pipeline(pp, FeatureSequence.from_array(data))
        for _ in range(100):
            shuffled = data[gen.permutation(4)]
            cells = shuffled.reshape(4, 6, 5)[:, gen.permutation(6)].reshape(4, 3, 2, 5)
            out = run_pipeline(pp, FeatureSequence.from_array(cells))
            assert _relative_gap(out, reference) <= 1e-10

    @pytest.mark.parametrize("spec", ["tcbp", "sap+tap", ""])
    def test_unknown_pipeline(self, spec):
        with pytest.raises(ConfigError):
            build_pipeline(spec, 4, 16, 0, Normalization.identity())

    def test_unknown_post_norm(self):
        with pytest.raises(ConfigError):
            build_pipeline("stap", 4, 16, 0, Normalization.identity(), post_norm="l1")

    def test_projectors_must_fit_the_variant(self):
        p = new_projector(0, 4, 8)
        with pytest.raises(ConfigError):
            PoolingPipeline(PipelineVariant.SAP_TCBP)
        with pytest.raises(ConfigError):
            PoolingPipeline(PipelineVariant.STAP, temporal_proj=p)
        with pytest.raises(DimensionError):
            PoolingPipeline(PipelineVariant.SCBP_TCBP, spatial_proj=p, temporal_proj=new_projector(1, 4, 8))

    def test_describe(self):
        pp = build_pipeline("scbp+tcbp", 4, 16, 0, Normalization.parse("scale:49"), post_norm="l2")
        info = pp.describe()
        assert info["pipeline"] == "scbp+tcbp"
        assert info["temporal_proj"]["seed"] == 1
        assert info["spatial_proj"]["norm"] == "scale:49"
        assert info["post_norm"] == PostNorm.L2.value
