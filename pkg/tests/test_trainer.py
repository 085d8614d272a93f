import numpy as np
import pytest
from pydantic import ValidationError

from src.core.errors import DataError, LabelError
from src.models.heads import forward_flat, forward_hier
from src.models.hierarchy import Hierarchy
from src.models.trainer import TrainConfig, sgd_momentum_step, train


def _two_blobs(n_per_class: int = 20, seed: int = 0):
    gen = np.random.default_rng(seed)
    a = gen.normal(loc=-2.0, scale=0.5, size=(n_per_class, 2))
    b = gen.normal(loc=2.0, scale=0.5, size=(n_per_class, 2))
    return np.vstack([a, b]), np.array([0] * n_per_class + [1] * n_per_class)


class TestSgdMomentumStep:
    def test_plain_step(self):
        cfg = TrainConfig(learning_rate=0.01, momentum=0.0)
        params, _ = sgd_momentum_step({"w": np.array([1.0])}, {"w": np.zeros(1)}, {"w": np.array([1.0])}, cfg)
        np.testing.assert_allclose(params["w"], [0.99])

    def test_zero_gradient_keeps_parameters(self):
        cfg = TrainConfig(learning_rate=0.5, momentum=0.9)
        params, velocity = sgd_momentum_step({"w": np.array([3.0])}, {"w": np.zeros(1)}, {"w": np.zeros(1)}, cfg)
        np.testing.assert_array_equal(params["w"], [3.0])
        np.testing.assert_array_equal(velocity["w"], [0.0])

    def test_momentum_accumulates(self):
        cfg = TrainConfig(learning_rate=0.01, momentum=0.9)
        params, velocity = {"w": np.array([0.0])}, {"w": np.zeros(1)}
        grads = {"w": np.array([1.0])}
        params, velocity = sgd_momentum_step(params, velocity, grads, cfg)
        params, velocity = sgd_momentum_step(params, velocity, grads, cfg)
        np.testing.assert_allclose(velocity["w"], [1.9])
        np.testing.assert_allclose(params["w"], [-0.029])

    def test_inputs_are_not_modified(self):
        cfg = TrainConfig()
        params = {"w": np.array([1.0, 2.0])}
        sgd_momentum_step(params, {"w": np.zeros(2)}, {"w": np.ones(2)}, cfg)
        np.testing.assert_array_equal(params["w"], [1.0, 2.0])


class TestTrainConfig:
    @pytest.mark.parametrize("field,value", [
        ("epochs", 0), ("batch_size", 0), ("momentum", 1.0), ("learning_rate", -0.1), ("seed", -1),
    ])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(ValidationError):
            TrainConfig(**{field: value})


class TestTrain:
    def test_separable_blobs_are_learned(self):
        x, y = _two_blobs()
        head = train(x, y, TrainConfig(learning_rate=0.1, epochs=50, batch_size=8))
        predicted = forward_flat(head, x).argmax(axis=1)
        np.testing.assert_array_equal(predicted, y)

    def test_zero_learning_rate_keeps_zero_init(self):
        x, y = _two_blobs()
        cfg = TrainConfig(learning_rate=0.0, epochs=1, weight_init_scale=0.0)
        head = train(x, y, cfg, num_classes=2)
        np.testing.assert_array_equal(head.weights, np.zeros((2, 2)))
        np.testing.assert_array_equal(head.bias, np.zeros(2))

    def test_deterministic(self):
        x, y = _two_blobs()
        cfg = TrainConfig(learning_rate=0.05, epochs=5, seed=3)
        a, b = train(x, y, cfg), train(x, y, cfg)
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.bias, b.bias)

    def test_seed_changes_result(self):
        x, y = _two_blobs()
        a = train(x, y, TrainConfig(epochs=2, seed=1))
        b = train(x, y, TrainConfig(epochs=2, seed=2))
        assert not np.array_equal(a.weights, b.weights)

    def test_epoch_callback(self):
        x, y = _two_blobs()
        losses = []
        train(x, y, TrainConfig(learning_rate=0.1, epochs=10), on_epoch=lambda e, loss, h: losses.append(loss))
        assert len(losses) == 10
        assert losses[-1] < losses[0]

    def test_hierarchical_training(self):
        gen = np.random.default_rng(5)
        h = Hierarchy.uniform(2, 2)
        centers = np.array([[4.0, 0.0], [4.0, 2.0], [-4.0, 0.0], [-4.0, -2.0]])
        children = np.repeat(np.arange(4), 15)
        x = centers[children] + gen.normal(scale=0.3, size=(60, 2))
        y = np.stack([children // 2, children], axis=1)
        head = train(x, y, TrainConfig(learning_rate=0.1, epochs=80, batch_size=8), hierarchy=h)
        joint = forward_hier(head, x).joint
        np.testing.assert_allclose(joint.sum(axis=1), 1.0, atol=1e-9)
        assert (joint.argmax(axis=1) == children).mean() >= 0.95

    def test_empty_input(self):
        with pytest.raises(DataError):
            train(np.zeros((0, 3)), np.zeros(0, dtype=int), TrainConfig())

    def test_label_out_of_range(self):
        x, _ = _two_blobs()
        with pytest.raises(LabelError):
            train(x, np.full(x.shape[0], 5), TrainConfig(epochs=1), num_classes=2)
