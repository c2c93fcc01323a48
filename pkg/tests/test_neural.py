import numpy as np
import pytest

from src.core.exceptions import CheckpointError, ConfigurationError, ContractError, ShapeError
from src.core.neural import (
    QUANTUM,
    BatchNorm,
    Conv2d,
    Linear,
    Parameter,
    Sequential,
    Tensor,
    batchnorm_forward,
    conv2d,
    conv2d_forward,
    is_grad_enabled,
    leaky_relu,
    linear_forward,
    no_grad,
    sigmoid,
)

from tests.helpers import assert_gradients_close, central_difference


def grad_of(build, value: np.ndarray) -> np.ndarray:
    x = Tensor(value, requires_grad=True)
    build(x).backward()
    return x.grad


class TestTensor:
    @pytest.mark.parametrize(
        "build",
        [
            lambda x: (x * x).sum(),
            lambda x: (x / (x * x + 1.0)).sum(),
            lambda x: (x.exp() * 0.5 - x).mean(),
            lambda x: ((x * x + 1.0).log()).sum(),
            lambda x: (x**3).sum(),
            lambda x: (x.abs() * 2.0).sum(),
            lambda x: (x.maximum(0.1) * x).sum(),
            lambda x: (x.reshape(-1) * np.arange(6.0)).sum(),
            lambda x: (x @ x.T).sum(),
            lambda x: (x.sum(axis=0) * np.array([1.0, -2.0, 3.0])).sum(),
            lambda x: leaky_relu(x, 0.2).sum(),
            lambda x: (sigmoid(x) * np.arange(6.0).reshape(2, 3)).sum(),
        ],
    )
    def test_gradients_match_finite_differences(self, build, rng):
        value = rng.normal(size=(2, 3))
        # keep away from the kinks of abs / maximum / leaky_relu
        value[np.abs(value) < 0.2] += 0.5
        value[np.abs(value - 0.1) < 0.05] += 0.2
        expected = central_difference(lambda v: build(Tensor(v)).item(), value)
        assert_gradients_close(grad_of(build, value), expected)

    def test_broadcast_gradient_is_reduced(self):
        bias = Tensor(np.zeros(3), requires_grad=True)
        (Tensor(np.ones((4, 3))) + bias).sum().backward()
        np.testing.assert_allclose(bias.grad, [4.0, 4.0, 4.0])

    def test_shared_subexpression_accumulates(self):
        x = Tensor(np.array(3.0), requires_grad=True)
        y = x * x
        (y + y).backward()
        assert x.grad == pytest.approx(12.0)

    def test_backward_needs_scalar(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with pytest.raises(ContractError):
            (x * 2.0).backward()

    def test_item_needs_single_value(self):
        with pytest.raises(ContractError):
            Tensor(np.ones(2)).item()

    def test_matmul_shape_mismatch(self):
        with pytest.raises(ShapeError):
            Tensor(np.ones((2, 3))) @ Tensor(np.ones((2, 3)))

    def test_no_grad_records_nothing(self):
        x = Tensor(np.ones(2), requires_grad=True)
        with no_grad():
            assert not is_grad_enabled()
            y = (x * 3.0).sum()
        assert is_grad_enabled()
        assert not y.requires_grad

    def test_graph_is_released_after_backward(self):
        x = Tensor(np.ones(2), requires_grad=True)
        hidden = x * 2.0
        hidden.sum().backward()
        assert hidden.grad is None
        assert hidden.is_leaf


class TestConvolution:
    def test_shape_chain(self, rng):
        x = Tensor(rng.normal(size=(2, 1, 28, 28)))
        sizes = []
        for c_in, c_out in [(1, 32), (32, 64), (64, 128), (128, 256)]:
            x = conv2d_forward(Conv2d(c_in, c_out, rng), x)
            sizes.append(x.shape[2:])
        assert sizes == [(14, 14), (7, 7), (4, 4), (2, 2)]
        assert x.shape == (2, 256, 2, 2)

    def test_matches_direct_loop(self, rng):
        x = rng.normal(size=(1, 2, 5, 5))
        w = rng.normal(size=(3, 2, 3, 3))
        b = rng.normal(size=3)
        out = conv2d(Tensor(x), Tensor(w), Tensor(b), stride=2, padding=1).data
        padded = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        for o in range(3):
            for i in range(3):
                for j in range(3):
                    patch = padded[0, :, 2 * i : 2 * i + 3, 2 * j : 2 * j + 3]
                    assert out[0, o, i, j] == pytest.approx(np.sum(patch * w[o]) + b[o])

    def test_gradients_match_finite_differences(self, rng):
        x = rng.normal(size=(2, 2, 5, 5))
        w = rng.normal(size=(3, 2, 3, 3))
        b = rng.normal(size=3)
        upstream = rng.normal(size=(2, 3, 3, 3))

        def loss(xv, wv, bv):
            return (conv2d(Tensor(xv), Tensor(wv), Tensor(bv)) * upstream).sum()

        xt, wt, bt = (Tensor(v, requires_grad=True) for v in (x, w, b))
        (conv2d(xt, wt, bt) * upstream).sum().backward()
        assert_gradients_close(xt.grad, central_difference(lambda v: loss(v, w, b).item(), x))
        assert_gradients_close(wt.grad, central_difference(lambda v: loss(x, v, b).item(), w))
        assert_gradients_close(bt.grad, central_difference(lambda v: loss(x, w, v).item(), b))

    def test_channel_mismatch(self, rng):
        with pytest.raises(ShapeError):
            Conv2d(3, 4, rng)(Tensor(np.zeros((1, 2, 8, 8))))


class TestBatchNorm:
    def test_train_mode_normalizes_each_feature(self, rng):
        layer = BatchNorm(4)
        out = layer(Tensor(rng.normal(3.0, 2.0, size=(64, 4)))).data
        np.testing.assert_allclose(out.mean(axis=0), 0.0, atol=1e-10)
        np.testing.assert_allclose(out.std(axis=0), 1.0, atol=1e-4)

    def test_feature_maps_use_channel_statistics(self, rng):
        layer = BatchNorm(3)
        out = layer(Tensor(rng.normal(1.0, 5.0, size=(4, 3, 6, 6)))).data
        np.testing.assert_allclose(out.mean(axis=(0, 2, 3)), 0.0, atol=1e-10)

    def test_running_statistics_converge_to_eval_consistency(self, rng):
        layer = BatchNorm(3, momentum=0.5)
        x = rng.normal(2.0, 3.0, size=(32, 3))
        for _ in range(60):
            train_out = batchnorm_forward(layer, Tensor(x), "train").data
        eval_out = batchnorm_forward(layer, Tensor(x), "eval").data
        np.testing.assert_allclose(eval_out, train_out, atol=1e-3)

    def test_train_mode_needs_two_samples(self):
        with pytest.raises(ContractError):
            BatchNorm(2)(Tensor(np.ones((1, 2))))

    def test_eval_mode_accepts_one_sample(self):
        layer = BatchNorm(2).eval()
        assert layer(Tensor(np.ones((1, 2)))).shape == (1, 2)

    def test_unknown_mode(self):
        with pytest.raises(ConfigurationError):
            batchnorm_forward(BatchNorm(2), Tensor(np.ones((2, 2))), "inference")

    def test_gradients_match_finite_differences(self, rng):
        layer = BatchNorm(3)
        x = rng.normal(size=(5, 3))
        upstream = rng.normal(size=(5, 3))

        def loss(v):
            return (batchnorm_forward(BatchNorm(3), Tensor(v), "train") * upstream).sum().item()

        xt = Tensor(x, requires_grad=True)
        (layer(xt) * upstream).sum().backward()
        assert_gradients_close(xt.grad, central_difference(loss, x))


class TestModule:
    def test_registration_and_groups(self, rng):
        model = Sequential(Linear(3, 4, rng), BatchNorm(4), Linear(4, 2, rng))
        model.extra = Parameter(np.zeros(5), group=QUANTUM)
        names = [name for name, _ in model.named_parameters()]
        assert "0.weight" in names and "1.gamma" in names and "extra" in names
        assert model.num_parameters(QUANTUM) == 5
        assert model.num_parameters() == 3 * 4 + 4 + 4 + 4 + 4 * 2 + 2 + 5
        assert [name for name, _ in model.named_buffers()] == ["1.running_mean", "1.running_var"]

    def test_train_eval_propagates(self, rng):
        model = Sequential(Linear(2, 2, rng), BatchNorm(2))
        model.eval()
        assert all(not m.training for _, m in model.named_modules())
        model.train()
        assert all(m.training for _, m in model.named_modules())

    def test_state_dict_round_trip(self, rng):
        first = Sequential(Linear(3, 2, rng), BatchNorm(2))
        first(Tensor(rng.normal(size=(4, 3))))
        second = Sequential(Linear(3, 2, rng), BatchNorm(2))
        second.load_state_dict(first.state_dict())
        for (_, a), (_, b) in zip(first.state_dict().items(), second.state_dict().items()):
            np.testing.assert_array_equal(a, b)

    def test_load_rejects_shape_mismatch_without_partial_write(self, rng):
        model = Sequential(Linear(3, 2, rng), Linear(2, 2, rng))
        before = model.state_dict()
        state = dict(before)
        state["0.weight"] = np.ones((2, 3))
        state["1.weight"] = np.ones((5, 5))
        with pytest.raises(CheckpointError):
            model.load_state_dict(state)
        np.testing.assert_array_equal(model.state_dict()["0.weight"], before["0.weight"])

    def test_load_rejects_unknown_names(self, rng):
        model = Linear(2, 2, rng)
        state = model.state_dict()
        state["ghost"] = np.zeros(1)
        with pytest.raises(CheckpointError):
            model.load_state_dict(state)

    def test_linear_forward_shape_check(self, rng):
        with pytest.raises(ShapeError):
            linear_forward(Linear(3, 2, rng), Tensor(np.ones((4, 2))))
