import math

import numpy as np
import pytest

from src.core.exceptions import ConfigurationError, DomainError, ShapeError
from src.core.losses import bce_with_logits, kl_divergence, mse_loss, schedule_weights, total_loss
from src.core.neural import Tensor
from src.schemas.config import LossSchedule

from tests.helpers import assert_gradients_close, central_difference


class TestReconstruction:
    def test_bce_at_zero_logits(self):
        loss = bce_with_logits(np.zeros((1, 784)), np.full((1, 784), 0.5))
        assert loss.item() == pytest.approx(784 * math.log(2), rel=1e-12)

    def test_bce_averages_over_batch(self):
        one = bce_with_logits(np.zeros((1, 784)), np.full((1, 784), 0.5)).item()
        four = bce_with_logits(np.zeros((4, 784)), np.full((4, 784), 0.5)).item()
        assert four == pytest.approx(one)

    def test_bce_is_finite_for_huge_logits(self):
        logits = np.array([[1000.0, -1000.0, 1000.0, -1000.0]])
        target = np.array([[1.0, 0.0, 0.0, 1.0]])
        value = bce_with_logits(logits, target).item()
        assert math.isfinite(value)
        assert value == pytest.approx(2000.0)

    def test_bce_gradient(self, rng):
        logits = rng.normal(size=(3, 5)) * 3
        target = rng.uniform(size=(3, 5))
        x = Tensor(logits, requires_grad=True)
        bce_with_logits(x, target).backward()
        expected = central_difference(lambda v: bce_with_logits(v, target).item(), logits)
        assert_gradients_close(x.grad, expected)

    def test_bce_rejects_targets_outside_unit_interval(self):
        with pytest.raises(DomainError):
            bce_with_logits(np.zeros((1, 2)), np.array([[0.5, 1.5]]))

    def test_bce_shape_mismatch(self):
        with pytest.raises(ShapeError):
            bce_with_logits(np.zeros((1, 3)), np.zeros((1, 2)))

    def test_mse_sums_pixels(self):
        loss = mse_loss(np.ones((2, 4)), np.zeros((2, 4)))
        assert loss.item() == pytest.approx(4.0)


class TestKL:
    def test_standard_normal_has_zero_kl(self):
        assert kl_divergence(np.zeros((4, 8)), np.zeros((4, 8))).item() == pytest.approx(0.0)

    def test_closed_form(self):
        mu = np.array([[1.0, 0.0]])
        logvar = np.array([[0.0, math.log(2.0)]])
        expected = 0.5 * 1.0 + 0.5 * (2.0 - 1.0 - math.log(2.0))
        assert kl_divergence(mu, logvar).item() == pytest.approx(expected)

    def test_is_non_negative(self, rng):
        for _ in range(20):
            value = kl_divergence(rng.normal(size=(5, 3)), rng.normal(size=(5, 3))).item()
            assert value >= 0.0

    def test_free_bits_floor_each_dimension(self):
        mu = np.zeros((2, 3))
        mu[:, 0] = 2.0
        plain = kl_divergence(mu, np.zeros((2, 3))).item()
        floored = kl_divergence(mu, np.zeros((2, 3)), free_bits=0.5).item()
        assert plain == pytest.approx(2.0)
        assert floored == pytest.approx(2.0 + 0.5 + 0.5)

    def test_gradient(self, rng):
        mu = rng.normal(size=(3, 2))
        logvar = rng.normal(size=(3, 2))
        mu_t = Tensor(mu, requires_grad=True)
        logvar_t = Tensor(logvar, requires_grad=True)
        kl_divergence(mu_t, logvar_t).backward()
        assert_gradients_close(mu_t.grad, central_difference(lambda v: kl_divergence(v, logvar).item(), mu))
        assert_gradients_close(logvar_t.grad, central_difference(lambda v: kl_divergence(mu, v).item(), logvar))


class TestSchedules:
    def test_beta_warmup_saturates(self):
        schedule = LossSchedule(mode="beta-warmup", n_beta=5)
        assert schedule_weights(1, schedule) == (pytest.approx(0.2), 0.0)
        assert schedule_weights(5, schedule) == (1.0, 0.0)
        assert schedule_weights(9, schedule) == (1.0, 0.0)

    def test_capacity_ramp(self):
        schedule = LossSchedule(mode="capacity", c_max=10.0, n_c=10)
        assert schedule_weights(5, schedule) == (1.0, pytest.approx(5.0))
        assert schedule_weights(20, schedule) == (1.0, pytest.approx(10.0))

    def test_constant(self):
        assert schedule_weights(3, LossSchedule(mode="constant")) == (1.0, 0.0)

    def test_epochs_are_one_based(self):
        with pytest.raises(ConfigurationError):
            schedule_weights(0, LossSchedule())

    def test_total_loss_beta_mode(self):
        value = total_loss(Tensor(100.0), Tensor(4.0), 0.5, 0.0, LossSchedule(mode="beta-warmup"))
        assert value.item() == pytest.approx(102.0)

    def test_total_loss_capacity_mode(self):
        schedule = LossSchedule(mode="capacity", c_max=10.0, gamma=10.0)
        assert total_loss(Tensor(100.0), Tensor(3.0), 1.0, 5.0, schedule).item() == pytest.approx(120.0)
        assert total_loss(Tensor(100.0), Tensor(7.0), 1.0, 5.0, schedule).item() == pytest.approx(120.0)
