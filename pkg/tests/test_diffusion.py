import math

import numpy as np
import pytest

from phasediff import NoiseSpec, make_rng
from phasediff.diffusion import (
    DiffusionSchedule,
    ddpm_forward,
    ddpm_linear_schedule,
    ddpm_sample,
    flow_interpolate,
    flow_sample,
    flow_velocity_target,
)
from phasediff.noise import phase_preserving_noise
from phasediff.spectral import decompose, fft2

from test_noise import shape_image


class TestFlowInterpolate:
    def test_endpoints_exact(self):
        rng = make_rng(0)
        img = rng.standard_normal((8, 8))
        noise = rng.standard_normal((8, 8))
        assert np.array_equal(flow_interpolate(img, noise, 0.0), img)
        assert np.array_equal(flow_interpolate(img, noise, 1.0), noise)

    def test_midpoint(self):
        img = np.zeros((4, 4))
        noise = np.full((4, 4), 2.0)
        assert np.array_equal(flow_interpolate(img, noise, 0.5), np.ones((4, 4)))

    def test_affine_in_t(self):
        rng = make_rng(1)
        img = rng.standard_normal((6, 6))
        noise = rng.standard_normal((6, 6))
        x1 = flow_interpolate(img, noise, 0.25)
        x2 = flow_interpolate(img, noise, 0.75)
        mid = flow_interpolate(img, noise, 0.5)
        assert np.max(np.abs(0.5 * (x1 + x2) - mid)) < 1e-15

    def test_validation(self):
        with pytest.raises(ValueError, match="t must"):
            flow_interpolate(np.zeros((4, 4)), np.zeros((4, 4)), 1.5)
        with pytest.raises(ValueError, match="mismatch"):
            flow_interpolate(np.zeros((4, 4)), np.zeros((4, 5)), 0.5)


class TestFlowVelocity:
    def test_zero_when_equal(self):
        img = make_rng(2).standard_normal((8, 8))
        assert np.max(np.abs(flow_velocity_target(img, img))) == 0.0

    def test_zero_image_gives_noise(self):
        noise = make_rng(3).standard_normal((8, 8))
        assert np.array_equal(flow_velocity_target(np.zeros((8, 8)), noise), noise)

    def test_spectral_identity_on_structured_noise(self):
        # the velocity's spectrum is (A_noise - A_img) * exp(j*phase_img)
        # when the noise shares the image phase; signed magnitude difference,
        # so this is checked as an exact complex equality
        for seed in range(100):
            rng = make_rng(seed)
            img = shape_image(16) + 0.05 * rng.standard_normal((16, 16))
            noise = phase_preserving_noise(img, NoiseSpec(), make_rng(seed, 1))
            v = flow_velocity_target(img, noise)
            fv = fft2(v)
            # linearity of the transform
            assert np.max(np.abs(fv - (fft2(noise) - fft2(img)))) < 1e-12
            mag_n, _ = decompose(fft2(noise))
            mag_i, phase_i = decompose(fft2(img))
            predicted = (mag_n - mag_i) * np.exp(1j * phase_i)
            assert np.max(np.abs(fv - predicted)) < 1e-9


class TestSchedule:
    def test_single_step(self):
        sched = ddpm_linear_schedule(1, 0.1, 0.1)
        assert np.array_equal(sched.alpha_bar, np.array([0.9]))

    def test_strictly_decreasing(self):
        sched = ddpm_linear_schedule(200)
        assert np.all(np.diff(sched.alpha_bar) < 0)
        assert np.all((sched.alpha_bar > 0) & (sched.alpha_bar <= 1))

    def test_terminal_value_thousand_steps(self):
        sched = ddpm_linear_schedule(1000, 1e-4, 0.02)
        # independent oracle: plain python product
        betas = [1e-4 + (0.02 - 1e-4) * i / 999 for i in range(1000)]
        oracle = math.prod(1.0 - b for b in betas)
        assert sched.alpha_bar[-1] == pytest.approx(oracle, rel=1e-12)
        assert abs(sched.alpha_bar[-1] - 4.0e-5) / 4.0e-5 < 0.10

    def test_recurrence_exact(self):
        sched = ddpm_linear_schedule(50)
        for t in range(1, 50):
            assert sched.alpha_bar[t] == sched.alpha_bar[t - 1] * (1 - sched.beta[t])

    def test_validation(self):
        with pytest.raises(ValueError):
            ddpm_linear_schedule(0)
        with pytest.raises(ValueError):
            ddpm_linear_schedule(10, 0.02, 1e-4)  # start > end
        with pytest.raises(ValueError):
            ddpm_linear_schedule(10, 0.0, 0.02)
        with pytest.raises(ValueError):
            DiffusionSchedule(T=2, beta=np.array([0.1, 0.2]), alpha_bar=np.array([0.9, 0.5]))


class TestDdpmForward:
    def test_coefficient_identity(self):
        sched = ddpm_linear_schedule(200)
        for t in range(200):
            a = np.sqrt(sched.alpha_bar[t])
            b = np.sqrt(1.0 - sched.alpha_bar[t])
            assert abs(a * a + b * b - 1.0) < 1e-15

    def test_formula(self):
        sched = ddpm_linear_schedule(10)
        rng = make_rng(4)
        x0 = rng.standard_normal((8, 8))
        noise = rng.standard_normal((8, 8))
        t = 7
        expected = np.sqrt(sched.alpha_bar[t]) * x0 + np.sqrt(1 - sched.alpha_bar[t]) * noise
        assert np.array_equal(ddpm_forward(x0, noise, t, sched), expected)

    def test_t_out_of_range(self):
        sched = ddpm_linear_schedule(10)
        with pytest.raises(ValueError):
            ddpm_forward(np.zeros((4, 4)), np.zeros((4, 4)), 10, sched)
        with pytest.raises(ValueError):
            ddpm_forward(np.zeros((4, 4)), np.zeros((4, 4)), -1, sched)


class TestFlowSample:
    def test_oracle_velocity_one_step(self):
        rng = make_rng(5)
        img = rng.standard_normal((8, 8))
        noise = rng.standard_normal((8, 8))
        v = noise - img
        out = flow_sample(lambda x, t: v, noise, steps=1)
        assert np.max(np.abs(out - img)) < 1e-12

    def test_constant_field_insensitive_to_step_count(self):
        rng = make_rng(6)
        img = rng.standard_normal((8, 8))
        noise = rng.standard_normal((8, 8))
        v = noise - img
        a = flow_sample(lambda x, t: v, noise, steps=25)
        b = flow_sample(lambda x, t: v, noise, steps=50)
        assert np.max(np.abs(a - b)) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            flow_sample(lambda x, t: np.zeros((4, 5)), np.zeros((4, 4)), steps=2)

    def test_steps_validation(self):
        with pytest.raises(ValueError):
            flow_sample(lambda x, t: x, np.zeros((4, 4)), steps=0)


class TestDdpmSample:
    def test_single_step_closed_form(self):
        sched = ddpm_linear_schedule(1, 0.1, 0.1)
        rng = make_rng(7)
        x1 = rng.standard_normal((8, 8))
        eps = rng.standard_normal((8, 8))
        out = ddpm_sample(lambda x, t: eps, x1, sched, make_rng(8))
        expected = (x1 - 0.1 / np.sqrt(1 - 0.9) * eps) / np.sqrt(1 - 0.1)
        assert np.max(np.abs(out - expected)) < 1e-15

    def test_exact_noise_model_recovers_x0(self):
        # the final reverse step cancels all remaining noise when the model
        # predicts the exact noise content of x_t, so the stochastic terms
        # injected along the way drop out of the end state
        sched = ddpm_linear_schedule(10)
        img = shape_image(16)
        start = phase_preserving_noise(img, NoiseSpec(), make_rng(9))
        x_T = ddpm_forward(img, start, sched.T - 1, sched)

        def exact_model(x, t):
            return (x - np.sqrt(sched.alpha_bar[t]) * img) / np.sqrt(1 - sched.alpha_bar[t])

        out = ddpm_sample(exact_model, x_T, sched, make_rng(10))
        assert np.max(np.abs(out - img)) < 1e-6

    def test_deterministic(self):
        sched = ddpm_linear_schedule(5)
        img = shape_image(16)
        start = phase_preserving_noise(img, NoiseSpec(), make_rng(11))
        model = lambda x, t: 0.1 * x
        a = ddpm_sample(model, start, sched, make_rng(12))
        b = ddpm_sample(model, start, sched, make_rng(12))
        assert np.array_equal(a, b)
