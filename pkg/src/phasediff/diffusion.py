"""Forward corruption and sampling loops for both diffusion formulations.

Flow matching uses the linear interpolation x_t = t*noise + (1-t)*image
(t = 1 is pure noise) with constant ground-truth velocity noise - image;
sampling integrates the learned velocity field backwards from t = 1 with
explicit Euler steps.

The DDPM route uses the usual variance-preserving forward process
x_t = sqrt(abar_t)*x0 + sqrt(1-abar_t)*noise over a linear beta schedule,
with ancestral sampling in reverse.  The per-step stochastic term is
itself structured noise sharing the start noise's phase, so the
phase-preservation property survives stochastic sampling.

Models are passed as callables prediction = model(x, t): an array-in,
array-out velocity field for the flow sampler, a noise predictor (with
integer step index t) for the DDPM sampler.
"""

from dataclasses import dataclass

import numpy as np

from .noise import NoiseSpec, phase_preserving_noise
from .rng import substream


@dataclass
class DiffusionSchedule:
    """Beta schedule and its running product abar_t = prod(1 - beta_s)."""

    T: int
    beta: np.ndarray
    alpha_bar: np.ndarray

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=np.float64)
        self.alpha_bar = np.asarray(self.alpha_bar, dtype=np.float64)
        if self.T < 1 or self.beta.shape != (self.T,) or self.alpha_bar.shape != (self.T,):
            raise ValueError("schedule arrays must both have length T >= 1")
        if np.any(self.beta <= 0) or np.any(self.beta >= 1):
            raise ValueError("beta values must lie in (0, 1)")
        expected = np.cumprod(1.0 - self.beta)
        if not np.allclose(self.alpha_bar, expected, rtol=1e-12, atol=0):
            raise ValueError("alpha_bar is not the running product of (1 - beta)")
        if np.any(np.diff(self.alpha_bar) >= 0):
            raise ValueError("alpha_bar must be strictly decreasing")


def ddpm_linear_schedule(T, beta_start=1e-4, beta_end=0.02):
    """Linearly spaced beta schedule (defaults scaled for desk-size T)."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if not (0 < beta_start <= beta_end < 1):
        raise ValueError(f"need 0 < beta_start <= beta_end < 1, got [{beta_start}, {beta_end}]")
    beta = np.linspace(beta_start, beta_end, T)
    return DiffusionSchedule(T=T, beta=beta, alpha_bar=np.cumprod(1.0 - beta))


def _check_pair(a, b, name_a="image", name_b="noise"):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {name_a} {a.shape} vs {name_b} {b.shape}")
    return a, b


def flow_interpolate(img, noise, t):
    """x_t = t*noise + (1-t)*img; exact at both endpoints."""
    img, noise = _check_pair(img, noise)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return t * noise + (1.0 - t) * img


def flow_velocity_target(img, noise):
    """Constant ground-truth velocity of the linear path: noise - img."""
    img, noise = _check_pair(img, noise)
    return noise - img


def ddpm_forward(x0, noise, t, sched):
    """x_t = sqrt(abar_t)*x0 + sqrt(1-abar_t)*noise."""
    x0, noise = _check_pair(x0, noise, "x0", "noise")
    if not 0 <= t < sched.T:
        raise ValueError(f"t must lie in [0, {sched.T}), got {t}")
    abar = sched.alpha_bar[t]
    return np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * noise


def flow_sample(model, noise, steps):
    """Integrate the velocity field from t = 1 (noise) down to t = 0.

    Explicit Euler with uniform steps: x <- x - dt * model(x, t).
    Deterministic given (model, noise, steps).
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    x = np.asarray(noise, dtype=np.float64).copy()
    dt = 1.0 / steps
    for k in range(steps):
        t = 1.0 - k * dt
        v = np.asarray(model(x, t))
        if v.shape != x.shape:
            raise ValueError(f"model output shape {v.shape} != state shape {x.shape}")
        x = x - dt * v
    return x


def ddpm_sample(model, noise, sched, rng):
    """Ancestral sampling from the structured start noise.

    Reverse update x_{t-1} = (x_t - beta_t/sqrt(1-abar_t) * eps_hat) /
    sqrt(1-beta_t) + sqrt(beta_t) * z_t, where eps_hat = model(x, t) and
    z_t is unit-variance structured noise sharing the start's phase
    (substream t of `rng`); no noise is added at the final step.
    """
    x = np.asarray(noise, dtype=np.float64).copy()
    start = x.copy()
    z_spec = NoiseSpec(magnitude_source="gaussian_fft", normalize=True)
    for t in range(sched.T - 1, -1, -1):
        eps = np.asarray(model(x, t))
        if eps.shape != x.shape:
            raise ValueError(f"model output shape {eps.shape} != state shape {x.shape}")
        beta = sched.beta[t]
        abar = sched.alpha_bar[t]
        x = (x - beta / np.sqrt(1.0 - abar) * eps) / np.sqrt(1.0 - beta)
        if t > 0:
            z = phase_preserving_noise(start, z_spec, substream(rng, t))
            x = x + np.sqrt(beta) * z
    return x
