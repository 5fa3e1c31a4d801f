"""Small convolutional predictor with hand-written gradients and training.

Architecture (fixed): four 3x3 convolutions with zero padding and stride 1,
channels 1 -> 32 -> 32 -> 32 -> 1, SiLU between layers, and a residual
connection from the input to the output.  A scalar time input passes
through a 16-dimensional sinusoidal embedding and a two-layer dense map
(SiLU hidden), producing a per-channel bias added after the first
convolution.  The final convolution is zero-initialized, so an untrained
network is the identity.

The same network serves both objectives: it predicts the velocity field
for flow matching and the structured noise for the DDPM route.  Training
is plain SGD with a fixed learning rate; together with the explicit RNG
substream scheme this makes runs bitwise reproducible.

Activations are kept channels-last (B, H, W, C) and every convolution is
evaluated as nine shifted matmuls (one per kernel tap), which keeps all
heavy work in BLAS without materializing patch matrices; gradients are
exact (verified against central finite differences in the test suite).
"""

from dataclasses import dataclass, field, fields

import numpy as np

from .diffusion import ddpm_forward, ddpm_linear_schedule, flow_interpolate, flow_velocity_target
from .noise import NoiseSpec, RadiusSampler, fss_noise, sample_cutoff_radius
from .rng import make_rng, substream

CHANNELS = 32
KERNEL = 3
EMBED_DIM = 16
TIME_HIDDEN = 32
DDPM_STEPS = 200  # default schedule length for the ddpm objective

OBJECTIVES = ("flow", "ddpm")


class TrainingDivergenceError(Exception):
    """A non-finite value appeared during training.

    Carries the loss history accumulated so far in .history.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


@dataclass
class DenoiserParams:
    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    conv3_w: np.ndarray
    conv3_b: np.ndarray
    conv4_w: np.ndarray
    conv4_b: np.ndarray
    time_w1: np.ndarray
    time_b1: np.ndarray
    time_w2: np.ndarray
    time_b2: np.ndarray

    def names(self):
        return [f.name for f in fields(self)]

    def arrays(self):
        """Name -> array view of every parameter tensor."""
        return {name: getattr(self, name) for name in self.names()}

    def copy(self):
        return DenoiserParams(**{k: v.copy() for k, v in self.arrays().items()})

    def count(self):
        return sum(v.size for v in self.arrays().values())


def parameter_shapes():
    """Weight layouts: convolutions are (tap_y, tap_x, C_in, C_out)."""
    c, k = CHANNELS, KERNEL
    return {
        "conv1_w": (k, k, 1, c),
        "conv1_b": (c,),
        "conv2_w": (k, k, c, c),
        "conv2_b": (c,),
        "conv3_w": (k, k, c, c),
        "conv3_b": (c,),
        "conv4_w": (k, k, c, 1),
        "conv4_b": (1,),
        "time_w1": (EMBED_DIM, TIME_HIDDEN),
        "time_b1": (TIME_HIDDEN,),
        "time_w2": (TIME_HIDDEN, CHANNELS),
        "time_b2": (CHANNELS,),
    }


def silu(x):
    """x * sigmoid(x), with the sigmoid split for overflow safety."""
    pos = x >= 0
    ex = np.exp(np.where(pos, -x, x))
    sig = np.where(pos, 1.0 / (1.0 + ex), ex / (1.0 + ex))
    return x * sig


def silu_grad(x):
    pos = x >= 0
    ex = np.exp(np.where(pos, -x, x))
    sig = np.where(pos, 1.0 / (1.0 + ex), ex / (1.0 + ex))
    return sig * (1.0 + x * (1.0 - sig))


def init_params(seed):
    """Fan-in-scaled uniform weights, zero biases, zero final convolution.

    Weight tensors are drawn in a fixed order (conv1_w, conv2_w, conv3_w,
    time_w1, time_w2) from U(-b, b) with b = sqrt(3/fan_in), i.e. variance
    1/fan_in; conv4 stays zero so the initial output is exactly the
    residual input.
    """
    rng = make_rng(seed)
    shapes = parameter_shapes()

    def uniform(shape, fan_in):
        bound = np.sqrt(3.0 / fan_in)
        return rng.uniform(-bound, bound, shape)

    return DenoiserParams(
        conv1_w=uniform(shapes["conv1_w"], 1 * KERNEL * KERNEL),
        conv1_b=np.zeros(shapes["conv1_b"]),
        conv2_w=uniform(shapes["conv2_w"], CHANNELS * KERNEL * KERNEL),
        conv2_b=np.zeros(shapes["conv2_b"]),
        conv3_w=uniform(shapes["conv3_w"], CHANNELS * KERNEL * KERNEL),
        conv3_b=np.zeros(shapes["conv3_b"]),
        conv4_w=np.zeros(shapes["conv4_w"]),
        conv4_b=np.zeros(shapes["conv4_b"]),
        time_w1=uniform(shapes["time_w1"], EMBED_DIM),
        time_b1=np.zeros(shapes["time_b1"]),
        time_w2=uniform(shapes["time_w2"], TIME_HIDDEN),
        time_b2=np.zeros(shapes["time_b2"]),
    )


def _pad(x):
    b, h, w, c = x.shape
    xp = np.zeros((b, h + 2, w + 2, c))
    xp[:, 1:-1, 1:-1, :] = x
    return xp


def _conv(x, w, bias):
    """3x3 same-size convolution of channels-last x; returns (out, padded x).

    out[b,i,j,co] = bias[co] + sum_{di,dj,ci} w[di,dj,ci,co] * xp[b,i+di,j+dj,ci]
    evaluated as one matmul per kernel tap.
    """
    b, h, wd, c = x.shape
    xp = _pad(x)
    out2d = np.tile(bias, (b * h * wd, 1))
    for di in range(KERNEL):
        for dj in range(KERNEL):
            m = xp[:, di : di + h, dj : dj + wd, :].reshape(-1, c)
            out2d += m @ w[di, dj]
    return out2d.reshape(b, h, wd, w.shape[-1]), xp


def _conv_backward(dout, xp, w, need_dx=True):
    """Gradients of _conv: (dw, db, dx) from upstream dout (B, H, W, C_out)."""
    b, h, wd, c_out = dout.shape
    c_in = w.shape[2]
    dout2d = dout.reshape(-1, c_out)
    dw = np.empty_like(w)
    db = dout2d.sum(axis=0)
    dxp = np.zeros((b, h + 2, wd + 2, c_in)) if need_dx else None
    for di in range(KERNEL):
        for dj in range(KERNEL):
            m = xp[:, di : di + h, dj : dj + wd, :].reshape(-1, c_in)
            dw[di, dj] = m.T @ dout2d
            if need_dx:
                dxp[:, di : di + h, dj : dj + wd, :] += (dout2d @ w[di, dj].T).reshape(
                    b, h, wd, c_in
                )
    dx = dxp[:, 1:-1, 1:-1, :] if need_dx else None
    return dw, db, dx


def time_embedding(t):
    """(B, 16) sinusoidal features of t in [0, 1], frequencies 1000^(k/7)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    k = np.arange(EMBED_DIM // 2)
    omega = 1000.0 ** (k / (EMBED_DIM // 2 - 1))
    angles = t[:, None] * omega[None, :]
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=1)


def _forward_batch(params, x, t, keep_cache=False):
    """Network forward for x (B, H, W) and t (B,); optionally keep caches."""
    x4 = x[:, :, :, None]

    emb = time_embedding(t)
    pre1 = emb @ params.time_w1 + params.time_b1
    hid = silu(pre1)
    tbias = hid @ params.time_w2 + params.time_b2

    z1, xp1 = _conv(x4, params.conv1_w, params.conv1_b)
    z1 += tbias[:, None, None, :]
    a1 = silu(z1)
    z2, xp2 = _conv(a1, params.conv2_w, params.conv2_b)
    a2 = silu(z2)
    z3, xp3 = _conv(a2, params.conv3_w, params.conv3_b)
    a3 = silu(z3)
    z4, xp4 = _conv(a3, params.conv4_w, params.conv4_b)
    out = x + z4[:, :, :, 0]

    if not keep_cache:
        return out, None
    cache = {
        "emb": emb,
        "pre1": pre1,
        "hid": hid,
        "z1": z1,
        "z2": z2,
        "z3": z3,
        "xp1": xp1,
        "xp2": xp2,
        "xp3": xp3,
        "xp4": xp4,
    }
    return out, cache


def forward(params, x_t, t):
    """Prediction for a single image at time t in [0, 1]."""
    x_t = np.asarray(x_t, dtype=np.float64)
    if x_t.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {x_t.shape}")
    if not np.all(np.isfinite(x_t)):
        raise ValueError("input image has non-finite values")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    out, _ = _forward_batch(params, x_t[None], np.array([float(t)]))
    return out[0]


def loss_and_grad(params, batch):
    """Mean-squared-error loss and its exact gradients over a batch.

    batch is a sequence of (x_t, t, target) triples with identical image
    shapes; the loss is averaged over every pixel of every item.
    """
    if len(batch) == 0:
        raise ValueError("batch is empty")
    x = np.stack([np.asarray(item[0], dtype=np.float64) for item in batch])
    t = np.array([float(item[1]) for item in batch])
    target = np.stack([np.asarray(item[2], dtype=np.float64) for item in batch])
    if x.shape != target.shape:
        raise ValueError(f"input shape {x.shape} != target shape {target.shape}")

    out, cache = _forward_batch(params, x, t, keep_cache=True)
    diff = out - target
    loss = float(np.mean(diff**2))
    if not np.isfinite(loss):
        raise TrainingDivergenceError(f"non-finite loss {loss}")

    grads = {}
    dz4 = (2.0 / diff.size) * diff[:, :, :, None]

    grads["conv4_w"], grads["conv4_b"], da3 = _conv_backward(
        dz4, cache["xp4"], params.conv4_w
    )
    dz3 = da3 * silu_grad(cache["z3"])
    grads["conv3_w"], grads["conv3_b"], da2 = _conv_backward(
        dz3, cache["xp3"], params.conv3_w
    )
    dz2 = da2 * silu_grad(cache["z2"])
    grads["conv2_w"], grads["conv2_b"], da1 = _conv_backward(
        dz2, cache["xp2"], params.conv2_w
    )
    dz1 = da1 * silu_grad(cache["z1"])
    grads["conv1_w"], grads["conv1_b"], _ = _conv_backward(
        dz1, cache["xp1"], params.conv1_w, need_dx=False
    )

    dtbias = dz1.sum(axis=(1, 2))
    grads["time_w2"] = cache["hid"].T @ dtbias
    grads["time_b2"] = dtbias.sum(axis=0)
    dhid = dtbias @ params.time_w2.T
    dpre1 = dhid * silu_grad(cache["pre1"])
    grads["time_w1"] = cache["emb"].T @ dpre1
    grads["time_b1"] = dpre1.sum(axis=0)

    return loss, DenoiserParams(**grads)


@dataclass
class TrainConfig:
    """Settings for one training run; the defaults are the ones the
    structure-alignment experiment uses.

    radius_sampler None switches the corruption to plain Gaussian noise
    (the standard-diffusion baseline).
    """

    objective: str = "flow"
    epochs: int = 4
    batch_size: int = 16
    learning_rate: float = 0.2
    radius_sampler: RadiusSampler | None = field(default_factory=RadiusSampler)
    sigma: float = 2.0
    magnitude_source: str = "gaussian_fft"
    seed: int = 0

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def train(corpus, config):
    """SGD training over a list of images; returns (params, loss_history).

    Per iteration: draw batch indices, one cutoff radius, per-item
    structured noise (RNG substream (iteration, item)), corrupt with the
    objective's forward process and regress its target.  loss_history has
    one mean loss per epoch.  Non-finite losses abort with the history
    collected so far attached to the exception.
    """
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    corpus = [np.asarray(img, dtype=np.float64) for img in corpus]
    n = len(corpus)

    params = init_params(config.seed)
    root = make_rng(config.seed)
    sched = ddpm_linear_schedule(DDPM_STEPS) if config.objective == "ddpm" else None
    iters_per_epoch = max(1, n // config.batch_size)

    history = []
    iteration = 0
    for _ in range(config.epochs):
        epoch_losses = []
        for _ in range(iters_per_epoch):
            g = substream(root, iteration)
            idx = g.integers(0, n, size=config.batch_size)
            if config.radius_sampler is not None:
                radius = sample_cutoff_radius(config.radius_sampler, g)
            else:
                radius = None
            spec = NoiseSpec(
                magnitude_source=config.magnitude_source,
                cutoff_radius=radius,
                sigma=config.sigma,
            )

            batch = []
            if config.objective == "flow":
                times = g.random(config.batch_size)
                for j, (img_i, t) in enumerate(zip(idx, times)):
                    img = corpus[img_i]
                    eps = fss_noise(img, spec, substream(g, j))
                    x_t = flow_interpolate(img, eps, t)
                    batch.append((x_t, t, flow_velocity_target(img, eps)))
            else:
                steps = g.integers(0, sched.T, size=config.batch_size)
                for j, (img_i, step) in enumerate(zip(idx, steps)):
                    img = corpus[img_i]
                    eps = fss_noise(img, spec, substream(g, j))
                    x_t = ddpm_forward(img, eps, int(step), sched)
                    batch.append((x_t, step / (sched.T - 1), eps))

            try:
                loss, grads = loss_and_grad(params, batch)
            except TrainingDivergenceError as err:
                raise TrainingDivergenceError(
                    f"{err} at iteration {iteration}", history=history
                ) from None
            for name, grad in grads.arrays().items():
                arr = getattr(params, name)
                arr -= config.learning_rate * grad
            epoch_losses.append(loss)
            iteration += 1
        history.append(float(np.mean(epoch_losses)))

    return params, history
