"""Synthetic paired shape dataset: flat structure images and shaded renders.

Each sample is a pair sharing identical geometry.  The flat image is the
structure carrier: hard-edged constant-intensity ellipses and rectangles
painted over a flat background.  The shaded image re-renders the same
geometry the way a lit scene would look: anti-aliased edges (1-pixel
signed-distance ramp), a linear illumination gradient in a random
direction, and a weak band-limited texture.  Training on shaded images
and conditioning on flat ones gives a measurable structure-alignment
task with known ground-truth geometry.
"""

from dataclasses import dataclass, field

import numpy as np

from .rng import make_rng, substream
from .spectral import compose, decompose, fft2, ifft2, radial_frequency

GRADIENT_AMPLITUDE = 0.12  # max-abs of the illumination plane
TEXTURE_AMPLITUDE = 0.05  # max-abs of the additive texture
TEXTURE_BAND = (2.0, 8.0)  # wrapped-frequency band the texture lives in

SHAPE_KINDS = ("ellipse", "rectangle")


@dataclass
class ShapeSpec:
    """One shape: center (cy, cx), semi-extents (ay, ax), rotation, intensity."""

    kind: str
    cy: float
    cx: float
    ay: float
    ax: float
    rotation: float
    intensity: float


@dataclass
class SamplePair:
    flat: np.ndarray
    shaded: np.ndarray
    geometry: list = field(default_factory=list)
    background: float = 0.5


@dataclass
class SynthCorpusConfig:
    count: int
    size: int = 64
    seed: int = 0
    objects_min: int = 1
    objects_max: int = 3

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if self.size < 16:
            raise ValueError(f"size must be >= 16, got {self.size}")
        if not 0 <= self.objects_min <= self.objects_max:
            raise ValueError(
                f"need 0 <= objects_min <= objects_max, got "
                f"[{self.objects_min}, {self.objects_max}]"
            )


def _bounding_radius(shape):
    if shape.kind == "ellipse":
        return max(shape.ay, shape.ax)
    return float(np.hypot(shape.ay, shape.ax))


def _rotated_offsets(shape, size):
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    dy = y - shape.cy
    dx = x - shape.cx
    c = np.cos(shape.rotation)
    s = np.sin(shape.rotation)
    return dx * c + dy * s, -dx * s + dy * c  # (x', y') in the shape frame


def _signed_distance(shape, size):
    """Approximate signed distance to the shape boundary (negative inside)."""
    xp, yp = _rotated_offsets(shape, size)
    if shape.kind == "ellipse":
        rho = np.sqrt((xp / shape.ax) ** 2 + (yp / shape.ay) ** 2)
        grad = np.sqrt((xp / shape.ax**2) ** 2 + (yp / shape.ay**2) ** 2)
        # first-order distance (rho - 1) / |grad rho|; exact enough near the
        # boundary, which is all the anti-aliasing ramp uses
        return np.where(grad > 1e-12, (rho - 1.0) * rho / np.maximum(grad, 1e-12),
                        -min(shape.ax, shape.ay))
    qx = np.abs(xp) - shape.ax
    qy = np.abs(yp) - shape.ay
    outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
    inside = np.minimum(np.maximum(qx, qy), 0.0)
    return outside + inside


def _inside(shape, size):
    xp, yp = _rotated_offsets(shape, size)
    if shape.kind == "ellipse":
        return (xp / shape.ax) ** 2 + (yp / shape.ay) ** 2 <= 1.0
    return (np.abs(xp) <= shape.ax) & (np.abs(yp) <= shape.ay)


def _band_limited_texture(size, rng):
    wn = rng.standard_normal((size, size))
    d = radial_frequency(size, size)
    band = (d >= TEXTURE_BAND[0]) & (d <= TEXTURE_BAND[1])
    mag, phase = decompose(fft2(wn))
    tex = ifft2(compose(mag * band, phase))
    peak = np.max(np.abs(tex))
    if peak == 0.0:
        return tex
    return tex * (TEXTURE_AMPLITUDE / peak)


def render_pair(geometry, size, rng, background=0.5):
    """Render the flat and shaded images for one geometry record list.

    The generator drives only the shading (gradient direction, texture);
    geometry itself is taken as given.  Raises if any shape's bounding
    circle leaves the canvas.
    """
    for i, shape in enumerate(geometry):
        if shape.kind not in SHAPE_KINDS:
            raise ValueError(f"shape {i}: unknown kind {shape.kind!r}")
        bound = _bounding_radius(shape)
        if (
            shape.cy - bound < 0
            or shape.cy + bound > size - 1
            or shape.cx - bound < 0
            or shape.cx + bound > size - 1
        ):
            raise ValueError(f"shape {i} extends outside the {size}x{size} canvas")

    flat = np.full((size, size), background)
    shaded = np.full((size, size), background)
    for shape in geometry:
        flat[_inside(shape, size)] = shape.intensity
        coverage = np.clip(0.5 - _signed_distance(shape, size), 0.0, 1.0)
        shaded = shaded * (1.0 - coverage) + shape.intensity * coverage

    theta = rng.uniform(0.0, 2.0 * np.pi)
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    center = (size - 1) / 2.0
    plane = (x - center) * np.cos(theta) + (y - center) * np.sin(theta)
    plane /= np.max(np.abs(plane))
    shaded = shaded + GRADIENT_AMPLITUDE * plane + _band_limited_texture(size, rng)

    return SamplePair(
        flat=flat,
        shaded=np.clip(shaded, 0.0, 1.0),
        geometry=list(geometry),
        background=background,
    )


MIN_CONTRAST = 0.25  # |shape intensity - background|, keeps edges visible
AXES_RANGE = (0.16, 0.28)  # semi-extents as a fraction of the canvas side


def _sample_geometry(size, k, rng, background):
    geometry = []
    for _ in range(k):
        kind = SHAPE_KINDS[int(rng.integers(0, 2))]
        ay = rng.uniform(AXES_RANGE[0] * size, AXES_RANGE[1] * size)
        ax = rng.uniform(AXES_RANGE[0] * size, AXES_RANGE[1] * size)
        rotation = rng.uniform(0.0, np.pi)
        intensity = rng.uniform(0.02, 0.98)
        while abs(intensity - background) < MIN_CONTRAST:
            intensity = rng.uniform(0.02, 0.98)
        bound = float(np.hypot(ay, ax))  # conservative for both kinds
        margin = bound + 1.0
        cy = rng.uniform(margin, size - 1 - margin)
        cx = rng.uniform(margin, size - 1 - margin)
        geometry.append(ShapeSpec(kind, cy, cx, ay, ax, rotation, intensity))
    return geometry


def generate_corpus(config):
    """Deterministic list of SamplePair; pair p uses RNG substream p."""
    root = make_rng(config.seed)
    pairs = []
    for p in range(config.count):
        rng = substream(root, p)
        background = rng.uniform(0.1, 0.9)
        k = int(rng.integers(config.objects_min, config.objects_max + 1))
        geometry = _sample_geometry(config.size, k, rng, background)
        pairs.append(render_pair(geometry, config.size, rng, background=background))
    return pairs
