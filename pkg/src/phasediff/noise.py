"""Structured noise built from an image's Fourier phase.

The central construction: keep the input image's phase spectrum, replace
the magnitude spectrum with a random one, and invert.  The result is
noise-like in texture but carries the image's spatial layout.  A radial
frequency mask generalizes this to frequency-selective noise: image phase
inside the cutoff radius, random phase outside, with a Gaussian roll-off
between.  With no mask at all the construction degenerates to ordinary
Gaussian white noise.

Two magnitude sources are supported:
  gaussian_fft - magnitudes of the FFT of a fresh Gaussian white-noise
                 field (the random phase, when needed, comes from the same
                 draw, which makes the no-mask case reduce to that draw
                 exactly);
  rayleigh     - per-bin Rayleigh samples with scale 1/sqrt(2), drawn on
                 the canonical half-plane and mirrored (self-conjugate
                 bins are half-normal).  The scale makes E[A^2] = 1 per
                 bin, matching gaussian_fft under the unitary transform.

All functions draw from an explicit generator (see rng.py) and are
bitwise-deterministic given (inputs, spec, generator identity).
"""

from dataclasses import dataclass

import numpy as np

from .rng import substream
from .spectral import (
    _canonical_mask,
    _check_image,
    _self_conjugate_mask,
    compose,
    conj_mirror,
    decompose,
    fft2,
    hermitian_project,
    ifft2,
    radial_frequency,
)

MAGNITUDE_SOURCES = ("gaussian_fft", "rayleigh")

# Rayleigh scale giving E[A^2] = 1 per bin under the unitary transform;
# the raw sqrt(-2 ln U) form would give E[A^2] = 2.
RAYLEIGH_SCALE = 1.0 / np.sqrt(2.0)


class DegeneratePhaseError(Exception):
    """The input image is identically zero, so it has no phase to preserve."""


@dataclass
class NoiseSpec:
    """Recipe for one structured-noise draw.

    cutoff_radius None means no mask at all (pure Gaussian noise); a float
    r >= 0 keeps image phase inside radius r with a Gaussian transition of
    width sigma outside.  normalize rescales the output to unit sample
    variance (the mean is left untouched); it is skipped on the pure
    Gaussian path, which needs no correction.
    """

    magnitude_source: str = "gaussian_fft"
    cutoff_radius: float | None = None
    sigma: float = 2.0
    normalize: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.magnitude_source not in MAGNITUDE_SOURCES:
            raise ValueError(
                f"magnitude_source must be one of {MAGNITUDE_SOURCES}, "
                f"got {self.magnitude_source!r}"
            )
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.cutoff_radius is not None and self.cutoff_radius < 0:
            raise ValueError(f"cutoff_radius must be >= 0, got {self.cutoff_radius}")


@dataclass
class RadiusSampler:
    """Cutoff-radius distribution r = r0 + Exp(lam) used during training."""

    r0: float = 4.0
    lam: float = 0.1

    def __post_init__(self):
        if self.r0 < 0:
            raise ValueError(f"r0 must be >= 0, got {self.r0}")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")


def sample_cutoff_radius(sampler, rng):
    """Draw a cutoff radius r0 + Exp(lam); always >= r0."""
    return sampler.r0 + rng.exponential(scale=1.0 / sampler.lam)


def gaussian_magnitude(h, w, rng):
    """Magnitude spectrum of a Gaussian white-noise field.

    Under the unitary transform each bin has E[A^2] = 1.  Consumes one
    (h, w) standard-normal draw.
    """
    if h < 2 or w < 2:
        raise ValueError(f"grid must be at least 2x2, got {h}x{w}")
    eps = rng.standard_normal((h, w))
    return np.abs(fft2(eps))


def rayleigh_magnitude(h, w, rng):
    """Directly sampled Rayleigh magnitude spectrum, scale 1/sqrt(2).

    Canonical half-plane bins are i.i.d. Rayleigh and mirrored to the
    other half; self-conjugate bins are half-normal (as the real DC and
    Nyquist coefficients of a white-noise spectrum are).  Draw order:
    one (h, w) uniform grid, then one normal per self-conjugate bin in
    row-major order.
    """
    if h < 2 or w < 2:
        raise ValueError(f"grid must be at least 2x2, got {h}x{w}")
    u = 1.0 - rng.random((h, w))  # (0, 1]: excludes log(0)
    mag = RAYLEIGH_SCALE * np.sqrt(-2.0 * np.log(u))

    canonical = _canonical_mask(h, w)
    mag = np.where(canonical, mag, conj_mirror(mag))

    selfconj = _self_conjugate_mask(h, w)
    mag[selfconj] = np.abs(rng.standard_normal(int(selfconj.sum())))

    mag, _ = hermitian_project(mag, np.zeros_like(mag))
    return mag


def frequency_mask(h, w, r, sigma):
    """Radial mask: 1 inside radius r, Gaussian falloff of width sigma outside.

    Distances are wrapped signed frequencies, so the mask is symmetric
    under conjugate mirroring.  Entries are in [0, 1], exactly 1 for
    d <= r, and pointwise non-decreasing in r.
    """
    if r < 0:
        raise ValueError(f"cutoff radius must be >= 0, got {r}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    d = radial_frequency(h, w)
    return np.where(d <= r, 1.0, np.exp(-((d - r) ** 2) / (2.0 * sigma**2)))


def _draw_magnitude_and_phase(h, w, source, rng):
    """Random magnitude spectrum plus the random phase field to mix in.

    For gaussian_fft both come from the FFT of a single white-noise draw,
    so magnitude and phase together reproduce that draw exactly.  For
    rayleigh the phase comes from a second, independent white-noise draw.
    """
    if source == "gaussian_fft":
        eps = rng.standard_normal((h, w))
        mag, phase = decompose(fft2(eps))
        return mag, phase
    mag = rayleigh_magnitude(h, w, rng)
    _, phase = decompose(fft2(rng.standard_normal((h, w))))
    return mag, phase


def _structured(img, spec, rng, mask, magnitude=None):
    """Shared construction: mix phases with `mask`, invert, normalize."""
    img = _check_image(img)
    if not np.any(img):
        raise DegeneratePhaseError("image is identically zero: its phase is undefined")
    h, w = img.shape

    _, phase_img = decompose(fft2(img))
    rand_mag, rand_phase = _draw_magnitude_and_phase(h, w, spec.magnitude_source, rng)
    if magnitude is not None:
        rand_mag = np.asarray(magnitude, dtype=np.float64)
        if rand_mag.shape != img.shape:
            raise ValueError(f"magnitude override shape {rand_mag.shape} != image {img.shape}")

    # Literal weighted sum of principal-value phases; the 2*pi wrap
    # discontinuity only matters inside the narrow transition band.
    mixed = phase_img * mask + rand_phase * (1.0 - mask)
    mag, phase = hermitian_project(rand_mag, mixed)
    out = ifft2(compose(mag, phase))

    if spec.normalize:
        # Variance-only: divide by the sample standard deviation.  The
        # positive mean inherited from the DC bin (image phase there is 0)
        # is deliberately kept.
        out = out / out.std()
    return out


def phase_preserving_noise(img, spec, rng, magnitude=None):
    """Structured noise carrying the full phase spectrum of `img`.

    Equivalent to the masked construction with the mask saturated at 1
    everywhere (and consumes the generator identically, so it matches
    fss_noise bitwise once the cutoff exceeds the largest frequency).
    The `magnitude` argument overrides the random magnitude spectrum and
    exists for self-reconstruction checks.
    """
    img = _check_image(img)
    return _structured(img, spec, rng, np.ones(img.shape), magnitude=magnitude)


def fss_noise(img, spec, rng):
    """Frequency-selective structured noise.

    Image phase inside spec.cutoff_radius, random phase outside.  With
    cutoff_radius None the mask is identically zero, no image phase
    survives, and the construction degenerates to plain white noise: for
    the gaussian_fft source A_eps * exp(j*phi_eps) is the spectrum of the
    underlying draw, so that draw is returned as-is (standard diffusion
    exactly); no normalization is applied on the no-mask path.
    """
    img = _check_image(img)
    if not np.any(img):
        raise DegeneratePhaseError("image is identically zero: its phase is undefined")
    h, w = img.shape
    if spec.cutoff_radius is None:
        if spec.magnitude_source == "gaussian_fft":
            return rng.standard_normal((h, w))
        unnormalized = NoiseSpec(
            magnitude_source=spec.magnitude_source,
            cutoff_radius=None,
            sigma=spec.sigma,
            normalize=False,
            seed=spec.seed,
        )
        return _structured(img, unnormalized, rng, np.zeros((h, w)))
    mask = frequency_mask(h, w, spec.cutoff_radius, spec.sigma)
    return _structured(img, spec, rng, mask)


def noise_sequence(frames, spec, rng):
    """Independent structured noise per frame, one RNG substream each."""
    if len(frames) == 0:
        raise ValueError("frame list is empty")
    frames = [_check_image(f, f"frame {i}") for i, f in enumerate(frames)]
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise ValueError(f"frame {i} has shape {f.shape}, expected {shape}")
    return [fss_noise(f, spec, substream(rng, i)) for i, f in enumerate(frames)]
