"""Phase-preserving structured noise and toy diffusion training on top of it.

Submodules:
  spectral  - unitary FFTs, phase/magnitude split, Hermitian utilities
  noise     - structured / frequency-selective noise construction
  diffusion - flow-matching and DDPM forward processes and samplers
  denoiser  - small convolutional predictor with analytic gradients
  corpus    - paired synthetic flat/shaded shape dataset
  metrics   - phase correlation, SSIM, edge IoU, spectral distance
  io        - tensor container, PGM images, checkpoint bundles
  cli       - command-line front end over all of the above
"""

from . import corpus, denoiser, diffusion, io, metrics, noise, spectral
from .noise import NoiseSpec, RadiusSampler
from .rng import make_rng, substream

__all__ = [
    "NoiseSpec",
    "RadiusSampler",
    "corpus",
    "denoiser",
    "diffusion",
    "io",
    "make_rng",
    "metrics",
    "noise",
    "spectral",
    "substream",
]
