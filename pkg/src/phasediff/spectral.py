"""Unitary 2D Fourier transforms and phase/magnitude manipulation.

Images are plain H×W float64 arrays (H, W >= 2, all values finite).
Frequency fields are H×W complex128 arrays in DFT index order: bin (0,0)
is DC, no center shift.  Both transform directions carry a 1/sqrt(H*W)
factor, so Parseval holds with equal norms and the spectrum of unit
white noise has unit-variance coefficients.

A frequency field is Hermitian-symmetric, F(u,v) = conj(F(-u,-v)) with
indices wrapped mod (H,W), exactly when its inverse transform is real.
Magnitude/phase pairs inherit the constraint: magnitude is mirror-even,
phase is mirror-odd up to 2*pi, and self-conjugate bins (DC, plus the
Nyquist row/column for even sizes) are real, i.e. phase 0 or pi.
"""

import numpy as np


class SymmetryError(Exception):
    """Inverse transform asked to discard a non-negligible imaginary part."""


def _check_image(img, name="image"):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 2 or img.shape[1] < 2:
        raise ValueError(f"{name} must be a 2D array with both sides >= 2, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        bad = np.argwhere(~np.isfinite(img))[0]
        raise ValueError(f"{name} has a non-finite value at index ({bad[0]}, {bad[1]})")
    return img


def fft2(img):
    """Unitary forward transform of a real image."""
    img = _check_image(img)
    return np.fft.fft2(img, norm="ortho")


def ifft2(field, residue_tol=1e-10):
    """Unitary inverse transform, returning the real part.

    The field must be (numerically) Hermitian-symmetric; if the discarded
    imaginary part exceeds residue_tol times the max-abs of the real part,
    a SymmetryError is raised, since that signals broken symmetrization
    upstream rather than harmless rounding.
    """
    field = np.asarray(field, dtype=np.complex128)
    if not np.all(np.isfinite(field)):
        raise ValueError("frequency field has non-finite entries")
    spatial = np.fft.ifft2(field, norm="ortho")
    real = spatial.real
    residue = np.max(np.abs(spatial.imag))
    if residue > residue_tol * np.max(np.abs(real)):
        raise SymmetryError(
            f"imaginary residue {residue:.3e} exceeds {residue_tol:g} x max|real|; "
            "the field is not Hermitian-symmetric"
        )
    return real.copy()


def decompose(field):
    """Split a complex field into (magnitude, phase).

    Phase lies in (-pi, pi]; bins with zero magnitude get phase 0, and the
    atan2 output -pi is folded to +pi.
    """
    field = np.asarray(field, dtype=np.complex128)
    if not np.all(np.isfinite(field)):
        raise ValueError("frequency field has non-finite entries")
    mag = np.abs(field)
    phase = np.angle(field)
    phase[phase == -np.pi] = np.pi
    phase[mag == 0.0] = 0.0
    return mag, phase


def compose(mag, phase):
    """Rebuild the complex field mag * exp(1j * phase)."""
    mag = np.asarray(mag, dtype=np.float64)
    phase = np.asarray(phase, dtype=np.float64)
    if mag.shape != phase.shape:
        raise ValueError(f"shape mismatch: magnitude {mag.shape} vs phase {phase.shape}")
    if np.any(mag < 0):
        bad = np.argwhere(mag < 0)[0]
        raise ValueError(f"negative magnitude at index ({bad[0]}, {bad[1]})")
    return mag * np.exp(1j * phase)


def conj_mirror(a):
    """a evaluated at the conjugate-mirror bin: out[u,v] = a[-u mod H, -v mod W]."""
    a = np.asarray(a)
    h, w = a.shape
    return a[np.ix_((-np.arange(h)) % h, (-np.arange(w)) % w)]


def _canonical_mask(h, w):
    # True on one member of each conjugate pair (and on self-conjugate bins):
    # the lexicographically smaller of (u,v) and its mirror.
    u = np.arange(h)[:, None]
    v = np.arange(w)[None, :]
    mu = (-u) % h
    mv = (-v) % w
    return (u < mu) | ((u == mu) & (v <= mv))


def _self_conjugate_mask(h, w):
    u = np.arange(h)[:, None]
    v = np.arange(w)[None, :]
    return (u == (-u) % h) & (v == (-v) % w)


def hermitian_project(mag, phase):
    """Force a (magnitude, phase) pair onto the Hermitian manifold.

    Magnitude entries are averaged with their conjugate-mirror bin.  Phase
    keeps the canonical half-plane value and writes its exact negation into
    the mirror bin; self-conjugate bins are snapped to 0 or pi, whichever
    is nearer.  The output satisfies both symmetry invariants exactly and
    the projection is idempotent.
    """
    mag = np.asarray(mag, dtype=np.float64)
    phase = np.asarray(phase, dtype=np.float64)
    if mag.shape != phase.shape:
        raise ValueError(f"shape mismatch: magnitude {mag.shape} vs phase {phase.shape}")
    h, w = mag.shape

    mag_sym = 0.5 * (mag + conj_mirror(mag))

    canonical = _canonical_mask(h, w)
    phase_sym = np.where(canonical, phase, -conj_mirror(phase))
    phase_sym[phase_sym == -np.pi] = np.pi

    selfconj = _self_conjugate_mask(h, w)
    phase_sym[selfconj] = np.where(np.cos(phase_sym[selfconj]) >= 0.0, 0.0, np.pi)
    return mag_sym, phase_sym


def radial_frequency(h, w):
    """Wrapped radial frequency distance d(u,v) = sqrt(u_hat^2 + v_hat^2).

    u_hat = min(u, H-u) is the signed-frequency magnitude of bin u, so the
    distance is measured from DC in both directions and is symmetric under
    conjugate mirroring.
    """
    if h < 2 or w < 2:
        raise ValueError(f"grid must be at least 2x2, got {h}x{w}")
    u = np.minimum(np.arange(h), h - np.arange(h)).astype(np.float64)
    v = np.minimum(np.arange(w), w - np.arange(w)).astype(np.float64)
    return np.hypot(u[:, None], v[None, :])


def phase_mix(phase_source, magnitude_source):
    """Image with the phase of one input and the magnitude of the other.

    The classic structure/texture split: the result's layout follows
    phase_source while its spectrum energy follows magnitude_source.
    """
    phase_source = _check_image(phase_source, "phase_source")
    magnitude_source = _check_image(magnitude_source, "magnitude_source")
    if phase_source.shape != magnitude_source.shape:
        raise ValueError(
            f"dimension mismatch: {phase_source.shape} vs {magnitude_source.shape}"
        )
    mag, _ = decompose(fft2(magnitude_source))
    _, phase = decompose(fft2(phase_source))
    return ifft2(compose(mag, phase))
