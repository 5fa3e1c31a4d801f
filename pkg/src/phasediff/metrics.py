"""Structural-alignment and similarity measurements.

phase_correlation quantifies how well two images agree in Fourier phase
(1 = identical layout, 0 = unrelated); ssim is the standard windowed
structural similarity for [0, 1]-range images; edge_iou compares
binarized gradient-magnitude maps; log_mag_distance compares radially
averaged magnitude spectra (a texture/realism proxy that ignores layout).
"""

from dataclasses import dataclass

import numpy as np

from .spectral import _check_image, fft2, radial_frequency

_MAG_FLOOR = 1e-9  # bins fainter than this carry no usable phase


@dataclass
class MetricsReport:
    phase_correlation: float
    ssim: float
    edge_iou: float
    log_mag_distance: float

    def lines(self):
        """key=value serialization used by the CLI."""
        return [
            f"phase_correlation={self.phase_correlation:.12g}",
            f"ssim={self.ssim:.12g}",
            f"edge_iou={self.edge_iou:.12g}",
            f"log_mag_distance={self.log_mag_distance:.12g}",
        ]


def _check_same(a, b):
    a = _check_image(a, "a")
    b = _check_image(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def phase_correlation(a, b):
    """Mean cosine of the per-bin phase difference, over shared live bins.

    DC is excluded; a bin counts only when both spectra have magnitude
    above 1e-9.  Returns 1 for identical images, -1 for a sign flip,
    about 0 for unrelated content.
    """
    a, b = _check_same(a, b)
    if not np.any(a) or not np.any(b):
        raise ValueError("phase correlation is undefined for an all-zero image")
    fa = fft2(a)
    fb = fft2(b)
    keep = (np.abs(fa) > _MAG_FLOOR) & (np.abs(fb) > _MAG_FLOOR)
    keep[0, 0] = False
    if not np.any(keep):
        raise ValueError("no shared non-DC bins above the magnitude floor")
    return float(np.mean(np.cos(np.angle(fa[keep]) - np.angle(fb[keep]))))


def _window_mean(x, k):
    """Mean over every fully-inside k x k window, via an integral image."""
    c = np.zeros((x.shape[0] + 1, x.shape[1] + 1))
    np.cumsum(np.cumsum(x, axis=0), axis=1, out=c[1:, 1:])
    return (c[k:, k:] - c[:-k, k:] - c[k:, :-k] + c[:-k, :-k]) / (k * k)


def ssim(a, b, window=8):
    """Mean local SSIM over all fully-inside sliding windows.

    Inputs are expected in [0, 1]; the stabilization constants are the
    standard C1 = (0.01)^2, C2 = (0.03)^2 for dynamic range 1.  Window
    moments use the population convention (no Bessel correction).
    """
    a, b = _check_same(a, b)
    if window < 2 or window > min(a.shape):
        raise ValueError(f"window must lie in [2, min(H, W)], got {window}")
    c1 = 0.01**2
    c2 = 0.03**2
    mu_a = _window_mean(a, window)
    mu_b = _window_mean(b, window)
    var_a = _window_mean(a * a, window) - mu_a**2
    var_b = _window_mean(b * b, window) - mu_b**2
    cov = _window_mean(a * b, window) - mu_a * mu_b
    s = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    )
    return float(np.mean(s))


def _gradient_magnitude(img):
    gy, gx = np.gradient(img)
    return np.hypot(gy, gx)


def edge_iou(a, b, threshold_quantile=0.9):
    """IoU of gradient-magnitude maps binarized at a per-image quantile.

    Strict > comparison, so constant images have empty edge sets; two
    empty edge sets count as perfect agreement (IoU 1).
    """
    a, b = _check_same(a, b)
    if not 0.0 < threshold_quantile < 1.0:
        raise ValueError(f"threshold_quantile must lie in (0, 1), got {threshold_quantile}")
    ga = _gradient_magnitude(a)
    gb = _gradient_magnitude(b)
    ea = ga > np.quantile(ga, threshold_quantile)
    eb = gb > np.quantile(gb, threshold_quantile)
    union = np.count_nonzero(ea | eb)
    if union == 0:
        return 1.0
    return float(np.count_nonzero(ea & eb) / union)


def radial_magnitude_profile(img):
    """Magnitude spectrum averaged over integer-rounded wrapped radius."""
    img = _check_image(img)
    mag = np.abs(fft2(img))
    radius = np.rint(radial_frequency(*img.shape)).astype(int).ravel()
    sums = np.bincount(radius, weights=mag.ravel())
    counts = np.bincount(radius)
    return sums / counts


def log_mag_distance(a, b):
    """Mean |log(1 + profile_a) - log(1 + profile_b)| over radius bins."""
    a, b = _check_same(a, b)
    pa = radial_magnitude_profile(a)
    pb = radial_magnitude_profile(b)
    return float(np.mean(np.abs(np.log1p(pa) - np.log1p(pb))))


def report(a, b):
    """All four metrics for one image pair."""
    return MetricsReport(
        phase_correlation=phase_correlation(a, b),
        ssim=ssim(a, b),
        edge_iou=edge_iou(a, b),
        log_mag_distance=log_mag_distance(a, b),
    )
