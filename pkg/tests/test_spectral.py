import numpy as np
import pytest

from phasediff import make_rng
from phasediff.spectral import (
    SymmetryError,
    compose,
    conj_mirror,
    decompose,
    fft2,
    hermitian_project,
    ifft2,
    phase_mix,
    radial_frequency,
)


def random_image(rng, h=16, w=16):
    return rng.standard_normal((h, w))


def random_hermitian_field(rng, h=16, w=16):
    return fft2(rng.standard_normal((h, w)))


class TestFFT:
    def test_constant_image_dc_only(self):
        c = 2.5
        field = fft2(np.full((8, 8), c))
        assert field[0, 0] == pytest.approx(8 * c, abs=1e-12)  # c * sqrt(64)
        off_dc = field.copy()
        off_dc[0, 0] = 0
        assert np.max(np.abs(off_dc)) < 1e-12

    def test_impulse_flat_spectrum(self):
        img = np.zeros((4, 4))
        img[0, 0] = 1.0
        field = fft2(img)
        assert np.max(np.abs(field - 0.25)) < 1e-14

    def test_round_trip(self):
        x = random_image(make_rng(0))
        assert np.max(np.abs(ifft2(fft2(x)) - x)) < 1e-12

    def test_hermitian_symmetry_of_real_input(self):
        for seed in range(5):
            f = random_hermitian_field(make_rng(seed))
            assert np.max(np.abs(f - np.conj(conj_mirror(f)))) < 1e-12

    def test_parseval(self):
        for seed in range(5):
            x = random_image(make_rng(seed), 24, 18)
            sx = np.sum(x**2)
            sf = np.sum(np.abs(fft2(x)) ** 2)
            assert abs(sf - sx) / sx < 1e-9

    def test_rejects_nonfinite_with_index(self):
        x = np.zeros((4, 4))
        x[2, 3] = np.nan
        with pytest.raises(ValueError, match=r"\(2, 3\)"):
            fft2(x)

    def test_rejects_small_input(self):
        with pytest.raises(ValueError):
            fft2(np.zeros((1, 8)))


class TestIFFT:
    def test_zero_field(self):
        assert np.array_equal(ifft2(np.zeros((6, 6), dtype=complex)), np.zeros((6, 6)))

    def test_non_hermitian_field_rejected(self):
        f = fft2(random_image(make_rng(1)))
        f[3, 5] += 1.0  # breaks the conjugate pairing
        with pytest.raises(SymmetryError):
            ifft2(f)


class TestDecomposeCompose:
    def test_analytic_bin(self):
        f = np.zeros((4, 4), dtype=complex)
        f[1, 2] = 3 + 4j
        mag, phase = decompose(f)
        assert mag[1, 2] == pytest.approx(5.0)
        assert phase[1, 2] == pytest.approx(np.arctan2(4, 3))

    def test_branch_cut_negative_real(self):
        f = np.full((2, 2), -1 + 0j)
        _, phase = decompose(f)
        assert np.all(phase == np.pi)

    def test_zero_bin_phase_zero(self):
        mag, phase = decompose(np.zeros((3, 3), dtype=complex))
        assert np.all(phase == 0.0)
        assert np.all(mag == 0.0)

    def test_round_trips(self):
        f = random_hermitian_field(make_rng(2))
        mag, phase = decompose(f)
        assert np.max(np.abs(compose(mag, phase) - f)) < 1e-12
        mag2, phase2 = decompose(compose(mag, phase))
        assert np.max(np.abs(mag2 - mag)) < 1e-12
        assert np.max(np.abs(phase2 - phase)) < 1e-12

    def test_compose_all_ones(self):
        f = compose(np.ones((4, 4)), np.zeros((4, 4)))
        assert np.array_equal(f, np.ones((4, 4), dtype=complex))

    def test_compose_zero_magnitude(self):
        f = compose(np.zeros((4, 4)), np.full((4, 4), 1.3))
        assert np.max(np.abs(f)) == 0.0

    def test_compose_rejects_bad_input(self):
        with pytest.raises(ValueError, match="shape"):
            compose(np.ones((4, 4)), np.zeros((4, 5)))
        with pytest.raises(ValueError, match="negative"):
            compose(np.full((4, 4), -0.5), np.zeros((4, 4)))


class TestHermitianProject:
    def test_symmetric_input_unchanged(self):
        mag, phase = decompose(random_hermitian_field(make_rng(3)))
        mag_p, phase_p = hermitian_project(*hermitian_project(mag, phase))
        mag_q, phase_q = hermitian_project(mag_p, phase_p)
        assert np.array_equal(mag_p, mag_q)
        assert np.array_equal(phase_p, phase_q)

    def test_averaging_rule(self):
        mag = np.zeros((8, 8))
        mag[1, 2] = 2.0
        mag[7, 6] = 4.0  # conjugate mirror of (1, 2)
        mag_p, _ = hermitian_project(mag, np.zeros((8, 8)))
        assert mag_p[1, 2] == 3.0
        assert mag_p[7, 6] == 3.0

    def test_idempotent_bitwise(self):
        rng = make_rng(4)
        mag = np.abs(rng.standard_normal((10, 12)))
        phase = rng.uniform(-np.pi, np.pi, (10, 12))
        once = hermitian_project(mag, phase)
        twice = hermitian_project(*once)
        assert np.array_equal(once[0], twice[0])
        assert np.array_equal(once[1], twice[1])

    def test_output_satisfies_invariants_exactly(self):
        rng = make_rng(5)
        mag, phase = hermitian_project(
            np.abs(rng.standard_normal((6, 8))), rng.uniform(-np.pi, np.pi, (6, 8))
        )
        assert np.array_equal(mag, conj_mirror(mag))
        # antisymmetric up to the 2*pi wrap: mirror phase is the exact
        # negation, except that pi pairs with pi instead of -pi
        mirrored = conj_mirror(phase)
        ok = (mirrored == -phase) | ((phase == np.pi) & (mirrored == np.pi))
        assert np.all(ok)
        # self-conjugate bins: exactly 0 or pi
        for u, v in [(0, 0), (0, 4), (3, 0), (3, 4)]:
            assert phase[u, v] in (0.0, np.pi)
        # reconstructed field inverts to a real image without complaint
        ifft2(compose(mag, phase))


class TestPhaseMix:
    def test_self_mix_identity(self):
        a = make_rng(6).standard_normal((16, 16))
        assert np.max(np.abs(phase_mix(a, a) - a)) < 1e-12

    def test_output_phase_follows_phase_source(self):
        rng = make_rng(7)
        a, b = rng.standard_normal((2, 32, 32))
        mixed = phase_mix(a, b)
        mag_m, phase_m = decompose(fft2(mixed))
        _, phase_a = decompose(fft2(a))
        keep = mag_m > 1e-9
        delta = np.angle(np.exp(1j * (phase_m - phase_a)))
        assert np.max(np.abs(delta[keep])) < 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            phase_mix(np.zeros((8, 8)) + 1, np.ones((8, 10)))

    def test_structure_follows_phase_source(self):
        # derived oracle via the metrics module: the mixture's edges overlap
        # the phase donor far more than the magnitude donor
        from phasediff.corpus import SynthCorpusConfig, generate_corpus
        from phasediff.metrics import edge_iou

        pairs = generate_corpus(SynthCorpusConfig(count=2, size=64, seed=21))
        a, b = pairs[0].shaded, pairs[1].shaded
        mixed = phase_mix(a, b)
        assert edge_iou(mixed, a) > edge_iou(mixed, b)


class TestRadialFrequency:
    def test_wrapped_distances(self):
        d = radial_frequency(8, 8)
        assert d[0, 0] == 0.0
        assert d[4, 0] == 4.0  # Nyquist row
        assert d[7, 0] == 1.0  # wraps to -1
        assert d[5, 6] == pytest.approx(np.hypot(3, 2))

    def test_mirror_symmetric(self):
        d = radial_frequency(10, 14)
        assert np.array_equal(d, conj_mirror(d))
