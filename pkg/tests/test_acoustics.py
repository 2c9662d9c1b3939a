"""Resonance oracles: closed-form tube formants, scaling laws, and the
synthesis contract. Scaling checks run with ideal (open) termination and no
wall loss, where the physics is exactly scale-free; the campaign defaults add
loss and a radiation load, which break the pure laws by design."""

import numpy as np
import pytest

from vowellab.acoustics import (
    FormantPoint,
    TransferFunction,
    export_transfer_function,
    low_frequency_energy_ok,
    pick_formants,
    synthesize_vowel,
    transfer_function,
)
from vowellab.errors import NearClosure, TooFewPeaks
from vowellab.tract import AreaFunction

IDEAL = {"loss_coeff": 0.0, "radiation": "none"}


def uniform_tube(length_cm=17.5, area_cm2=2.5):
    return AreaFunction.uniform(length_cm, area_cm2)


def tube_formants(length_cm, n=2, speed=35000.0):
    """Odd quarter-wave resonances of an ideal uniform tube."""
    return [(2 * k + 1) * speed / (4.0 * length_cm) for k in range(n)]


class TestUniformTubeOracle:
    def test_adult_tube_quarter_wave_formants(self):
        tf = transfer_function(uniform_tube(17.5), df=1.0, **IDEAL)
        fp = pick_formants(tf)
        assert fp.f1 == pytest.approx(500.0, rel=0.01)
        assert fp.f2 == pytest.approx(1500.0, rel=0.01)

    def test_child_tube(self):
        tf = transfer_function(uniform_tube(12.25), df=1.0, **IDEAL)
        fp = pick_formants(tf)
        assert fp.f1 == pytest.approx(35000.0 / (4 * 12.25), rel=0.01)

    def test_area_does_not_move_uniform_tube_formants(self):
        fa = pick_formants(transfer_function(uniform_tube(17.5, 1.0), df=1.0, **IDEAL))
        fb = pick_formants(transfer_function(uniform_tube(17.5, 4.0), df=1.0, **IDEAL))
        assert fa.f1 == pytest.approx(fb.f1, rel=1e-6)
        assert fa.f2 == pytest.approx(fb.f2, rel=1e-6)


def random_open_tract(rng) -> AreaFunction:
    areas = rng.uniform(0.3, 4.0, 40)
    length = rng.uniform(12.0, 20.0)
    return AreaFunction(areas=areas, lengths=np.full(40, length / 40),
                        total_length=length)


class TestScalingProperties:
    def test_length_scaling_inverts_formants(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            af = random_open_tract(rng)
            scaled = AreaFunction(areas=af.areas, lengths=af.lengths * 0.8,
                                  total_length=af.total_length * 0.8)
            fa = pick_formants(transfer_function(af, df=1.0, **IDEAL))
            fb = pick_formants(transfer_function(scaled, df=1.0, **IDEAL))
            assert fb.f1 == pytest.approx(fa.f1 / 0.8, rel=0.01)
            assert fb.f2 == pytest.approx(fa.f2 / 0.8, rel=0.01)

    def test_uniform_area_scaling_leaves_formants(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            af = random_open_tract(rng)
            scaled = AreaFunction(areas=af.areas * 1.7, lengths=af.lengths,
                                  total_length=af.total_length)
            fa = pick_formants(transfer_function(af, df=1.0, **IDEAL))
            fb = pick_formants(transfer_function(scaled, df=1.0, **IDEAL))
            assert fb.f1 == pytest.approx(fa.f1, rel=1e-4)
            assert fb.f2 == pytest.approx(fa.f2, rel=1e-4)


class TestGridRefinement:
    def test_halving_df_converges_on_tube_resonance(self):
        errors = []
        for df in (8.0, 4.0, 2.0, 1.0):
            tf = transfer_function(uniform_tube(17.5), df=df, **IDEAL)
            errors.append(abs(pick_formants(tf).f1 - 500.0))
        # parabolic refinement keeps the error roughly O(df^2)
        assert errors[-1] <= errors[0]
        assert errors[-1] < 1.0

    def test_two_tube_self_consistency_under_refinement(self):
        areas = np.concatenate([np.full(20, 3.0), np.full(20, 0.8)])
        af = AreaFunction(areas=areas, lengths=np.full(40, 17.0 / 40),
                          total_length=17.0)
        coarse = pick_formants(transfer_function(af, df=5.0, **IDEAL))
        fine = pick_formants(transfer_function(af, df=1.0, **IDEAL))
        assert coarse.f1 == pytest.approx(fine.f1, abs=5.0)
        assert coarse.f2 == pytest.approx(fine.f2, abs=5.0)


class TestTransferFunction:
    def test_grid_definition(self):
        tf = transfer_function(uniform_tube(), f_max=8000.0, df=5.0)
        assert tf.freqs[0] == 5.0 and tf.freqs[-1] == 8000.0
        assert tf.df == pytest.approx(5.0)
        assert np.all(np.isfinite(tf.magnitude)) and np.all(tf.magnitude >= 0)

    def test_near_closure_raises(self):
        af = uniform_tube(17.5, 0.05)
        with pytest.raises(NearClosure):
            transfer_function(af)

    def test_bad_grid_rejected(self):
        with pytest.raises(ValueError):
            transfer_function(uniform_tube(), df=0.0)
        with pytest.raises(ValueError):
            transfer_function(uniform_tube(), f_max=3000.0)

    def test_unknown_radiation_rejected(self):
        with pytest.raises(ValueError, match="radiation"):
            transfer_function(uniform_tube(), radiation="horn")

    def test_radiation_load_lowers_formants(self):
        none = pick_formants(transfer_function(uniform_tube(), df=1.0,
                                               radiation="none"))
        baffle = pick_formants(transfer_function(uniform_tube(), df=1.0,
                                                 radiation="baffle"))
        assert baffle.f1 < none.f1  # end correction lengthens the tube

    def test_export_csv_round_trip(self, tmp_path):
        tf = transfer_function(uniform_tube(), f_max=6000.0)
        path = tmp_path / "tf.csv"
        export_transfer_function(tf, path)
        rows = [line.split(",")
                for line in path.read_text().splitlines()[1:]]
        freqs = np.array([float(r[0]) for r in rows])
        mags = np.array([float(r[1]) for r in rows])
        assert np.array_equal(freqs, tf.freqs)
        assert np.array_equal(mags, tf.magnitude)


class TestPeakPicking:
    def test_constructed_two_lorentzian_spectrum(self):
        freqs = np.arange(1.0, 5001.0, 1.0)
        lor = lambda f0, w: 1.0 / np.sqrt((1 - (freqs / f0) ** 2) ** 2
                                          + (freqs * w / f0 ** 2) ** 2)
        mag = lor(430.0, 60.0) + 0.5 * lor(1720.0, 90.0)
        tf = TransferFunction(freqs=freqs, magnitude=mag)
        fp = pick_formants(tf)
        # magnitude peak of this resonance sits at f0*sqrt(1 - w^2/(2 f0^2))
        peak = lambda f0, w: f0 * np.sqrt(1 - w ** 2 / (2 * f0 ** 2))
        assert fp.f1 == pytest.approx(peak(430.0, 60.0), abs=1.0)
        assert fp.f2 == pytest.approx(peak(1720.0, 90.0), abs=1.5)

    def test_peaks_outside_band_ignored(self):
        freqs = np.arange(1.0, 6001.0, 1.0)
        gauss = lambda f0, w: np.exp(-0.5 * ((freqs - f0) / w) ** 2)
        # 90 Hz hum and a 5.6 kHz artifact bracket two genuine formants
        mag = (10.0 * gauss(90.0, 10.0) + gauss(500.0, 50.0)
               + 0.7 * gauss(1500.0, 80.0) + 5.0 * gauss(5600.0, 40.0)) + 1e-6
        fp = pick_formants(TransferFunction(freqs=freqs, magnitude=mag))
        assert fp.f1 == pytest.approx(500.0, abs=2.0)
        assert fp.f2 == pytest.approx(1500.0, abs=2.0)

    def test_too_few_peaks(self):
        freqs = np.arange(1.0, 6001.0, 1.0)
        mag = np.exp(-0.5 * ((freqs - 800.0) / 60.0) ** 2) + 1e-6
        with pytest.raises(TooFewPeaks):
            pick_formants(TransferFunction(freqs=freqs, magnitude=mag))

    def test_formant_point_ordering_enforced(self):
        with pytest.raises(ValueError):
            FormantPoint(f1=900.0, f2=400.0)


class TestSynthesis:
    def test_output_contract(self):
        af = uniform_tube()
        y = synthesize_vowel(af, f0=120.0, dur=0.5, sr=44100.0)
        assert y.shape == (22050,)
        assert np.abs(y).max() == pytest.approx(0.9, abs=1e-12)

    def test_deterministic(self):
        af = uniform_tube()
        a = synthesize_vowel(af, f0=120.0, dur=0.25, sr=44100.0)
        b = synthesize_vowel(af, f0=120.0, dur=0.25, sr=44100.0)
        assert np.array_equal(a, b)

    def test_f0_visible_in_spectrum(self):
        af = uniform_tube()
        y = synthesize_vowel(af, f0=200.0, dur=0.5, sr=44100.0)
        spec = np.abs(np.fft.rfft(y))
        peak_hz = np.fft.rfftfreq(y.size, 1 / 44100.0)[np.argmax(spec)]
        # strongest line sits on a harmonic of f0
        assert peak_hz % 200.0 < 6.0 or 200.0 - peak_hz % 200.0 < 6.0

    def test_argument_validation(self):
        af = uniform_tube()
        with pytest.raises(ValueError):
            synthesize_vowel(af, f0=20.0, dur=0.5)
        with pytest.raises(ValueError):
            synthesize_vowel(af, f0=120.0, dur=0.5, sr=8000.0)

    def test_near_closure_propagates(self):
        af = uniform_tube(17.5, 0.02)
        with pytest.raises(NearClosure):
            synthesize_vowel(af, f0=120.0, dur=0.2)


class TestLowFrequencyEnergy:
    def test_vowel_passes(self):
        y = synthesize_vowel(uniform_tube(), f0=120.0, dur=0.3)
        assert low_frequency_energy_ok(y, 44100.0)

    def test_high_band_noise_fails(self):
        rng = np.random.default_rng(0)
        t = np.arange(8820) / 44100.0
        y = np.sin(2 * np.pi * 6000.0 * t) + 0.01 * rng.standard_normal(t.size)
        assert not low_frequency_energy_ok(y, 44100.0)

    def test_silence_fails(self):
        assert not low_frequency_energy_ok(np.zeros(4410), 44100.0)
