"""Feature extraction oracles: mel geometry, a hand-built DCT matrix, CMVN
algebra, and the shared-pass extractor against the one-at-a-time calls."""

import json

import numpy as np
import pytest

from vowellab.acoustics import synthesize_vowel
from vowellab.errors import DimsMismatch, EmptyCorpus, SignalTooShort
from vowellab.features import (
    CMVN_STD_FLOOR,
    DEFAULT_PARAMS,
    FeatureBase,
    FeatureMatrix,
    FeatureParams,
    FeatureVariant,
    apply_cmvn,
    compute_cmvn_stats,
    enumerate_variants,
    extract,
    extract_bases,
    filter_centers_hz,
    hz_to_mel,
    invert_cmvn,
    log_mel,
    mel_filterbank,
    mel_to_hz,
    mfcc,
)
from vowellab.tract import AreaFunction

SR = 44100.0


@pytest.fixture(scope="module")
def vowel_wave():
    af = AreaFunction.uniform(17.5, 2.5)
    return synthesize_vowel(af, f0=120.0, dur=0.3, sr=SR)


def dct2_ortho_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis, rows are coefficients."""
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    c = np.cos(np.pi * k * (m + 0.5) / n)
    c[0] *= np.sqrt(1.0 / n)
    c[1:] *= np.sqrt(2.0 / n)
    return c


class TestMelGeometry:
    def test_scale_round_trip(self):
        f = np.array([0.0, 220.0, 1000.0, 4000.0, 10000.0])
        assert mel_to_hz(hz_to_mel(f)) == pytest.approx(f, abs=1e-9)

    def test_mel_1000hz_anchor(self):
        assert hz_to_mel(1000.0) == pytest.approx(2595.0 * np.log10(1 + 1000 / 700))

    def test_filterbank_shape_and_support(self):
        bank = mel_filterbank(SR)
        assert bank.shape == (26, 513)
        assert np.all(bank >= 0.0) and np.all(bank <= 1.0)
        assert np.all(bank.max(axis=1) > 0.0)

    def test_centers_monotone_and_bounded(self):
        centers = filter_centers_hz()
        assert centers.shape == (26,)
        assert np.all(np.diff(centers) > 0)
        assert centers[-1] < 10000.0

    def test_triangles_peak_near_centers(self):
        bank = mel_filterbank(SR)
        centers = filter_centers_hz()
        bin_freqs = np.arange(513) * SR / 1024
        peak_freqs = bin_freqs[bank.argmax(axis=1)]
        bin_width = SR / 1024
        assert np.all(np.abs(peak_freqs - centers) <= bin_width)


class TestLogMel:
    def test_frame_count_and_width(self, vowel_wave):
        fm = log_mel(vowel_wave, SR)
        expected_frames = 1 + (vowel_wave.size - 1024) // 512
        assert fm.values.shape == (expected_frames, 26)
        assert fm.variant == FeatureVariant(FeatureBase.LOGMEL)

    def test_silence_hits_log_floor(self):
        fm = log_mel(np.zeros(4096), SR)
        assert np.all(fm.values == np.log(1e-10))

    def test_log10_base_is_rescaled_natural_log(self, vowel_wave):
        nat = log_mel(vowel_wave, SR).values
        ten = log_mel(vowel_wave, SR,
                      params=FeatureParams(log_base="10")).values
        assert ten == pytest.approx(nat / np.log(10.0), abs=1e-12)

    def test_preemphasis_raises_spectral_tilt(self, vowel_wave):
        plain = log_mel(vowel_wave, SR).values
        emph = log_mel(vowel_wave, SR, hf_emphasis=True).values
        tilt = lambda v: v[:, 13:].mean() - v[:, :13].mean()
        assert tilt(emph) > tilt(plain)

    def test_too_short_signal(self):
        with pytest.raises(SignalTooShort):
            log_mel(np.zeros(1023), SR)

    def test_low_sample_rate_rejected(self):
        with pytest.raises(ValueError):
            log_mel(np.zeros(4096), 16000.0)


class TestMfcc:
    def test_matches_hand_built_dct(self, vowel_wave):
        logmel = log_mel(vowel_wave, SR).values
        manual = logmel @ dct2_ortho_matrix(26).T
        fm = mfcc(vowel_wave, SR, n=12)
        assert np.max(np.abs(fm.values - manual[:, :12])) < 1e-9
        fm22 = mfcc(vowel_wave, SR, n=22)
        assert np.max(np.abs(fm22.values - manual[:, :22])) < 1e-9

    def test_c0_dropped_when_configured(self, vowel_wave):
        p = FeatureParams(include_c0=False)
        logmel = log_mel(vowel_wave, SR).values
        manual = logmel @ dct2_ortho_matrix(26).T
        fm = mfcc(vowel_wave, SR, n=12, params=p)
        assert np.max(np.abs(fm.values - manual[:, 1:13])) < 1e-9

    def test_lifter_weights_applied_with_hf(self, vowel_wave):
        lifted = mfcc(vowel_wave, SR, n=12, hf_emphasis=True)
        raw = mfcc(vowel_wave, SR, n=12, hf_emphasis=True, apply_lifter=False)
        k = np.arange(12)
        w = 1.0 + 11.0 * np.sin(np.pi * k / 22.0)
        assert w[0] == 1.0 and w[11] == pytest.approx(12.0)
        assert lifted.values == pytest.approx(raw.values * w, abs=1e-12)

    def test_no_lifter_without_hf(self, vowel_wave):
        default = mfcc(vowel_wave, SR, n=12)
        explicit = mfcc(vowel_wave, SR, n=12, apply_lifter=False)
        assert np.array_equal(default.values, explicit.values)

    def test_bad_order_rejected(self, vowel_wave):
        with pytest.raises(ValueError):
            mfcc(vowel_wave, SR, n=13)


class TestVariants:
    def test_enumeration_is_ten(self):
        variants = enumerate_variants()
        assert len(variants) == 10
        assert len({v.name for v in variants}) == 10

    def test_names_round_trip(self):
        for v in enumerate_variants():
            assert FeatureVariant.from_name(v.name) == v
            assert FeatureVariant.from_descriptor(v.descriptor()) == v

    def test_expected_names_present(self):
        names = {v.name for v in enumerate_variants()}
        assert {"logmel", "logmel_hf", "mfcc12", "mfcc12_hf_cmvn",
                "mfcc22_cmvn"} <= names

    def test_dims(self):
        assert FeatureVariant.from_name("logmel").dims == 26
        assert FeatureVariant.from_name("mfcc12_hf").dims == 12
        assert FeatureVariant.from_name("mfcc22_cmvn").dims == 22

    def test_logmel_cmvn_rejected(self):
        with pytest.raises(ValueError):
            FeatureVariant(FeatureBase.LOGMEL, cmvn=True)


class TestExtractBases:
    def test_matches_individual_calls(self, vowel_wave):
        bases = extract_bases(vowel_wave, SR)
        assert set(bases) == {"logmel", "logmel_hf", "mfcc12", "mfcc12_hf",
                              "mfcc22", "mfcc22_hf"}
        for name, fm in bases.items():
            direct = extract(vowel_wave, SR, FeatureVariant.from_name(name))
            assert np.array_equal(fm.values, direct.values), name

    def test_extract_refuses_cmvn_variant(self, vowel_wave):
        with pytest.raises(ValueError):
            extract(vowel_wave, SR, FeatureVariant.from_name("mfcc12_cmvn"))


class TestCmvn:
    def make_corpus(self, seed=3, n=8):
        rng = np.random.default_rng(seed)
        variant = FeatureVariant(FeatureBase.MFCC12)
        return [FeatureMatrix(values=rng.normal(5.0, 3.0, (rng.integers(4, 9), 12)),
                              variant=variant) for _ in range(n)]

    def test_self_normalization(self):
        corpus = self.make_corpus()
        stats = compute_cmvn_stats(corpus)
        pooled = np.concatenate([apply_cmvn(fm, stats).values for fm in corpus])
        assert np.max(np.abs(pooled.mean(axis=0))) < 1e-6
        assert np.max(np.abs(pooled.std(axis=0) - 1.0)) < 1e-6

    def test_population_std_convention(self):
        variant = FeatureVariant(FeatureBase.MFCC12)
        values = np.zeros((2, 12))
        values[1] = 2.0
        stats = compute_cmvn_stats([FeatureMatrix(values=values, variant=variant)])
        assert stats.mean == pytest.approx(np.full(12, 1.0))
        assert stats.std == pytest.approx(np.full(12, 1.0))  # not ddof=1's sqrt(2)

    def test_constant_dimension_floored(self):
        variant = FeatureVariant(FeatureBase.MFCC12)
        values = np.ones((6, 12))
        stats = compute_cmvn_stats([FeatureMatrix(values=values, variant=variant)])
        assert np.all(stats.std == CMVN_STD_FLOOR)

    def test_apply_invert_round_trip(self):
        corpus = self.make_corpus(seed=9)
        stats = compute_cmvn_stats(corpus)
        fm = corpus[0]
        back = invert_cmvn(apply_cmvn(fm, stats), stats)
        assert np.max(np.abs(back.values - fm.values)) < 1e-12
        assert back.variant == fm.variant

    def test_variant_flag_toggles(self):
        corpus = self.make_corpus(seed=4, n=2)
        stats = compute_cmvn_stats(corpus)
        out = apply_cmvn(corpus[0], stats)
        assert out.variant.cmvn and out.variant.name == "mfcc12_cmvn"

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            compute_cmvn_stats([])

    def test_dims_mismatch(self):
        corpus = self.make_corpus(n=2)
        stats = compute_cmvn_stats(corpus)
        other = FeatureMatrix(values=np.ones((3, 22)),
                              variant=FeatureVariant(FeatureBase.MFCC22))
        with pytest.raises(DimsMismatch):
            apply_cmvn(other, stats)

    def test_mixed_variants_rejected(self):
        a = FeatureMatrix(values=np.ones((3, 12)),
                          variant=FeatureVariant(FeatureBase.MFCC12))
        b = FeatureMatrix(values=np.ones((3, 22)),
                          variant=FeatureVariant(FeatureBase.MFCC22))
        with pytest.raises(ValueError):
            compute_cmvn_stats([a, b])


class TestFeatureMatrix:
    def test_json_round_trip(self, vowel_wave):
        fm = mfcc(vowel_wave, SR, n=12, hf_emphasis=True)
        back = FeatureMatrix.from_json(fm.to_json())
        assert back.variant == fm.variant
        assert np.array_equal(back.values, fm.values)

    def test_json_is_plain_floats(self):
        fm = FeatureMatrix(values=np.ones((2, 12)),
                           variant=FeatureVariant(FeatureBase.MFCC12))
        doc = json.loads(fm.to_json())
        assert doc["frames"] == 2 and doc["dims"] == 12
        assert all(isinstance(x, float) for x in doc["values"])

    def test_width_enforced_for_cepstra(self):
        with pytest.raises(DimsMismatch):
            FeatureMatrix(values=np.ones((2, 13)),
                          variant=FeatureVariant(FeatureBase.MFCC12))

    def test_non_finite_rejected(self):
        values = np.ones((2, 12))
        values[0, 0] = np.nan
        with pytest.raises(ValueError):
            FeatureMatrix(values=values, variant=FeatureVariant(FeatureBase.MFCC12))
