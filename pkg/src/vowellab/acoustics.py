"""Frequency-domain tube acoustics: transfer function, formants, synthesis.

Each tube section is a lossy cylindrical transmission line described by a
2x2 chain matrix; cascading the matrices from glottis to lips and closing
the line with a radiation load gives the volume-velocity transfer function
U_lips/U_glottis. Formants are picked from its magnitude, and vowels are
synthesized source-filter style from the same response.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve, find_peaks

from .errors import NearClosure, NumericalOverflow, TooFewPeaks
from .tract import AreaFunction

SPEED_OF_SOUND_CM_S = 35000.0   # warm moist air in the tract, 350 m/s
AIR_DENSITY_G_CM3 = 1.14e-3

DEFAULT_DF_HZ = 5.0
DEFAULT_F_MAX_HZ = 10000.0
FORMANT_SEARCH_HZ = (150.0, 5000.0)
PEAK_PROMINENCE_DB = 3.0

# Per-section attenuation alpha = LOSS_COEFF*sqrt(f)/radius picks up viscous
# and wall losses in one lumped term; the value is tuned to give formant
# bandwidths of a few tens of Hz, not derived from first principles.
LOSS_COEFF = 2.0e-4
ALPHA_FLOOR = 1e-7              # keeps |H| finite at exact resonances when lossless

CLOSURE_THRESHOLD_CM2 = 0.1

LF_ENERGY_THETA = 0.01
LF_BAND_HZ = 500.0


@dataclass(frozen=True)
class TransferFunction:
    """Linear magnitude of U_lips/U_glottis on a uniform ascending frequency grid."""

    freqs: np.ndarray
    magnitude: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=np.float64)
        m = np.asarray(self.magnitude, dtype=np.float64)
        if f.shape != m.shape or f.ndim != 1 or f.size < 2:
            raise ValueError("freqs and magnitude must be matching 1-d arrays")
        steps = np.diff(f)
        if f[0] < 0.0 or np.any(np.abs(steps - steps[0]) > 1e-9):
            raise ValueError("frequency grid must be uniform and start at >= 0 Hz")
        if not np.all(np.isfinite(m)) or np.any(m < 0.0):
            raise ValueError("magnitudes must be finite and >= 0")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "magnitude", m)

    @property
    def df(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


@dataclass(frozen=True)
class FormantPoint:
    f1: float
    f2: float

    def __post_init__(self):
        if not 0.0 < self.f1 < self.f2:
            raise ValueError(f"need 0 < f1 < f2, got ({self.f1}, {self.f2})")


def _chain_magnitude(
    area: AreaFunction,
    freqs: np.ndarray,
    speed_of_sound: float,
    loss_coeff: float,
    radiation: str,
) -> np.ndarray:
    """|U_lips/U_glottis| at the given frequencies for an open tract."""
    rho_c = AIR_DENSITY_G_CM3 * speed_of_sound
    k = 2.0 * np.pi * freqs / speed_of_sound

    a11 = np.ones_like(freqs, dtype=np.complex128)
    a12 = np.zeros_like(a11)
    a21 = np.zeros_like(a11)
    a22 = np.ones_like(a11)
    for area_i, len_i in zip(area.areas, area.lengths):
        radius = np.sqrt(area_i / np.pi)
        alpha = loss_coeff * np.sqrt(freqs) / radius + ALPHA_FLOOR
        gl = (alpha + 1j * k) * len_i
        e = np.exp(gl)
        ch = 0.5 * (e + 1.0 / e)
        sh = 0.5 * (e - 1.0 / e)
        z0 = rho_c / area_i
        b11 = ch
        b12 = z0 * sh
        b21 = sh / z0
        b22 = ch
        a11, a12 = a11 * b11 + a12 * b21, a11 * b12 + a12 * b22
        a21, a22 = a21 * b11 + a22 * b21, a21 * b12 + a22 * b22

    if radiation == "none":
        z_rad = 0.0
    else:
        area_lips = area.areas[-1]
        lip_radius = np.sqrt(area_lips / np.pi)
        ka = k * lip_radius
        z_rad = (rho_c / area_lips) * 0.5 * ka**2
        if radiation == "baffle":
            # piston in an infinite baffle, low-ka expansion
            z_rad = z_rad + 1j * (rho_c / area_lips) * (8.0 / (3.0 * np.pi)) * ka
        elif radiation != "resistive":
            raise ValueError(f"unknown radiation model: {radiation!r}")

    denom = a21 * z_rad + a22
    if not np.all(np.isfinite(denom)):
        raise NumericalOverflow("chain-matrix cascade produced non-finite entries")
    return np.abs(1.0 / denom)


def transfer_function(
    area: AreaFunction,
    f_max: float = DEFAULT_F_MAX_HZ,
    df: float = DEFAULT_DF_HZ,
    speed_of_sound: float = SPEED_OF_SOUND_CM_S,
    loss_coeff: float = LOSS_COEFF,
    radiation: str = "baffle",
    closure_threshold: float = CLOSURE_THRESHOLD_CM2,
) -> TransferFunction:
    """Volume-velocity transfer function on the grid {df, 2*df, ..., f_max}.

    radiation selects the lip termination: "baffle" (piston in an infinite
    baffle, the campaign default), "resistive" (radiation resistance only),
    or "none" (ideal open end; under it the response depends only on area
    ratios, which the scaling property tests rely on).

    Raises NearClosure when a section is below the closure threshold
    (prefilter bypass) and NumericalOverflow on non-finite cascades.
    """
    if df <= 0.0:
        raise ValueError("df must be > 0")
    if f_max < 5000.0:
        raise ValueError("f_max must be >= 5000 Hz")
    if np.min(area.areas) < closure_threshold:
        raise NearClosure(
            f"min section area {np.min(area.areas):.4f} cm^2 below {closure_threshold} cm^2"
        )
    n = int(np.floor(f_max / df + 1e-9))
    freqs = df * np.arange(1, n + 1)
    mag = _chain_magnitude(area, freqs, speed_of_sound, loss_coeff, radiation)
    return TransferFunction(freqs=freqs, magnitude=mag)


def pick_formants(
    tf: TransferFunction,
    prominence_db: float = PEAK_PROMINENCE_DB,
    search_hz: tuple = FORMANT_SEARCH_HZ,
) -> FormantPoint:
    """Return the two lowest spectral peaks as (F1, F2).

    Peaks are local maxima of the log magnitude with at least prominence_db
    of prominence, restricted to the search band, each refined by parabolic
    interpolation over its log-magnitude neighbours. Raises TooFewPeaks when
    fewer than two qualify.
    """
    if tf.freqs[0] > 50.0 or tf.freqs[-1] < 5000.0:
        raise ValueError("transfer function grid must cover at least [50, 5000] Hz")
    log_mag = 20.0 * np.log10(np.maximum(tf.magnitude, 1e-30))
    peaks, _ = find_peaks(log_mag, prominence=prominence_db)
    lo, hi = search_hz
    peaks = [p for p in peaks if lo <= tf.freqs[p] <= hi]
    if len(peaks) < 2:
        raise TooFewPeaks(f"found {len(peaks)} qualifying peaks, need 2")

    df = tf.df
    refined = []
    for p in peaks[:2]:
        f = tf.freqs[p]
        if 0 < p < len(log_mag) - 1:
            y0, y1, y2 = log_mag[p - 1], log_mag[p], log_mag[p + 1]
            curv = y0 - 2.0 * y1 + y2
            if curv < 0.0:
                f = f + 0.5 * (y0 - y2) / curv * df
        refined.append(float(f))
    return FormantPoint(f1=refined[0], f2=refined[1])


def _fir_from_magnitude(area: AreaFunction, sr: float, n_fir: int, tf_kwargs: dict) -> np.ndarray:
    """Linear-phase FIR matching the tract magnitude response."""
    freqs = np.fft.rfftfreq(n_fir, d=1.0 / sr)
    mag = _chain_magnitude(
        area,
        freqs,
        tf_kwargs.get("speed_of_sound", SPEED_OF_SOUND_CM_S),
        tf_kwargs.get("loss_coeff", LOSS_COEFF),
        tf_kwargs.get("radiation", "baffle"),
    )
    h = np.fft.irfft(mag, n=n_fir)
    h = np.roll(h, n_fir // 2) * np.hanning(n_fir)
    return h


def synthesize_vowel(
    area: AreaFunction,
    f0: float,
    dur: float,
    sr: float = 44100.0,
    closure_threshold: float = CLOSURE_THRESHOLD_CM2,
    **tf_kwargs,
) -> np.ndarray:
    """Source-filter synthesis of a static vowel.

    The source is a differentiated Hann-pulse train (about -12 dB/octave
    rolloff); the filter is a linear-phase FIR built from the transfer
    function magnitude. Output is peak-normalized to 0.9 full scale and
    has exactly round(dur*sr) samples. Deterministic.
    """
    if not 50.0 <= f0 <= 500.0:
        raise ValueError("f0 must lie in [50, 500] Hz")
    if dur <= 0.0:
        raise ValueError("dur must be > 0")
    if sr < 20000.0:
        raise ValueError("sample rate must be >= 20 kHz (twice the feature-band maximum)")
    if np.min(area.areas) < closure_threshold:
        raise NearClosure("cannot synthesize a sealed tract")

    n = int(round(dur * sr))
    period = sr / f0
    pulse_times = np.arange(0.0, n, period)
    train = np.zeros(n + 1)
    train[np.round(pulse_times).astype(int)] = 1.0

    width = max(8, int(round(0.66 * period)))
    flow = fftconvolve(train, np.hanning(width))[: n + 1]
    source = np.diff(flow)

    fir = _fir_from_magnitude(area, sr, 4096, tf_kwargs)
    y = fftconvolve(source, fir)[2048 : 2048 + n]

    peak = np.max(np.abs(y))
    if peak > 0.0:
        y = 0.9 * (y / peak)
    return y


def low_frequency_energy_ok(
    waveform: np.ndarray,
    sr: float,
    theta: float = LF_ENERGY_THETA,
    band_hz: float = LF_BAND_HZ,
) -> bool:
    """True iff spectral energy below band_hz is at least theta of the total.

    Silent signals are rejected (phonation did not happen).
    """
    x = np.asarray(waveform, dtype=np.float64)
    if x.size == 0:
        raise ValueError("waveform is empty")
    spec = np.abs(np.fft.rfft(x)) ** 2
    total = float(spec.sum())
    if total <= 0.0:
        return False
    freqs = np.fft.rfftfreq(x.size, d=1.0 / sr)
    low = float(spec[freqs <= band_hz].sum())
    return low >= theta * total


def export_transfer_function(tf: TransferFunction, path) -> None:
    """Write a two-column CSV (freq_hz, magnitude)."""
    with open(path, "w") as fh:
        fh.write("freq_hz,magnitude\n")
        for f, m in zip(tf.freqs, tf.magnitude):
            fh.write(f"{float(f)!r},{float(m)!r}\n")
