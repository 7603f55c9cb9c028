"""Sampled-waveform containers and the DSP primitives built on them.

Everything downstream (modulator, beat model, ADC, metrics, demod) moves
data around as :class:`SampledWaveform` and relies on the helpers here for
filtering, rate conversion, spectral estimation and noise synthesis.

Conventions the rest of the package depends on:

* ``periodogram`` windows are normalized to unit RMS, so the summed
  one-sided spectrum satisfies Parseval: ``sum(linear bins) == mean(x**2)``.
  Tone power is recovered by summing bins, and ratios of such sums are
  calibration-free. The default window is rectangular because test tones
  are placed on the bin grid (coherent sampling); Blackman-Harris 4-term
  is available for off-grid work.
* FIR application is zero-phase: odd-length symmetric taps applied with
  ``fftconvolve`` in ``same`` mode, so filtered waveforms stay aligned
  with their time axis and timing recovery reduces to a known delay of 0.
* Rate conversion only accepts ratios that reduce to small integer
  fractions; anything else is a configuration mistake, not something to
  approximate silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import signal as sps

from .errors import SignalError

__all__ = [
    "SampledWaveform",
    "ComplexWaveform",
    "SpectrumEstimate",
    "time_vector",
    "rms",
    "periodogram",
    "spectrum_to_csv",
    "analytic",
    "rrc_taps",
    "fir_lowpass",
    "apply_fir",
    "spectral_tilt_taps",
    "resample_waveform",
    "awgn",
    "white_noise",
    "wiener_phase",
]


@dataclass
class SampledWaveform:
    """A real-valued signal sampled uniformly at ``rate`` Sa/s."""

    samples: np.ndarray
    rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise SignalError("waveform samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(self.samples)):
            raise SignalError("waveform contains non-finite samples")
        if self.rate <= 0:
            raise SignalError("sample rate must be positive")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.n / self.rate

    def times(self) -> np.ndarray:
        return time_vector(self.n, self.rate)

    def copy(self) -> "SampledWaveform":
        return SampledWaveform(self.samples.copy(), self.rate)


@dataclass
class ComplexWaveform:
    """Complex (analytic / equivalent-baseband) signal at ``rate`` Sa/s."""

    samples: np.ndarray
    rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise SignalError("waveform samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(self.samples)):
            raise SignalError("waveform contains non-finite samples")
        if self.rate <= 0:
            raise SignalError("sample rate must be positive")

    @property
    def n(self) -> int:
        return self.samples.size


# windows accepted by periodogram, mapped to scipy names
_WINDOWS = {
    "rectangular": "boxcar",
    "blackman-harris-4term": "blackmanharris",
}

_DB_FLOOR = -400.0


@dataclass
class SpectrumEstimate:
    """Averaged one-sided power spectrum.

    ``power_db`` holds total power per bin (not density), so a sine of
    amplitude A contributes bins summing to A**2/2 and Parseval holds over
    the whole axis. Bins that come out exactly zero are clamped to -400 dB
    so serialized files stay finite.
    """

    bin_freqs: np.ndarray
    power_db: np.ndarray
    rbw: float
    n_fft: int
    n_avg: int
    window: str = "rectangular"
    power_linear: np.ndarray = field(default=None, repr=False)

    def band_mask(self, f_lo: float, f_hi: float) -> np.ndarray:
        """Boolean mask selecting bins with f_lo < freq <= f_hi."""
        return (self.bin_freqs > f_lo) & (self.bin_freqs <= f_hi)


def time_vector(n: int, rate: float) -> np.ndarray:
    return np.arange(n) / rate


def rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(np.abs(np.asarray(x))))))


def periodogram(
    wave: SampledWaveform,
    n_fft: int = 16384,
    n_avg: int = 1,
    window: str = "rectangular",
) -> SpectrumEstimate:
    """Average ``n_avg`` non-overlapping ``n_fft``-point periodograms.

    The window is rescaled to unit RMS so the estimate is power-calibrated
    (see module docstring).
    """
    if n_fft < 2 or (n_fft & (n_fft - 1)) != 0:
        raise SignalError(f"n_fft must be a power of two, got {n_fft}")
    if window not in _WINDOWS:
        raise SignalError(
            f"unknown window {window!r}; choose from {sorted(_WINDOWS)}"
        )
    x = wave.samples
    if x.size < n_fft * n_avg:
        raise SignalError(
            f"waveform too short for spectral estimate: have {x.size} samples, "
            f"need {n_fft}*{n_avg}"
        )

    w = sps.get_window(_WINDOWS[window], n_fft, fftbins=True)
    w = w / np.sqrt(np.mean(np.square(w)))

    acc = np.zeros(n_fft // 2 + 1)
    for k in range(n_avg):
        seg = x[k * n_fft : (k + 1) * n_fft] * w
        acc += np.square(np.abs(np.fft.rfft(seg)))
    p = acc / (n_avg * n_fft**2)

    # fold negative frequencies onto the positive side; DC and Nyquist
    # have no mirror partner
    p[1:-1] *= 2.0

    power_db = 10.0 * np.log10(np.maximum(p, 10.0 ** (_DB_FLOOR / 10.0)))
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / wave.rate)
    return SpectrumEstimate(
        bin_freqs=freqs,
        power_db=power_db,
        rbw=wave.rate / n_fft,
        n_fft=n_fft,
        n_avg=n_avg,
        window=window,
        power_linear=p,
    )


def spectrum_to_csv(spec: SpectrumEstimate, path) -> None:
    """Write ``freq_hz,power_db`` rows with a commented metadata header."""
    with open(path, "w") as fh:
        fh.write(f"# rbw_hz = {spec.rbw!r}\n")
        fh.write(f"# n_fft = {spec.n_fft}\n")
        fh.write(f"# n_avg = {spec.n_avg}\n")
        fh.write(f"# window = {spec.window}\n")
        fh.write("freq_hz,power_db\n")
        for f, p in zip(spec.bin_freqs, spec.power_db):
            fh.write(f"{f:.6f},{p:.6f}\n")


def analytic(wave: SampledWaveform) -> ComplexWaveform:
    """Analytic signal: real part equals the input, spectrum one-sided."""
    return ComplexWaveform(sps.hilbert(wave.samples), wave.rate)


def rrc_taps(rolloff: float, sps_per_sym: int, span: int) -> np.ndarray:
    """Root-raised-cosine taps, ``span * sps_per_sym + 1`` long, unit energy.

    rolloff: excess-bandwidth factor in [0, 1]; 0 degenerates to a sinc.
    sps_per_sym: samples per symbol, >= 2.
    span: filter length in symbols, even and >= 8 so the cascade of two
        such filters satisfies the Nyquist ISI criterion to ~1e-3.

    Unit tap energy means the matched cascade has unit gain at the symbol
    instants.
    """
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError("roll-off must lie in [0, 1]")
    if sps_per_sym < 2:
        raise ValueError("need at least 2 samples per symbol")
    if span < 8 or span % 2 != 0:
        raise ValueError("span must be even and >= 8 symbols")
    n = span * sps_per_sym + 1
    t = (np.arange(n) - (n - 1) / 2) / sps_per_sym
    h = np.empty(n)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            h[i] = 1.0 + rolloff * (4.0 / np.pi - 1.0)
        elif rolloff > 0 and abs(abs(ti) - 1.0 / (4.0 * rolloff)) < 1e-9:
            h[i] = (rolloff / np.sqrt(2.0)) * (
                (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * rolloff))
                + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * rolloff))
            )
        else:
            num = np.sin(np.pi * ti * (1.0 - rolloff)) + 4.0 * rolloff * ti * np.cos(
                np.pi * ti * (1.0 + rolloff)
            )
            den = np.pi * ti * (1.0 - (4.0 * rolloff * ti) ** 2)
            h[i] = num / den
    return h / np.sqrt(np.sum(np.square(h)))


def fir_lowpass(
    cutoff: float,
    rate: float,
    transition_hz: float | None = None,
    atten_db: float = 60.0,
) -> np.ndarray:
    """Linear-phase Kaiser low-pass, odd length.

    The default transition band is 0.6 * cutoff wide and sits above the
    cutoff, keeping content below 0.8 * cutoff flat within 0.5 dB and
    rejecting everything above 1.4 * cutoff by at least 40 dB. Pass
    ``transition_hz`` to pin the -6 dB point at ``cutoff`` with a chosen
    width instead (used where band selection has to be surgical).
    """
    nyq = rate / 2.0
    if not 0.0 < cutoff < nyq:
        raise SignalError(f"cutoff {cutoff:g} Hz out of range for rate {rate:g} Sa/s")
    if transition_hz is None:
        width = 0.6 * cutoff
        center = 1.1 * cutoff
    else:
        width = float(transition_hz)
        center = cutoff
    if center + width / 2.0 >= nyq:
        raise SignalError(
            f"low-pass design does not fit below Nyquist: cutoff {cutoff:g} Hz "
            f"at rate {rate:g} Sa/s"
        )
    numtaps, beta = sps.kaiserord(atten_db, width / nyq)
    numtaps += 1 - numtaps % 2
    return sps.firwin(numtaps, center, window=("kaiser", beta), fs=rate)


def apply_fir(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Filter with group-delay compensation (odd-length linear-phase taps)."""
    if taps.size % 2 != 1:
        raise SignalError("zero-phase application needs an odd tap count")
    return sps.fftconvolve(np.asarray(x, dtype=np.float64), taps, mode="same")


def spectral_tilt_taps(
    rate: float,
    tilt_db: float,
    f_lo: float = 0.1e9,
    f_hi: float = 10.0e9,
    numtaps: int = 257,
) -> np.ndarray:
    """FIR whose gain slopes linearly in dB from 0 at ``f_lo`` down to
    ``-tilt_db`` at ``f_hi``, flat outside that span.

    Stands in for the aggregate electrical roll-off of cabling and
    connectors with a single adjustable number.
    """
    nyq = rate / 2.0
    grid = np.linspace(0.0, nyq, 129)
    frac = np.clip((grid - f_lo) / (f_hi - f_lo), 0.0, 1.0)
    gain = 10.0 ** (-tilt_db * frac / 20.0)
    numtaps += 1 - numtaps % 2
    return sps.firwin2(numtaps, grid / nyq, gain)


def resample_waveform(wave: SampledWaveform, new_rate: float) -> SampledWaveform:
    """Polyphase-equivalent rate conversion for small rational ratios.

    Zero-stuff by the numerator, low-pass with a Kaiser FIR whose passband
    reaches 0.9 of the smaller Nyquist (flat within ~0.02 dB) and whose
    stopband starts at that Nyquist (>= 60 dB), then take every
    denominator-th sample. Output sample k sits at time k / new_rate, so
    downstream symbol indexing needs no offset hunting. The mean is
    carried around the filter so DC survives exactly.
    """
    ratio = new_rate / wave.rate
    frac = Fraction(ratio).limit_denominator(64)
    if frac.numerator > 64 or frac.numerator < 1:
        raise SignalError(f"unsupported resampling ratio {ratio!r}")
    if abs(float(frac) - ratio) > 1e-9 * ratio:
        raise SignalError(
            f"resampling ratio {ratio!r} does not reduce to a small fraction"
        )
    if frac == 1:
        return wave.copy()
    up, down = frac.numerator, frac.denominator
    x = wave.samples
    mean = x.mean()
    hi_rate = wave.rate * up
    stuffed = np.zeros(x.size * up)
    stuffed[::up] = (x - mean) * up
    f_half = 0.5 * min(wave.rate, new_rate)
    taps = fir_lowpass(0.95 * f_half, hi_rate, transition_hz=0.1 * f_half)
    y = apply_fir(stuffed, taps)[::down]
    return SampledWaveform(y + mean, new_rate)


def awgn(wave: SampledWaveform, noise_power: float, seed) -> SampledWaveform:
    """Add white Gaussian noise of the given variance (sample units squared).

    ``seed`` may be an integer or an existing numpy Generator.
    """
    if noise_power < 0:
        raise ValueError("noise power must be non-negative")
    if noise_power == 0:
        return wave.copy()
    rng = np.random.default_rng(seed)
    y = wave.samples + rng.normal(0.0, np.sqrt(noise_power), wave.n)
    return SampledWaveform(y, wave.rate)


def white_noise(n: int, rate: float, density: float, seed) -> np.ndarray:
    """Gaussian noise with one-sided spectral density ``density`` X/sqrt(Hz).

    Variance is density**2 * rate / 2, the density integrated over the
    Nyquist band.
    """
    rng = np.random.default_rng(seed)
    sigma = density * np.sqrt(rate / 2.0)
    return rng.normal(0.0, sigma, n)


def wiener_phase(linewidth: float, n: int, rate: float, seed) -> np.ndarray:
    """Random-walk phase track for a Lorentzian line of the given FWHM.

    Increment variance per sample is 2 * pi * linewidth / rate; the walk
    starts at zero. linewidth == 0 returns all zeros.
    """
    if linewidth < 0:
        raise ValueError("linewidth must be non-negative")
    if linewidth == 0.0:
        return np.zeros(n)
    rng = np.random.default_rng(seed)
    var = 2.0 * np.pi * linewidth / rate
    steps = rng.normal(0.0, np.sqrt(var), n - 1)
    return np.concatenate(([0.0], np.cumsum(steps)))
