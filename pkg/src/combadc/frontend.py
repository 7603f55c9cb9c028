"""Signal synthesis and the DAC front-end model.

Produces the two stimulus families the testbench uses: single sine waves
for dynamic-range characterization, and the multi-channel subcarrier PAM4
burst. Both are then pushed through a model of a coarse, fast DAC
(few-bit quantization, clipping, a residual-noise calibration term, and a
reconstruction low-pass).

Channel construction note: each channel's PAM4 baseband is shaped with a
root-raised-cosine, converted to its analytic form, shifted up by
``baseband_offset`` and the real part taken, and only then multiplied
onto the ``k * channel_spacing`` subcarrier. The resulting double-sideband
spectrum occupies the channel slot symmetrically with a small spectral
hole at the subcarrier itself. After sub-band downconversion the two
sidebands fold onto each other coherently, so the recovered baseband is
an ordinary offset-carrier PAM signal instead of an irrecoverable
self-overlapped one; the hole is what keeps the content clear of the
receiver's AC-coupling notch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SignalError
from .waveform import (
    SampledWaveform,
    analytic,
    apply_fir,
    fir_lowpass,
    rrc_taps,
    time_vector,
)

__all__ = [
    "ScmConfig",
    "DacConfig",
    "gen_pam4_symbols",
    "scm_waveform",
    "sine_waveform",
    "quantize_midrise",
    "dequantize_midrise",
    "dac_model",
    "waveform_to_csv",
    "symbols_to_csv",
]


@dataclass
class ScmConfig:
    """Shape of the subcarrier-multiplexed PAM4 burst."""

    n_channels: int = 10
    channel_spacing: float = 1e9
    baud: float = 800e6
    baseband_offset: float = 40e6
    rolloff: float = 0.1
    duration: float = 2.048e-6
    levels: int = 4
    # rms drive level of the composite at the DAC, as a fraction of DAC
    # full scale; chosen by calibration (sets how hard the converter and
    # its clipping are exercised)
    drive_rms: float = 0.48
    # None means all channels transmit; otherwise 1-based indices
    active_channels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n_channels < 1:
            raise SignalError("need at least one channel")
        if self.baud * (1.0 + self.rolloff) > self.channel_spacing:
            raise SignalError(
                "channel grid too dense: baud*(1+rolloff) exceeds channel spacing"
            )
        if not 0.0 < self.baseband_offset < self.channel_spacing / 2.0:
            raise SignalError("baseband offset must lie inside half a channel slot")

    @property
    def symbols_per_burst(self) -> int:
        return int(np.floor(self.duration * self.baud))

    @property
    def occupied_bandwidth(self) -> float:
        """Upper spectral edge of the composite."""
        return (
            self.n_channels * self.channel_spacing
            + self.baseband_offset
            + self.baud * (1.0 + self.rolloff) / 2.0
        )

    def active_set(self) -> tuple[int, ...]:
        if self.active_channels is None:
            return tuple(range(1, self.n_channels + 1))
        return self.active_channels


@dataclass
class DacConfig:
    bits: int = 6
    rate: float = 32e9
    lpf_cutoff: float | None = 11e9
    full_scale: float = 1.0
    # total added white noise, dB relative to a full-scale sine, integrated
    # over the whole output Nyquist band; None disables the term.
    # Calibration knob standing in for every converter imperfection the
    # bit count alone does not capture.
    residual_noise_db: float | None = -34.0

    def __post_init__(self):
        if self.bits < 1:
            raise SignalError("DAC needs at least 1 bit")
        if self.lpf_cutoff is not None and self.lpf_cutoff >= self.rate / 2:
            raise SignalError("DAC reconstruction filter must sit below Nyquist")
        if self.full_scale <= 0:
            raise SignalError("full scale must be positive")


def gen_pam4_symbols(count: int, seed, levels: int = 4) -> np.ndarray:
    """Uniform PAM symbols at unit mean power, deterministic per seed.

    Levels are { -(L-1), ..., -1, +1, ..., +(L-1) } in steps of 2, scaled
    by sqrt(3 / (L^2 - 1)); for PAM4 that is {-3,-1,+1,+3}/sqrt(5).
    ``seed`` may be an integer or a numpy Generator.
    """
    if count < 1:
        raise SignalError("symbol count must be >= 1")
    if levels < 2 or levels % 2 != 0:
        raise SignalError("PAM order must be an even count >= 2")
    rng = np.random.default_rng(seed)
    lattice = np.arange(-(levels - 1), levels, 2, dtype=np.float64)
    sym = rng.choice(lattice, size=count)
    return sym * np.sqrt(3.0 / (levels**2 - 1))


def _shaped_baseband(
    symbols: np.ndarray, sps: int, rolloff: float, n_out: int
) -> np.ndarray:
    """RRC-shape a symbol sequence onto a dense sample grid.

    Symbol m lands at sample m*sps; all filtering is zero-phase so that
    stays true at the output.
    """
    train = np.zeros(n_out)
    idx = np.arange(symbols.size) * sps
    train[idx] = symbols
    taps = rrc_taps(rolloff, sps, 16)
    # scale so the matched receive filter sees unit symbol amplitude
    return apply_fir(train, taps)


def scm_waveform(
    cfg: ScmConfig, per_channel_symbols: dict[int, np.ndarray], rate: float
) -> SampledWaveform:
    """Assemble the composite multi-channel burst at the simulation rate.

    ``per_channel_symbols`` maps 1-based channel index to its unit-power
    symbol sequence. The output is the plain sum of channels (no level
    scaling here; drive normalization happens at the DAC boundary), so the
    waveform is linear in any one channel's symbols.
    """
    if rate < 2.2 * cfg.n_channels * cfg.channel_spacing:
        raise SignalError(
            f"simulation rate {rate:g} too low for "
            f"{cfg.n_channels} channels on a {cfg.channel_spacing:g} Hz grid"
        )
    sps = rate / cfg.baud
    if abs(sps - round(sps)) > 1e-9:
        raise SignalError("simulation rate must be an integer multiple of the baud")
    sps = int(round(sps))
    n = int(round(cfg.duration * rate))
    n_sym = cfg.symbols_per_burst
    t = time_vector(n, rate)

    total = np.zeros(n)
    for k in cfg.active_set():
        if k not in per_channel_symbols:
            raise SignalError(f"missing symbols for channel {k}")
        sym = np.asarray(per_channel_symbols[k], dtype=np.float64)
        if sym.size != n_sym:
            raise SignalError(
                f"channel {k}: expected {n_sym} symbols, got {sym.size}"
            )
        p = _shaped_baseband(sym, sps, cfg.rolloff, n)
        p_a = analytic(SampledWaveform(p, rate)).samples
        offset_bb = np.real(p_a * np.exp(2j * np.pi * cfg.baseband_offset * t))
        total += offset_bb * np.cos(2.0 * np.pi * k * cfg.channel_spacing * t)
    return SampledWaveform(total, rate)


def sine_waveform(
    freq: float, amplitude: float, duration: float, rate: float
) -> SampledWaveform:
    """Pure cosine tone, phase 0 at t=0."""
    if not 0.0 <= freq < rate / 2.0:
        raise SignalError(f"tone at {freq:g} Hz does not fit below Nyquist of {rate:g}")
    n = int(round(duration * rate))
    if n < 1:
        raise SignalError("duration shorter than one sample")
    return SampledWaveform(
        amplitude * np.cos(2.0 * np.pi * freq * time_vector(n, rate)), rate
    )


def quantize_midrise(
    x: np.ndarray, bits: int, full_scale: float, clip: bool = True
) -> np.ndarray:
    """Uniform mid-rise quantizer: 2**bits codes across [-full_scale, +full_scale].

    Code c represents the interval [c*step, (c+1)*step); zero input maps
    to code 0. With ``clip`` the codes saturate at the rails; without it
    the transfer stays linear beyond full scale (ideal headroom).
    """
    step = full_scale / 2 ** (bits - 1)
    codes = np.floor(np.asarray(x, dtype=np.float64) / step)
    if clip:
        codes = np.clip(codes, -(2 ** (bits - 1)), 2 ** (bits - 1) - 1)
    return codes.astype(np.int64)


def dequantize_midrise(codes: np.ndarray, bits: int, full_scale: float) -> np.ndarray:
    step = full_scale / 2 ** (bits - 1)
    return (np.asarray(codes, dtype=np.float64) + 0.5) * step


def dac_model(
    x: SampledWaveform,
    cfg: DacConfig,
    seed,
    *,
    quantize: bool = True,
    clip: bool = True,
    residual_noise: bool = True,
    reconstruction_lpf: bool = True,
) -> SampledWaveform:
    """Convert an ideal waveform into what the coarse DAC actually emits.

    Stage order: clip, quantize, add the residual-noise calibration term,
    reconstruction low-pass. The keyword switches exist so impairment
    toggles can isolate each contribution; with everything off this is the
    identity.
    """
    if abs(x.rate - cfg.rate) > 1e-6 * cfg.rate:
        raise SignalError(
            f"waveform rate {x.rate:g} does not match DAC rate {cfg.rate:g}"
        )
    y = x.samples
    if clip:
        y = np.clip(y, -cfg.full_scale, cfg.full_scale)
    if quantize:
        codes = quantize_midrise(y, cfg.bits, cfg.full_scale, clip=clip)
        y = dequantize_midrise(codes, cfg.bits, cfg.full_scale)
    if residual_noise and cfg.residual_noise_db is not None:
        rng = np.random.default_rng(seed)
        fs_sine_power = cfg.full_scale**2 / 2.0
        sigma = np.sqrt(fs_sine_power * 10.0 ** (cfg.residual_noise_db / 10.0))
        y = y + rng.normal(0.0, sigma, y.size)
    if reconstruction_lpf and cfg.lpf_cutoff is not None:
        # tight transition: the spec'd bandwidth is the -6 dB point and the
        # passband stays flat to 0.96x cutoff, so in-band tones see no droop
        taps = fir_lowpass(
            cfg.lpf_cutoff, cfg.rate, transition_hz=0.08 * cfg.lpf_cutoff
        )
        y = apply_fir(y, taps)
    return SampledWaveform(y, cfg.rate)


def waveform_to_csv(wave: SampledWaveform, path) -> None:
    """Dump samples as ``index,value`` rows for external cross-checking."""
    with open(path, "w") as fh:
        fh.write(f"# rate_hz = {wave.rate!r}\n")
        fh.write("index,value\n")
        for i, v in enumerate(wave.samples):
            fh.write(f"{i},{v!r}\n")


def symbols_to_csv(symbols: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(symbols):
            fh.write(f"{i},{v!r}\n")
