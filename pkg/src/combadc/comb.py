"""Comb pair, modulator, and per-sub-band beat model.

The two combs share a seed laser and differ only in line spacing, so the
tone pair with index n beats optical content near n times the signal-comb
spacing down to an electrical band centered at n * delta_f. Because every
comb tone carries the same modulation, sub-band n can be simulated
directly from the modulator field factor mu(t) on an electrical-rate grid;
no THz-wide optical field is ever synthesized.

Phase bookkeeping: the seed laser's phase enters both beat terms
identically and cancels in the difference, so it never appears in the
differential phase track at all. What remains is the RF-synthesizer walk
(scaled by n, since tone n sits n harmonics out) and a slow thermal path
drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps
from scipy.constants import elementary_charge

from .errors import ConfigError, SignalError
from .seeding import derive_rng
from .units import db_to_amplitude_ratio, dbm_to_watts
from .waveform import (
    SampledWaveform,
    apply_fir,
    fir_lowpass,
    time_vector,
    white_noise,
    wiener_phase,
)

__all__ = [
    "CombSpec",
    "ScenarioCombs",
    "LinkConfig",
    "cascade_harmonics",
    "comb_from_cascade",
    "flat_comb",
    "validate_scaling",
    "ScalingCheck",
    "ScalingReport",
    "mzm_field",
    "subband_beat",
    "seed_coherence_check",
    "PhaseTrack",
    "comb_to_csv",
]

# reference bandwidth for optical SNR figures
_OSNR_REF_BW = 12.5e9


@dataclass
class CombSpec:
    """One comb: line spacing plus per-tone field amplitudes and phases.

    Amplitudes are linear field units normalized so the strongest tone is
    1.0; absolute power scaling lives in LinkConfig.
    """

    spacing: float
    n_tones: int
    tone_amps: np.ndarray
    tone_phases: np.ndarray = None
    drive_linewidth: float = 0.0

    def __post_init__(self):
        if self.spacing <= 0:
            raise ConfigError("comb spacing must be positive")
        if self.n_tones < 1:
            raise ConfigError("comb needs at least one tone")
        self.tone_amps = np.asarray(self.tone_amps, dtype=np.float64)
        if self.tone_amps.size != self.n_tones:
            raise ConfigError("tone amplitude list does not match n_tones")
        if np.any(self.tone_amps <= 0):
            raise ConfigError("tone amplitudes must be positive")
        if self.tone_phases is None:
            self.tone_phases = np.zeros(self.n_tones)
        else:
            self.tone_phases = np.asarray(self.tone_phases, dtype=np.float64)
            if self.tone_phases.size != self.n_tones:
                raise ConfigError("tone phase list does not match n_tones")
        if self.drive_linewidth < 0:
            raise ConfigError("drive linewidth must be non-negative")

    @property
    def flatness_db(self) -> float:
        """Max-to-min tone power ratio in dB."""
        return 20.0 * float(
            np.log10(self.tone_amps.max() / self.tone_amps.min())
        )

    @property
    def span_hz(self) -> float:
        return (self.n_tones - 1) * self.spacing


@dataclass
class ScenarioCombs:
    """The mutually coherent comb pair of one scenario."""

    signal: CombSpec
    lo: CombSpec
    seed_linewidth: float = 5e3
    differential_phase_drift: float = 0.0  # rad/s, slow thermal path drift
    mutually_coherent: bool = True

    def __post_init__(self):
        if self.lo.spacing <= self.signal.spacing:
            raise ConfigError(
                "LO comb must be spaced wider than the signal comb "
                "(delta_f would not be positive)"
            )
        if not self.mutually_coherent:
            raise ConfigError(
                "this model only covers the shared-seed architecture; "
                "mutually_coherent must stay true"
            )
        if self.seed_linewidth < 0:
            raise ConfigError("seed linewidth must be non-negative")

    @property
    def delta_f(self) -> float:
        return self.lo.spacing - self.signal.spacing

    @property
    def n_pairs(self) -> int:
        return min(self.signal.n_tones, self.lo.n_tones)


@dataclass
class LinkConfig:
    """Optical/electrical parameters of the analog link."""

    vpi: float = 3.5  # volts; inert since the drive is given as a fraction of it
    drive_scale: float = 0.3  # peak drive as a fraction of vpi
    sig_power_per_ch_dbm: float = -15.0
    lo_power_per_tone_dbm: float = -4.0  # 8 dBm comb minus 12 dB attenuation
    osnr_db: float = 55.0
    pd_bandwidth: float = 1.2e9
    tia_sat_dbm: float = -13.0
    cmrr_db: float = 35.0
    responsivity: float = 0.8
    thermal_noise_density: float = 4.4e-11  # A/sqrt(Hz), calibrated
    # post-DAC attenuation applied only in the sine-test path, dB. Keeps
    # the DAC itself fully exercised while the modulator sees a small
    # drive; calibrated so sine and multi-channel runs share one link.
    sine_backoff_db: float = 13.4

    def __post_init__(self):
        if not 0.0 < self.drive_scale <= 1.0:
            raise ConfigError("drive_scale must be in (0, 1]")
        if self.pd_bandwidth <= 0:
            raise ConfigError("photodiode bandwidth must be positive")
        if self.responsivity <= 0:
            raise ConfigError("responsivity must be positive")
        if self.thermal_noise_density < 0:
            raise ConfigError("thermal noise density must be non-negative")


def cascade_harmonics(
    pm_index: float, im_depth: float, n_grid: int = 4096
) -> np.ndarray:
    """Complex line amplitudes of the phase+intensity modulator cascade.

    Both modulators are driven by the same RF sine. The phase modulator
    contributes exp(j * pm_index * sin), the intensity modulator (biased
    at quadrature) a field factor cos(pi/4 + im_depth/2 * sin); im_depth 0
    means the intensity stage is absent. Returned array is fftshift
    ordered: index n_grid//2 is the carrier (0th harmonic).
    """
    if pm_index <= 0:
        raise ValueError("phase-modulation index must be positive")
    theta = 2.0 * np.pi * np.arange(n_grid) / n_grid
    drive = np.sin(theta)
    g = np.exp(1j * pm_index * drive)
    if im_depth != 0.0:
        g = g * np.cos(np.pi / 4.0 + 0.5 * im_depth * drive)
    return np.fft.fftshift(np.fft.fft(g)) / n_grid


def comb_from_cascade(
    pm_index: float,
    im_depth: float,
    n_tones: int,
    spacing: float = 26e9,
    drive_linewidth: float = 0.0,
) -> CombSpec:
    """Comb lines from a sinusoidally driven modulator cascade.

    Picks the flattest run of ``n_tones`` consecutive harmonics (the
    window maximizing the weakest line) and normalizes its peak to 1.
    Raises if no window keeps every line above -40 dBc of the global
    maximum - that means the drive does not generate enough usable lines.
    """
    c = cascade_harmonics(pm_index, im_depth)
    amps = np.abs(c)
    floor = amps.max() * db_to_amplitude_ratio(-40.0)
    usable = amps > floor
    best = None
    for start in range(amps.size - n_tones + 1):
        if not usable[start : start + n_tones].all():
            continue
        weakest = amps[start : start + n_tones].min()
        if best is None or weakest > best[1]:
            best = (start, weakest)
    if best is None:
        raise ValueError(
            f"modulator cascade (pm={pm_index}, im={im_depth}) does not yield "
            f"{n_tones} usable lines"
        )
    start = best[0]
    window = slice(start, start + n_tones)
    return CombSpec(
        spacing=spacing,
        n_tones=n_tones,
        tone_amps=amps[window] / amps[window].max(),
        tone_phases=np.angle(c[window]),
        drive_linewidth=drive_linewidth,
    )


def flat_comb(
    n_tones: int,
    spacing: float,
    tilt_db: float = 0.0,
    drive_linewidth: float = 0.0,
) -> CombSpec:
    """Idealized comb: equal tones, optionally with a linear power tilt.

    ``tilt_db`` is total power drop from the first to the last tone;
    0 keeps the comb perfectly flat.
    """
    if n_tones == 1 or tilt_db == 0.0:
        amps = np.ones(n_tones)
    else:
        ramp = np.arange(n_tones) / (n_tones - 1)
        amps = db_to_amplitude_ratio(-tilt_db * ramp)
    return CombSpec(
        spacing=spacing,
        n_tones=n_tones,
        tone_amps=amps,
        drive_linewidth=drive_linewidth,
    )


@dataclass
class ScalingCheck:
    name: str
    passed: bool
    margin_hz: float
    detail: str


@dataclass
class ScalingReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def validate_scaling(
    bandwidth_b: float, combs: ScenarioCombs, n_subbands: int | None = None
) -> ScalingReport:
    """Report whether the comb geometry can cover ``bandwidth_b``.

    Two conditions: the sub-band grid must tile the band (delta_f at
    least B/N for N sub-bands), and half the signal-comb spacing must
    exceed the band so neighboring tone images stay clear.
    """
    n = n_subbands if n_subbands is not None else combs.n_pairs
    need = bandwidth_b / n if n > 0 else 0.0
    c1 = ScalingCheck(
        name="subband-tiling",
        passed=combs.delta_f >= need,
        margin_hz=combs.delta_f - need,
        detail=f"delta_f {combs.delta_f:g} Hz vs B/N {need:g} Hz",
    )
    f_sig = combs.signal.spacing
    c2 = ScalingCheck(
        name="tone-separation",
        passed=f_sig > 2.0 * bandwidth_b or bandwidth_b == 0.0,
        margin_hz=f_sig - 2.0 * bandwidth_b,
        detail=f"f_sig/2 {f_sig / 2.0:g} Hz vs B {bandwidth_b:g} Hz",
    )
    return ScalingReport(checks=[c1, c2])


def mzm_field(
    v: SampledWaveform, vpi: float, drive_scale: float
) -> SampledWaveform:
    """Field factor of a null-biased interferometric modulator.

    ``v`` must be normalized to unit peak; the realized drive is
    drive_scale * vpi peak, giving mu = sin(pi/2 * drive_scale * v).
    At the null the carrier is suppressed and the field is an odd,
    nearly linear function of the drive.
    """
    peak = np.max(np.abs(v.samples))
    if peak > 1.0 + 1e-9:
        raise SignalError(
            f"modulator drive must be normalized to unit peak (got {peak:g})"
        )
    if not 0.0 < drive_scale <= 1.0:
        raise SignalError("drive_scale must be in (0, 1]")
    mu = np.sin(0.5 * np.pi * drive_scale * v.samples)
    return SampledWaveform(mu, v.rate)


def _differential_phase(
    n: int,
    combs: ScenarioCombs,
    n_samples: int,
    rate: float,
    seed: int,
    drive_phase_noise: bool = True,
    phase_drift: bool = True,
) -> np.ndarray:
    """Differential beat phase for tone pair n.

    The seed-laser contribution is common to both combs and cancels
    identically, so it is structurally absent here regardless of
    seed_linewidth. The RF-synthesizer walk scales by n; path drift does
    not (it is an optical path-length effect shared by all pairs).
    """
    theta = np.zeros(n_samples)
    if drive_phase_noise:
        lw = combs.signal.drive_linewidth + combs.lo.drive_linewidth
        if lw > 0:
            theta = theta + n * wiener_phase(
                lw, n_samples, rate, derive_rng(seed, "drive-phase")
            )
    if phase_drift and combs.differential_phase_drift != 0.0:
        theta = theta + combs.differential_phase_drift * time_vector(n_samples, rate)
    static = (
        combs.signal.tone_phases[n - 1] - combs.lo.tone_phases[n - 1]
    )
    if static != 0.0:
        theta = theta + static
    return theta


def subband_beat(
    mu: SampledWaveform,
    n: int,
    combs: ScenarioCombs,
    link: LinkConfig,
    seed: int,
    *,
    thermal: bool = True,
    shot: bool = True,
    osnr_beat: bool = True,
    drive_phase_noise: bool = True,
    phase_drift: bool = True,
    cmrr_leak: bool = True,
    tia_saturation: bool = True,
) -> SampledWaveform:
    """Balanced photocurrent of sub-band n, at the rate of ``mu``.

    The heterodyne term mixes the analytic modulation down by n * delta_f
    with the differential phase track applied; balanced-detection leakage
    adds an attenuated direct-detection |mu|^2 term; shot, thermal and
    amplified-spontaneous-emission beat noise enter as white currents.
    Everything then passes the photodiode band limit and the soft
    transimpedance saturation.
    """
    if not 1 <= n <= combs.n_pairs:
        raise SignalError(
            f"sub-band index {n} outside the available 1..{combs.n_pairs}"
        )
    rate = mu.rate
    if rate <= 2.0 * n * combs.delta_f:
        raise SignalError(
            f"modulation grid at {rate:g} Sa/s cannot represent the "
            f"{n * combs.delta_f:g} Hz downshift for sub-band {n}"
        )

    p_ch = dbm_to_watts(link.sig_power_per_ch_dbm)
    p_lo = dbm_to_watts(link.lo_power_per_tone_dbm)
    r = link.responsivity

    gain = (
        2.0
        * r
        * np.sqrt(p_ch * p_lo)
        * combs.signal.tone_amps[n - 1]
        * combs.lo.tone_amps[n - 1]
    )

    mu_a = sps.hilbert(mu.samples)
    theta = _differential_phase(
        n,
        combs,
        mu.n,
        rate,
        seed,
        drive_phase_noise=drive_phase_noise,
        phase_drift=phase_drift,
    )
    t = time_vector(mu.n, rate)
    lo_mix = np.exp(1j * (theta - 2.0 * np.pi * n * combs.delta_f * t))
    i = gain * np.real(mu_a * lo_mix)

    if cmrr_leak and np.isfinite(link.cmrr_db):
        kappa = db_to_amplitude_ratio(-link.cmrr_db)
        i = i + kappa * r * p_ch * np.square(mu.samples)

    if thermal and link.thermal_noise_density > 0:
        i = i + white_noise(
            mu.n, rate, link.thermal_noise_density, derive_rng(seed, "thermal")
        )
    if shot:
        dens = np.sqrt(4.0 * elementary_charge * r * (p_lo + p_ch))
        i = i + white_noise(mu.n, rate, dens, derive_rng(seed, "shot"))
    if osnr_beat and np.isfinite(link.osnr_db):
        s_ase = p_ch * 10.0 ** (-link.osnr_db / 10.0) / _OSNR_REF_BW
        dens = 2.0 * r * np.sqrt(p_lo * s_ase)
        i = i + white_noise(mu.n, rate, dens, derive_rng(seed, "osnr"))

    i = apply_fir(i, fir_lowpass(link.pd_bandwidth, rate))

    if tia_saturation:
        sat = 2.0 * r * np.sqrt(p_lo * dbm_to_watts(link.tia_sat_dbm))
        i = sat * np.tanh(i / sat)
    return SampledWaveform(i, rate)


@dataclass
class PhaseTrack:
    """Differential-phase diagnostic for one tone pair."""

    theta: np.ndarray
    rate: float
    subband_index: int
    rms_drift_rad: float
    seed_contribution_rad: float  # identically 0: common-mode cancellation


def seed_coherence_check(
    combs: ScenarioCombs,
    duration: float,
    n: int = 1,
    rate: float = 1e9,
    seed: int = 0,
) -> PhaseTrack:
    """Produce the differential phase track and its drift summary.

    The seed laser never contributes, whatever its linewidth; the track
    contains only the n-scaled synthesizer walk and the configured path
    drift.
    """
    n_samples = max(2, int(round(duration * rate)))
    theta = _differential_phase(n, combs, n_samples, rate, seed)
    return PhaseTrack(
        theta=theta,
        rate=rate,
        subband_index=n,
        rms_drift_rad=float(np.sqrt(np.mean(np.square(theta - theta[0])))),
        seed_contribution_rad=0.0,
    )


def comb_to_csv(comb: CombSpec, path, peak_dbm: float = 0.0) -> None:
    """Write ``tone_index,power_dbm,phase_rad`` rows.

    Powers are referenced so the strongest tone sits at ``peak_dbm``.
    """
    with open(path, "w") as fh:
        fh.write(f"# spacing_hz = {comb.spacing!r}\n")
        fh.write(f"# n_tones = {comb.n_tones}\n")
        fh.write("tone_index,power_dbm,phase_rad\n")
        peak = comb.tone_amps.max()
        for i, (a, ph) in enumerate(zip(comb.tone_amps, comb.tone_phases), start=1):
            p = peak_dbm + 20.0 * np.log10(a / peak)
            fh.write(f"{i},{p:.6f},{ph:.6f}\n")
