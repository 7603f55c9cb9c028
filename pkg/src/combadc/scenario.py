"""Declarative experiment description and its line-oriented config format.

A scenario file is plain text, one `section.key = value` per line, with
`#` comments and unit suffixes (`1ghz`, `70us`, `-15dbm`). An empty file
is a complete, runnable description of the reference system: ten 1 GHz
channels, 6-bit 32 GSa/s DAC, flat 24-tone comb pair offset by 1 GHz,
14-bit 2.4 GSa/s converter, every impairment enabled. Files written by
``dump_config`` parse back to an identical config, which is what makes
run manifests re-runnable.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .adc import AdcConfig
from .comb import (
    LinkConfig,
    ScenarioCombs,
    comb_from_cascade,
    flat_comb,
    validate_scaling,
)
from .demod import DemodConfig
from .errors import CombAdcError, ConfigError
from .frontend import DacConfig, ScmConfig

__all__ = [
    "CombsSection",
    "ImpairmentFlags",
    "MetricsSection",
    "RunSection",
    "ScenarioConfig",
    "SweepSection",
    "build_combs",
    "build_demod",
    "dump_config",
    "load_config",
    "validate_scenario",
]


@dataclass
class RunSection:
    master_seed: int = 12345
    # which source a run may consume; "auto" allows either subcommand
    source: str = "auto"
    # simulate all sub-bands from one burst instead of per-channel reruns
    parallel_bank: bool = False
    # analog-chain tilt, linear in dB across 0.1-10 GHz
    electrical_rolloff_db: float = 3.0


@dataclass
class SweepSection:
    start: float = 0.5e9
    stop: float = 10.5e9
    step: float = 0.25e9
    # snap tones onto the analysis FFT grid (coherent test); off means
    # off-grid frequencies measured through a 4-term window
    snap: bool = True
    duration: float = 70e-6


@dataclass
class CombsSection:
    f_sig: float = 26e9
    delta_f: float = 1e9
    n_tones: int = 24
    seed_linewidth: float = 5e3
    drive_linewidth: float = 0.0
    differential_drift: float = 0.0
    # applied to the signal comb only; the LO comb stays flat
    tone_tilt_db: float = 2.0
    source: str = "flat"  # flat | cascade
    cascade_pm: float = 18.2
    cascade_im: float = 1.6


@dataclass
class ImpairmentFlags:
    thermal: bool = True
    shot: bool = True
    osnr_beat: bool = True
    drive_phase_noise: bool = True
    phase_drift: bool = True
    cmrr_leak: bool = True
    tia_saturation: bool = True
    jitter: bool = True
    dac_quantization: bool = True
    dac_clip: bool = True
    dac_residual_noise: bool = True
    adc_quantization: bool = True

    def all_off(self) -> "ImpairmentFlags":
        return ImpairmentFlags(**{f.name: False for f in dataclasses.fields(self)})


@dataclass
class MetricsSection:
    n_fft: int = 16384
    n_avg: int = 4
    window: str = "auto"  # auto | rectangular | blackman-harris-4term
    include_notch_band: bool = False


@dataclass
class ScenarioConfig:
    run: RunSection = field(default_factory=RunSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    scm: ScmConfig = field(default_factory=ScmConfig)
    dac: DacConfig = field(default_factory=DacConfig)
    combs: CombsSection = field(default_factory=CombsSection)
    link: LinkConfig = field(default_factory=LinkConfig)
    adc: AdcConfig = field(default_factory=lambda: AdcConfig(jitter_rms=50e-15))
    demod: DemodConfig = field(default_factory=DemodConfig)
    impairments: ImpairmentFlags = field(default_factory=ImpairmentFlags)
    metrics: MetricsSection = field(default_factory=MetricsSection)

    @property
    def bandwidth(self) -> float:
        """Instantaneous bandwidth covered by the channel plan."""
        return self.scm.n_channels * self.scm.channel_spacing


# ---------------------------------------------------------------------------
# value parsing / formatting

_UNIT_SCALE = {
    "hz": 1.0,
    "khz": 1e3,
    "mhz": 1e6,
    "ghz": 1e9,
    "thz": 1e12,
    "s": 1.0,
    "ms": 1e-3,
    "us": 1e-6,
    "ns": 1e-9,
    "ps": 1e-12,
    "fs": 1e-15,
    # decibel quantities carry their unit in the key name; suffix is a
    # readability nicety only
    "db": 1.0,
    "dbm": 1.0,
    "dbc": 1.0,
}


def _number(tok: str) -> float:
    tok = tok.strip().lower()
    i = len(tok)
    while i > 0 and tok[i - 1].isalpha():
        i -= 1
    num, suffix = tok[:i].strip(), tok[i:]
    if suffix and suffix not in _UNIT_SCALE:
        raise ValueError(f"unknown unit suffix {suffix!r}")
    try:
        value = float(num)
    except ValueError:
        raise ValueError(f"not a number: {tok!r}") from None
    return value * _UNIT_SCALE.get(suffix, 1.0)


def _p_float(tok: str):
    return _number(tok)


def _p_int(tok: str):
    v = _number(tok)
    if v != int(v):
        raise ValueError(f"expected an integer, got {tok!r}")
    return int(v)


def _p_bool(tok: str):
    t = tok.strip().lower()
    if t in ("on", "true", "yes", "1"):
        return True
    if t in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {tok!r}")


def _p_float_or_off(tok: str):
    if tok.strip().lower() == "off":
        return None
    return _number(tok)


def _p_float_or_auto(tok: str):
    if tok.strip().lower() == "auto":
        return "auto"
    return _number(tok)


def _p_channels(tok: str):
    t = tok.strip().lower()
    if t == "all":
        return None
    try:
        chans = {int(part) for part in t.split(",") if part.strip()}
    except ValueError:
        raise ValueError(f"expected 'all' or a comma list of channels, got {tok!r}")
    if not chans:
        raise ValueError("channel list is empty")
    return chans


def _p_choice(*options: str):
    def parse(tok: str):
        t = tok.strip().lower()
        if t not in options:
            raise ValueError(f"expected one of {'/'.join(options)}, got {tok!r}")
        return t

    return parse


def _fmt(value) -> str:
    if value is None:
        return "off"
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, (set, frozenset)):
        return ",".join(str(c) for c in sorted(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


# registry: config key -> (section attr, field attr, parser)
_KEYS: dict[str, tuple[str, str, object]] = {
    "run.master_seed": ("run", "master_seed", _p_int),
    "run.source": ("run", "source", _p_choice("auto", "sweep", "scm")),
    "run.parallel_bank": ("run", "parallel_bank", _p_bool),
    "run.electrical_rolloff_db": ("run", "electrical_rolloff_db", _p_float),
    "sweep.start": ("sweep", "start", _p_float),
    "sweep.stop": ("sweep", "stop", _p_float),
    "sweep.step": ("sweep", "step", _p_float),
    "sweep.snap": ("sweep", "snap", _p_bool),
    "sweep.duration": ("sweep", "duration", _p_float),
    "scm.n_channels": ("scm", "n_channels", _p_int),
    "scm.channel_spacing": ("scm", "channel_spacing", _p_float),
    "scm.baud": ("scm", "baud", _p_float),
    "scm.baseband_offset": ("scm", "baseband_offset", _p_float),
    "scm.rolloff": ("scm", "rolloff", _p_float),
    "scm.duration": ("scm", "duration", _p_float),
    "scm.levels": ("scm", "levels", _p_int),
    "scm.drive_rms": ("scm", "drive_rms", _p_float),
    "scm.active_channels": ("scm", "active_channels", _p_channels),
    "dac.bits": ("dac", "bits", _p_int),
    "dac.rate": ("dac", "rate", _p_float),
    "dac.lpf_cutoff": ("dac", "lpf_cutoff", _p_float_or_off),
    "dac.full_scale": ("dac", "full_scale", _p_float),
    "dac.residual_noise_db": ("dac", "residual_noise_db", _p_float_or_off),
    "combs.f_sig": ("combs", "f_sig", _p_float),
    "combs.delta_f": ("combs", "delta_f", _p_float),
    "combs.n_tones": ("combs", "n_tones", _p_int),
    "combs.seed_linewidth": ("combs", "seed_linewidth", _p_float),
    "combs.drive_linewidth": ("combs", "drive_linewidth", _p_float),
    "combs.differential_drift": ("combs", "differential_drift", _p_float),
    "combs.tone_tilt_db": ("combs", "tone_tilt_db", _p_float),
    "combs.source": ("combs", "source", _p_choice("flat", "cascade")),
    "combs.cascade_pm": ("combs", "cascade_pm", _p_float),
    "combs.cascade_im": ("combs", "cascade_im", _p_float),
    "link.vpi": ("link", "vpi", _p_float),
    "link.drive_scale": ("link", "drive_scale", _p_float),
    "link.sig_power_per_ch_dbm": ("link", "sig_power_per_ch_dbm", _p_float),
    "link.lo_power_per_tone_dbm": ("link", "lo_power_per_tone_dbm", _p_float),
    "link.osnr_db": ("link", "osnr_db", _p_float),
    "link.pd_bandwidth": ("link", "pd_bandwidth", _p_float),
    "link.tia_sat_dbm": ("link", "tia_sat_dbm", _p_float),
    "link.cmrr_db": ("link", "cmrr_db", _p_float),
    "link.responsivity": ("link", "responsivity", _p_float),
    "link.thermal_noise_density": ("link", "thermal_noise_density", _p_float),
    "link.sine_backoff_db": ("link", "sine_backoff_db", _p_float),
    "adc.bits": ("adc", "bits", _p_int),
    "adc.rate": ("adc", "rate", _p_float),
    "adc.full_scale": ("adc", "full_scale", _p_float_or_auto),
    "adc.jitter_rms": ("adc", "jitter_rms", _p_float),
    "adc.aa_cutoff": ("adc", "aa_cutoff", _p_float_or_off),
    "adc.ac_couple": ("adc", "ac_couple_hz", _p_float_or_off),
    "demod.equalizer": ("demod", "equalizer", _p_choice("lms", "wiener", "none")),
    "demod.ffe_taps": ("demod", "ffe_taps", _p_int),
    "demod.sps": ("demod", "sps", _p_int),
    "demod.ffe_step": ("demod", "ffe_step", _p_float),
    "demod.training_fraction": ("demod", "training_fraction", _p_float),
    "demod.ffe_passes": ("demod", "ffe_passes", _p_int),
    "metrics.n_fft": ("metrics", "n_fft", _p_int),
    "metrics.n_avg": ("metrics", "n_avg", _p_int),
    "metrics.window": (
        "metrics",
        "window",
        _p_choice("auto", "rectangular", "blackman-harris-4term"),
    ),
    "metrics.include_notch_band": ("metrics", "include_notch_band", _p_bool),
}

for _flag in dataclasses.fields(ImpairmentFlags):
    _KEYS[f"impairments.{_flag.name}"] = ("impairments", _flag.name, _p_bool)


def load_config(text: str) -> ScenarioConfig:
    """Parse config text over the defaults and validate the result.

    Raises ConfigError with a 1-based line number for syntax problems and
    with a named rule for semantic ones.
    """
    cfg = ScenarioConfig()
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'section.key = value'", line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not value:
            raise ConfigError(f"missing value for {key!r}", line=lineno)
        entry = _KEYS.get(key)
        if entry is None:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        seen.add(key)
        section, attr, parse = entry
        try:
            parsed = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", line=lineno) from None
        setattr(getattr(cfg, section), attr, parsed)
    validate_scenario(cfg)
    return cfg


def dump_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; parsing it back yields an identical config."""
    lines = []
    last_section = None
    for key, (section, attr, parse) in _KEYS.items():
        if section != last_section:
            if last_section is not None:
                lines.append("")
            last_section = section
        value = getattr(getattr(cfg, section), attr)
        if parse is _p_channels and value is None:
            text = "all"
        else:
            text = _fmt(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# semantic validation; every rule failure names its rule


def _rule(name: str, ok: bool, detail: str):
    if not ok:
        raise ConfigError(f"{name}: {detail}")


def build_combs(cfg: ScenarioConfig) -> ScenarioCombs:
    """Materialize the comb pair the config describes."""
    c = cfg.combs
    if c.source == "cascade":
        sig = comb_from_cascade(
            c.cascade_pm, c.cascade_im, c.n_tones, c.f_sig, c.drive_linewidth
        )
        lo = comb_from_cascade(
            c.cascade_pm,
            c.cascade_im,
            c.n_tones,
            c.f_sig + c.delta_f,
            c.drive_linewidth,
        )
    else:
        sig = flat_comb(c.n_tones, c.f_sig, c.tone_tilt_db, c.drive_linewidth)
        lo = flat_comb(c.n_tones, c.f_sig + c.delta_f, 0.0, c.drive_linewidth)
    if c.source == "cascade" and c.tone_tilt_db != 0.0 and c.n_tones > 1:
        ramp = np.arange(c.n_tones) / (c.n_tones - 1)
        amps = sig.tone_amps * 10.0 ** (-c.tone_tilt_db * ramp / 20.0)
        sig = dataclasses.replace(sig, tone_amps=amps)
    return ScenarioCombs(
        signal=sig,
        lo=lo,
        seed_linewidth=c.seed_linewidth,
        differential_phase_drift=c.differential_drift,
    )


def build_demod(cfg: ScenarioConfig, channel: int) -> DemodConfig:
    """Per-channel demod config; baseband geometry comes from the source."""
    return dataclasses.replace(
        cfg.demod,
        channel_index=channel,
        baseband_offset=cfg.scm.baseband_offset,
        baud=cfg.scm.baud,
        rolloff=cfg.scm.rolloff,
    )


def validate_scenario(cfg: ScenarioConfig) -> ScenarioCombs:
    """Cross-section consistency checks; returns the validated comb pair."""
    _rule("bits-range", 1 <= cfg.adc.bits <= 24, f"adc.bits = {cfg.adc.bits} not in 1..24")
    _rule("bits-range", 1 <= cfg.dac.bits <= 16, f"dac.bits = {cfg.dac.bits} not in 1..16")

    # remaining section-local invariants (re-run the dataclass checks)
    for name in ("scm", "dac", "adc", "demod"):
        try:
            dataclasses.replace(getattr(cfg, name))
        except CombAdcError as exc:
            raise ConfigError(f"{name}-invariants: {exc}") from None
    _rule(
        "pam-order",
        cfg.scm.levels in (2, 4, 8),
        f"scm.levels = {cfg.scm.levels}, supported orders are 2/4/8",
    )

    try:
        combs = build_combs(cfg)
    except CombAdcError as exc:
        raise ConfigError(f"comb-scaling: {exc}") from None
    report = validate_scaling(cfg.bandwidth, combs, n_subbands=cfg.scm.n_channels)
    _rule(
        "comb-scaling",
        report.passed,
        "; ".join(f"{c.name}: {c.detail}" for c in report.checks if not c.passed),
    )
    _rule(
        "comb-scaling",
        cfg.scm.n_channels <= combs.n_pairs,
        f"{cfg.scm.n_channels} channels exceed {combs.n_pairs} usable tone pairs",
    )

    sps = cfg.dac.rate / cfg.scm.baud
    _rule(
        "rate-consistency",
        abs(sps - round(sps)) < 1e-9,
        f"dac.rate must be an integer multiple of scm.baud (ratio {sps:.6g})",
    )
    _rule(
        "rate-consistency",
        cfg.dac.rate >= 2.2 * cfg.bandwidth,
        f"dac.rate {cfg.dac.rate:.3g} Hz cannot carry {cfg.bandwidth:.3g} Hz of channels",
    )
    _rule(
        "rate-consistency",
        cfg.dac.rate >= 4.0 * cfg.adc.rate,
        "dac.rate must be at least 4x adc.rate for clean band-limited sampling",
    )
    _rule(
        "rate-consistency",
        cfg.link.pd_bandwidth <= cfg.adc.rate / 2,
        "link.pd_bandwidth beyond the converter Nyquist band would alias",
    )
    _rule(
        "sweep-grid",
        0 < cfg.sweep.start <= cfg.sweep.stop and cfg.sweep.step > 0,
        f"need 0 < start <= stop and step > 0, got "
        f"{cfg.sweep.start:.3g}/{cfg.sweep.stop:.3g}/{cfg.sweep.step:.3g}",
    )
    _rule(
        "sweep-grid",
        round(cfg.sweep.stop / combs.delta_f) <= combs.n_pairs,
        f"sweep.stop {cfg.sweep.stop:.3g} Hz lands past the last tone pair",
    )
    _rule(
        "sweep-grid",
        cfg.sweep.stop < 0.45 * cfg.dac.rate,
        "sweep.stop too close to the DAC Nyquist edge",
    )
    _rule(
        "capture-length",
        cfg.sweep.duration * 1e9 >= cfg.metrics.n_fft * cfg.metrics.n_avg,
        f"sweep.duration {cfg.sweep.duration:.3g} s too short for "
        f"{cfg.metrics.n_fft} x {cfg.metrics.n_avg} spectral averaging",
    )
    n_sym = cfg.scm.symbols_per_burst
    _rule(
        "training-length",
        int(round(cfg.demod.training_fraction * n_sym)) >= 10 * cfg.demod.ffe_taps,
        f"{n_sym} symbols leave too little training for {cfg.demod.ffe_taps} taps",
    )
    active = cfg.scm.active_set()
    _rule(
        "channel-set",
        all(1 <= ch <= cfg.scm.n_channels for ch in active),
        f"active channels {sorted(active)} outside 1..{cfg.scm.n_channels}",
    )
    return combs
