"""Scenario orchestration: sine sweeps, multi-channel runs, artifacts.

Every run decomposes into independent tasks (one per sweep frequency or
per channel). Task seeds derive from (master_seed, task kind, index)
alone, so outputs are byte-identical however the tasks are scheduled;
``--jobs`` only changes wall time. A failed task is recorded in the
manifest with its reason and the run carries on.

The manifest written next to the CSVs doubles as a config file: all
bookkeeping lives in comment lines, the config snapshot is the payload,
and re-running with ``--config manifest.txt`` reproduces every artifact
bit for bit.
"""

from __future__ import annotations

import dataclasses
import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adc import SubbandCapture, adc_capture
from .comb import ScenarioCombs, mzm_field, subband_beat
from .demod import demod_pam4
from .errors import CombAdcError, ConfigError
from .frontend import dac_model, gen_pam4_symbols, scm_waveform, sine_waveform
from .metrics import sine_metrics
from .scenario import (
    ScenarioConfig,
    build_combs,
    build_demod,
    dump_config,
    validate_scenario,
)
from .seeding import derive_seed_sequence
from .units import db_to_amplitude_ratio
from .waveform import (
    SampledWaveform,
    apply_fir,
    periodogram,
    rms,
    spectral_tilt_taps,
    spectrum_to_csv,
)

__all__ = [
    "RunManifest",
    "TaskRecord",
    "run_scm",
    "run_spectrum",
    "run_sweep",
    "snap_sweep_frequency",
]

# folded test tones are kept inside this window: above the converter's
# AC-coupling notch with margin, below the detector filter edge
_FOLD_MIN_HZ = 170e6
_FOLD_MAX_HZ = 455e6

_ANALYSIS_RATE = 1e9


@dataclass
class TaskRecord:
    index: int
    label: str
    seed: int
    elapsed_s: float
    status: str  # ok | failed
    detail: str = ""


@dataclass
class RunManifest:
    subcommand: str
    config_text: str
    artifacts: dict[str, str] = field(default_factory=dict)  # name -> sha256
    tasks: list[TaskRecord] = field(default_factory=list)

    def to_text(self) -> str:
        lines = ["# combadc run manifest", f"# subcommand = {self.subcommand}"]
        for name in sorted(self.artifacts):
            lines.append(f"# artifact {name} sha256={self.artifacts[name]}")
        for t in self.tasks:
            line = (
                f"# task {t.index} {t.label} seed={t.seed} "
                f"elapsed_s={t.elapsed_s:.3f} status={t.status}"
            )
            if t.detail:
                line += f" detail={t.detail}"
            lines.append(line)
        lines.append("#")
        lines.append(self.config_text.rstrip("\n"))
        return "\n".join(lines) + "\n"


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _task_seeds(master_seed: int, kind: str, index: int, count: int) -> list[int]:
    state = derive_seed_sequence(master_seed, kind, index).generate_state(count)
    return [int(word) for word in state]


def _window_name(cfg: ScenarioConfig) -> str:
    if cfg.metrics.window != "auto":
        return cfg.metrics.window
    return "rectangular" if cfg.sweep.snap else "blackman-harris-4term"


def snap_sweep_frequency(
    f_request: float, cfg: ScenarioConfig, combs: ScenarioCombs
) -> tuple[float, int, float]:
    """Pick the sub-band and the exact tone for one sweep point.

    Returns (synthesized frequency, sub-band index, folded baseband
    frequency). The folded tone is clamped into the clean analysis
    window and, when snapping is on, centered on the analysis FFT grid
    so a rectangular window needs no leakage correction.
    """
    delta_f = combs.delta_f
    n = int(np.clip(round(f_request / delta_f), 1, combs.n_pairs))
    offset = f_request - n * delta_f
    side = 1.0 if offset >= 0 else -1.0
    folded = float(np.clip(abs(offset), _FOLD_MIN_HZ, _FOLD_MAX_HZ))
    if cfg.sweep.snap:
        # clamp on the grid-aligned window so rounding cannot push the
        # tone back past either edge
        grid = _ANALYSIS_RATE / cfg.metrics.n_fft
        bin_lo = int(np.ceil(_FOLD_MIN_HZ / grid))
        bin_hi = int(np.floor(_FOLD_MAX_HZ / grid))
        folded = int(np.clip(round(folded / grid), bin_lo, bin_hi)) * grid
    return n * delta_f + side * folded, n, folded


def _front_end(
    x: SampledWaveform, cfg: ScenarioConfig, dac_seed: int, post_gain: float
) -> SampledWaveform:
    """Shared transmit chain: DAC, analog roll-off, drive, modulator."""
    imp = cfg.impairments
    y = dac_model(
        x,
        cfg.dac,
        dac_seed,
        quantize=imp.dac_quantization,
        clip=imp.dac_clip,
        residual_noise=imp.dac_residual_noise,
    )
    if cfg.run.electrical_rolloff_db != 0.0:
        taps = spectral_tilt_taps(y.rate, cfg.run.electrical_rolloff_db)
        y = SampledWaveform(apply_fir(y.samples, taps), y.rate)
    # drive conditioner: filters may overshoot a little past full scale
    v = np.clip(y.samples * post_gain, -1.0, 1.0)
    return mzm_field(SampledWaveform(v, y.rate), cfg.link.vpi, cfg.link.drive_scale)


def _capture_subband(
    mu: SampledWaveform,
    n: int,
    cfg: ScenarioConfig,
    combs: ScenarioCombs,
    beat_seed: int,
    adc_seed: int,
) -> SubbandCapture:
    imp = cfg.impairments
    current = subband_beat(
        mu,
        n,
        combs,
        cfg.link,
        beat_seed,
        thermal=imp.thermal,
        shot=imp.shot,
        osnr_beat=imp.osnr_beat,
        drive_phase_noise=imp.drive_phase_noise,
        phase_drift=imp.phase_drift,
        cmrr_leak=imp.cmrr_leak,
        tia_saturation=imp.tia_saturation,
    )
    return adc_capture(
        current,
        n,
        cfg.adc,
        adc_seed,
        quantize=imp.adc_quantization,
        jitter=imp.jitter,
    )


# ---------------------------------------------------------------------------
# sine sweep


@dataclass
class _SweepResult:
    index: int
    freq_ghz: float
    row: tuple[float, float, float] | None  # sfdr, sinad, enob
    label: str
    seed: int
    elapsed_s: float
    error: str = ""


def _sweep_point(args: tuple[ScenarioConfig, int, float]) -> _SweepResult:
    cfg, index, f_request = args
    t0 = time.perf_counter()
    seeds = _task_seeds(cfg.run.master_seed, "sweep", index, 3)
    combs = build_combs(cfg)
    f_actual, n, f_folded = snap_sweep_frequency(f_request, cfg, combs)
    label = f"freq_ghz={f_request / 1e9:.6f} actual_hz={f_actual!r} subband={n}"
    try:
        x = sine_waveform(
            f_actual, cfg.dac.full_scale, cfg.sweep.duration, cfg.dac.rate
        )
        gain = db_to_amplitude_ratio(-cfg.link.sine_backoff_db) / cfg.dac.full_scale
        mu = _front_end(x, cfg, seeds[0], gain)
        cap = _capture_subband(mu, n, cfg, combs, seeds[1], seeds[2])
        report = sine_metrics(
            cap,
            f_folded,
            analysis_rate=_ANALYSIS_RATE,
            n_fft=cfg.metrics.n_fft,
            n_avg=cfg.metrics.n_avg,
            window=_window_name(cfg),
            include_notch=cfg.metrics.include_notch_band,
        )
        row = (report.sfdr_db, report.sinad_db, report.enob_bits)
        return _SweepResult(
            index, f_request / 1e9, row, label, seeds[0], time.perf_counter() - t0
        )
    except CombAdcError as exc:
        return _SweepResult(
            index,
            f_request / 1e9,
            None,
            label,
            seeds[0],
            time.perf_counter() - t0,
            error=str(exc),
        )


def _run_tasks(worker, arg_list, jobs: int):
    if jobs <= 1 or len(arg_list) <= 1:
        return [worker(a) for a in arg_list]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, arg_list))


def run_sweep(cfg: ScenarioConfig, out_dir: str, jobs: int = 1) -> RunManifest:
    """Single-tone sweep: one CSV row per requested frequency."""
    validate_scenario(cfg)
    if cfg.run.source == "scm":
        raise ConfigError("source: config selects the channelized source, not sine")
    os.makedirs(out_dir, exist_ok=True)

    n_points = int((cfg.sweep.stop - cfg.sweep.start) / cfg.sweep.step + 1e-9) + 1
    freqs = [cfg.sweep.start + i * cfg.sweep.step for i in range(n_points)]
    results = _run_tasks(_sweep_point, [(cfg, i, fr) for i, fr in enumerate(freqs)], jobs)

    manifest = RunManifest(subcommand="sweep-sine", config_text=dump_config(cfg))
    csv_path = os.path.join(out_dir, "sweep.csv")
    with open(csv_path, "w") as fh:
        fh.write("freq_ghz,sfdr_db,sinad_db,enob_bits\n")
        for r in sorted(results, key=lambda r: r.index):
            if r.row is not None:
                fh.write(
                    f"{r.freq_ghz:.4f},{r.row[0]:.6f},{r.row[1]:.6f},{r.row[2]:.6f}\n"
                )
            manifest.tasks.append(
                TaskRecord(
                    r.index,
                    r.label,
                    r.seed,
                    r.elapsed_s,
                    "ok" if r.row is not None else "failed",
                    r.error,
                )
            )
    manifest.artifacts["sweep.csv"] = _sha256(csv_path)
    _write_manifest(manifest, out_dir)
    return manifest


# ---------------------------------------------------------------------------
# channelized run


def _scm_symbols(cfg: ScenarioConfig) -> dict[int, np.ndarray]:
    """Symbol streams for every channel in the plan, muted or not.

    Generating the full plan keeps channel k's symbols identical whatever
    subset is active, so mute experiments change nothing but the sum.
    """
    n_sym = cfg.scm.symbols_per_burst
    return {
        ch: gen_pam4_symbols(
            n_sym,
            _task_seeds(cfg.run.master_seed, "scm-symbols", ch, 1)[0],
            cfg.scm.levels,
        )
        for ch in range(1, cfg.scm.n_channels + 1)
    }


def _scm_mu(cfg: ScenarioConfig) -> SampledWaveform:
    """Transmit-side field factor for the burst, channel-independent.

    The drive level is calibrated once against the full channel plan;
    muting channels removes their power from the composite instead of
    re-normalizing, the way a transmitter with fixed per-channel gain
    behaves.
    """
    symbols = _scm_symbols(cfg)
    full_plan = dataclasses.replace(cfg.scm, active_channels=None)
    reference = scm_waveform(full_plan, symbols, cfg.dac.rate)
    level = cfg.scm.drive_rms * cfg.dac.full_scale / rms(reference.samples)
    if cfg.scm.active_set() == full_plan.active_set():
        burst = reference
    else:
        burst = scm_waveform(cfg.scm, symbols, cfg.dac.rate)
    x = SampledWaveform(burst.samples * level, burst.rate)
    dac_seed = _task_seeds(cfg.run.master_seed, "scm-dac", 0, 1)[0]
    return _front_end(x, cfg, dac_seed, 1.0 / cfg.dac.full_scale)


@dataclass
class _ScmResult:
    index: int
    channel: int
    snr_db: float | None
    spectrum_csv: str | None
    label: str
    seed: int
    elapsed_s: float
    error: str = ""


def _scm_channel(
    args: tuple[ScenarioConfig, int, int, np.ndarray | None, str],
) -> _ScmResult:
    cfg, index, channel, mu_samples, out_dir = args
    t0 = time.perf_counter()
    seeds = _task_seeds(cfg.run.master_seed, "scm", channel, 2)
    label = f"channel={channel}"
    try:
        combs = build_combs(cfg)
        if mu_samples is None:
            mu = _scm_mu(cfg)
        else:
            mu = SampledWaveform(mu_samples, cfg.dac.rate)
        cap = _capture_subband(mu, channel, cfg, combs, seeds[0], seeds[1])
        tx = _scm_symbols(cfg)[channel]
        report = demod_pam4(cap, build_demod(cfg, channel), tx)

        wave = cap.to_waveform()
        n_fft = 1 << int(np.log2(wave.n))
        spec = periodogram(wave, n_fft=n_fft, n_avg=wave.n // n_fft)
        name = f"spectrum_ch{channel}.csv"
        spectrum_to_csv(spec, os.path.join(out_dir, name))
        return _ScmResult(
            index,
            channel,
            report.snr_db,
            name,
            label,
            seeds[0],
            time.perf_counter() - t0,
        )
    except CombAdcError as exc:
        return _ScmResult(
            index,
            channel,
            None,
            None,
            label,
            seeds[0],
            time.perf_counter() - t0,
            error=str(exc),
        )


def run_scm(
    cfg: ScenarioConfig,
    out_dir: str,
    jobs: int = 1,
    channels: list[int] | None = None,
) -> RunManifest:
    """Channelized burst run: demodulate every active channel.

    ``channels`` narrows which sub-bands are demodulated; every active
    channel still transmits, so a narrowed run sees the same interference
    as the full one.
    """
    validate_scenario(cfg)
    if cfg.run.source == "sweep":
        raise ConfigError("source: config selects the sine source, not channels")
    os.makedirs(out_dir, exist_ok=True)

    active = sorted(cfg.scm.active_set())
    if channels is None:
        channels = active
    else:
        missing = sorted(set(channels) - set(active))
        if missing:
            raise ConfigError(f"channel-set: channel {missing[0]} is not active")
        channels = sorted(set(channels))
    # bank mode reuses one transmit simulation for all sub-bands; the
    # per-channel mode recomputes it (identical by seeding) like a
    # retuned single-converter measurement would
    shared = _scm_mu(cfg).samples if cfg.run.parallel_bank else None
    args = [(cfg, i, ch, shared, out_dir) for i, ch in enumerate(channels)]
    results = _run_tasks(_scm_channel, args, jobs)

    manifest = RunManifest(subcommand="run-scm", config_text=dump_config(cfg))
    csv_path = os.path.join(out_dir, "scm_snr.csv")
    with open(csv_path, "w") as fh:
        fh.write("channel,snr_db\n")
        for r in sorted(results, key=lambda r: r.index):
            if r.snr_db is not None:
                fh.write(f"{r.channel},{r.snr_db:.6f}\n")
            manifest.tasks.append(
                TaskRecord(
                    r.index,
                    r.label,
                    r.seed,
                    r.elapsed_s,
                    "ok" if r.snr_db is not None else "failed",
                    r.error,
                )
            )
            if r.spectrum_csv is not None:
                manifest.artifacts[r.spectrum_csv] = _sha256(
                    os.path.join(out_dir, r.spectrum_csv)
                )
    manifest.artifacts["scm_snr.csv"] = _sha256(csv_path)
    _write_manifest(manifest, out_dir)
    return manifest


def run_spectrum(cfg: ScenarioConfig, out_dir: str, channel: int) -> RunManifest:
    """Capture one sub-band of the channelized burst and dump its spectrum."""
    validate_scenario(cfg)
    if cfg.run.source == "sweep":
        raise ConfigError("source: config selects the sine source, not channels")
    if channel not in cfg.scm.active_set():
        raise ConfigError(f"channel-set: channel {channel} is not active")
    os.makedirs(out_dir, exist_ok=True)

    result = _scm_channel((cfg, 0, channel, None, out_dir))
    manifest = RunManifest(subcommand="spectrum", config_text=dump_config(cfg))
    manifest.tasks.append(
        TaskRecord(
            result.index,
            result.label,
            result.seed,
            result.elapsed_s,
            "ok" if result.error == "" else "failed",
            result.error,
        )
    )
    if result.error:
        _write_manifest(manifest, out_dir)
        raise CombAdcError(result.error)
    manifest.artifacts[result.spectrum_csv] = _sha256(
        os.path.join(out_dir, result.spectrum_csv)
    )
    _write_manifest(manifest, out_dir)
    return manifest


def _write_manifest(manifest: RunManifest, out_dir: str) -> str:
    path = os.path.join(out_dir, "manifest.txt")
    with open(path, "w") as fh:
        fh.write(manifest.to_text())
    return path
