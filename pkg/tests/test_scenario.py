import numpy as np
import pytest

from combadc.errors import ConfigError
from combadc.scenario import (
    build_combs,
    build_demod,
    dump_config,
    load_config,
    validate_scenario,
)


def test_empty_config_is_the_reference_system():
    cfg = load_config("")
    assert cfg.run.master_seed == 12345
    assert cfg.scm.n_channels == 10
    assert cfg.scm.channel_spacing == 1e9
    assert cfg.scm.baud == 800e6
    assert cfg.scm.drive_rms == 0.48
    assert cfg.dac.bits == 6
    assert cfg.dac.rate == 32e9
    assert cfg.dac.residual_noise_db == -34.0
    assert cfg.combs.f_sig == 26e9
    assert cfg.combs.delta_f == 1e9
    assert cfg.combs.n_tones == 24
    assert cfg.combs.tone_tilt_db == 2.0
    assert cfg.link.thermal_noise_density == 4.4e-11
    assert cfg.link.sine_backoff_db == 13.4
    assert cfg.adc.bits == 14
    assert cfg.adc.rate == 2.4e9
    assert cfg.adc.jitter_rms == 50e-15
    assert cfg.run.electrical_rolloff_db == 3.0
    assert cfg.impairments.thermal and cfg.impairments.jitter
    assert cfg.bandwidth == 10e9


def test_unit_suffixes_and_comments():
    cfg = load_config(
        """
        # comment line
        combs.delta_f = 1ghz
        sweep.duration = 70us   # inline comment
        adc.jitter_rms = 50fs
        scm.baud = 800mhz
        link.lo_power_per_tone_dbm = -4dbm
        """
    )
    assert cfg.combs.delta_f == 1e9
    assert cfg.sweep.duration == 70e-6
    assert cfg.adc.jitter_rms == 50e-15
    assert cfg.scm.baud == 800e6
    assert cfg.link.lo_power_per_tone_dbm == -4.0


def test_bool_and_off_values():
    cfg = load_config(
        """
        impairments.jitter = off
        sweep.snap = false
        dac.lpf_cutoff = off
        adc.full_scale = auto
        scm.active_channels = 1,5,10
        """
    )
    assert cfg.impairments.jitter is False
    assert cfg.sweep.snap is False
    assert cfg.dac.lpf_cutoff is None
    assert cfg.adc.full_scale == "auto"
    assert cfg.scm.active_channels == {1, 5, 10}


@pytest.mark.parametrize(
    "text,fragment,lineno",
    [
        ("scm.n_channels", "expected 'section.key = value'", 1),
        ("scm.n_channels =", "missing value", 1),
        ("bogus.key = 1", "unknown key", 1),
        ("adc.bits = 14\nadc.bits = 12", "duplicate key", 2),
        ("sweep.start = 5gz", "unknown unit suffix", 1),
        ("scm.n_channels = 2.5", "expected an integer", 1),
        ("sweep.snap = maybe", "expected on/off", 1),
        ("combs.source = laser", "expected one of flat/cascade", 1),
        ("scm.active_channels = 1,x", "comma list", 1),
    ],
)
def test_syntax_errors_carry_line_numbers(text, fragment, lineno):
    with pytest.raises(ConfigError) as err:
        load_config(text)
    assert fragment in str(err.value)
    assert err.value.line == lineno
    assert f"line {lineno}:" in str(err.value)


@pytest.mark.parametrize(
    "text,rule",
    [
        ("adc.bits = 30", "bits-range"),
        ("dac.bits = 0", "bits-range"),
        ("scm.levels = 3", "pam-order"),
        ("scm.n_channels = 30", "comb-scaling"),
        ("combs.n_tones = 8", "comb-scaling"),
        ("dac.rate = 30ghz", "rate-consistency"),
        ("adc.rate = 9ghz", "rate-consistency"),
        ("sweep.stop = 30ghz", "sweep-grid"),
        ("sweep.start = 0", "sweep-grid"),
        ("sweep.duration = 10us", "capture-length"),
        ("demod.training_fraction = 0.05", "training-length"),
        ("scm.active_channels = 11", "channel-set"),
        ("scm.baseband_offset = 600mhz", "scm-invariants"),
        ("demod.ffe_taps = 16", "demod-invariants"),
    ],
)
def test_semantic_rules_are_named(text, rule):
    with pytest.raises(ConfigError, match=rule):
        load_config(text)


def test_dump_round_trips_byte_identically():
    first = dump_config(load_config(""))
    assert dump_config(load_config(first)) == first

    tweaked = load_config(
        """
        run.master_seed = 99
        scm.active_channels = 2,7
        impairments.cmrr_leak = off
        dac.lpf_cutoff = off
        combs.source = cascade
        sweep.snap = false
        """
    )
    text = dump_config(tweaked)
    assert dump_config(load_config(text)) == text
    assert "scm.active_channels = 2,7" in text
    assert "impairments.cmrr_leak = off" in text
    assert "dac.lpf_cutoff = off" in text
    assert "adc.full_scale = auto" in text


def test_dump_spells_all_channels():
    text = dump_config(load_config(""))
    assert "scm.active_channels = all" in text
    assert "combs.source = flat" in text


def test_build_combs_flat_vs_cascade():
    flat = build_combs(load_config(""))
    assert flat.n_pairs == 24
    assert flat.delta_f == 1e9
    # signal comb carries the tilt, LO stays flat
    assert flat.signal.flatness_db == pytest.approx(2.0)
    assert flat.lo.flatness_db == 0.0

    casc = build_combs(load_config("combs.source = cascade"))
    assert casc.n_pairs == 24
    # cascade shape plus the same deliberate tilt on the signal side
    assert casc.signal.flatness_db > casc.lo.flatness_db
    assert np.all(casc.signal.tone_amps <= casc.lo.tone_amps + 1e-12)


def test_validate_scenario_returns_combs():
    cfg = load_config("")
    combs = validate_scenario(cfg)
    assert combs.n_pairs == 24


def test_build_demod_copies_channel_geometry():
    cfg = load_config("scm.baseband_offset = 30mhz")
    d = build_demod(cfg, channel=7)
    assert d.channel_index == 7
    assert d.baseband_offset == 30e6
    assert d.baud == cfg.scm.baud
    assert d.rolloff == cfg.scm.rolloff


def test_impairment_flags_all_off():
    flags = load_config("").impairments.all_off()
    assert not any(
        getattr(flags, f)
        for f in ("thermal", "shot", "jitter", "dac_quantization", "adc_quantization")
    )
