import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from combadc.errors import SignalError
from combadc.frontend import (
    DacConfig,
    ScmConfig,
    dac_model,
    dequantize_midrise,
    gen_pam4_symbols,
    quantize_midrise,
    scm_waveform,
    sine_waveform,
)
from combadc.metrics import sine_metrics
from combadc.waveform import SampledWaveform, periodogram


# ------------------------------------------------------------------ symbols


def test_pam4_lattice_and_power():
    sym = gen_pam4_symbols(200_000, 1)
    lattice = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(5.0)
    assert set(np.round(np.unique(sym), 12)) == set(np.round(lattice, 12))
    assert np.mean(sym**2) == pytest.approx(1.0, rel=0.01)
    # all four levels drawn roughly uniformly
    counts = np.array([(sym == lv).sum() for lv in lattice])
    assert counts.min() > 0.2 * sym.size


def test_pam_symbols_determinism_and_orders():
    assert np.array_equal(gen_pam4_symbols(100, 5), gen_pam4_symbols(100, 5))
    assert not np.array_equal(gen_pam4_symbols(100, 5), gen_pam4_symbols(100, 6))
    two = gen_pam4_symbols(10_000, 2, levels=2)
    assert set(np.unique(two)) == {-1.0, 1.0}
    with pytest.raises(SignalError):
        gen_pam4_symbols(0, 1)
    with pytest.raises(SignalError):
        gen_pam4_symbols(10, 1, levels=3)


# -------------------------------------------------------------------- burst


def test_burst_symbol_budget():
    cfg = ScmConfig()
    assert cfg.symbols_per_burst == 1638
    assert cfg.occupied_bandwidth == pytest.approx(10e9 + 40e6 + 440e6)
    assert cfg.active_set() == tuple(range(1, 11))
    assert ScmConfig(active_channels=(3, 7)).active_set() == (3, 7)


def test_scm_config_validation():
    with pytest.raises(SignalError):
        ScmConfig(baud=950e6, rolloff=0.1)  # 1.045 GHz > 1 GHz grid
    with pytest.raises(SignalError):
        ScmConfig(baseband_offset=0.6e9)
    with pytest.raises(SignalError):
        ScmConfig(n_channels=0)


def _one_channel_burst(k, rate=32e9, seed=11, cfg=None):
    cfg = cfg or ScmConfig(active_channels=(k,))
    sym = gen_pam4_symbols(cfg.symbols_per_burst, seed)
    return cfg, sym, scm_waveform(cfg, {k: sym}, rate)


def test_scm_slot_confinement():
    # channel 5 occupies 40 MHz +- 440 MHz around the 5 GHz subcarrier;
    # everything outside its 1 GHz slot is shaping sidelobe, way down
    k, rate = 5, 32e9
    _, _, wave = _one_channel_burst(k, rate)
    spec = periodogram(wave, n_fft=16384, n_avg=4)
    slot = spec.band_mask(k * 1e9 - 0.5e9, k * 1e9 + 0.5e9)
    p_in = spec.power_linear[slot].sum()
    p_out = spec.power_linear[~slot].sum()
    assert 10 * np.log10(p_in / p_out) > 30.0


def test_scm_linearity_in_symbols():
    cfg = ScmConfig(active_channels=(4,))
    a = gen_pam4_symbols(cfg.symbols_per_burst, 1)
    b = gen_pam4_symbols(cfg.symbols_per_burst, 2)
    w_a = scm_waveform(cfg, {4: a}, 32e9).samples
    w_b = scm_waveform(cfg, {4: b}, 32e9).samples
    w_ab = scm_waveform(cfg, {4: a + b}, 32e9).samples
    assert np.allclose(w_ab, w_a + w_b, atol=1e-12)


def test_scm_constant_symbols_are_two_lines():
    # a constant symbol stream leaves only the offset-carrier pair:
    # subcarrier +- baseband offset (4.96 and 5.04 GHz for channel 5)
    cfg = ScmConfig(active_channels=(5,))
    sym = np.ones(cfg.symbols_per_burst)
    wave = scm_waveform(cfg, {5: sym}, 32e9)
    # the lines are not bin-centered at any power-of-two FFT length, so use
    # the leakage-contained window
    spec = periodogram(wave, n_fft=16384, n_avg=4, window="blackman-harris-4term")
    p = spec.power_linear.copy()
    top = np.argsort(p)[-2:]
    got = sorted(spec.bin_freqs[top])
    assert got[0] == pytest.approx(5e9 - 40e6, abs=2 * spec.rbw)
    assert got[1] == pytest.approx(5e9 + 40e6, abs=2 * spec.rbw)
    # the pair carries essentially all the power
    guard = np.zeros_like(p, dtype=bool)
    for b in top:
        guard[max(b - 6, 0) : b + 7] = True
    assert p[guard].sum() / p.sum() > 0.95


def test_scm_missing_or_wrong_symbols():
    cfg = ScmConfig(active_channels=(1, 2))
    sym = gen_pam4_symbols(cfg.symbols_per_burst, 1)
    with pytest.raises(SignalError):
        scm_waveform(cfg, {1: sym}, 32e9)
    with pytest.raises(SignalError):
        scm_waveform(cfg, {1: sym, 2: sym[:-1]}, 32e9)
    with pytest.raises(SignalError):
        scm_waveform(cfg, {1: sym, 2: sym}, 8e9)  # rate too low for 10 ch
    with pytest.raises(SignalError):
        scm_waveform(ScmConfig(active_channels=(1,)), {1: sym}, 32.1e9)


def test_sine_waveform():
    w = sine_waveform(1e9, 0.5, 1e-6, 32e9)
    assert w.n == 32000
    assert w.samples[0] == pytest.approx(0.5)
    assert np.max(np.abs(w.samples)) <= 0.5 + 1e-12
    with pytest.raises(SignalError):
        sine_waveform(17e9, 1.0, 1e-6, 32e9)


# ---------------------------------------------------------------- quantizer


def test_midrise_anchors():
    codes = quantize_midrise(np.array([0.0, 0.24, -0.26, 0.999]), 3, 1.0)
    # step = 0.25: 0 -> 0, 0.24 -> 0, -0.26 -> -2, 0.999 -> 3 (rail)
    assert codes.tolist() == [0, 0, -2, 3]
    vals = dequantize_midrise(codes, 3, 1.0)
    assert vals.tolist() == [0.125, 0.125, -0.375, 0.875]
    # rails clip
    assert quantize_midrise(np.array([5.0, -5.0]), 3, 1.0).tolist() == [3, -4]
    # no-clip mode keeps going
    assert quantize_midrise(np.array([5.0]), 3, 1.0, clip=False)[0] == 20


def test_midrise_monotone():
    x = np.linspace(-1.2, 1.2, 10_001)
    codes = quantize_midrise(x, 6, 1.0)
    assert np.all(np.diff(codes) >= 0)


@settings(max_examples=60, deadline=None)
@given(
    bits=st.integers(min_value=2, max_value=14),
    x=st.floats(min_value=-0.999, max_value=0.999),
)
def test_midrise_roundtrip_error_bound(bits, x):
    step = 1.0 / 2 ** (bits - 1)
    y = dequantize_midrise(quantize_midrise(np.array([x]), bits, 1.0), bits, 1.0)[0]
    assert abs(y - x) <= step / 2 + 1e-12


# ---------------------------------------------------------------------- DAC


def test_dac_all_switches_off_is_identity(rng):
    cfg = DacConfig()
    x = SampledWaveform(rng.uniform(-2, 2, 4096), cfg.rate)
    y = dac_model(x, cfg, 1, quantize=False, clip=False,
                  residual_noise=False, reconstruction_lpf=False)
    assert np.array_equal(y.samples, x.samples)


def test_dac_rate_mismatch():
    with pytest.raises(SignalError):
        dac_model(SampledWaveform(np.zeros(64), 16e9), DacConfig(), 1)


def test_dac_quantization_law_6bit():
    # near-full-scale bin-centered sine, quantization alone: SINAD over
    # the DAC's own Nyquist = 6.02*6 + 1.76 within 1 dB. The bin index is
    # coprime to the FFT length so the tone sweeps the full phase grid;
    # a shared factor would leave the quantization error sampled at a
    # handful of phases and off the phase-averaged law by over a dB.
    cfg = DacConfig(bits=6, residual_noise_db=None, lpf_cutoff=None)
    rbw = cfg.rate / 16384
    tone = sine_waveform(2561 * rbw, 0.999 * cfg.full_scale, 16384 * 4 / cfg.rate, cfg.rate)
    out = dac_model(tone, cfg, 1)
    rep = sine_metrics(out, 2561 * rbw, analysis_rate=cfg.rate)
    assert rep.sinad_db == pytest.approx(6.02 * 6 + 1.76, abs=1.0)


def test_dac_residual_noise_level(rng):
    # the calibration term alone: white, variance relative to a
    # full-scale sine as configured
    cfg = DacConfig(residual_noise_db=-34.0, lpf_cutoff=None)
    x = SampledWaveform(np.zeros(400_000), cfg.rate)
    y = dac_model(x, cfg, 7, quantize=False, clip=False)
    want = (cfg.full_scale**2 / 2) * 10 ** (-3.4)
    assert np.var(y.samples) == pytest.approx(want, rel=0.02)
    again = dac_model(x, cfg, 7, quantize=False, clip=False)
    assert np.array_equal(y.samples, again.samples)


def test_dac_reconstruction_lpf_flat_in_band():
    # the filter must not shave tones near the top of the sweep band;
    # compare rms over the interior (clear of the filter edge transients)
    cfg = DacConfig(bits=6, residual_noise_db=None)
    n = 16384 * 2
    body = slice(2048, n - 2048)

    def drop_db(f):
        tone = sine_waveform(f, 0.2, n / cfg.rate, cfg.rate)
        out = dac_model(tone, cfg, 1, quantize=False, clip=False, residual_noise=False)
        from combadc.waveform import rms

        return 20 * np.log10(rms(out.samples[body]) / rms(tone.samples[body]))

    assert abs(drop_db(10.455e9)) < 0.05
    assert abs(drop_db(0.5e9)) < 0.05
    # and a tone past cutoff is strongly rejected
    assert drop_db(14e9) < -40.0


def test_dac_clip_stage():
    cfg = DacConfig(lpf_cutoff=None, residual_noise_db=None)
    x = SampledWaveform(np.array([0.5, 1.5, -2.0, 0.0]), cfg.rate)
    y = dac_model(x, cfg, 1, quantize=False)
    assert np.max(np.abs(y.samples)) <= cfg.full_scale
    assert y.samples[0] == 0.5


def test_dac_config_validation():
    with pytest.raises(SignalError):
        DacConfig(bits=0)
    with pytest.raises(SignalError):
        DacConfig(lpf_cutoff=17e9)  # >= Nyquist of 32 GSa/s
    with pytest.raises(SignalError):
        DacConfig(full_scale=0.0)
