"""Combiners, slicing and error accounting."""

import numpy as np
import pytest

from lmimo.channel import NARROWBAND, draw_small_scale
from lmimo.detection import (
    MRC, ZF, DetectionReport, build_combiner, combine, decide_symbols,
    detect_narrowband, detect_ofdm, error_metrics, eye_traces, ls_gain,
)
from lmimo.errors import RankError, ValidationError
from lmimo.signal_chain import (
    Constellation, OfdmConfig, map_bits, ofdm_modulate,
)
from lmimo.channel import PowerDelayProfile, channel_freq_response


def _channel(n, m, seed=0, eta=None):
    return draw_small_scale(n, m, NARROWBAND, np.random.default_rng(seed),
                            eta=eta).matrix


def test_zf_inverts_channel_exactly():
    h = _channel(12, 4)
    a = build_combiner(h, ZF)
    assert np.allclose(a.conj().T @ h, np.eye(4), atol=1e-10)


def test_mrc_combiner_is_channel():
    h = _channel(6, 2)
    assert np.array_equal(build_combiner(h, MRC), h)


def test_combiner_validation():
    h = _channel(3, 5)
    with pytest.raises(RankError):
        build_combiner(h, ZF)
    with pytest.raises(ValidationError):
        build_combiner(h[:, 0], ZF)
    with pytest.raises(ValidationError):
        build_combiner(_channel(4, 2), "mmse")
    # duplicated column makes the Gram matrix singular
    h = _channel(6, 2)
    h[:, 1] = h[:, 0]
    with pytest.raises(RankError):
        build_combiner(h, ZF)


def test_combine_shape_check():
    h = _channel(4, 2)
    with pytest.raises(ValidationError):
        combine(h, np.zeros((3, 7), dtype=complex))


def test_detect_narrowband_zf_recovers_streams():
    rng = np.random.default_rng(1)
    h = _channel(16, 3, seed=1)
    x = rng.standard_normal((3, 25)) + 1j * rng.standard_normal((3, 25))
    soft = detect_narrowband(h @ x, h, ZF)
    assert np.allclose(soft, x, atol=1e-9)


def test_detect_ofdm_flat_channel_round_trip():
    rng = np.random.default_rng(2)
    cfg = OfdmConfig(subcarriers=32, cyclic_prefix=4)
    ch = draw_small_scale(8, 2, NARROWBAND, rng)
    f = rng.standard_normal((2, 3, 32)) + 1j * rng.standard_normal((2, 3, 32))
    blocks = ofdm_modulate(f, cfg)                       # (users, blocks, K+cp)
    rx = np.einsum("au,ubk->abk", ch.matrix, blocks)
    resp = channel_freq_response(ch, 32)
    got = detect_ofdm(rx, resp, cfg, ZF)
    # the unitary-DFT response carries 1/sqrt(K); ZF output is sqrt(K) f
    assert np.allclose(got, np.sqrt(32.0) * f, atol=1e-8)


def test_detect_ofdm_checks_subcarrier_count():
    cfg = OfdmConfig(subcarriers=16, cyclic_prefix=2)
    ch = draw_small_scale(4, 2, PowerDelayProfile.uniform(2),
                          np.random.default_rng(3))
    resp = channel_freq_response(ch, 32)
    with pytest.raises(ValidationError):
        detect_ofdm(np.zeros((4, 18), dtype=complex), resp, cfg, ZF)


def test_ls_gain_exact_for_scaled_streams():
    rng = np.random.default_rng(4)
    ref = rng.standard_normal((2, 50)) + 1j * rng.standard_normal((2, 50))
    g = np.array([2.0 - 1.0j, -0.3 + 0.7j])
    got = ls_gain(g[:, None] * ref, ref)
    assert np.allclose(got, g)
    with pytest.raises(ValidationError):
        ls_gain(ref, np.zeros_like(ref))


def test_decide_symbols_inverts_mapping():
    rng = np.random.default_rng(5)
    c = Constellation.qam(256)
    bits = rng.integers(0, 2, 64 * c.bits_per_symbol)
    syms = map_bits(bits, c)
    idx, decided_bits = decide_symbols(syms + 0.01 * (1 + 1j), c)
    assert np.array_equal(c.points[idx], syms)
    assert np.array_equal(decided_bits.reshape(-1), bits)


def test_error_metrics_counts():
    tx_bits = np.zeros((2, 8), dtype=int)
    rx_bits = tx_bits.copy()
    rx_bits[0, :2] = 1                      # 2 of 16 bits wrong
    tx_sym = np.zeros((2, 4), dtype=int)
    rx_sym = tx_sym.copy()
    rx_sym[0, 0] = 1                        # 1 of 8 symbols wrong
    rep = error_metrics(tx_bits, rx_bits, tx_sym, rx_sym)
    assert rep.ber == pytest.approx(2 / 16)
    assert rep.ser == pytest.approx(1 / 8)
    assert np.allclose(rep.ber_per_user, [0.25, 0.0])
    assert np.allclose(rep.ser_per_user, [0.25, 0.0])
    assert rep.mse == 0.0 and rep.evm == 0.0
    assert isinstance(rep, DetectionReport)


def test_error_metrics_waveform_normalization():
    tx_bits = np.zeros((2, 2), dtype=int)
    tx_sym = np.zeros((2, 1), dtype=int)
    # stream 0 peaks at 2, stream 1 at 4; equal absolute errors weigh
    # 4x more on the small stream
    tx_wave = np.array([[2.0, -1.0], [4.0, 1.0]])
    rx_wave = tx_wave + 0.2
    rep = error_metrics(tx_bits, tx_bits, tx_sym, tx_sym,
                        tx_wave=tx_wave, rx_wave=rx_wave)
    assert rep.mse == pytest.approx(0.5 * (0.04 / 4.0 + 0.04 / 16.0))
    assert rep.evm == pytest.approx(np.sqrt(4 * 0.04 / (4 + 1 + 16 + 1)))


def test_error_metrics_complex_peak_is_per_branch():
    tx_bits = np.zeros((1, 1), dtype=int)
    tx_sym = np.zeros((1, 1), dtype=int)
    tx_wave = np.array([[3.0 + 4.0j, 1.0 + 0.5j]])
    rx_wave = tx_wave + (0.4 + 0.0j)
    rep = error_metrics(tx_bits, tx_bits, tx_sym, tx_sym,
                        tx_wave=tx_wave, rx_wave=rx_wave)
    # branch peak is max(|re|, |im|) = 4, not |z| = 5
    assert rep.mse == pytest.approx(0.16 / 16.0)


def test_error_metrics_validation():
    with pytest.raises(ValidationError):
        error_metrics(np.zeros((2, 3)), np.zeros((2, 4)),
                      np.zeros((2, 1)), np.zeros((2, 1)))
    with pytest.raises(ValidationError):
        error_metrics(np.zeros((2, 3)), np.zeros((2, 3)),
                      np.zeros((2, 1)), np.zeros((2, 1)),
                      tx_wave=np.zeros((1, 4)), rx_wave=np.zeros((1, 4)))


def test_eye_traces_layout():
    of = 8
    n = 40 * of
    x = np.cos(2 * np.pi * np.arange(n) / of) + 0j
    traces = eye_traces(x, of, symbol_offset=3)
    assert traces.shape[1] == 2 * of + 1
    assert traces.shape[0] >= 10
    assert np.allclose(traces[0], x.real[3:3 + 2 * of + 1])
    with pytest.raises(ValidationError):
        eye_traces(x[: 5 * of], of, symbol_offset=0)
    with pytest.raises(ValidationError):
        eye_traces(x, of, 0, branch="abs")
