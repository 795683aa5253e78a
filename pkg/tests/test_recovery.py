"""Unfolding: difference orders, exactness, anchoring, quantized captures."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lmimo.errors import AnchorError, ConditionError, ValidationError
from lmimo.modulo_adc import ModuloConfig, beta_bound, fold_frame, modulo_fold
from lmimo.recovery import (
    RecoveryConfig, anchor_constant, anti_diff, check_conditions,
    compute_order, finite_diff, fold_commutes, noise_robust_order, recover,
    recover_batch,
)
from lmimo.signal_chain import Constellation, PulseShape, pulse_shape


def bandlimited(seed, n=4000, n_tones=12, omega=3.0, t=0.05, amp=40.0):
    """Random real trigonometric polynomial with |spectrum| <= omega."""
    rng = np.random.default_rng(seed)
    w = rng.uniform(-omega, omega, n_tones)
    c = rng.standard_normal(n_tones) + 1j * rng.standard_normal(n_tones)
    tt = np.arange(n) * t
    x = np.real(c @ np.exp(1j * np.outer(w, tt)))
    return amp * x / np.max(np.abs(x)), t, omega


def test_diff_antidiff_round_trip():
    x = np.arange(10.0) ** 2
    d = finite_diff(x, 1)
    assert np.array_equal(anti_diff(d) + x[0], x)
    assert np.array_equal(finite_diff(x, 0), x)


def test_diff_validation():
    with pytest.raises(ValidationError):
        finite_diff(np.arange(3.0), 3)
    with pytest.raises(ValidationError):
        finite_diff(np.arange(3.0), -1)


def test_recovery_config_validation():
    with pytest.raises(ValidationError):
        RecoveryConfig(threshold=1.0, beta=3.0, sample_interval=0.1, bandwidth=1.0)
    with pytest.raises(ValidationError):
        RecoveryConfig(threshold=1.0, beta=2.0, sample_interval=0.1,
                       bandwidth=1.0, order=0)


def test_compute_order_contraction():
    # T Omega e = 0.5 halves the bound per pass; beta/lam = 8 needs 3
    t = 0.5 / (1.0 * math.e)
    cfg = RecoveryConfig(threshold=1.0, beta=16.0, sample_interval=t, bandwidth=1.0)
    assert compute_order(cfg) == 4
    cfg = RecoveryConfig(threshold=1.0, beta=2.0, sample_interval=t, bandwidth=1.0)
    assert compute_order(cfg) == 1


def test_compute_order_rejects_non_contracting():
    cfg = RecoveryConfig(threshold=1.0, beta=2.0, sample_interval=1.0, bandwidth=1.0)
    with pytest.raises(ConditionError):
        compute_order(cfg)


def test_orders_for_shipped_waveform():
    # 50x oversampled raised cosine, rolloff 0.22, fold at a tenth of
    # the peak: the plain order is 2, the noise-robust order 3
    shape = PulseShape(rolloff=0.22)
    t = shape.t_rep / 50
    lam = 1.0
    cfg = RecoveryConfig(threshold=lam, beta=10.0 * lam, sample_interval=t,
                         bandwidth=shape.bandwidth)
    assert compute_order(cfg) == 2
    assert noise_robust_order(cfg) == 3


def test_check_conditions_flags():
    cfg = RecoveryConfig(threshold=1.0, beta=4.0, sample_interval=0.01, bandwidth=1.0)
    rep = check_conditions(cfg)
    assert rep.sampling_ok and rep.noise_sampling_ok
    assert rep.max_sample_interval == pytest.approx(1.0 / (2.0 * math.e))
    # max noise = lam/4 * (2 beta / lam)^(-1/alpha)
    assert rep.max_noise == pytest.approx(0.25 / 8.0)
    assert rep.noise_ok is None
    assert check_conditions(cfg, noise_bound=1.0).noise_ok is False
    slow = RecoveryConfig(threshold=1.0, beta=4.0, sample_interval=0.19, bandwidth=1.0)
    assert not check_conditions(slow).sampling_ok


def test_unquantized_recovery_is_exact():
    x, t, omega = bandlimited(seed=1)
    lam = 1.0
    frame = fold_frame(x + 0j, ModuloConfig(lam, 12), t, omega)
    res = recover(frame)
    rec = anchor_constant(res.samples.real, lam)
    assert res.order >= 2 and res.order_source == "computed"
    assert np.max(np.abs(rec - x)) <= 1e-9 * frame.beta


def test_recovery_handles_iq_independently():
    xr, t, omega = bandlimited(seed=2)
    xi, _, _ = bandlimited(seed=3)
    frame = fold_frame(xr + 1j * xi, ModuloConfig(1.0, 12), t, omega)
    rec = anchor_constant(recover(frame).samples, 1.0)
    assert np.max(np.abs(rec.real - xr)) <= 1e-9 * frame.beta
    assert np.max(np.abs(rec.imag - xi)) <= 1e-9 * frame.beta


@given(st.integers(min_value=0, max_value=2 ** 31), st.sampled_from([0.5, 1.0, 2.5]))
@settings(max_examples=20, deadline=None)
def test_recovery_offset_is_single_2lam_multiple(seed, lam):
    x, t, omega = bandlimited(seed=seed, n=600)
    res = recover(fold_frame(x + 0j, ModuloConfig(lam, 12), t, omega))
    off = res.samples.real - x
    k = off / (2.0 * lam)
    assert np.allclose(k, np.round(k[0]), atol=1e-6)


def test_recover_batch_input_checks():
    with pytest.raises(ValidationError):
        recover_batch(np.zeros(8), 1.0, 2.0, 1)          # not 2-D
    with pytest.raises(ValidationError):
        recover_batch(np.zeros((1, 8)), 1.0, 20.0, 1)    # too short for j_idx


def test_anchor_zero_mean():
    rng = np.random.default_rng(9)
    x = rng.standard_normal(500)
    x -= x.mean()
    assert np.allclose(anchor_constant(x + 2.0 * 0.7 * 3, 0.7), x)


def test_anchor_known_sample():
    x = np.linspace(40.0, 44.0, 50)
    shifted = x + 2.0 * 1.1 * -5
    back = anchor_constant(shifted, 1.1, mode="known-sample", reference=(7, x[7]))
    assert np.allclose(back, x)
    with pytest.raises(AnchorError):
        anchor_constant(shifted, 1.1, mode="known-sample", reference=(7, x[7] + 0.9))
    with pytest.raises(AnchorError):
        anchor_constant(shifted, 1.1, mode="known-sample")
    with pytest.raises(ValidationError):
        anchor_constant(shifted, 1.1, mode="median")


def test_anchor_complex_reference():
    z = np.linspace(0, 1, 30) * (1 + 1j)
    z -= z.mean()
    shifted = z + (2 * 0.5 * 2) + 1j * (2 * 0.5 * -1)
    back = anchor_constant(shifted, 0.5, mode="known-sample", reference=(0, z[0]))
    assert np.allclose(back, z)


def test_fold_commutes_on_bandlimited_input():
    x, t, omega = bandlimited(seed=4, n=1000)
    assert fold_commutes(x, 1.0, 2) <= 1e-9


def _qam_capture(seed, n_symbols=500, bits=2, zeta=0.1):
    rng = np.random.default_rng(seed)
    const = Constellation.qam(1024)
    syms = const.points[rng.integers(0, const.order, n_symbols)]
    wave = pulse_shape(syms, 50, PulseShape(rolloff=0.22))
    x = wave.samples
    peak = max(np.abs(x.real).max(), np.abs(x.imag).max())
    lam = zeta * peak
    frame = fold_frame(x, ModuloConfig(lam, bits), wave.sample_interval,
                       wave.bandwidth, quantize=True)
    return x, frame


def _boundary_ties(frame, order):
    """Count samples whose order-fold difference lands on the fold edge."""
    lam = frame.config.threshold
    n = 0
    for branch in (frame.samples.real, frame.samples.imag):
        f = modulo_fold(finite_diff(branch, order), lam)
        n += int(np.sum((f >= (1 - 1e-9) * lam) | (f <= (1e-9 - 1) * lam)))
    return n


@pytest.mark.parametrize("seed,ties", [(0, 3), (2, 5), (5, 10)])
def test_quantized_recovery_error_is_one_cell(seed, ties):
    """Boundary-tie regression: the 2-fold difference of a coarse capture
    hits the fold edge on these seeds; a wrong tie branch would shift
    samples by 2 lam (16 half-steps), so the half-step bound is sharp."""
    x, frame = _qam_capture(seed)
    assert _boundary_ties(frame, 2) == ties
    res = recover(frame)
    assert res.order == 2
    rec = anchor_constant(res.samples, frame.config.threshold)
    half = frame.config.step / 2.0
    assert np.max(np.abs(rec.real - x.real)) <= half * (1 + 1e-9)
    assert np.max(np.abs(rec.imag - x.imag)) <= half * (1 + 1e-9)
    assert np.max(np.abs(rec - x)) <= np.sqrt(2.0) * half * (1 + 1e-9)
    # the bound is attained, not just respected
    assert np.max(np.abs(rec - x)) >= 0.98 * half


def test_fine_quantization_recovers_to_grid_accuracy():
    x, frame = _qam_capture(seed=1, bits=10)
    rec = anchor_constant(recover(frame).samples, frame.config.threshold)
    assert np.max(np.abs(rec - x)) <= np.sqrt(2.0) * frame.config.step / 2.0 * (1 + 1e-9)


def test_order_override_wins():
    x, t, omega = bandlimited(seed=6, n=800)
    frame = fold_frame(x + 0j, ModuloConfig(1.0, 12), t, omega)
    cfg = RecoveryConfig.from_frame(frame, order=4)
    res = recover(frame, cfg)
    assert res.order == 4 and res.order_source == "override"
    rec = anchor_constant(res.samples.real, 1.0)
    assert np.max(np.abs(rec - x)) <= 1e-9 * frame.beta


def test_beta_rounding_matches_frame():
    x, t, omega = bandlimited(seed=7, n=600, amp=7.3)
    frame = fold_frame(x + 0j, ModuloConfig(1.0, 12), t, omega)
    peak = max(np.abs(x.real).max(), np.abs(x.imag).max())
    assert frame.beta == beta_bound(peak, 1.0)
    assert frame.beta >= peak
