"""Linear multi-user detection, symbol decisions, and error metrics.

Combining happens in the time domain for narrowband channels and per
subcarrier for OFDM. Soft symbols are rescaled before slicing: zero
forcing needs only the known transmit scale, maximum-ratio combining
uses a per-user least-squares complex gain fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankError, ValidationError
from .signal_chain import Constellation, OfdmConfig, nearest_point, ofdm_demodulate

MRC = "mrc"
ZF = "zf"
_COND_LIMIT = 1e12


def build_combiner(h, kind):
    """Combiner matrix A for one channel matrix; detection applies A^H."""
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2:
        raise ValidationError("channel matrix must be 2-D (antennas, users)")
    if kind == MRC:
        return h.copy()
    if kind != ZF:
        raise ValidationError(f"unknown combiner kind {kind!r}")
    n, m = h.shape
    if n < m:
        raise RankError(f"zero forcing needs antennas >= users, got {n} < {m}")
    gram = h.conj().T @ h
    if np.linalg.cond(gram) > _COND_LIMIT:
        raise RankError("channel Gram matrix is ill-conditioned")
    return h @ np.linalg.inv(gram)


def combine(a, r):
    """Apply A^H to per-antenna samples r of shape (antennas, n)."""
    a = np.asarray(a)
    r = np.asarray(r)
    if r.shape[0] != a.shape[0]:
        raise ValidationError(
            f"combiner expects {a.shape[0]} antenna rows, got {r.shape[0]}")
    return a.conj().T @ r


def detect_narrowband(r, h, kind):
    """Per-user sample streams from per-antenna recovered samples."""
    return combine(build_combiner(h, kind), r)


def detect_ofdm(blocks, freq_response, cfg: OfdmConfig, kind):
    """Per-user frequency-domain symbols from per-antenna time blocks.

    blocks is (antennas, ..., K + N_cp); freq_response is the
    (K, antennas, users) per-subcarrier channel. A combiner is built and
    applied independently on every subcarrier.
    """
    blocks = np.asarray(blocks, dtype=np.complex128)
    freq = ofdm_demodulate(blocks, cfg)          # (antennas, ..., K)
    k_sub = cfg.subcarriers
    if freq_response.shape[0] != k_sub:
        raise ValidationError(
            f"frequency response carries {freq_response.shape[0]} "
            f"subcarriers, expected {k_sub}")
    n_users = freq_response.shape[2]
    out = np.empty(freq.shape[1:-1] + (n_users, k_sub), dtype=np.complex128)
    for nu in range(k_sub):
        a = build_combiner(freq_response[nu], kind)
        out[..., nu] = np.moveaxis(a.conj().T @ freq[..., nu], 0, -1)
    return np.moveaxis(out, -2, 0)               # (users, ..., K)


def ls_gain(soft, reference):
    """Least-squares complex gain g minimizing |soft - g*reference|^2."""
    soft = np.asarray(soft)
    reference = np.asarray(reference)
    denom = np.sum(np.abs(reference) ** 2, axis=-1)
    if np.any(denom == 0.0):
        raise ValidationError("reference stream has zero energy")
    return np.sum(soft * reference.conj(), axis=-1) / denom


def decide_symbols(soft, constellation: Constellation):
    """Nearest-point decision; returns (point indices, bit array)."""
    idx = nearest_point(soft, constellation)
    bits = constellation.labels[idx]
    return idx, bits.reshape(idx.shape + (constellation.bits_per_symbol,))


@dataclass(frozen=True)
class DetectionReport:
    """Aggregate and per-user error figures for one detection run."""

    mse: float
    ber: float
    ser: float
    evm: float
    ber_per_user: np.ndarray
    ser_per_user: np.ndarray


def error_metrics(tx_bits, rx_bits, tx_symbols, rx_symbols,
                  tx_wave=None, rx_wave=None) -> DetectionReport:
    """Error rates over per-user streams plus optional waveform MSE.

    Bit and symbol arrays are (users, ...) with matching shapes. The
    waveform MSE is normalized by the squared peak of the reference, so
    it is comparable across scale conventions.
    """
    tx_bits = np.asarray(tx_bits)
    rx_bits = np.asarray(rx_bits)
    tx_symbols = np.asarray(tx_symbols)
    rx_symbols = np.asarray(rx_symbols)
    if tx_bits.shape != rx_bits.shape:
        raise ValidationError("bit arrays must have identical shapes")
    if tx_symbols.shape != rx_symbols.shape:
        raise ValidationError("symbol arrays must have identical shapes")
    bit_axes = tuple(range(1, tx_bits.ndim))
    sym_axes = tuple(range(1, tx_symbols.ndim))
    ber_user = np.mean(tx_bits != rx_bits, axis=bit_axes)
    ser_user = np.mean(tx_symbols != rx_symbols, axis=sym_axes)
    mse = 0.0
    evm = 0.0
    if tx_wave is not None:
        tx_wave = np.asarray(tx_wave)
        rx_wave = np.asarray(rx_wave)
        if tx_wave.shape != rx_wave.shape:
            raise ValidationError("waveform arrays must have identical shapes")
        # each leading-axis stream is normalized by its own branch peak,
        # the same range convention its ADC threshold uses
        rows = tx_wave.reshape(tx_wave.shape[0] if tx_wave.ndim > 1 else 1, -1)
        err = (tx_wave - rx_wave).reshape(rows.shape)
        if np.iscomplexobj(rows):
            peak = np.maximum(np.abs(rows.real).max(axis=1),
                              np.abs(rows.imag).max(axis=1))
        else:
            peak = np.abs(rows).max(axis=1)
        if np.any(peak == 0.0):
            raise ValidationError("reference waveform stream is identically zero")
        mse = float(np.mean(np.mean(np.abs(err) ** 2, axis=1) / peak ** 2))
        evm = float(np.sqrt(
            np.mean(np.abs(tx_wave - rx_wave) ** 2)
            / np.mean(np.abs(tx_wave) ** 2)))
    return DetectionReport(
        mse=mse,
        ber=float(np.mean(ber_user)),
        ser=float(np.mean(ser_user)),
        evm=evm,
        ber_per_user=ber_user,
        ser_per_user=ser_user,
    )


def eye_traces(samples, oversampling, symbol_offset, branch="real"):
    """Overlapped two-symbol-period segments for an eye diagram.

    Returns (n_traces, 2 * oversampling + 1) real values, each trace
    starting on a symbol boundary.
    """
    samples = np.asarray(samples)
    if branch == "real":
        x = samples.real
    elif branch == "imag":
        x = samples.imag
    else:
        raise ValidationError(f"unknown branch {branch!r}")
    span = 2 * oversampling + 1
    starts = np.arange(symbol_offset, x.shape[-1] - span, oversampling)
    if starts.size < 10:
        raise ValidationError("waveform too short for an eye diagram")
    return np.stack([x[s:s + span] for s in starts])
