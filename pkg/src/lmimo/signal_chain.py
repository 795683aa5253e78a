"""Transmit-side baseband synthesis.

Covers Gray-labelled square QAM constellations, raised-cosine pulse
shaping of upsampled symbol streams, and unitary-DFT OFDM block
assembly with cyclic prefixes. All constellations are normalized to
unit average symbol energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import ValidationError

QAM_ORDERS = (4, 16, 64, 256, 1024)


def _gray_to_binary(g):
    g = np.asarray(g).copy()
    shift = g >> 1
    while np.any(shift):
        g ^= shift
        shift >>= 1
    return g


def _binary_to_gray(n):
    n = np.asarray(n)
    return n ^ (n >> 1)


@dataclass(frozen=True)
class Constellation:
    """Square QAM alphabet with reflected-binary Gray labels per axis.

    points[i] is the symbol whose label is labels[i]; the first half of
    each label addresses the in-phase level, the second half the
    quadrature level. Bit 0 selects the most positive level on its axis
    so the all-zeros label maps to the upper-right corner point.
    """

    order: int
    points: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)

    @property
    def bits_per_symbol(self):
        return int(np.log2(self.order))

    @classmethod
    def qam(cls, order: int) -> "Constellation":
        if order not in QAM_ORDERS:
            raise ValidationError(f"unsupported QAM order {order}; expected one of {QAM_ORDERS}")
        side = int(round(np.sqrt(order)))
        k_axis = int(np.log2(side))
        scale = np.sqrt(2.0 * (side * side - 1) / 3.0)
        axis_idx = np.arange(side)
        # axis index 0 is the most positive amplitude level
        levels = (side - 1 - 2 * axis_idx) / scale
        gray = _binary_to_gray(axis_idx)
        axis_bits = ((gray[:, None] >> np.arange(k_axis - 1, -1, -1)) & 1).astype(np.uint8)

        ii, qq = np.meshgrid(axis_idx, axis_idx, indexing="ij")
        points = levels[ii] + 1j * levels[qq]
        labels = np.concatenate([axis_bits[ii.ravel()], axis_bits[qq.ravel()]], axis=1)
        return cls(order=order, points=points.ravel(), labels=labels)

    def index_of_bits(self, bits):
        """Map an array of (n, bits_per_symbol) labels to point indices."""
        bits = np.asarray(bits, dtype=np.int64)
        k_axis = self.bits_per_symbol // 2
        side = 1 << k_axis
        weights = 1 << np.arange(k_axis - 1, -1, -1)
        i_idx = _gray_to_binary(bits[:, :k_axis] @ weights)
        q_idx = _gray_to_binary(bits[:, k_axis:] @ weights)
        return i_idx * side + q_idx


def map_bits(bits, constellation: Constellation):
    """Gray-map a flat 0/1 bit array onto constellation symbols.

    The bit count must be a multiple of bits_per_symbol.
    """
    bits = np.asarray(bits)
    k = constellation.bits_per_symbol
    if bits.ndim != 1 or bits.size % k:
        raise ValidationError(f"bit count {bits.size} is not a multiple of {k}")
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValidationError("bits must be 0/1 valued")
    groups = bits.reshape(-1, k)
    return constellation.points[constellation.index_of_bits(groups)]


def demap_symbols(symbols, constellation: Constellation):
    """Hard nearest-point demapping back to a flat bit array."""
    idx = nearest_point(symbols, constellation)
    return constellation.labels[idx].reshape(-1)


def nearest_point(symbols, constellation: Constellation, chunk=1 << 16):
    """Indices of the closest constellation points (first index wins ties)."""
    flat = np.asarray(symbols).ravel()
    out = np.empty(flat.size, dtype=np.int64)
    pts = constellation.points
    for start in range(0, flat.size, chunk):
        block = flat[start:start + chunk, None]
        out[start:start + chunk] = np.argmin(np.abs(block - pts[None, :]) ** 2, axis=1)
    return out.reshape(np.shape(symbols))


@dataclass(frozen=True)
class PulseShape:
    """Raised-cosine Nyquist pulse with symbol repetition interval t_rep."""

    rolloff: float
    t_rep: float = 1.0
    span: int = 16  # one-sided kernel truncation, in symbol intervals

    def __post_init__(self):
        errs = []
        if not 0.0 <= self.rolloff <= 1.0:
            errs.append(f"rolloff {self.rolloff} outside [0, 1]")
        if self.t_rep <= 0:
            errs.append("t_rep must be positive")
        if self.span < 1:
            errs.append("span must be at least 1 symbol")
        if errs:
            raise ValidationError(errs)

    @property
    def bandwidth(self):
        """Occupied baseband bandwidth in rad/s, excess band included."""
        return np.pi * (1.0 + self.rolloff) / self.t_rep


def raised_cosine(t, shape: PulseShape):
    """Evaluate the raised-cosine pulse at times t.

    Unit peak at t = 0, zero crossings at nonzero multiples of t_rep.
    The removable singularity at |t| = t_rep / (2 rolloff) is patched
    with its limit value (pi/4) sinc(1 / (2 rolloff)).
    """
    t = np.asarray(t, dtype=np.float64)
    u = t / shape.t_rep
    a = shape.rolloff
    if a == 0.0:
        return np.sinc(u)
    den = 1.0 - (2.0 * a * u) ** 2
    singular = np.abs(den) < 1e-10
    safe = np.where(singular, 1.0, den)
    vals = np.sinc(u) * np.cos(np.pi * a * u) / safe
    limit = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * a))
    return np.where(singular, limit, vals)


@dataclass(frozen=True)
class BasebandWaveform:
    """Oversampled complex baseband signal with its sampling metadata.

    symbol_offset is the sample index of symbol 0; symbol k sits at
    symbol_offset + k * oversampling.
    """

    samples: np.ndarray
    sample_interval: float
    oversampling: int
    bandwidth: float
    symbol_offset: int
    n_symbols: int

    @property
    def peak(self):
        return float(np.max(np.abs(self.samples)))


def pulse_shape(symbols, oversampling: int, shape: PulseShape) -> BasebandWaveform:
    """Zero-stuff a symbol stream and convolve with the sampled pulse.

    Returns the full convolution; the kernel lead-in means symbol k
    appears at sample index span * oversampling + k * oversampling.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.ndim != 1 or symbols.size == 0:
        raise ValidationError("symbols must be a non-empty 1-D array")
    if oversampling < 1:
        raise ValidationError("oversampling factor must be >= 1")
    of = int(oversampling)
    t_kernel = np.arange(-shape.span * of, shape.span * of + 1) * (shape.t_rep / of)
    kernel = raised_cosine(t_kernel, shape)
    up = np.zeros((symbols.size - 1) * of + 1, dtype=np.complex128)
    up[::of] = symbols
    out = fftconvolve(up, kernel.astype(np.complex128), mode="full")
    return BasebandWaveform(
        samples=out,
        sample_interval=shape.t_rep / of,
        oversampling=of,
        bandwidth=shape.bandwidth,
        symbol_offset=shape.span * of,
        n_symbols=symbols.size,
    )


def sample_symbol_instants(samples, waveform: BasebandWaveform, n_symbols=None):
    """Pick the symbol-instant samples out of an oversampled signal.

    samples may be any array whose trailing axis is aligned with
    waveform.samples (e.g. a per-antenna stack after a channel).
    """
    n = waveform.n_symbols if n_symbols is None else n_symbols
    idx = waveform.symbol_offset + waveform.oversampling * np.arange(n)
    samples = np.asarray(samples)
    if idx[-1] >= samples.shape[-1]:
        raise ValidationError("waveform too short for requested symbol count")
    return samples[..., idx]


# ---------------------------------------------------------------------------
# OFDM block assembly


@dataclass(frozen=True)
class OfdmConfig:
    subcarriers: int
    cyclic_prefix: int

    def __post_init__(self):
        errs = []
        if self.subcarriers < 2 or self.subcarriers & (self.subcarriers - 1):
            errs.append(f"subcarriers {self.subcarriers} must be a power of two >= 2")
        if not 0 <= self.cyclic_prefix <= self.subcarriers:
            errs.append("cyclic_prefix must lie in [0, subcarriers]")
        if errs:
            raise ValidationError(errs)

    @property
    def block_length(self):
        return self.subcarriers + self.cyclic_prefix


def unitary_dft(x, inverse=False, axis=-1):
    """Unitary DFT pair: forward is fft / sqrt(K), inverse its adjoint."""
    x = np.asarray(x)
    k = x.shape[axis]
    if inverse:
        return np.fft.ifft(x, axis=axis) * np.sqrt(k)
    return np.fft.fft(x, axis=axis) / np.sqrt(k)


def ofdm_modulate(freq_symbols, cfg: OfdmConfig):
    """Frequency-domain blocks (..., K) to time blocks (..., K + N_cp).

    The cyclic prefix replicates the tail of the body so the prefix
    samples equal the samples one body-length later.
    """
    freq_symbols = np.asarray(freq_symbols, dtype=np.complex128)
    if freq_symbols.shape[-1] != cfg.subcarriers:
        raise ValidationError(
            f"expected {cfg.subcarriers} subcarriers, got {freq_symbols.shape[-1]}")
    body = unitary_dft(freq_symbols, inverse=True)
    if cfg.cyclic_prefix == 0:
        return body
    return np.concatenate([body[..., -cfg.cyclic_prefix:], body], axis=-1)


def ofdm_demodulate(blocks, cfg: OfdmConfig):
    """Strip the cyclic prefix and apply the forward unitary DFT."""
    blocks = np.asarray(blocks, dtype=np.complex128)
    if blocks.shape[-1] != cfg.block_length:
        raise ValidationError(
            f"expected block length {cfg.block_length}, got {blocks.shape[-1]}")
    return unitary_dft(blocks[..., cfg.cyclic_prefix:])
