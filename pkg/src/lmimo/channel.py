"""Rayleigh fading channels with large-scale attenuation over one cell.

Users are dropped uniformly over a hexagonal cell with a central
exclusion disk; the large-scale gain combines distance path loss with
log-normal shadowing. Small-scale taps are i.i.d. circularly symmetric
Gaussians weighted by a power delay profile, with the narrowband case
being a single unit tap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .signal_chain import unitary_dft


@dataclass(frozen=True)
class CellGeometry:
    """Hexagonal cell, flat-top orientation, base station at the center."""

    radius: float = 1000.0
    exclusion: float = 100.0
    pathloss_exponent: float = 3.8
    shadow_std_db: float = 8.0

    def __post_init__(self):
        if not 0.0 < self.exclusion < self.radius:
            raise ValidationError(
                f"exclusion radius must sit inside the cell, got "
                f"{self.exclusion} vs {self.radius}")
        if self.pathloss_exponent <= 2.0:
            raise ValidationError("path-loss exponent must exceed 2")


@dataclass(frozen=True)
class PowerDelayProfile:
    """Per-tap variances, normalized to unit total power."""

    taps: tuple

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size == 0:
            raise ValidationError("power delay profile needs at least one tap")
        if np.any(taps <= 0.0):
            raise ValidationError("tap powers must be positive")
        object.__setattr__(self, "taps", tuple(taps / taps.sum()))

    @classmethod
    def uniform(cls, n_taps: int) -> "PowerDelayProfile":
        if n_taps < 1:
            raise ValidationError("need at least one tap")
        return cls(taps=(1.0,) * n_taps)

    @property
    def n_taps(self):
        return len(self.taps)


NARROWBAND = PowerDelayProfile(taps=(1.0,))


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the small-scale taps plus large-scale gains.

    gains has shape (n_antennas, n_users, n_taps); eta has shape
    (n_users,). The composite taps are sqrt(eta) * gains.
    """

    gains: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=np.complex128)
        eta = np.asarray(self.eta, dtype=np.float64)
        if gains.ndim != 3:
            raise ValidationError("gains must be (antennas, users, taps)")
        if eta.shape != (gains.shape[1],):
            raise ValidationError(
                f"eta must have one entry per user, got {eta.shape} "
                f"for {gains.shape[1]} users")
        if np.any(eta <= 0.0):
            raise ValidationError("large-scale gains must be positive")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "eta", eta)

    @property
    def n_antennas(self):
        return self.gains.shape[0]

    @property
    def n_users(self):
        return self.gains.shape[1]

    @property
    def n_taps(self):
        return self.gains.shape[2]

    @property
    def composite(self):
        """sqrt(eta) weighted taps, shape (antennas, users, taps)."""
        return np.sqrt(self.eta)[None, :, None] * self.gains

    @property
    def matrix(self):
        """Narrowband channel matrix H, shape (antennas, users)."""
        if self.n_taps != 1:
            raise ValidationError("matrix form requires a single tap")
        return self.composite[:, :, 0]


# unit normals of three edge-pair directions; flat-top hexagon
_HEX_NORMALS = np.array(
    [[math.cos(a), math.sin(a)]
     for a in (math.pi / 6, math.pi / 2, 5 * math.pi / 6)])


def _in_hexagon(points, circumradius):
    apothem = circumradius * math.sqrt(3.0) / 2.0
    proj = points @ _HEX_NORMALS.T
    return np.all(np.abs(proj) <= apothem, axis=-1)


def draw_positions(geom: CellGeometry, n_users, rng):
    """Uniform user drops over the hexagon minus the exclusion disk."""
    if n_users < 1:
        raise ValidationError("need at least one user")
    out = np.empty((n_users, 2))
    have = 0
    while have < n_users:
        cand = rng.uniform(-geom.radius, geom.radius, size=(2 * n_users, 2))
        keep = _in_hexagon(cand, geom.radius)
        keep &= np.hypot(cand[:, 0], cand[:, 1]) >= geom.exclusion
        cand = cand[keep]
        take = min(n_users - have, cand.shape[0])
        out[have:have + take] = cand[:take]
        have += take
    return out


def draw_large_scale(geom: CellGeometry, n_users, rng):
    """Returns (eta, positions) for one user drop.

    eta follows shadowing times distance path loss referenced to the
    exclusion radius, so a user at the exclusion edge with unit shadow
    gain sees eta = 1.
    """
    positions = draw_positions(geom, n_users, rng)
    dist = np.hypot(positions[:, 0], positions[:, 1])
    shadow_db = rng.normal(0.0, geom.shadow_std_db, size=n_users)
    z = 10.0 ** (shadow_db / 10.0)
    eta = z * (dist / geom.exclusion) ** (-geom.pathloss_exponent)
    return eta, positions


def draw_small_scale(n_antennas, n_users, pdp: PowerDelayProfile, rng,
                     eta=None) -> ChannelRealization:
    """i.i.d. complex Gaussian taps with per-tap variance from the profile."""
    if n_antennas < 1 or n_users < 1:
        raise ValidationError("need at least one antenna and one user")
    shape = (n_antennas, n_users, pdp.n_taps)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    g *= np.sqrt(np.asarray(pdp.taps) / 2.0)[None, None, :]
    if eta is None:
        eta = np.ones(n_users)
    return ChannelRealization(gains=g, eta=np.asarray(eta, dtype=np.float64))


def apply_channel(waveforms, ch: ChannelRealization, p_u=1.0, rng=None):
    """Received waveform per antenna: causal FIR per tap, plus noise.

    waveforms is (n_users, n) complex; returns (n_antennas, n). When rng
    is given, unit-variance circularly symmetric noise is added, so the
    receive SNR is set entirely by p_u and the channel gains.
    """
    waveforms = np.asarray(waveforms, dtype=np.complex128)
    if waveforms.ndim != 2:
        raise ValidationError("waveforms must be (users, samples)")
    if waveforms.shape[0] != ch.n_users:
        raise ValidationError(
            f"waveform count {waveforms.shape[0]} does not match "
            f"{ch.n_users} users")
    n = waveforms.shape[1]
    h = ch.composite
    if ch.n_taps == 1:
        out = math.sqrt(p_u) * (h[:, :, 0] @ waveforms)
    else:
        out = np.zeros((ch.n_antennas, n), dtype=np.complex128)
        for d in range(ch.n_taps):
            out[:, d:] += h[:, :, d] @ waveforms[:, :n - d]
        out *= math.sqrt(p_u)
    if rng is not None:
        noise = rng.standard_normal(out.shape) + 1j * rng.standard_normal(out.shape)
        out = out + noise / math.sqrt(2.0)
    return out


def channel_freq_response(ch: ChannelRealization, n_subcarriers):
    """Per-subcarrier matrices, shape (K, antennas, users).

    Taps are zero-padded to K and transformed by the unitary DFT, so the
    response carries a 1/sqrt(K) factor that the OFDM receive path
    compensates.
    """
    if ch.n_taps > n_subcarriers:
        raise ValidationError(
            f"tap count {ch.n_taps} exceeds {n_subcarriers} subcarriers")
    padded = np.zeros((ch.n_antennas, ch.n_users, n_subcarriers),
                      dtype=np.complex128)
    padded[:, :, :ch.n_taps] = ch.composite
    resp = unitary_dft(padded, axis=-1)
    return np.moveaxis(resp, -1, 0)
