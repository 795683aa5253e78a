"""Achievable uplink rates under coarse quantization, plus energy efficiency.

The quantizer is linearized as a gain gamma on the received vector plus
independent additive noise whose covariance follows the diagonal of the
receive covariance. Ergodic rates come from Monte-Carlo channel draws;
closed-form approximations are provided for both combiners, the zero
forcing one carrying an attenuation coefficient that is calibrated
against the Monte-Carlo reference since no value is specified for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .detection import MRC, ZF, build_combiner
from .errors import RankError, ValidationError
from .modulo_adc import gaussian_optimal_quantizer

ADC_KINDS = ("ideal", "modulo", "conventional")


def gamma_lambda(sigma_q2, sigma_r2):
    """Distortion gain 1 - sigma_q^2 / sigma_r^2."""
    if sigma_r2 <= 0.0:
        raise ValidationError("signal power must be positive")
    if not 0.0 <= sigma_q2 <= sigma_r2:
        raise ValidationError(
            f"distortion {sigma_q2} outside [0, signal power {sigma_r2}]")
    return 1.0 - sigma_q2 / sigma_r2


def gamma_modulo(bits, zeta):
    """Gain of a modulo converter whose folded samples are uniform.

    zeta is the folding threshold over the unfolded peak; the noise to
    signal ratio is then zeta^2 4^-b.
    """
    if bits < 1:
        raise ValidationError("bit depth must be at least 1")
    if not 0.0 < zeta <= 1.0:
        raise ValidationError(f"zeta must lie in (0, 1], got {zeta}")
    return 1.0 - zeta * zeta * 4.0 ** (-bits)


@lru_cache(maxsize=None)
def gamma_conventional(bits):
    """Gain of a full-range converter on a Gaussian input.

    Uses the minimum-distortion quantizer for the unit Gaussian, which
    reproduces the standard low-resolution gain table (0.6366 at one
    bit).
    """
    if bits < 1:
        raise ValidationError("bit depth must be at least 1")
    _, _, distortion = gaussian_optimal_quantizer(bits, 1.0)
    return 1.0 - distortion


@dataclass(frozen=True)
class RateScenario:
    """One uplink operating point for the rate computations.

    eta holds the per-user large-scale gains; p_u is linear transmit
    power. bits None models infinite resolution.
    """

    n_antennas: int
    n_users: int
    eta: tuple
    p_u: float
    combiner: str = MRC
    adc: str = "ideal"
    bits: int | None = None
    zeta: float = 0.1

    def __post_init__(self):
        if self.n_antennas < 1 or self.n_users < 1:
            raise ValidationError("need at least one antenna and one user")
        eta = np.asarray(self.eta, dtype=np.float64)
        if eta.shape != (self.n_users,):
            raise ValidationError(
                f"eta must have {self.n_users} entries, got {eta.shape}")
        if np.any(eta <= 0.0):
            raise ValidationError("large-scale gains must be positive")
        if self.p_u <= 0.0:
            raise ValidationError("transmit power must be positive")
        if self.combiner not in (MRC, ZF):
            raise ValidationError(f"unknown combiner {self.combiner!r}")
        if self.combiner == ZF and self.n_antennas <= self.n_users:
            raise ValidationError("zero forcing needs more antennas than users")
        if self.adc not in ADC_KINDS:
            raise ValidationError(f"unknown adc kind {self.adc!r}")
        object.__setattr__(self, "eta", tuple(eta))

    @property
    def gamma(self):
        if self.adc == "ideal" or self.bits is None:
            return 1.0
        if self.adc == "modulo":
            return gamma_modulo(self.bits, self.zeta)
        return gamma_conventional(self.bits)

    @property
    def eta_array(self):
        return np.asarray(self.eta)


@dataclass(frozen=True)
class RateResult:
    per_user: np.ndarray
    sum_rate: float
    trials: int
    resampled: int = 0


_MAX_RESAMPLE = 1000


def _draw_matrix(scenario, rng):
    shape = (scenario.n_antennas, scenario.n_users)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    g *= math.sqrt(0.5)
    return g * np.sqrt(scenario.eta_array)[None, :]


def ergodic_rate_mc(scenario: RateScenario, trials, rng=None, streams=None):
    """Monte-Carlo ergodic per-user rates and sum-rate.

    streams, when given, is an indexable of per-trial generators; runs
    that split trials across workers then merge to identical averages.
    Zero-forcing draws that fail the conditioning check are resampled
    and counted.
    """
    if trials < 1:
        raise ValidationError("need at least one trial")
    if streams is None:
        if rng is None:
            raise ValidationError("need an rng or per-trial streams")
        streams = rng.spawn(trials)
    gamma = scenario.gamma
    p_u = scenario.p_u
    acc = np.zeros(scenario.n_users)
    resampled = 0
    for t in range(trials):
        stream = streams[t]
        for attempt in range(_MAX_RESAMPLE):
            h = _draw_matrix(scenario, stream)
            try:
                a = build_combiner(h, scenario.combiner)
            except RankError:
                resampled += 1
                continue
            break
        else:
            raise RankError("could not draw a well-conditioned channel")
        cross = a.conj().T @ h                       # (users, users)
        direct = np.abs(np.diag(cross)) ** 2
        interference = np.sum(np.abs(cross) ** 2, axis=1) - direct
        a_pow = np.sum(np.abs(a) ** 2, axis=0)
        # receive covariance diagonal drives the quantization noise term
        rx_diag = p_u * np.sum(np.abs(h) ** 2, axis=1) + 1.0
        q_noise = gamma * (1.0 - gamma) * (np.abs(a) ** 2).T @ rx_diag
        num = p_u * gamma * gamma * direct
        den = p_u * gamma * gamma * interference + gamma * gamma * a_pow + q_noise
        acc += np.log2(1.0 + num / den)
    per_user = acc / trials
    return RateResult(per_user=per_user, sum_rate=float(per_user.sum()),
                      trials=trials, resampled=resampled)


def mrc_rate_approx(scenario: RateScenario):
    """Closed-form per-user rates for maximum-ratio combining."""
    eta = scenario.eta_array
    gamma = scenario.gamma
    p_u = scenario.p_u
    n = scenario.n_antennas
    total = eta.sum()
    interference = (p_u * gamma * (total - eta)
                    + p_u * (1.0 - gamma) * (total + eta) + 1.0)
    rates = np.log2(1.0 + p_u * gamma * eta * (n + 1) / interference)
    return RateResult(per_user=rates, sum_rate=float(rates.sum()), trials=0)


def _izf_term(eta, m, n, p_u, delta):
    # noise-plus-interference expectation for zero forcing, evaluated
    # as printed (including its fixed inner constants); the attenuation
    # coefficient is calibrated elsewhere
    big_m = eta.size
    c = delta / (n + big_m)
    s1 = eta.sum()
    s2 = np.sum(eta ** 2)
    em = eta[m]
    noise = (4.0 * em
             - 4.0 * c * em * (s1 + em)
             + n * em * c * c * (s2 + em * em))
    others = np.delete(eta, m)
    cross = np.sum(
        4.0 * em * others
        - 4.0 * c * em * others * (s1 + em + others)
        + n * em * others * (8.0 / (n + big_m)) ** 2
        * (s2 + em * em + others ** 2))
    own = (8.0 * em * em
           - 8.0 * c * em * em * (s1 + 2.0 * em)
           + em * em * c * c * ((n + 1) * s2 + (3 * n + 1) * em * em))
    return n * c * c * (noise + p_u * cross + p_u * own)


def zf_rate_approx(scenario: RateScenario, delta):
    """Closed-form per-user rates for zero forcing."""
    if scenario.n_antennas <= scenario.n_users:
        raise ValidationError("zero forcing needs more antennas than users")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"attenuation must lie in (0, 1), got {delta}")
    eta = scenario.eta_array
    gamma = scenario.gamma
    p_u = scenario.p_u
    n = scenario.n_antennas
    rates = np.empty(scenario.n_users)
    for m in range(scenario.n_users):
        izf = _izf_term(eta, m, n, p_u, delta)
        den = gamma / ((n - scenario.n_users) * eta[m]) + (1.0 - gamma) * izf
        rates[m] = math.log2(1.0 + gamma * p_u / den)
    return RateResult(per_user=rates, sum_rate=float(rates.sum()), trials=0)


def calibrate_delta(scenario: RateScenario, reference: RateResult):
    """Least-squares fit of the zero-forcing attenuation coefficient.

    Matches the closed form to Monte-Carlo per-user rates on the given
    scenario; with gamma = 1 the closed form is flat in delta, so a
    quantized scenario is required.
    """
    if scenario.gamma >= 1.0:
        raise ValidationError("calibration needs a quantized scenario")
    target = np.asarray(reference.per_user)

    def objective(delta):
        approx = zf_rate_approx(scenario, delta).per_user
        return float(np.sum((approx - target) ** 2))

    res = minimize_scalar(objective, bounds=(1e-3, 1.0 - 1e-3),
                          method="bounded")
    return float(res.x)


def energy_efficiency(sum_rate, bits, n_antennas,
                      c0=1e-4, c1=0.02, bandwidth=1e6):
    """Bits per Joule: bandwidth times rate over the converter power."""
    if sum_rate < 0.0:
        raise ValidationError("sum-rate must be non-negative")
    if bits < 1:
        raise ValidationError("bit depth must be at least 1")
    power = c0 * n_antennas * 2.0 ** bits + c1
    return bandwidth * sum_rate / power
