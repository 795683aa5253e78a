"""Waveform recovery from folded samples via higher-order differences.

For a bandlimited signal sampled fast enough, the order-L finite
difference of the samples stays inside the folding range, so the
difference of the folded capture reveals the difference of the folding
residue exactly. Repeated anti-differencing with rounding to the
2 lam grid, plus an estimate of each integration constant from the
growth of the second anti-difference, rebuilds the residue and hence
the signal up to one global multiple of 2 lam, which anchoring
removes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import AnchorError, ConditionError, ValidationError
from .modulo_adc import FoldedFrame, modulo_fold


def finite_diff(x, order=1):
    """order-fold forward difference; output is shorter by order."""
    x = np.asarray(x)
    if order < 0:
        raise ValidationError("difference order must be >= 0")
    if x.shape[-1] <= order:
        raise ValidationError(f"need more than {order} samples, got {x.shape[-1]}")
    for _ in range(order):
        x = x[..., 1:] - x[..., :-1]
    return x


def anti_diff(x):
    """Running sum with a leading zero; exact left inverse of finite_diff."""
    x = np.asarray(x)
    pad = np.zeros(x.shape[:-1] + (1,), dtype=x.dtype)
    return np.concatenate([pad, np.cumsum(x, axis=-1)], axis=-1)


@dataclass(frozen=True)
class RecoveryConfig:
    """Parameters governing one recovery run.

    threshold is the folding half-range lam; beta bounds the un-folded
    peak and must be a multiple of 2 lam. order, when given, overrides
    the difference order computed from the time-bandwidth product.
    noise_exponent is the alpha in the noise-robust sampling condition
    T <= 1 / (2**alpha Omega e).
    """

    threshold: float
    beta: float
    sample_interval: float
    bandwidth: float
    order: int | None = None
    noise_exponent: float = 1.0

    def __post_init__(self):
        errs = []
        if self.threshold <= 0:
            errs.append("threshold must be positive")
        else:
            ratio = self.beta / (2.0 * self.threshold)
            if self.beta <= 0 or abs(ratio - round(ratio)) > 1e-9:
                errs.append(f"beta {self.beta} is not a positive multiple of 2*threshold")
            if self.beta < self.threshold:
                errs.append("beta must be at least the folding threshold")
        if self.sample_interval <= 0:
            errs.append("sample_interval must be positive")
        if self.bandwidth <= 0:
            errs.append("bandwidth must be positive")
        if self.order is not None and self.order < 1:
            errs.append("order override must be >= 1")
        if self.noise_exponent < 1.0:
            errs.append("noise_exponent must be >= 1")
        if errs:
            raise ValidationError(errs)

    @property
    def tw_product(self):
        """T * Omega * e, the growth factor of one differencing pass."""
        return self.sample_interval * self.bandwidth * math.e

    @classmethod
    def from_frame(cls, frame: FoldedFrame, **kw):
        return cls(
            threshold=frame.config.threshold,
            beta=frame.beta,
            sample_interval=frame.sample_interval,
            bandwidth=frame.bandwidth,
            **kw,
        )


def compute_order(cfg: RecoveryConfig) -> int:
    """Difference order ceil(log(lam / beta) / log(T Omega e)), at least 1.

    This is the smallest L with (T Omega e)**L beta <= lam, the point
    where the folded differences are guaranteed inside the fold range.
    """
    rho = cfg.tw_product
    if rho >= 1.0:
        raise ConditionError(
            f"T*Omega*e = {rho:.4g} >= 1; differencing does not contract")
    if cfg.beta <= cfg.threshold:
        return 1
    order = math.ceil(math.log(cfg.threshold / cfg.beta) / math.log(rho))
    return max(int(order), 1)


def noise_robust_order(cfg: RecoveryConfig) -> int:
    """Difference order with an extra factor-e guard for noisy captures.

    One natural-log unit is added to the bound gap, giving the smallest
    L with (T Omega e)**L beta e <= lam.
    """
    rho = cfg.tw_product
    if rho >= 1.0:
        raise ConditionError(
            f"T*Omega*e = {rho:.4g} >= 1; differencing does not contract")
    order = math.ceil((math.log(cfg.beta / cfg.threshold) + 1.0) / -math.log(rho))
    return max(int(order), 1)


@dataclass(frozen=True)
class ConditionReport:
    """Recovery feasibility summary for a configuration."""

    tw_product: float
    sampling_ok: bool          # T <= 1 / (2 Omega e)
    max_sample_interval: float
    noise_sampling_ok: bool    # T <= 1 / (2**alpha Omega e)
    max_noise: float           # tolerable per-sample noise magnitude
    noise_ok: bool | None      # against a supplied noise bound, if any
    order: int


def check_conditions(cfg: RecoveryConfig, noise_bound=None) -> ConditionReport:
    """Evaluate the sufficient sampling and noise conditions.

    These are sufficient, not necessary: recovery is still attempted
    when they fail, and callers surface the flags as diagnostics.
    """
    alpha = cfg.noise_exponent
    t_max = 1.0 / (2.0 * cfg.bandwidth * math.e)
    t_max_noise = 1.0 / (2.0 ** alpha * cfg.bandwidth * math.e)
    rho = cfg.beta / cfg.threshold
    max_noise = (cfg.threshold / 4.0) * (2.0 * rho) ** (-1.0 / alpha)
    noise_ok = None if noise_bound is None else bool(noise_bound <= max_noise)
    return ConditionReport(
        tw_product=cfg.tw_product,
        sampling_ok=cfg.sample_interval <= t_max * (1.0 + 1e-12),
        max_sample_interval=t_max,
        noise_sampling_ok=cfg.sample_interval <= t_max_noise * (1.0 + 1e-12),
        max_noise=max_noise,
        noise_ok=noise_ok,
        order=compute_order(cfg),
    )


_TIE_RTOL = 1e-9


def _folded_diff(samples, lam, level):
    """Fold of the level-th difference with boundary ties resolved.

    A quantized capture puts the level-th difference on a grid that can
    hit the fold boundary exactly; the representative in [-lam, lam) is
    then ambiguous by 2 lam. The (level-1)-th folded difference keeps a
    factor-two margin to the boundary and fixes the sign, so ties are
    corrected from one level down.
    """
    d = _kernels.diff_batch(samples, level)
    f = _kernels.fold_batch(d, lam)
    if level > 1:
        lam_col = lam[:, None]
        # float dust puts an exact-boundary difference at either -lam or
        # just under +lam, so both edges are tie candidates
        tie_lo = f <= (_TIE_RTOL - 1.0) * lam_col
        tie_hi = f >= (1.0 - _TIE_RTOL) * lam_col
        if np.any(tie_lo) or np.any(tie_hi):
            w = _kernels.diff_batch(_folded_diff(samples, lam, level - 1), 1)
            f = np.where(tie_lo & (w > 0.0), f + 2.0 * lam_col, f)
            f = np.where(tie_hi & (w < 0.0), f - 2.0 * lam_col, f)
    return f


def recover_batch(samples, lam, beta, order):
    """Unfold a batch of real folded sequences (one row each).

    lam and beta are per-row arrays; order is shared. Returns rows of
    the same length equal to the residue-corrected sequences, still off
    by one global multiple of 2 lam per row.
    """
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValidationError("recover_batch expects a 2-D (batch, n) array")
    lam = np.array(np.broadcast_to(lam, (samples.shape[0],)), dtype=np.float64)
    beta = np.array(np.broadcast_to(beta, (samples.shape[0],)), dtype=np.float64)
    n = samples.shape[1]
    j_idx = int(np.ceil(6.0 * np.max(beta / lam)))
    if n < j_idx + 2:
        raise ValidationError(
            f"need at least {j_idx + 2} samples for constant estimation, got {n}")
    if n <= order:
        raise ValidationError(f"need more than order={order} samples, got {n}")

    dq = _kernels.diff_batch(samples, order)
    s = _folded_diff(samples, lam, order) - dq
    residue = _kernels.unfold_batch(s, lam, beta, order, j_idx)
    return residue + samples


@dataclass(frozen=True)
class RecoveryResult:
    samples: np.ndarray
    order: int
    order_source: str          # "computed", "noise-robust" or "override"
    conditions: ConditionReport


def recover(frame: FoldedFrame, cfg: RecoveryConfig | None = None) -> RecoveryResult:
    """Reconstruct the un-folded waveform from a folded frame.

    I and Q branches are recovered independently. The difference order
    comes from the contraction bound; quantized captures switch to the
    noise-robust order only while the quantization step satisfies the
    noise bound, because extra differencing amplifies coarse
    quantization noise (factor 2 per pass) faster than the contraction
    helps.
    """
    if cfg is None:
        cfg = RecoveryConfig.from_frame(frame)
    report = check_conditions(cfg)
    if cfg.order is not None:
        order, source = int(cfg.order), "override"
    else:
        order, source = report.order, "computed"
        if frame.quantized and frame.config.step / 2.0 <= report.max_noise:
            order, source = noise_robust_order(cfg), "noise-robust"
    x = np.atleast_1d(frame.samples)
    rows = np.ascontiguousarray(np.stack([x.real, x.imag]))
    lam = np.full(2, cfg.threshold)
    beta = np.full(2, cfg.beta)
    rec = recover_batch(rows, lam, beta, order)
    return RecoveryResult(
        samples=rec[0] + 1j * rec[1],
        order=order,
        order_source=source,
        conditions=report,
    )


def anchor_constant(samples, lam, mode="zero-mean", reference=None, tol=None):
    """Remove the global 2 lam ambiguity left after recovery.

    zero-mean mode shifts by the multiple of 2 lam closest to the
    sample mean (per branch for complex input). known-sample mode takes
    reference=(index, value) and fails if the implied offset is not
    within tol (default lam / 2) of a 2 lam multiple.
    """
    samples = np.asarray(samples)
    if np.iscomplexobj(samples):
        return (anchor_constant(samples.real, lam, mode, _part(reference, "real"), tol)
                + 1j * anchor_constant(samples.imag, lam, mode, _part(reference, "imag"), tol))
    if mode == "zero-mean":
        shift = 2.0 * lam * np.round(np.mean(samples) / (2.0 * lam))
        return samples - shift
    if mode == "known-sample":
        if reference is None:
            raise AnchorError("known-sample anchoring needs reference=(index, value)")
        idx, value = reference
        offset = samples[idx] - value
        shift = 2.0 * lam * np.round(offset / (2.0 * lam))
        resid = offset - shift
        limit = lam / 2.0 if tol is None else tol
        if abs(resid) > limit:
            raise AnchorError(
                f"reference inconsistent: residual {resid:.3g} exceeds {limit:.3g}")
        return samples - shift
    raise ValidationError(f"unknown anchoring mode {mode!r}")


def _part(reference, which):
    if reference is None:
        return None
    idx, value = reference
    return (idx, getattr(complex(value), which))


def fold_commutes(samples, lam, order):
    """Max |fold(diff(x)) - fold(diff(fold(x)))|, a pipeline self-check."""
    d_direct = modulo_fold(finite_diff(samples, order), lam)
    d_folded = modulo_fold(finite_diff(modulo_fold(samples, lam), order), lam)
    return float(np.max(np.abs(d_direct - d_folded)))
