"""NumPy reference implementations of the batched hot kernels.

Each function operates on a batch of real sequences laid out as a 2-D
float64 array of shape (batch, n) with one threshold / bound per row.
The compiled twin in ``_ops_cy`` mirrors these operations element for
element so that both backends produce bit-identical output.
"""

import numpy as np


def fold_batch(x, lam):
    """Centered modulo fold of every row of x into [-lam, lam)."""
    lam = np.asarray(lam, dtype=np.float64)[:, None]
    u = x / (2.0 * lam) + 0.5
    return 2.0 * lam * (np.mod(u, 1.0) - 0.5)


def quantize_batch(x, lam, bits):
    """Mid-rise quantization of folded rows.

    Cell index is floor(x / q0) away from boundaries; exact boundary
    samples round toward the level of larger magnitude. Indices clamp to
    the 2**bits levels spanning [-lam, lam).
    """
    lam = np.asarray(lam, dtype=np.float64)[:, None]
    half = 1 << (bits - 1)
    q0 = 2.0 * lam / (1 << bits)
    u = x / q0
    idx = np.where(x > 0.0, np.floor(u), np.ceil(u) - 1.0)
    np.clip(idx, -float(half), float(half - 1), out=idx)
    return (idx + 0.5) * q0


def diff_batch(x, order):
    """order-fold forward difference along the last axis."""
    for _ in range(order):
        x = x[:, 1:] - x[:, :-1]
    return x


def cumsum0_batch(x):
    """Anti-difference: running sum with a leading zero column."""
    out = np.empty((x.shape[0], x.shape[1] + 1), dtype=np.float64)
    out[:, 0] = 0.0
    np.cumsum(x, axis=1, out=out[:, 1:])
    return out


def round_2lam_batch(x, lam):
    """Round every row entry to the nearest point of 2*lam*Z."""
    lam = np.asarray(lam, dtype=np.float64)[:, None]
    return 2.0 * lam * np.ceil(np.floor(x / lam) / 2.0)


def unfold_batch(s, lam, beta, order, j_idx):
    """Iterative residue reconstruction from order-fold folded differences.

    s holds the order-fold differences of the folding residue, one row
    per sequence. Each round anti-differences, snaps back to the 2*lam
    grid and removes the unknown integration constant estimated from the
    second anti-difference at indices 1 and j_idx + 1. Returns the final
    anti-difference (residue up to a constant), rows of length
    s.shape[1] + order.
    """
    lam_col = np.asarray(lam, dtype=np.float64)[:, None]
    beta = np.asarray(beta, dtype=np.float64)
    for _ in range(order - 1):
        t = cumsum0_batch(s)
        st = cumsum0_batch(t)
        kap = np.floor((st[:, 1] - st[:, j_idx + 1]) / (12.0 * beta) + 0.5)
        s = round_2lam_batch(t, lam) + 2.0 * lam_col * kap[:, None]
    return cumsum0_batch(s)
