"""Pure-NumPy kernel for the exact quenched partition function.

The recursion runs over the compressed renewal lattice (period folded out
by the caller): with z(0) = 1,

    z(j) = sum_{i<j} z(i) K(j-i) phi(i, j),
    phi(i, j) = (1 + exp(A_j - A_i)) / 2,    A_j = -2 lambda (W_j + h j),

and log Z = logsumexp_j [ log z(j) + log Kbar(N-j) + log phi(j, N) ].

Because A_j drifts linearly in j, the weights span thousands of orders of
magnitude; all accumulation is log-scaled.  The production kernel splits
phi into its two exponential branches,

    z(j) = 1/2 [ sum_i z(i) K(j-i) ] + 1/2 e^{A_j} [ sum_i z(i) e^{-A_i} K(j-i) ],

and keeps the two running arrays under explicit log offsets, rescaling
whenever a new entry would leave the representable window.  This is the
streaming form of log-sum-exp: entries more than ~700 nats below the
running offset flush to zero exactly as they would drop out of a per-step
logsumexp.  ``log_partition_lse`` is the direct per-step-LSE transcription,
kept as an internal cross-check for the scaled kernel.
"""

from __future__ import annotations

import math

import numpy as np

LOG_HALF = math.log(0.5)
_RESCALE_HI = 600.0
_EXP_LO = -745.0  # exp underflows to 0 below this


def _log_phi(x):
    """log[(1 + e^x)/2], elementwise and overflow-safe."""
    x = np.asarray(x, dtype=float)
    return LOG_HALF + np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def log_partition_numpy(k: np.ndarray, tail: np.ndarray, a: np.ndarray) -> float:
    """Scaled two-branch DP on the compressed lattice.

    Args:
        k: K values on the compressed lattice, ``k[0] == 0``, length N+1.
        tail: survival function Kbar on the same lattice, ``tail[0] == 1``.
        a: charge exponents A_j, ``a[0] == 0``, length N+1.

    Returns:
        log Z as float64.
    """
    n = len(a) - 1
    kr = np.ascontiguousarray(k[::-1])
    p = np.zeros(n + 1)
    q = np.zeros(n + 1)
    p[0] = 1.0
    q[0] = 1.0
    cp = 0.0
    cq = 0.0
    lz = np.full(n + 1, -np.inf)
    lz[0] = 0.0

    for j in range(1, n + 1):
        u = np.dot(p[:j], kr[n - j:n])
        v = np.dot(q[:j], kr[n - j:n])
        lu = math.log(u) + cp if u > 0.0 else -np.inf
        lv = math.log(v) + cq + a[j] if v > 0.0 else -np.inf
        lzj = LOG_HALF + np.logaddexp(lu, lv)
        lz[j] = lzj

        ep = lzj - cp
        if ep > _RESCALE_HI:
            p[:j] *= math.exp(cp - lzj)
            cp = lzj
            p[j] = 1.0
        else:
            p[j] = math.exp(ep) if ep > _EXP_LO else 0.0

        eq = lzj - a[j] - cq
        if eq > _RESCALE_HI:
            q[:j] *= math.exp(cq - (lzj - a[j]))
            cq = lzj - a[j]
            q[j] = 1.0
        else:
            q[j] = math.exp(eq) if eq > _EXP_LO else 0.0

    with np.errstate(divide="ignore"):
        boundary = lz + np.log(tail[::-1]) + _log_phi(a[n] - a)
    m = boundary.max()
    if not np.isfinite(m):
        return float(m)
    return float(m + math.log(np.exp(boundary - m).sum()))


def log_partition_lse(k: np.ndarray, tail: np.ndarray, a: np.ndarray) -> float:
    """Per-step log-sum-exp reference; same contract as log_partition_numpy.

    O(N^2) exponentials, so only used on moderate N to validate the scaled
    kernel.
    """
    n = len(a) - 1
    with np.errstate(divide="ignore"):
        lk = np.log(k)
    lz = np.full(n + 1, -np.inf)
    lz[0] = 0.0
    for j in range(1, n + 1):
        # _log_phi already carries the 1/2 sign average
        terms = lz[:j] + lk[j:0:-1] + _log_phi(a[j] - a[:j])
        m = terms.max()
        if np.isfinite(m):
            lz[j] = m + math.log(np.exp(terms - m).sum())
    with np.errstate(divide="ignore"):
        boundary = lz + np.log(tail[::-1]) + _log_phi(a[n] - a)
    m = boundary.max()
    if not np.isfinite(m):
        return float(m)
    return float(m + math.log(np.exp(boundary - m).sum()))
