# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for the exact quenched partition function.

Same scaled two-branch recursion as copolymer._dp.log_partition_numpy; see
that module for the derivation.  The whole loop runs without the GIL so
replica batches parallelize across threads.
"""

from libc.math cimport exp, log, log1p, INFINITY
from libc.stdlib cimport malloc, free

cdef double LOG_HALF = log(0.5)
cdef double RESCALE_HI = 600.0
cdef double EXP_LO = -745.0


cdef inline double _log_phi(double x) noexcept nogil:
    if x > 0.0:
        return LOG_HALF + x + log1p(exp(-x))
    return LOG_HALF + log1p(exp(x))


cdef double _dp(const double* k, const double* tail, const double* a,
                Py_ssize_t n) noexcept nogil:
    cdef double* p = <double*> malloc((n + 1) * sizeof(double))
    cdef double* q = <double*> malloc((n + 1) * sizeof(double))
    cdef double* lz = <double*> malloc((n + 1) * sizeof(double))
    if p == NULL or q == NULL or lz == NULL:
        if p != NULL: free(p)
        if q != NULL: free(q)
        if lz != NULL: free(lz)
        return -INFINITY

    cdef Py_ssize_t i, j, m
    cdef double u, v, kn, lu, lv, hi, lzj, ep, eq, scale
    cdef double cp = 0.0, cq = 0.0
    cdef double best, acc, term

    p[0] = 1.0
    q[0] = 1.0
    lz[0] = 0.0

    for j in range(1, n + 1):
        u = 0.0
        v = 0.0
        for m in range(1, j + 1):
            kn = k[m]
            u += p[j - m] * kn
            v += q[j - m] * kn

        lu = log(u) + cp if u > 0.0 else -INFINITY
        lv = log(v) + cq + a[j] if v > 0.0 else -INFINITY
        if lu == -INFINITY and lv == -INFINITY:
            lzj = -INFINITY
        else:
            hi = lu if lu > lv else lv
            lzj = LOG_HALF + hi + log(exp(lu - hi) + exp(lv - hi))
        lz[j] = lzj

        ep = lzj - cp
        if ep > RESCALE_HI:
            scale = exp(cp - lzj)
            for i in range(j):
                p[i] *= scale
            cp = lzj
            p[j] = 1.0
        else:
            p[j] = exp(ep) if ep > EXP_LO else 0.0

        eq = lzj - a[j] - cq
        if eq > RESCALE_HI:
            scale = exp(cq - (lzj - a[j]))
            for i in range(j):
                q[i] *= scale
            cq = lzj - a[j]
            q[j] = 1.0
        else:
            q[j] = exp(eq) if eq > EXP_LO else 0.0

    # log Z = logsumexp_j [ lz(j) + log tail(n - j) + log phi(a_n - a_j) ]
    best = -INFINITY
    acc = 0.0
    for j in range(n + 1):
        if tail[n - j] <= 0.0 or lz[j] == -INFINITY:
            continue
        term = lz[j] + log(tail[n - j]) + _log_phi(a[n] - a[j])
        if term <= best:
            acc += exp(term - best)
        else:
            if best == -INFINITY:
                acc = 1.0
            else:
                acc = acc * exp(best - term) + 1.0
            best = term

    free(p)
    free(q)
    free(lz)
    if best == -INFINITY:
        return -INFINITY
    return best + log(acc)


def log_partition_cython(const double[::1] k not None,
                         const double[::1] tail not None,
                         const double[::1] a not None) -> float:
    """Compiled counterpart of copolymer._dp.log_partition_numpy."""
    cdef Py_ssize_t n = a.shape[0] - 1
    if k.shape[0] != n + 1 or tail.shape[0] != n + 1:
        raise ValueError("k, tail, a must share one length")
    if n < 1:
        raise ValueError("need at least one lattice step")
    cdef double out
    with nogil:
        out = _dp(&k[0], &tail[0], &a[0], n)
    return out
