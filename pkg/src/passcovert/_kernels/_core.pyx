# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: ESP / Poisson-binomial recurrences, the fused DEP over a
threshold grid, and the full min-over-threshold search."""
import numpy as np

from libc.math cimport sqrt
from libc.stdlib cimport free, malloc, qsort


cdef inline double _local_fa(double tau, double sigma, double a1, double span) noexcept nogil:
    if span == 0.0:
        return 1.0 if tau <= sigma else 0.0
    if tau <= sigma:
        return 1.0
    if tau < a1:
        return (a1 - tau) / span
    return 0.0


cdef inline double _local_md(double tau, double a2, double a3, double span) noexcept nogil:
    if span == 0.0:
        return 1.0 if tau > a2 else 0.0
    if tau <= a2:
        return 0.0
    if tau < a3:
        return (tau - a2) / span
    return 1.0


cdef struct Wardens:
    Py_ssize_t M
    Py_ssize_t T
    const double *sigma
    const double *a1
    const double *a2
    const double *a3
    const double *span
    double *fa
    double *de


cdef void _dep_pair(Wardens *w, double tau, double *out_fa, double *out_md) noexcept nogil:
    cdef Py_ssize_t M = w.M, m, i
    cdef double pf, qf, pd, qd, sfa, smd
    cdef double *fa = w.fa
    cdef double *de = w.de
    for i in range(M + 1):
        fa[i] = 0.0
        de[i] = 0.0
    fa[0] = 1.0
    de[0] = 1.0
    for m in range(M):
        pf = _local_fa(tau, w.sigma[m], w.a1[m], w.span[m])
        qf = 1.0 - pf
        pd = 1.0 - _local_md(tau, w.a2[m], w.a3[m], w.span[m])
        qd = 1.0 - pd
        for i in range(m + 1, 0, -1):
            fa[i] = fa[i] * qf + fa[i - 1] * pf
            de[i] = de[i] * qd + de[i - 1] * pd
        fa[0] = fa[0] * qf
        de[0] = de[0] * qd
    sfa = 0.0
    for i in range(w.T, M + 1):
        sfa = sfa + fa[i]
    smd = 0.0
    for i in range(0, w.T):
        smd = smd + de[i]
    out_fa[0] = sfa
    out_md[0] = smd


cdef inline double _dep(Wardens *w, double tau) noexcept nogil:
    cdef double f, d
    _dep_pair(w, tau, &f, &d)
    return f + d


cdef int _cmp_double(const void *a, const void *b) noexcept nogil:
    cdef double x = (<const double *> a)[0]
    cdef double y = (<const double *> b)[0]
    return (x > y) - (x < y)


cdef int _alloc(Wardens *w, Py_ssize_t M) noexcept:
    w.fa = <double *> malloc((M + 1) * sizeof(double))
    w.de = <double *> malloc((M + 1) * sizeof(double))
    return w.fa != NULL and w.de != NULL


def esp(const double[::1] x):
    cdef Py_ssize_t n = x.shape[0], m, i
    out = np.zeros(n + 1)
    cdef double[::1] c = out
    cdef double xm
    c[0] = 1.0
    for m in range(n):
        xm = x[m]
        for i in range(m + 1, 0, -1):
            c[i] = c[i] + c[i - 1] * xm
    return out


def poibin_pmf(const double[::1] p):
    cdef Py_ssize_t n = p.shape[0], m, i
    out = np.zeros(n + 1)
    cdef double[::1] c = out
    cdef double pm, qm
    c[0] = 1.0
    for m in range(n):
        pm = p[m]
        qm = 1.0 - pm
        for i in range(m + 1, 0, -1):
            c[i] = c[i] * qm + c[i - 1] * pm
        c[0] = c[0] * qm
    return out


def dep_components(const double[::1] taus, const double[::1] sigma, const double[::1] alpha1,
                   const double[::1] alpha2, const double[::1] alpha3, const double[::1] span,
                   Py_ssize_t threshold):
    """System (P_FA, P_MD) under k-out-of-M fusion for every threshold in ``taus``."""
    cdef Py_ssize_t G = taus.shape[0], M = sigma.shape[0], g
    out_fa = np.empty(G)
    out_md = np.empty(G)
    cdef double[::1] rfa = out_fa
    cdef double[::1] rmd = out_md
    cdef Wardens w
    if M == 0:
        raise ValueError("need at least one warden")
    w.M = M
    w.T = threshold
    w.sigma = &sigma[0]
    w.a1 = &alpha1[0]
    w.a2 = &alpha2[0]
    w.a3 = &alpha3[0]
    w.span = &span[0]
    if not _alloc(&w, M):
        free(w.fa)
        free(w.de)
        raise MemoryError()
    try:
        with nogil:
            for g in range(G):
                _dep_pair(&w, taus[g], &rfa[g], &rmd[g])
    finally:
        free(w.fa)
        free(w.de)
    return out_fa, out_md


def min_dep_search(const double[::1] sigma, const double[::1] alpha1, const double[::1] alpha2,
                   const double[::1] alpha3, const double[::1] span, Py_ssize_t threshold,
                   Py_ssize_t grid_density, double golden_rtol):
    """(tau_star, g_star): DEP minimised over the breakpoints plus ``grid_density``
    interior points per interval, refined by one golden-section pass around the best."""
    cdef Py_ssize_t M = sigma.shape[0], nb, nc, i, j, best
    cdef Wardens w
    cdef double *bps = NULL
    cdef double *cand = NULL
    cdef double lo, hi, step, v, gbest, tbest, x1, x2, f1, f2, tol
    cdef double inv = (sqrt(5.0) - 1.0) / 2.0
    if M == 0:
        raise ValueError("need at least one warden")
    w.M = M
    w.T = threshold
    w.sigma = &sigma[0]
    w.a1 = &alpha1[0]
    w.a2 = &alpha2[0]
    w.a3 = &alpha3[0]
    w.span = &span[0]
    ok = _alloc(&w, M)
    bps = <double *> malloc(4 * M * sizeof(double))
    cand = <double *> malloc((4 * M + (4 * M - 1) * grid_density) * sizeof(double))
    if not ok or bps == NULL or cand == NULL:
        free(w.fa)
        free(w.de)
        free(bps)
        free(cand)
        raise MemoryError()
    try:
        with nogil:
            for i in range(M):
                bps[4 * i] = sigma[i]
                bps[4 * i + 1] = alpha1[i]
                bps[4 * i + 2] = alpha2[i]
                bps[4 * i + 3] = alpha3[i]
            qsort(bps, 4 * M, sizeof(double), _cmp_double)
            nb = 1
            for i in range(1, 4 * M):
                if bps[i] != bps[nb - 1]:
                    bps[nb] = bps[i]
                    nb += 1
            nc = 0
            for i in range(nb):
                cand[nc] = bps[i]
                nc += 1
                if i + 1 < nb:
                    lo = bps[i]
                    hi = bps[i + 1]
                    step = (hi - lo) / (grid_density + 1)
                    for j in range(1, grid_density + 1):
                        cand[nc] = j * step + lo
                        nc += 1
            best = 0
            gbest = _dep(&w, cand[0])
            for i in range(1, nc):
                v = _dep(&w, cand[i])
                if v < gbest:
                    gbest = v
                    best = i
            tbest = cand[best]
            lo = cand[best - 1] if best > 0 else cand[0]
            hi = cand[best + 1] if best + 1 < nc else cand[nc - 1]
            if hi > lo and gbest > 0.0:
                tol = golden_rtol * (hi - lo)
                x1 = hi - inv * (hi - lo)
                x2 = lo + inv * (hi - lo)
                f1 = _dep(&w, x1)
                f2 = _dep(&w, x2)
                while hi - lo > tol:
                    if f1 <= f2:
                        hi = x2
                        x2 = x1
                        f2 = f1
                        x1 = hi - inv * (hi - lo)
                        f1 = _dep(&w, x1)
                    else:
                        lo = x1
                        x1 = x2
                        f1 = f2
                        x2 = lo + inv * (hi - lo)
                        f2 = _dep(&w, x2)
                if f1 <= f2:
                    if f1 < gbest:
                        gbest = f1
                        tbest = x1
                elif f2 < gbest:
                    gbest = f2
                    tbest = x2
    finally:
        free(w.fa)
        free(w.de)
        free(bps)
        free(cand)
    return tbest, gbest
