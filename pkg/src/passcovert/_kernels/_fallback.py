"""Pure-NumPy versions of the compiled kernels; same arithmetic order, vectorised over thresholds."""
import numpy as np


def esp(x):
    x = np.ascontiguousarray(x, dtype=float)
    c = np.zeros(len(x) + 1)
    c[0] = 1.0
    for m, xm in enumerate(x):
        c[1 : m + 2] = c[1 : m + 2] + c[0 : m + 1] * xm
    return c


def poibin_pmf(p):
    p = np.ascontiguousarray(p, dtype=float)
    c = np.zeros(len(p) + 1)
    c[0] = 1.0
    for m, pm in enumerate(p):
        qm = 1.0 - pm
        c[1 : m + 2] = c[1 : m + 2] * qm + c[0 : m + 1] * pm
        c[0] = c[0] * qm
    return c


def _local_fa(tau, sigma, a1, span):
    if span == 0.0:
        return np.where(tau <= sigma, 1.0, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        lin = (a1 - tau) / span
    return np.where(tau <= sigma, 1.0, np.where(tau < a1, lin, 0.0))


def _local_md(tau, a2, a3, span):
    if span == 0.0:
        return np.where(tau > a2, 1.0, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        lin = (tau - a2) / span
    return np.where(tau <= a2, 0.0, np.where(tau < a3, lin, 1.0))


def dep_components(taus, sigma, alpha1, alpha2, alpha3, span, threshold):
    taus = np.ascontiguousarray(taus, dtype=float)
    G, M = len(taus), len(sigma)
    fa = np.zeros((G, M + 1))
    de = np.zeros((G, M + 1))
    fa[:, 0] = 1.0
    de[:, 0] = 1.0
    for m in range(M):
        pf = _local_fa(taus, sigma[m], alpha1[m], span[m])
        qf = 1.0 - pf
        pd = 1.0 - _local_md(taus, alpha2[m], alpha3[m], span[m])
        qd = 1.0 - pd
        fa[:, 1 : m + 2] = fa[:, 1 : m + 2] * qf[:, None] + fa[:, 0 : m + 1] * pf[:, None]
        de[:, 1 : m + 2] = de[:, 1 : m + 2] * qd[:, None] + de[:, 0 : m + 1] * pd[:, None]
        fa[:, 0] = fa[:, 0] * qf
        de[:, 0] = de[:, 0] * qd
    # left-to-right accumulation mirrors the compiled loop
    sfa = np.zeros(G)
    for i in range(threshold, M + 1):
        sfa = sfa + fa[:, i]
    smd = np.zeros(G)
    for i in range(0, threshold):
        smd = smd + de[:, i]
    return sfa, smd


def candidate_thresholds(sigma, alpha1, alpha2, alpha3, grid_density):
    bps = np.unique(np.concatenate([sigma, alpha1, alpha2, alpha3]))
    parts = []
    for i in range(len(bps)):
        parts.append(bps[i : i + 1])
        if i + 1 < len(bps):
            lo, hi = bps[i], bps[i + 1]
            step = (hi - lo) / (grid_density + 1)
            parts.append(np.arange(1, grid_density + 1) * step + lo)
    return bps, np.concatenate(parts)


def min_dep_search(sigma, alpha1, alpha2, alpha3, span, threshold, grid_density, golden_rtol):
    if len(sigma) == 0:
        raise ValueError("need at least one warden")
    _, cand = candidate_thresholds(sigma, alpha1, alpha2, alpha3, grid_density)
    fa, md = dep_components(cand, sigma, alpha1, alpha2, alpha3, span, threshold)
    vals = fa + md
    best = int(np.argmin(vals))
    tbest, gbest = float(cand[best]), float(vals[best])
    lo = cand[best - 1] if best > 0 else cand[0]
    hi = cand[best + 1] if best + 1 < len(cand) else cand[-1]
    if hi > lo and gbest > 0.0:

        def f(t):
            a, b = dep_components(np.array([t]), sigma, alpha1, alpha2, alpha3, span, threshold)
            return float(a[0] + b[0])

        inv = (np.sqrt(5.0) - 1.0) / 2.0
        tol = golden_rtol * (hi - lo)
        x1 = hi - inv * (hi - lo)
        x2 = lo + inv * (hi - lo)
        f1, f2 = f(x1), f(x2)
        while hi - lo > tol:
            if f1 <= f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - inv * (hi - lo)
                f1 = f(x1)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + inv * (hi - lo)
                f2 = f(x2)
        if f1 <= f2:
            if f1 < gbest:
                gbest, tbest = f1, float(x1)
        elif f2 < gbest:
            gbest, tbest = f2, float(x2)
    return tbest, gbest
