"""Monte Carlo and exhaustive-enumeration oracles for the closed-form detection results.

Random numbers come from numpy's Philox4x64-10 counter-based generator. Stream
``s`` of seed ``k`` is ``Generator(Philox(key=[k, s]))``; draw ``t`` of a stream
is the t-th uniform double (top 53 bits of the t-th 64-bit output), so any
implementation of Philox4x64-10 reproduces the estimates. Stream ids:

    2m      jamming draws of warden m (independent mode)
    2m + 1  detector samples of warden m (finite_n mode)
    SHARED  the common jamming draw (shared mode)

Under each hypothesis the first ``trials`` draws of a stream serve H0 and the
next ``trials`` serve H1, so the two estimates are independent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParamOutOfRange, TooManyWardens
from .fusion import majority_threshold
from .local_detect import WardenProfile

SHARED = 2**32 - 1
MODES = ("independent", "shared")
ENUM_MAX_WARDENS = 20


@dataclass(frozen=True)
class McConfig:
    trials: int = 100_000
    rng_seed: int = 0
    jamming_mode: str = "independent"
    finite_n: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ParamOutOfRange(f"trials must be >= 1, got {self.trials}")
        if self.jamming_mode not in MODES:
            raise ParamOutOfRange(f"jamming_mode must be one of {MODES}")
        if self.finite_n is not None and self.finite_n < 1:
            raise ParamOutOfRange("finite_n must be >= 1 when set")


def stream(seed: int, sid: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[int(seed) % 2**64, int(sid)]))


def _uniforms(seed, sid, n):
    """2n uniforms on [0, 1): H0 half then H1 half."""
    u = stream(seed, sid).random(2 * n)
    return u[:n], u[n:]


def _statistic(mean_power, seed, sid, finite_n):
    """Energy statistic for the given per-trial mean received powers.

    With finite_n samples the average of |y|^2 over n complex Gaussian samples is
    Gamma(n, mean/n); the sum of independent circular Gaussians (covert symbol,
    jamming symbol, noise) is itself circular Gaussian, so this is the literal
    sample average including cross terms, drawn in one shot."""
    if finite_n is None:
        return mean_power
    g = stream(seed, sid).standard_gamma(float(finite_n), size=mean_power.shape)
    return mean_power * g / finite_n


def _binom_se(p, n):
    return np.sqrt(np.maximum(p * (1.0 - p), 0.0) / n)


def mc_local(profile: WardenProfile, tau, cfg: McConfig):
    """Empirical (p_fa, p_md, (se_fa, se_md)) of one warden; ``tau`` may be an array
    (all thresholds share the same draws)."""
    n = cfg.trials
    u0, u1 = _uniforms(cfg.rng_seed, 0, n)
    y0 = u0 * profile.P_J_max * profile.A_J + profile.sigma_w_sq
    y1 = profile.P_C * profile.A_C + u1 * profile.P_J_max * profile.A_J + profile.sigma_w_sq
    if cfg.finite_n is not None:
        y = _statistic(np.r_[y0, y1], cfg.rng_seed, 1, cfg.finite_n)
        y0, y1 = y[:n], y[n:]
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    s0 = np.sort(y0)
    s1 = np.sort(y1)
    fa = (n - np.searchsorted(s0, taus, side="left")) / n  # Y >= tau raises an alarm
    md = np.searchsorted(s1, taus, side="left") / n
    se = (_binom_se(fa, n), _binom_se(md, n))
    if np.ndim(tau) == 0:
        return float(fa[0]), float(md[0]), (float(se[0][0]), float(se[1][0]))
    return fa, md, se


def _warden_stats(profiles, cfg: McConfig):
    """Per-warden statistics under H0 and H1, arrays of shape (M, trials)."""
    n = cfg.trials
    M = len(profiles)
    if cfg.jamming_mode == "shared":
        u0, u1 = _uniforms(cfg.rng_seed, SHARED, n)
        U0 = np.broadcast_to(u0, (M, n))
        U1 = np.broadcast_to(u1, (M, n))
    else:
        pairs = [_uniforms(cfg.rng_seed, 2 * m, n) for m in range(M)]
        U0 = np.array([p[0] for p in pairs])
        U1 = np.array([p[1] for p in pairs])
    span = np.array([w.P_J_max * w.A_J for w in profiles])[:, None]
    sig = np.array([w.sigma_w_sq for w in profiles])[:, None]
    cov = np.array([w.P_C * w.A_C for w in profiles])[:, None]
    Y0 = U0 * span + sig
    Y1 = cov + U1 * span + sig
    if cfg.finite_n is not None:
        for m in range(M):
            y = _statistic(np.r_[Y0[m], Y1[m]], cfg.rng_seed, 2 * m + 1, cfg.finite_n)
            Y0[m], Y1[m] = y[:n], y[n:]
    return Y0, Y1


def mc_system_dep(profiles, tau, cfg: McConfig):
    """Empirical system DEP under strict-majority fusion: (p_dep_hat, stderr)."""
    if len(profiles) == 0:
        raise ParamOutOfRange("need at least one warden")
    T = majority_threshold(len(profiles))
    Y0, Y1 = _warden_stats(profiles, cfg)
    n = cfg.trials
    fa = np.count_nonzero(np.count_nonzero(Y0 >= tau, axis=0) >= T) / n
    md = np.count_nonzero(np.count_nonzero(Y1 >= tau, axis=0) < T) / n
    se = float(np.sqrt(_binom_se(fa, n) ** 2 + _binom_se(md, n) ** 2))
    return fa + md, se


def enum_fusion(p_fa, p_md, T):
    """Exact (P_FA, P_MD) by summing over all 2^M local decision vectors."""
    p_fa = np.asarray(p_fa, dtype=float).reshape(-1)
    p_md = np.asarray(p_md, dtype=float).reshape(-1)
    M = len(p_fa)
    if M > ENUM_MAX_WARDENS:
        raise TooManyWardens(f"enumeration supports at most {ENUM_MAX_WARDENS} wardens, got {M}")
    if len(p_md) != M:
        raise ParamOutOfRange("p_fa and p_md must have the same length")
    fa_prob, md_prob, alarms = np.ones(1), np.ones(1), np.zeros(1, dtype=np.int64)
    for m in range(M):  # every decision vector's probability, one warden at a time
        fa_prob = np.concatenate([fa_prob * (1.0 - p_fa[m]), fa_prob * p_fa[m]])
        md_prob = np.concatenate([md_prob * p_md[m], md_prob * (1.0 - p_md[m])])
        alarms = np.concatenate([alarms, alarms + 1])
    P_FA = float(np.sum(fa_prob[alarms >= T]))
    P_MD = float(np.sum(md_prob[alarms < T]))
    return P_FA, P_MD
