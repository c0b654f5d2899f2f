"""Harmonic means of gap samples and their stable-law limits.

For i.i.d. gaps ``x_1..x_n`` on (0, 1] with density ``~ c x**beta`` at 0,
the summands ``1/x`` are heavy tailed with exponent ``alpha = 1 + beta``.
The helpers here generate per-trial statistics ``X_n = mean(1/x)``,
``H_n = 1/X_n`` and the regime-dependent centred/scaled versions, and
provide the Monte Carlo checks used to look at their limits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .distributions import OverlapDistribution, Family, draw_gaps, mix_seed, rng_for

KS_ALPHA_1PCT = 1.6276236115189502  # sqrt(-log(0.005) / 2)


def reciprocal_mean(gaps) -> float:
    x = np.asarray(gaps, dtype=float)
    if x.size == 0:
        raise ValueError("need at least one gap")
    if np.any(~(x > 0)):
        raise ValueError("gaps must be strictly positive")
    return float(np.mean(1.0 / x))


def _exponent(beta: float) -> float:
    """``1 - 1/alpha`` for ``alpha = 1 + beta`` (negative when beta < 0)."""
    return 1.0 - 1.0 / (1.0 + beta)


def centered_statistic(X, n: int, beta: float, c: float = 1.0):
    """Centre or rescale ``X_n`` so that it has a non-degenerate limit.

    beta == 0  ->  X_n - c log n
    beta > 0   ->  X_n                  (tends to the constant E[1/x])
    beta < 0   ->  n**(1 - 1/(1+beta)) * X_n
    """
    if not beta > -1:
        raise ValueError("beta must be > -1")
    X = np.asarray(X, dtype=float)
    if beta == 0:
        return X - c * np.log(n)
    if beta > 0:
        return X
    return n ** _exponent(beta) * X


@dataclass
class LimitSample:
    n: int
    beta: float
    trials: int
    X: np.ndarray
    H: np.ndarray
    Y: np.ndarray


def trial_seed(seed: int, n: int, trial: int) -> int:
    # keyed on n as well, so samples at different n are independent
    return mix_seed(mix_seed(seed, n), trial)


def sample_limit(dist: OverlapDistribution, n: int, trials: int, seed: int) -> LimitSample:
    """Draw ``trials`` independent values of ``X_n``; each trial has its own stream."""
    X = np.empty(trials)
    for t in range(trials):
        rng = np.random.default_rng(trial_seed(seed, n, t))
        X[t] = np.mean(1.0 / draw_gaps(dist, n, rng))
    return LimitSample(n=n, beta=dist.beta, trials=trials, X=X, H=1.0 / X,
                       Y=centered_statistic(X, n, dist.beta, dist.c))


def _require_power(dist):
    if dist.family is Family.EMPIRICAL:
        raise ValueError("limit statistics need a power-law gap distribution")


def regime_constant_statistic(H, n: int, dist: OverlapDistribution):
    """Per-trial quantity whose mean tends to the regime constant.

    ``H log n`` (beta = 0), ``mu H`` (beta > 0), ``H / n**(1-1/alpha)`` (beta < 0).
    """
    _require_power(dist)
    H = np.asarray(H, dtype=float)
    if dist.beta == 0:
        return H * np.log(n)
    if dist.beta > 0:
        return dist.reciprocal_mean() * H
    return H / n ** _exponent(dist.beta)


def estimate_limit_constant(dist: OverlapDistribution, n_grid, trials: int, seed: int):
    """Monte Carlo means of :func:`regime_constant_statistic` along ``n_grid``.

    Returns a list of ``(n, estimate, stderr)`` tuples.
    """
    n_grid = list(n_grid)
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be increasing")
    out = []
    for n in n_grid:
        s = sample_limit(dist, n, trials, seed)
        v = regime_constant_statistic(s.H, n, dist)
        out.append((n, float(v.mean()), float(v.std(ddof=1) / np.sqrt(trials))))
    return out


def lln_deviation(H, n: int, dist: OverlapDistribution):
    """``|H log n - 1/c|`` for beta = 0, ``|H - 1/mu|`` for beta > 0."""
    _require_power(dist)
    if dist.beta < 0:
        raise ValueError("law of large numbers is only stated for beta >= 0")
    H = np.asarray(H, dtype=float)
    if dist.beta == 0:
        return np.abs(H * np.log(n) - 1.0 / dist.c)
    return np.abs(H - 1.0 / dist.reciprocal_mean())


def lln_check(dist: OverlapDistribution, n: int, trials: int, a_tol: float, seed: int = 0) -> float:
    """Fraction of trials whose harmonic statistic misses its limit by more than ``a_tol``."""
    if dist.beta < 0:
        raise ValueError("law of large numbers is only stated for beta >= 0")
    s = sample_limit(dist, n, trials, seed)
    return float(np.mean(lln_deviation(s.H, n, dist) > a_tol))


# --- limiting laws of H_n -------------------------------------------------

def fluctuation_statistic(X, n: int, dist: OverlapDistribution):
    """Statistic with a non-degenerate limit law in each regime.

    Same as :func:`centered_statistic` except for beta > 0, where
    ``n**(1-1/alpha) (X_n - mu)`` is used (alpha capped at 2, i.e. the
    Gaussian scaling once 1/x has finite variance).
    """
    _require_power(dist)
    X = np.asarray(X, dtype=float)
    if dist.beta > 0:
        e = 1.0 - 1.0 / min(1.0 + dist.beta, 2.0)
        return n**e * (X - dist.reciprocal_mean())
    return centered_statistic(X, n, dist.beta, dist.c)


def harmonic_statistic(X, n: int, dist: OverlapDistribution):
    """Normalised harmonic mean whose law is a reflected transform of the X-law.

    beta == 0: ``log n (H log n - 1/c)``
    beta > 0:  ``n**(1-1/alpha) (H - 1/mu)``
    beta < 0:  ``H / n**(1-1/alpha)``
    """
    _require_power(dist)
    H = 1.0 / np.asarray(X, dtype=float)
    if dist.beta == 0:
        L = np.log(n)
        return L * (H * L - 1.0 / dist.c)
    if dist.beta > 0:
        e = 1.0 - 1.0 / min(1.0 + dist.beta, 2.0)
        return n**e * (H - 1.0 / dist.reciprocal_mean())
    return H / n ** _exponent(dist.beta)


def harmonic_to_fluctuation(z, n: int, dist: OverlapDistribution):
    """Inverse of the (decreasing) map fluctuation -> harmonic statistic at finite n."""
    z = np.asarray(z, dtype=float)
    if dist.beta == 0:
        L = np.log(n)
        return L / (z / L + 1.0 / dist.c) - dist.c * L
    if dist.beta > 0:
        e = 1.0 - 1.0 / min(1.0 + dist.beta, 2.0)
        mu = dist.reciprocal_mean()
        return n**e * (1.0 / (z / n**e + 1.0 / mu) - mu)
    return 1.0 / z


def limiting_argument(z, dist: OverlapDistribution):
    """Argument of G in the n -> infinity law ``P(Z <= z) = 1 - G(arg)``."""
    z = np.asarray(z, dtype=float)
    if dist.beta == 0:
        return -z * dist.c**2
    if dist.beta > 0:
        return -z * dist.reciprocal_mean() ** 2
    return 1.0 / z


def ecdf(sample, points, strict: bool = False):
    s = np.sort(np.asarray(sample, dtype=float))
    return np.searchsorted(s, points, side="left" if strict else "right") / s.size


def transform_identity_gap(X, n: int, dist: OverlapDistribution) -> float:
    """Largest gap between the ECDF of the harmonic statistic and the reflected ECDF
    of the fluctuation statistic, on the same trials.

    Evaluated midway between consecutive sorted harmonic values, where
    ``F_Z(z) = 1 - F_Y(phi^-1(z)-)`` holds exactly; counts are compared as
    integers so the result is 0 unless the identity is violated.
    """
    Z = np.sort(harmonic_statistic(X, n, dist))
    Y = np.sort(fluctuation_statistic(X, n, dist))
    mids = 0.5 * (Z[1:] + Z[:-1])
    mids = mids[mids > Z[:-1]]
    if mids.size == 0:
        return 0.0
    below = np.searchsorted(Z, mids, side="right")
    above = Y.size - np.searchsorted(Y, harmonic_to_fluctuation(mids, n, dist), side="left")
    return float(np.max(np.abs(below - above)) / Z.size)


def ks_critical_value(m: int, k: int, coeff: float = KS_ALPHA_1PCT) -> float:
    """Asymptotic two-sample KS critical value (1 % level by default)."""
    return coeff * np.sqrt((m + k) / (m * k))


@dataclass
class SelfConsistency:
    n: int
    factor: int
    ks: float
    pvalue: float
    critical_1pct: float
    transform_gap: float
    small: LimitSample
    large: LimitSample


def limit_law_selfconsistency(dist: OverlapDistribution, n: int, trials: int, seed: int,
                              factor: int = 4) -> SelfConsistency:
    """Two-sample KS between the fluctuation statistic at ``n`` and ``factor*n``."""
    small = sample_limit(dist, n, trials, seed)
    large = sample_limit(dist, factor * n, trials, seed)
    ys = fluctuation_statistic(small.X, n, dist)
    yl = fluctuation_statistic(large.X, factor * n, dist)
    res = stats.ks_2samp(ys, yl)
    gap = max(transform_identity_gap(small.X, n, dist),
              transform_identity_gap(large.X, factor * n, dist))
    return SelfConsistency(n=n, factor=factor, ks=float(res.statistic), pvalue=float(res.pvalue),
                           critical_1pct=ks_critical_value(trials, trials),
                           transform_gap=gap, small=small, large=large)


def tail_balance(samples, threshold: float) -> tuple[float, float]:
    """Empirical right- and left-tail masses beyond ``threshold`` (as fractions)."""
    s = np.asarray(samples, dtype=float)
    return float(np.mean(s > threshold)), float(np.mean(s < -threshold))


# --- reference stable sampler --------------------------------------------

def sample_one_sided_stable(alpha: float, size: int, seed: int) -> np.ndarray:
    """Totally skewed positive stable variates, Laplace transform ``exp(-s**alpha)``.

    Kanter's representation with ``V ~ U(0, pi)`` and ``E ~ Exp(1)``.  For
    ``alpha = 1/2`` this is the Levy law of scale 1/2, i.e. ``1 / (2 Z**2)``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    rng = rng_for(seed)
    V = rng.uniform(0.0, np.pi, size)
    E = rng.standard_exponential(size)
    out = (np.sin(alpha * V) / np.sin(V) ** (1.0 / alpha)) * (
        np.sin((1.0 - alpha) * V) / E) ** ((1.0 - alpha) / alpha)
    return out


def levy_cdf(x, scale: float = 0.5):
    """CDF of the Levy distribution ``erfc(sqrt(scale / (2 x)))``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x > 0, special.erfc(np.sqrt(scale / (2.0 * np.maximum(x, 1e-300)))), 0.0)


def hill_estimator(samples, fraction: float = 0.01) -> float:
    """Hill estimate of the tail exponent from the top ``fraction`` of the sample."""
    s = np.sort(np.asarray(samples, dtype=float))[::-1]
    k = max(int(fraction * s.size), 2)
    logs = np.log(s[: k + 1])
    return float(1.0 / np.mean(logs[:k] - logs[k]))
