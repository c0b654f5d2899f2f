"""Memoryless and full-memory learners: exact evaluation, simulation, N_Delta.

State 0 is the teacher's set.  A learner sitting in wrong set ``i`` keeps
it for a geometric number of samples with success probability ``x_i``
(the rejecting sample included), then moves.  The memoryless learner moves
uniformly to any of the other ``n - 1`` sets; the full-memory learner
walks a uniformly random ordering of the sets and never revisits one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distributions import LearnerInstance, rng_for
from .spectral import build_transition_matrix, harmonic_mean, smallest_derivative_root

BLOCK = 256  # trials per derived RNG stream
DENSE_N_MAX = 256


class Method(str, Enum):
    MEMORYLESS_EXACT = "memoryless-exact"
    MEMORYLESS_SIM = "memoryless-sim"
    FULLMEM_EXACT = "fullmem-exact"
    FULLMEM_SIM = "fullmem-sim"


@dataclass(frozen=True)
class LearnOutcome:
    method: Method
    n: int
    delta: float
    N_delta: float
    prediction: float
    trials: int | None = None
    ci_halfwidth: float | None = None


def _check_delta(delta):
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


# --- exact memoryless --------------------------------------------------------

def _step(p, x_full, n):
    # p @ T in O(n):  (pT)_j = p_j (1 - x_j) + (sum_i p_i x_i - p_j x_j) / (n - 1)
    s = p @ x_full
    return p * (1.0 - x_full) + (s - p * x_full) / (n - 1)


def _failure_by_iteration(inst: LearnerInstance, checkpoints) -> np.ndarray:
    n = inst.n
    x_full = np.concatenate(([0.0], inst.x))
    p = np.full(n, 1.0 / n)
    out = np.empty(len(checkpoints))
    t = 0
    for k, N in enumerate(checkpoints):
        for _ in range(N - t):
            p = _step(p, x_full, n)
        t = N
        out[k] = p[1:].sum()
    return out


def _failure_by_squaring(inst: LearnerInstance, N: int) -> float:
    p = np.full(inst.n, 1.0 / inst.n)
    P = build_transition_matrix(inst)
    while N:
        if N & 1:
            p = p @ P
        N >>= 1
        if N:
            P = P @ P
    return float(p[1:].sum())


def exact_failure_probability(inst: LearnerInstance, N: int) -> float:
    """``1 - Q11(N)``, summed over the wrong states to avoid cancellation."""
    N = int(N)
    if N < 0:
        raise ValueError("N must be >= 0")
    n = inst.n
    if N * n <= n**3 * max(1, N.bit_length()) or n > DENSE_N_MAX:
        return float(_failure_by_iteration(inst, [N])[0])
    return _failure_by_squaring(inst, N)


def exact_success_probability(inst: LearnerInstance, N: int) -> float:
    """Probability ``Q11`` that the memoryless learner holds the right set after N samples,
    starting from the uniform distribution over sets."""
    return 1.0 - exact_failure_probability(inst, N)


def exact_success_curve(inst: LearnerInstance, checkpoints) -> np.ndarray:
    """``Q11`` at each (sorted, non-negative) checkpoint, with a monotonicity check."""
    cps = [int(c) for c in checkpoints]
    if any(c < 0 for c in cps) or cps != sorted(cps):
        raise ValueError("checkpoints must be sorted and non-negative")
    q = 1.0 - _failure_by_iteration(inst, cps)
    if np.any(np.diff(q) < -1e-14):
        raise ArithmeticError("Q11 decreased along N")
    return q


def spectral_n_delta(inst: LearnerInstance, delta: float) -> float:
    """``|log delta| / mu_star``, the leading-order memoryless N_Delta."""
    _check_delta(delta)
    return abs(math.log(delta)) / smallest_derivative_root(inst.x)


def _n_delta_squaring(inst: LearnerInstance, delta: float) -> int:
    p = np.full(inst.n, 1.0 / inst.n)
    if p[1:].sum() <= delta:
        return 0
    powers = [build_transition_matrix(inst)]
    vecs = [p @ powers[0]]
    # doubling: find K with failure(2**K) <= delta
    while vecs[-1][1:].sum() > delta:
        if len(powers) > 62:
            raise ArithmeticError("N_delta beyond 2**62 samples")
        vecs.append(vecs[-1] @ powers[-1])
        powers.append(powers[-1] @ powers[-1])
    K = len(powers) - 1
    if K == 0:
        return 1
    # binary search on (2**(K-1), 2**K]: largest N with failure(N) > delta
    N, q = 1 << (K - 1), vecs[K - 1]
    for j in range(K - 2, -1, -1):
        cand = q @ powers[j]
        if cand[1:].sum() > delta:
            N, q = N + (1 << j), cand
    return N + 1


def _n_delta_scan(inst: LearnerInstance, delta: float) -> int:
    n = inst.n
    x_full = np.concatenate(([0.0], inst.x))
    p = np.full(n, 1.0 / n)
    N = 0
    while p[1:].sum() > delta:
        p = _step(p, x_full, n)
        N += 1
    return N


def n_delta_memoryless(inst: LearnerInstance, delta: float) -> LearnOutcome:
    """Smallest N with ``Q11(N) >= 1 - delta``, next to the spectral prediction.

    Small instances use doubling then binary search over matrix powers; large
    ones a forward scan with the O(n) structured step.
    """
    _check_delta(delta)
    if inst.n <= DENSE_N_MAX:
        N = _n_delta_squaring(inst, delta)
    else:
        N = _n_delta_scan(inst, delta)
    return LearnOutcome(Method.MEMORYLESS_EXACT, inst.n, delta, N, spectral_n_delta(inst, delta))


# --- simulation ----------------------------------------------------------------

def _block_sizes(trials: int):
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for b, start in enumerate(range(0, trials, BLOCK)):
        yield b, min(BLOCK, trials - start)


def simulate_memoryless_times(inst: LearnerInstance, trials: int, seed: int,
                              horizon: int | None = None) -> np.ndarray:
    """Samples consumed until the memoryless learner adopts the right set.

    Jump-chain simulation, O(number of jumps) per trial.  Trials still wrong
    after ``horizon`` samples are reported as ``inf``.
    """
    n = inst.n
    x = inst.x
    out = []
    for b, m in _block_sizes(trials):
        rng = rng_for(seed, b)
        state = rng.integers(0, n, size=m)
        t = np.zeros(m)
        active = np.flatnonzero(state != 0)
        while active.size:
            s = state[active]
            t[active] += rng.geometric(x[s - 1])
            r = rng.integers(0, n - 1, size=active.size)
            new = r + (r >= s)
            state[active] = new
            active = active[new != 0]
        out.append(t)
    times = np.concatenate(out)
    if horizon is not None:
        # truncation after the fact keeps the random stream independent of the horizon
        times[times > horizon] = np.inf
    return times


def simulate_memoryless(inst: LearnerInstance, checkpoints, trials: int, seed: int) -> np.ndarray:
    """Fraction of simulated learners holding the right set at each checkpoint."""
    cps = np.asarray(checkpoints)
    times = simulate_memoryless_times(inst, trials, seed, horizon=int(cps.max()))
    return (times[:, None] <= cps[None, :]).mean(axis=0)


def sample_dwell_times(overlap: float, size: int, seed: int) -> np.ndarray:
    """Samples spent in a wrong set with overlap ``a`` before rejecting it."""
    if not 0 <= overlap < 1:
        raise ValueError("overlap must lie in [0, 1)")
    return rng_for(seed).geometric(1.0 - overlap, size=size)


def simulate_full_memory(inst: LearnerInstance, trials: int, seed: int):
    """Total samples and number of jumps until the full-memory learner reaches the right set.

    Returns ``(totals, jumps)``; ``jumps + 1`` is the position of the right set
    in the learner's random ordering.
    """
    n = inst.n
    totals, jumps = [], []
    for b, m in _block_sizes(trials):
        rng = rng_for(seed, b)
        keys = rng.random((m, n))
        before = keys[:, 1:] < keys[:, :1]
        dwell = rng.geometric(np.broadcast_to(inst.x, (m, n - 1)))
        totals.append(np.where(before, dwell, 0).sum(axis=1))
        jumps.append(before.sum(axis=1))
    return np.concatenate(totals), np.concatenate(jumps)


def empirical_quantile_n_delta(times, delta: float, z: float = 1.96):
    """Smallest N reached by a fraction ``>= 1 - delta`` of runs, with an
    order-statistic confidence half-width."""
    _check_delta(delta)
    t = np.sort(np.asarray(times, dtype=float))
    m = t.size
    q = 1.0 - delta
    k = min(max(math.ceil(q * m - 1e-9), 1), m)
    spread = z * math.sqrt(m * q * (1 - q))
    lo = min(max(math.floor(q * m - spread), 1), m)
    hi = min(max(math.ceil(q * m + spread), 1), m)
    return float(t[k - 1]), float(0.5 * (t[hi - 1] - t[lo - 1]))


def n_delta_memoryless_sim(inst: LearnerInstance, delta: float, trials: int, seed: int) -> LearnOutcome:
    times = simulate_memoryless_times(inst, trials, seed)
    N, hw = empirical_quantile_n_delta(times, delta)
    return LearnOutcome(Method.MEMORYLESS_SIM, inst.n, delta, N, spectral_n_delta(inst, delta),
                        trials, hw)


# --- full memory, closed forms ----------------------------------------------------

def expected_time_full_memory(inst: LearnerInstance) -> float:
    """``(1/2) sum 1/(1 - a_i)``: each wrong set precedes the right one with probability 1/2
    and costs ``1/(1 - a_i)`` samples on average."""
    return 0.5 * float(np.sum(1.0 / inst.x))


def n_delta_full_memory(inst: LearnerInstance, delta: float) -> float:
    """``n (1 - delta)**2 / (2 H)`` with ``H`` the harmonic mean of the n - 1 gaps.

    This is the expected number of samples spent in positions up to
    ``(1 - delta) n`` of the ordering; it grows like ``n / H`` but is not the
    ``1 - delta`` quantile of the learning time
    (see :func:`full_memory_quantile_approx`).
    """
    _check_delta(delta)
    return inst.n * (1.0 - delta) ** 2 / (2.0 * harmonic_mean(inst.x))


def full_memory_quantile_approx(inst: LearnerInstance, delta: float) -> float:
    """Rank-based approximation ``(1 - delta) sum 1/x_i`` of the ``1 - delta`` quantile.

    The right set sits at a uniform position, so with probability ``1 - delta``
    at most ``(1 - delta) n`` sets are tried first, each costing on average
    ``sum(1/x) / (n - 1)``.
    """
    _check_delta(delta)
    return (1.0 - delta) * float(np.sum(1.0 / inst.x))


def n_delta_full_memory_sim(inst: LearnerInstance, delta: float, trials: int, seed: int) -> LearnOutcome:
    totals, _ = simulate_full_memory(inst, trials, seed)
    N, hw = empirical_quantile_n_delta(totals, delta)
    return LearnOutcome(Method.FULLMEM_SIM, inst.n, delta, N, n_delta_full_memory(inst, delta),
                        trials, hw)


def n_delta_full_memory_exact(inst: LearnerInstance, delta: float) -> LearnOutcome:
    return LearnOutcome(Method.FULLMEM_EXACT, inst.n, delta, n_delta_full_memory(inst, delta),
                        full_memory_quantile_approx(inst, delta))
