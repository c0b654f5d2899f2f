"""Overlap laws and learner instances.

An overlap ``a`` is the probability that a teacher sample drawn from the
true set is also consistent with a wrong set.  Everything downstream only
cares about the gap ``x = 1 - a`` and, in particular, about how the gap
density behaves near zero: ``f(x) ~ c * x**beta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

_MASK64 = (1 << 64) - 1


def mix_seed(seed: int, index: int) -> int:
    """Derive an independent 64-bit seed for ``index`` from a base seed.

    SplitMix64 finaliser applied to ``seed + (index + 1) * golden``.  The
    mapping is fixed so trial streams do not depend on execution order.
    """
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def rng_for(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(mix_seed(seed, index))


class Family(str, Enum):
    UNIFORM = "uniform"
    POWERGAP = "powergap"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class OverlapDistribution:
    """Law of the gap ``x = 1 - a`` on ``(0, 1]``.

    For the power family the gap density is ``(1 + beta) * x**beta``, so the
    constant at zero is ``c = 1 + beta``.  The empirical family resamples a
    fixed list of gaps uniformly with replacement.
    """

    family: Family
    beta: float
    c: float
    gaps: tuple[float, ...] = field(default=())

    @property
    def alpha(self) -> float:
        """Stable exponent of the summands ``1/x`` (``1 + beta``)."""
        return 1.0 + self.beta

    def cdf(self, x):
        if self.family is Family.EMPIRICAL:
            g = np.sort(np.asarray(self.gaps))
            return np.searchsorted(g, x, side="right") / g.size
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return x ** (1.0 + self.beta)

    def reciprocal_mean(self) -> float:
        """``E[1/x]``; infinite when ``beta <= 0`` for the power family."""
        if self.family is Family.EMPIRICAL:
            return float(np.mean(1.0 / np.asarray(self.gaps)))
        if self.beta <= 0:
            return float("inf")
        return (1.0 + self.beta) / self.beta

    def to_record(self) -> dict:
        rec = {"family": self.family.value, "beta": self.beta}
        if self.family is Family.EMPIRICAL:
            rec["gaps"] = list(self.gaps)
        return rec


def make_distribution(family="uniform", beta: float = 0.0, c: float | None = None,
                      gaps: Sequence[float] | None = None) -> OverlapDistribution:
    """Validate and build an :class:`OverlapDistribution`.

    ``c`` is accepted for symmetry with the ``f(x) ~ c x**beta`` notation but
    is always replaced by the normalising constant ``1 + beta``.
    """
    family = Family(family.lower() if isinstance(family, str) else family)
    if family is Family.UNIFORM:
        return OverlapDistribution(Family.POWERGAP, 0.0, 1.0)
    if family is Family.EMPIRICAL:
        if gaps is None or len(gaps) == 0:
            raise ValueError("empirical distribution needs a non-empty gap list")
        arr = np.asarray(gaps, dtype=float)
        if np.any(arr <= 0) or np.any(arr > 1) or not np.all(np.isfinite(arr)):
            raise ValueError("empirical gaps must lie in (0, 1]")
        # beta is not meaningful for a finite support; the sample is bounded away from 0
        return OverlapDistribution(Family.EMPIRICAL, float(beta), 1.0, tuple(arr.tolist()))
    beta = float(beta)
    if not beta > -1.0:
        raise ValueError(f"beta must be > -1, got {beta}")
    return OverlapDistribution(Family.POWERGAP, beta, 1.0 + beta)


def gaps_from_uniform(dist: OverlapDistribution, u):
    """Inverse-CDF map from ``u`` in (0, 1] to gaps."""
    u = np.asarray(u, dtype=float)
    if dist.family is Family.EMPIRICAL:
        g = np.asarray(dist.gaps)
        idx = np.where(u >= 1.0, g.size - 1, np.ceil(u * g.size).astype(np.int64) - 1)
        return g[np.clip(idx, 0, g.size - 1)]
    return u ** (1.0 / (1.0 + dist.beta))


def draw_gaps(dist: OverlapDistribution, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. gaps from an existing generator."""
    if dist.family is Family.EMPIRICAL:
        g = np.asarray(dist.gaps)
        return g[rng.integers(0, g.size, size=count)]
    x = gaps_from_uniform(dist, 1.0 - rng.random(count))
    bad = x <= 0.0
    while np.any(bad):
        # underflow of u**(1/(1+beta)) for tiny u
        x[bad] = gaps_from_uniform(dist, 1.0 - rng.random(int(bad.sum())))
        bad = x <= 0.0
    return x


def sample_gaps(dist: OverlapDistribution, count: int, seed: int) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    return draw_gaps(dist, count, rng_for(seed))


@dataclass(frozen=True, eq=False)
class LearnerInstance:
    """One realised learning problem.

    ``a`` holds the ``n`` overlaps with ``a[0] == 1`` (the true set) and
    ``x`` the ``n - 1`` gaps of the wrong sets.  Computations use ``x``
    directly so tiny gaps keep full relative precision.
    """

    a: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        x = np.array(self.x, dtype=float)
        if a.ndim != 1 or a.size < 2:
            raise ValueError("need at least two sets")
        if a[0] != 1.0:
            raise ValueError("a[0] must equal 1")
        if x.shape != (a.size - 1,) or np.any(x <= 0) or np.any(x > 1):
            raise ValueError("gaps must lie in (0, 1] and match the overlaps")
        # a = 1 - x may round to 1 for x < 2**-53; the gaps are authoritative
        if np.any(np.abs((1.0 - a[1:]) - x) > 1e-12):
            raise ValueError("overlaps and gaps are inconsistent")
        a.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.a.size

    def __eq__(self, other):
        if not isinstance(other, LearnerInstance):
            return NotImplemented
        return np.array_equal(self.a, other.a) and np.array_equal(self.x, other.x)

    __hash__ = None


def instance_from_gaps(gaps) -> LearnerInstance:
    x = np.asarray(gaps, dtype=float)
    return LearnerInstance(np.concatenate(([1.0], 1.0 - x)), x)


def instance_from_overlaps(overlaps) -> LearnerInstance:
    """Build an instance from the full overlap vector ``[1, a_2, ..., a_n]``."""
    a = np.asarray(overlaps, dtype=float)
    return LearnerInstance(a, 1.0 - a[1:])


def make_instance(dist: OverlapDistribution, n: int, seed: int) -> LearnerInstance:
    if n < 2:
        raise ValueError("n must be >= 2")
    x = sample_gaps(dist, n - 1, seed)
    return LearnerInstance(np.concatenate(([1.0], 1.0 - x)), x)
