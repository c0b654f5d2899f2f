"""Sweeps of N_Delta over n and the scaling fits used to read off h(n)."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from functools import partial

import numpy as np

from .distributions import OverlapDistribution, make_instance, mix_seed
from .spectral import harmonic_mean, smallest_derivative_root

METHODS = ("memoryless", "fullmem")
MODELS = ("n_log_n", "linear_n", "power_law")
DEFAULT_GRID = tuple(2**k for k in range(7, 15))


@dataclass(frozen=True)
class ScalingRow:
    n: int
    beta: float
    delta: float
    method: str
    N_delta_estimate: float
    estimator: str
    stderr: float
    q25: float
    q75: float
    instances: int
    seed: int


@dataclass
class ScalingTable:
    rows: list[ScalingRow] = field(default_factory=list)

    @property
    def n(self) -> np.ndarray:
        return np.array([r.n for r in self.rows], dtype=float)

    @property
    def estimates(self) -> np.ndarray:
        return np.array([r.N_delta_estimate for r in self.rows])

    def relative_iqr(self) -> np.ndarray:
        return np.array([(r.q75 - r.q25) / r.N_delta_estimate for r in self.rows])

    def to_dicts(self) -> list[dict]:
        return [asdict(r) for r in self.rows]


def instance_seed(seed: int, n: int, index: int) -> int:
    return mix_seed(mix_seed(seed, n), index)


def instance_n_delta(dist: OverlapDistribution, n: int, index: int, seed: int, delta: float):
    """Spectral memoryless and analytic full-memory N_Delta for one drawn instance."""
    inst = make_instance(dist, n, instance_seed(seed, n, index))
    mem = abs(math.log(delta)) / smallest_derivative_root(inst.x)
    full = n * (1.0 - delta) ** 2 / (2.0 * harmonic_mean(inst.x))
    return mem, full


def sweep_point(dist: OverlapDistribution, n: int, trials: int, seed: int, delta: float) -> np.ndarray:
    """``(trials, 2)`` array of per-instance (memoryless, fullmem) N_Delta at one n."""
    return np.array([instance_n_delta(dist, n, j, seed, delta) for j in range(trials)])


def _row(values, n, dist, delta, method, seed):
    q25, med, q75 = np.percentile(values, [25, 50, 75])
    # ~ standard error of a median from the IQR (McGill et al. notch width / 1.96)
    se = 0.8 * (q75 - q25) / math.sqrt(values.size)
    estimator = "spectral-exact" if method == "memoryless" else "analytic"
    return ScalingRow(n=int(n), beta=dist.beta, delta=delta, method=method,
                      N_delta_estimate=float(med), estimator=estimator, stderr=float(se),
                      q25=float(q25), q75=float(q75), instances=int(values.size), seed=seed)


def sweep_values(dist, delta, n_grid, trials, seed, jobs: int = 1) -> dict[int, np.ndarray]:
    """Per-instance values for every grid point, keyed by n."""
    n_grid = [int(n) for n in n_grid]
    if not n_grid:
        raise ValueError("empty n grid")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n grid must be strictly increasing")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    work = partial(sweep_point, dist, trials=trials, seed=seed, delta=delta)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            vals = list(pool.map(work, n_grid))
    else:
        vals = [work(n) for n in n_grid]
    return dict(zip(n_grid, vals))


def scaling_sweep(dist: OverlapDistribution, delta: float, n_grid=DEFAULT_GRID, trials: int = 30,
                  method: str = "memoryless", seed: int = 0, jobs: int = 1) -> ScalingTable:
    """Median N_Delta across ``trials`` random instances at each n.

    Memoryless uses ``|log delta| / mu_star``; full memory uses
    ``n (1 - delta)**2 / (2 H)``.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    col = METHODS.index(method)
    vals = sweep_values(dist, delta, n_grid, trials, seed, jobs)
    return ScalingTable([_row(v[:, col], n, dist, delta, method, seed) for n, v in vals.items()])


@dataclass(frozen=True)
class ScalingFit:
    model: str
    slope: float
    intercept: float
    r2: float
    ratios: np.ndarray
    ratio_spread: float


def _h(model: str, n: np.ndarray) -> np.ndarray:
    if model == "n_log_n":
        return n * np.log(n)
    if model == "linear_n":
        return n
    return np.ones_like(n)


def fit_scaling(table: ScalingTable | tuple, model: str = "power_law") -> ScalingFit:
    """Least-squares fit of ``log N`` on ``log n`` plus the ratio sequence ``N / h(n)``.

    ``table`` may also be an ``(n, N)`` pair of arrays.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    if isinstance(table, ScalingTable):
        n, N = table.n, table.estimates
    else:
        n, N = (np.asarray(v, dtype=float) for v in table)
    if n.size < 4:
        raise ValueError("need at least 4 grid points")
    if np.unique(n).size < 2 or np.any(n <= 0) or np.any(N <= 0):
        raise ValueError("degenerate grid")
    lx, ly = np.log(n), np.log(N)
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    ratios = N / _h(model, n)
    return ScalingFit(model=model, slope=float(slope), intercept=float(intercept), r2=float(r2),
                      ratios=ratios, ratio_spread=float(ratios.max() / ratios.min()))
