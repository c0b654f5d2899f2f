import math

import numpy as np
import pytest

from learnrate.distributions import make_distribution, make_instance
from learnrate.experiments import (
    fit_scaling,
    instance_n_delta,
    instance_seed,
    scaling_sweep,
    sweep_values,
)
from learnrate.learners import n_delta_full_memory
from learnrate.spectral import smallest_derivative_root

UNIFORM = make_distribution("uniform")
GRID = tuple(2**k for k in range(7, 12))


def test_fit_recovers_n_log_n():
    n = 2.0 ** np.arange(7, 15)
    fit = fit_scaling((n, 7 * n * np.log(n)), "n_log_n")
    assert fit.ratio_spread == pytest.approx(1.0)
    np.testing.assert_allclose(fit.ratios, 7.0)
    assert 1.0 < fit.slope < 1.2


def test_fit_recovers_power_law():
    n = 2.0 ** np.arange(7, 15)
    fit = fit_scaling((n, 3 * n**2), "power_law")
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert math.exp(fit.intercept) == pytest.approx(3.0)
    assert fit.r2 == pytest.approx(1.0)


@pytest.mark.parametrize("n", [[], [1, 2, 3], [5, 5, 5, 5]])
def test_fit_rejects_small_or_degenerate(n):
    with pytest.raises(ValueError):
        fit_scaling((np.array(n, float), np.ones(len(n))))


def test_fit_rejects_unknown_model():
    with pytest.raises(ValueError):
        fit_scaling((np.arange(1, 6), np.arange(1, 6)), "cubic")


def test_sweep_rejects_bad_grid():
    with pytest.raises(ValueError):
        sweep_values(UNIFORM, 0.1, [], 3, 0)
    with pytest.raises(ValueError):
        sweep_values(UNIFORM, 0.1, [256, 128], 3, 0)


def test_instance_values_match_components():
    n, j, seed, delta = 300, 4, 9, 0.05
    mem, full = instance_n_delta(UNIFORM, n, j, seed, delta)
    inst = make_instance(UNIFORM, n, instance_seed(seed, n, j))
    assert mem == abs(math.log(delta)) / smallest_derivative_root(inst.x)
    assert full == pytest.approx(n_delta_full_memory(inst, delta))


def test_memoryless_over_fullmem_band():
    # (n-1) mu* lies in [H/2, H], which pins the ratio per instance
    delta = 0.1
    vals = sweep_values(UNIFORM, delta, [2**10, 2**11], 20, seed=1)
    base = abs(math.log(delta)) / (1 - delta) ** 2
    for n, v in vals.items():
        r = v[:, 0] / v[:, 1]
        lo, hi = 2 * base * (n - 1) / n, 4 * base * (n - 1) / n
        assert np.all((r >= lo * (1 - 1e-9)) & (r <= hi * (1 + 1e-9)))


def test_table_shape_and_estimator():
    t = scaling_sweep(UNIFORM, 0.1, GRID, trials=5, method="fullmem", seed=2)
    assert [r.n for r in t.rows] == list(GRID)
    assert {r.estimator for r in t.rows} == {"analytic"}
    assert all(r.q25 <= r.N_delta_estimate <= r.q75 for r in t.rows)
    assert len(t.to_dicts()) == len(GRID)


def test_rejects_unknown_method():
    with pytest.raises(ValueError):
        scaling_sweep(UNIFORM, 0.1, GRID, 3, method="oracle")


def test_relative_iqr_concentrates_for_positive_beta():
    t = scaling_sweep(make_distribution("powergap", 1.0), 0.1, (2**7, 2**13), trials=60, seed=3)
    riqr = t.relative_iqr()
    assert riqr[-1] < riqr[0]


def test_relative_iqr_persists_for_negative_beta():
    t = scaling_sweep(make_distribution("powergap", -0.5), 0.1, (2**7, 2**13), trials=60, seed=3)
    riqr = t.relative_iqr()
    assert riqr[-1] > 0.5 * riqr[0]


def test_positive_beta_grows_linearly():
    t = scaling_sweep(make_distribution("powergap", 2.0), 0.1, GRID, trials=20, seed=4)
    fit = fit_scaling(t, "linear_n")
    assert fit.slope == pytest.approx(1.0, abs=0.05)
    assert fit.ratio_spread < 1.1


def test_parallel_matches_serial():
    a = scaling_sweep(UNIFORM, 0.1, GRID, trials=4, seed=5, jobs=1)
    b = scaling_sweep(UNIFORM, 0.1, GRID, trials=4, seed=5, jobs=2)
    assert a.to_dicts() == b.to_dicts()
