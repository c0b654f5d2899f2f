import math

import numpy as np
import pytest
from scipy import stats

from learnrate.distributions import instance_from_overlaps, make_distribution, make_instance, mix_seed
from learnrate.learners import (
    Method,
    empirical_quantile_n_delta,
    exact_failure_probability,
    exact_success_curve,
    exact_success_probability,
    expected_time_full_memory,
    full_memory_quantile_approx,
    n_delta_full_memory,
    n_delta_full_memory_sim,
    n_delta_memoryless,
    n_delta_memoryless_sim,
    sample_dwell_times,
    simulate_full_memory,
    simulate_memoryless,
    simulate_memoryless_times,
)
from learnrate.spectral import build_transition_matrix, dense_eigenvalues, harmonic_mean, second_eigenvalue
from oracles import enumerate_full_memory_expectation

UNIFORM = make_distribution("uniform")


def matrix_power_failure(inst, N):
    T = build_transition_matrix(inst)
    p = np.full(inst.n, 1.0 / inst.n) @ np.linalg.matrix_power(T, N)
    return p[1:].sum()


# --- exact memoryless ---------------------------------------------------------

def test_success_probability_disjoint():
    assert exact_success_probability(instance_from_overlaps([1, 0]), 1) == 1.0


@pytest.mark.parametrize("N", range(0, 12))
def test_success_probability_two_sets_closed_form(N):
    inst = instance_from_overlaps([1, 0.5])
    assert exact_success_probability(inst, N) == pytest.approx(1 - 2.0 ** (-N - 1), abs=1e-15)


def test_success_probability_matches_eigen_form():
    inst = instance_from_overlaps([1, 0.5])
    assert exact_success_probability(inst, 3) == 0.9375
    assert exact_success_probability(inst, 3) == pytest.approx(1 - 0.5 * 0.5**3, abs=1e-15)


@pytest.mark.parametrize("n, N", [(5, 1), (20, 37), (50, 1000), (120, 5000)])
def test_failure_routes_agree_with_matrix_power(n, N):
    inst = make_instance(UNIFORM, n, seed=n)
    expected = matrix_power_failure(inst, N)
    assert exact_failure_probability(inst, N) == pytest.approx(expected, rel=1e-9, abs=1e-300)


def test_success_curve_is_monotone():
    inst = make_instance(UNIFORM, 40, 2)
    q = exact_success_curve(inst, range(0, 2000, 50))
    assert np.all(np.diff(q) >= 0)
    with pytest.raises(ValueError):
        exact_success_curve(inst, [5, 3])


def test_log_failure_slope_is_log_lambda():
    inst = make_instance(UNIFORM, 12, 4)
    ev = dense_eigenvalues(build_transition_matrix(inst))
    lam = second_eigenvalue(inst)
    lam3 = max(abs(ev[2]), abs(ev[-1]))
    N0 = int(np.ceil(np.log(1e-3) / np.log(lam3 / lam)))
    Ns = np.arange(N0, N0 + 50)
    logs = np.log([exact_failure_probability(inst, N) for N in Ns])
    slope = np.polyfit(Ns, logs, 1)[0]
    assert abs(slope - np.log(lam)) < 1e-4


# --- N_delta memoryless --------------------------------------------------------

def test_n_delta_two_sets():
    inst = instance_from_overlaps([1, 0.5])
    assert n_delta_memoryless(inst, 0.1).N_delta == 3


def test_n_delta_boundary_is_weak_inequality():
    # Q11(0) = 1/2 already meets 1 - delta = 1/2
    assert n_delta_memoryless(instance_from_overlaps([1, 0.5]), 0.5).N_delta == 0


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.1, 1.5])
def test_n_delta_rejects_delta(delta):
    with pytest.raises(ValueError):
        n_delta_memoryless(instance_from_overlaps([1, 0.5]), delta)


@pytest.mark.parametrize("n", [3, 17, 100, 300])
def test_n_delta_is_smallest_crossing(n):
    inst = make_instance(UNIFORM, n, seed=7 * n)
    out = n_delta_memoryless(inst, 0.05)
    N = out.N_delta
    assert exact_success_probability(inst, N) >= 0.95
    assert exact_success_probability(inst, N - 1) < 0.95
    assert out.method is Method.MEMORYLESS_EXACT


def test_n_delta_within_sandwich_band():
    inst = make_instance(UNIFORM, 100, seed=31)
    out = n_delta_memoryless(inst, 0.01)
    ref = abs(math.log(0.01)) * (inst.n - 1) / harmonic_mean(inst.x)
    assert 0.5 * ref <= out.N_delta <= 2.0 * ref


# --- memoryless simulation ------------------------------------------------------

def test_sim_disjoint_sets():
    frac = simulate_memoryless(instance_from_overlaps([1, 0]), [1], 100_000, seed=1)
    assert frac[0] == 1.0


def test_sim_two_sets_matches_exact():
    frac = simulate_memoryless(instance_from_overlaps([1, 0.5]), [3], 100_000, seed=2)[0]
    sigma = math.sqrt(0.9375 * 0.0625 / 100_000)
    assert abs(frac - 0.9375) < 3 * sigma


def test_sim_random_instance_matches_exact():
    inst = make_instance(UNIFORM, 10, seed=5)
    frac = simulate_memoryless(inst, [200], 20_000, seed=3)[0]
    q = exact_success_probability(inst, 200)
    assert abs(frac - q) < 3 * math.sqrt(q * (1 - q) / 20_000)


def test_sim_is_deterministic_and_horizon_marks_inf():
    inst = make_instance(UNIFORM, 10, seed=6)
    a = simulate_memoryless_times(inst, 1000, seed=9)
    assert np.array_equal(a, simulate_memoryless_times(inst, 1000, seed=9))
    b = simulate_memoryless_times(inst, 1000, seed=9, horizon=10)
    assert np.all(np.isinf(b[a > 10])) and np.array_equal(a[a <= 10], b[a <= 10])


def test_sim_quantile_n_delta_near_exact():
    inst = make_instance(UNIFORM, 20, seed=8)
    sim = n_delta_memoryless_sim(inst, 0.1, 20_000, seed=4)
    exact = n_delta_memoryless(inst, 0.1).N_delta
    assert abs(sim.N_delta - exact) <= 3 * sim.ci_halfwidth + 1


def test_empirical_quantile_definition():
    N, hw = empirical_quantile_n_delta(np.arange(1, 101), 0.1)
    assert N == 90 and hw > 0


# --- full memory ---------------------------------------------------------------

def test_expected_time_examples():
    assert expected_time_full_memory(instance_from_overlaps([1, 0.5, 0.5])) == 2.0
    assert expected_time_full_memory(instance_from_overlaps([1, 0])) == 0.5


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_expected_time_matches_enumeration(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        inst = instance_from_overlaps(np.concatenate(([1.0], rng.random(n - 1) * 0.99)))
        assert expected_time_full_memory(inst) == pytest.approx(
            enumerate_full_memory_expectation(inst), rel=1e-12, abs=1e-12)


def test_expected_time_is_half_n_minus_1_over_H():
    inst = make_instance(UNIFORM, 50, 3)
    assert expected_time_full_memory(inst) == pytest.approx((inst.n - 1) / (2 * harmonic_mean(inst.x)))


def test_position_of_right_set_is_uniform():
    inst = make_instance(UNIFORM, 6, 1)
    _, jumps = simulate_full_memory(inst, 100_000, seed=12)
    counts = np.bincount(jumps, minlength=6)
    assert stats.chisquare(counts).pvalue > 0.01


def test_dwell_time_mean():
    d = sample_dwell_times(0.9, 100_000, seed=5)
    assert d.min() >= 1
    sigma = math.sqrt(0.9) / 0.1 / math.sqrt(d.size)  # sd of geometric(p) is sqrt(1-p)/p
    assert abs(d.mean() - 10.0) < 3 * sigma


def test_full_memory_mean_total_three_sets():
    totals, _ = simulate_full_memory(instance_from_overlaps([1, 0.5, 0.5]), 100_000, seed=13)
    assert abs(totals.mean() - 2.0) < 3 * totals.std() / math.sqrt(totals.size)


def test_full_memory_delta_to_zero_limit():
    inst = make_instance(UNIFORM, 40, 2)
    assert n_delta_full_memory(inst, 1e-12) == pytest.approx(
        inst.n / (inst.n - 1) * expected_time_full_memory(inst), rel=1e-10)


def test_full_memory_large_delta_below_expected_time():
    inst = make_instance(UNIFORM, 40, 2)
    assert n_delta_full_memory(inst, 1 - 1 / inst.n) <= expected_time_full_memory(inst)


@pytest.mark.slow
def test_full_memory_quantile_vs_rank_approximation():
    inst = make_instance(UNIFORM, 500, 5)
    sim = n_delta_full_memory_sim(inst, 0.5, 10_000, seed=3)
    assert sim.N_delta == pytest.approx(full_memory_quantile_approx(inst, 0.5), rel=0.2)


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="n(1-delta)^2/(2H) is a partial expectation, "
                   "about (1-delta)/2 times the simulated quantile")
def test_full_memory_quantile_vs_closed_form():
    inst = make_instance(UNIFORM, 500, 5)
    sim = n_delta_full_memory_sim(inst, 0.5, 10_000, seed=3)
    assert sim.N_delta == pytest.approx(n_delta_full_memory(inst, 0.5), rel=0.2)


def test_full_memory_beats_memoryless_in_simulation():
    for i in range(5):
        inst = make_instance(UNIFORM, 30, mix_seed(17, i))
        for delta in (0.5, 0.1, 0.01):
            full = n_delta_full_memory_sim(inst, delta, 20_000, seed=i)
            mem = n_delta_memoryless_sim(inst, delta, 20_000, seed=i)
            assert full.N_delta + full.ci_halfwidth < mem.N_delta - mem.ci_halfwidth


def test_memoryless_over_full_memory_ratio_grows_as_delta_shrinks():
    for i in range(10):
        inst = make_instance(UNIFORM, 200, mix_seed(19, i))
        r = [n_delta_memoryless(inst, d).N_delta / n_delta_full_memory(inst, d) for d in (1e-1, 1e-3)]
        assert r[1] > r[0]
