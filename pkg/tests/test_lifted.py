import math

import numpy as np
import pytest

from sphcap import (
    f_gar_closed,
    gamma_hat,
    i_per,
    i_per1_closed,
    i_per1_mc,
    i_sph,
    infeasibility_condition,
    lower_bound_L,
)

# High-precision reference values (40-digit arithmetic, precomputed).
GAMMA_HAT_1 = 0.809016994374947424
GAMMA_HAT_2 = 1.20710678118654752
GAMMA_HAT_1P1266 = 0.855519952602503837
I_SPH_1 = 1.29022881943455087
I_SPH_2 = 1.64779357469631904
I_PER1 = {
    (1.0, 0.5, -0.5): 0.9318181120671533,
    (0.5, 1.0, 0.0): 0.9472135954999579,
    (2.0, 0.3, -1.0): 0.9445068860843905,
    (1e3, 1e-2, -0.7): 0.7597821479229212,
}


def test_gamma_hat_values():
    assert gamma_hat(0.0) == 0.5
    assert gamma_hat(2.0) == pytest.approx(GAMMA_HAT_2, abs=1e-14)
    assert gamma_hat(1.0) == pytest.approx(GAMMA_HAT_1, abs=1e-14)
    assert gamma_hat(1.1266) == pytest.approx(GAMMA_HAT_1P1266, abs=1e-14)


def test_gamma_hat_monotone_and_bounded_below():
    grid = np.linspace(0, 8, 200)
    vals = [gamma_hat(c) for c in grid]
    assert all(v >= 0.5 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))
    # the log argument in I_sph stays positive
    assert all(1.0 - c / (2.0 * gamma_hat(c)) > 0 for c in grid[1:])


def test_gamma_hat_rejects_negative():
    with pytest.raises(ValueError):
        gamma_hat(-0.1)


def test_i_sph_small_c3_limit():
    assert i_sph(0.0) == 1.0
    assert i_sph(1e-8) == pytest.approx(1.0 + 2.5e-9, abs=1e-12)


def test_i_sph_values_and_monotonicity():
    assert i_sph(1.0) == pytest.approx(I_SPH_1, abs=1e-12)
    assert i_sph(2.0) == pytest.approx(I_SPH_2, abs=1e-12)
    assert i_sph(2.0) > i_sph(1.0)


def test_i_sph_continuous_at_series_switch():
    # exact formula evaluated just above the threshold vs series just below
    below = i_sph(0.999999e-6)
    above = i_sph(1.000001e-6)
    assert abs(above - below) <= 1e-10
    gh = gamma_hat(1e-6)
    exact = gh - math.log1p(-1e-6 / (2 * gh)) / (2e-6)
    assert i_sph(1e-6) == pytest.approx(exact, abs=1e-10)


@pytest.mark.parametrize("args,expected", sorted(I_PER1.items()))
def test_i_per1_closed_reference_values(args, expected):
    value, _ = i_per1_closed(*args)
    assert value == pytest.approx(expected, abs=1e-13)


def test_i_per1_closed_small_c3_limit():
    for kappa in (-1.0, 0.0, 0.7):
        value, parts = i_per1_closed(1e-12, 0.7, kappa)
        assert value == pytest.approx(1.0, abs=1e-9)
        assert parts.p == pytest.approx(1.0, abs=1e-11)


def test_i_per1_closed_small_gamma_limit():
    # the exponential kills the event g > -kappa, leaving Phi(-kappa)
    from sphcap import std_normal

    # convergence is O(sqrt(gamma)): the C*erfc term shrinks like 1/sqrt(p)
    for kappa in (-0.5, -1.2):
        value, _ = i_per1_closed(1.0, 1e-12, kappa)
        assert value == pytest.approx(std_normal(-kappa).cdf, abs=1e-5)
        assert value > std_normal(-kappa).cdf


def test_i_per1_closed_intermediates_definition():
    c3, g, k = 1.7, 0.31, -0.9
    _, parts = i_per1_closed(c3, g, k)
    assert parts.p == 1.0 + c3 / (2 * g)
    assert parts.q == c3 * k / (2 * g)
    assert parts.r == c3 * k * k / (4 * g)
    assert parts.s == pytest.approx(-k * math.sqrt(parts.p) + parts.q / math.sqrt(parts.p))
    assert parts.big_c > 0


def test_i_per1_closed_bounds():
    from sphcap import std_normal

    rng = np.random.default_rng(31)
    for _ in range(50):
        c3 = rng.uniform(1e-3, 5.0)
        g = rng.uniform(1e-3, 3.0)
        k = rng.uniform(-1.5, 0.5)
        value, _ = i_per1_closed(c3, g, k)
        assert std_normal(-k).cdf < value < 1.0


def test_i_per1_closed_domain_errors():
    with pytest.raises(ValueError):
        i_per1_closed(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        i_per1_closed(1.0, -1.0, 0.0)


def test_i_per1_mc_matches_closed_form_3sigma():
    # 1e7-sample check at the reference point
    est, se = i_per1_mc(1.0, 0.5, -0.5, n_samples=10_000_000, seed=42)
    closed, _ = i_per1_closed(1.0, 0.5, -0.5)
    assert abs(est - closed) <= 3 * se
    est2, se2 = i_per1_mc(0.5, 1.0, 0.0, n_samples=1_000_000, seed=11)
    closed2, _ = i_per1_closed(0.5, 1.0, 0.0)
    assert abs(est2 - closed2) <= 3 * se2


def test_i_per1_mc_small_c3_degenerates_to_one():
    est, se = i_per1_mc(1e-12, 0.5, -0.5, n_samples=100_000, seed=0)
    assert est == pytest.approx(1.0, abs=1e-10)
    assert se <= 1e-12


def test_i_per1_mc_deterministic_in_seed():
    a = i_per1_mc(1.0, 0.5, -0.5, n_samples=50_000, seed=123)
    b = i_per1_mc(1.0, 0.5, -0.5, n_samples=50_000, seed=123)
    assert a == b


def test_i_per1_mc_validates_sample_count():
    with pytest.raises(ValueError):
        i_per1_mc(1.0, 1.0, 0.0, n_samples=10)


def test_i_per_small_c3_limit():
    for alpha, kappa in ((4.0, 0.0), (8.0, -0.7)):
        root = math.sqrt(alpha * f_gar_closed(kappa))
        value, gamma_star = i_per(1e-8, alpha, kappa)
        assert value == pytest.approx(-root, abs=1e-4)
        assert gamma_star == pytest.approx(root / 2.0, abs=1e-4)
    # at alpha = 1/f_gar the maximizer approaches 1/2
    kappa = -0.5
    alpha = 1.0 / f_gar_closed(kappa)
    _, gamma_star = i_per(1e-8, alpha, kappa)
    assert gamma_star == pytest.approx(0.5, abs=1e-4)


def test_i_per_reference_optima():
    _, gs1 = i_per(1.1266, 12.784, -1.0)
    assert gs1 == pytest.approx(0.2922, abs=2e-2)
    _, gs2 = i_per(0.1597, 6.6290, -0.67)
    assert gs2 == pytest.approx(0.4617, abs=2e-2)


def test_i_per_value_nonpositive():
    rng = np.random.default_rng(8)
    for _ in range(20):
        c3 = rng.uniform(1e-3, 3.0)
        alpha = rng.uniform(0.5, 15.0)
        kappa = rng.uniform(-1.5, 0.5)
        value, gamma_star = i_per(c3, alpha, kappa)
        assert value <= 0.0
        assert gamma_star > 0.0


def test_lower_bound_L_at_c3_zero():
    ev = lower_bound_L(0.0, 4.0, 0.0)
    assert ev.lower_bound == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-12)
    assert ev.gamma_hat == 0.5
    assert ev.i_sph == 1.0
    # threshold identity: L(0, 1/f_gar, kappa) = 0
    for kappa in (-1.0, -0.3, 0.2):
        alpha = 1.0 / f_gar_closed(kappa)
        assert lower_bound_L(0.0, alpha, kappa).lower_bound == pytest.approx(0.0, abs=1e-12)


def test_lower_bound_L_reproduces_reference_optimum():
    ev = lower_bound_L(1.1266, 12.784, -1.0)
    assert abs(ev.lower_bound) <= 1e-3
    assert ev.i_per <= 0.0


def test_lower_bound_L_small_c3_consistency_grid():
    # the decisive check of the sign conventions
    for alpha in (1.2, 2.0, 4.0, 8.0, 13.0):
        for kappa in (-1.2, -0.8, -0.4, 0.0, 0.4):
            limit = math.sqrt(alpha * f_gar_closed(kappa)) - 1.0
            ev = lower_bound_L(1e-6, alpha, kappa)
            assert abs(ev.lower_bound - limit) <= 1e-3


def test_infeasibility_condition_examples():
    holds, best = infeasibility_condition(5.0, -0.5)
    assert holds and best.lower_bound > 0
    holds, best = infeasibility_condition(13.0, -1.0)
    assert holds
    assert best.c3 == pytest.approx(1.1266, abs=5e-2)
    holds, _ = infeasibility_condition(1.5, 0.0)
    assert not holds


def test_infeasibility_condition_lift_dominates_c3_zero():
    for alpha, kappa in ((13.0, -1.0), (9.0, -0.8), (3.0, -0.3)):
        _, best = infeasibility_condition(alpha, kappa)
        assert best.lower_bound >= lower_bound_L(0.0, alpha, kappa).lower_bound - 1e-12
