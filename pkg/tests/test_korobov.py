import math

import numpy as np
import pytest

from medianqmc.korobov import (
    KorobovParams,
    ProductWeights,
    error_bound_korobov,
    kernel_table,
    korobov_bound_at,
    median_failure_probability,
    minimize_over_lambda,
    r_decay,
    wce_closed_form,
    wce_closed_form_batch,
    wce_spectral_oracle,
)
from medianqmc.lattice import LatticeRule, sample_generating_vector, sample_generating_vectors
from medianqmc.numtheory import euler_totient, riemann_zeta


def params(alpha, gammas):
    return KorobovParams(alpha, ProductWeights(tuple(gammas)))


def test_r_decay_examples():
    assert r_decay(params(2, [0.5, 1 / 3]), (0, 0)) == 1.0
    assert r_decay(params(2, [0.5, 1 / 3]), (3, 0)) == pytest.approx(1 / 18, rel=1e-15)
    assert r_decay(params(1, [1, 1]), (2, -2)) == pytest.approx(1 / 4, rel=1e-15)


def test_weight_presets():
    assert ProductWeights.parse("dec:3", 3).gammas == (1.0, 1 / 8, 1 / 27)
    assert ProductWeights.parse("inc:1", 3).gammas == (1 / 3, 1 / 2, 1.0)
    assert ProductWeights.parse("ones", 2).gammas == (1.0, 1.0)
    assert ProductWeights.parse("0.5,0.25", 2).gammas == (0.5, 0.25)
    with pytest.raises(ValueError):
        ProductWeights.parse("1,2,3", 2)
    with pytest.raises(ValueError):
        ProductWeights((1.0, 0.0))


def test_wce_two_point_rule():
    assert wce_closed_form(LatticeRule(2, (1,)), params(1, [1])) == pytest.approx(math.sqrt(math.pi ** 2 / 12),
                                                                                 rel=1e-14)


def test_wce_vanishes_with_weights():
    rule = LatticeRule(251, (1, 33, 104))
    assert wce_closed_form(rule, params(2, [1e-200] * 3)) == 0.0


def test_kernel_table_mirrored():
    for N in (2, 7, 8, 251):
        t = kernel_table(N, 2)
        assert np.array_equal(t[1:], t[1:][::-1])


def test_batch_matches_single():
    rng = np.random.default_rng(3)
    Z = sample_generating_vectors(127, 6, 20, rng)
    p = params(2, [j ** -2.0 for j in range(1, 7)])
    batch = wce_closed_form_batch(127, Z, p)
    assert batch.tolist() == [wce_closed_form(LatticeRule(127, tuple(int(v) for v in z)), p) for z in Z]


def test_wce_positive_for_every_rule():
    rng = np.random.default_rng(11)
    for N in (2, 3, 10, 64, 127):
        for alpha in (1, 2, 3):
            rule = sample_generating_vector(N, 3, rng)
            assert wce_closed_form(rule, params(alpha, [1.0, 0.3, 0.01])) > 0


def test_wce_monotone_in_weight_scale():
    rng = np.random.default_rng(12)
    for _ in range(10):
        rule = sample_generating_vector(int(rng.choice([31, 64, 101])), 4, rng)
        g = [j ** -1.5 for j in range(1, 5)]
        base = wce_closed_form(rule, params(2, g))
        assert wce_closed_form(rule, params(2, [1.7 * v for v in g])) >= base


def test_oracle_two_point_rule():
    res = wce_spectral_oracle(LatticeRule(2, (1,)), params(1, [1]), 10 ** 6)
    target = math.sqrt(math.pi ** 2 / 12)
    assert res.value <= target <= res.value + res.tail + 1e-15
    assert res.tail < 1e-5


def test_oracle_small_two_dimensional_rule():
    rule = LatticeRule(5, (1, 2))
    p = params(2, [1, 1])
    res = wce_spectral_oracle(rule, p, 2000)
    assert abs(res.value - wce_closed_form(rule, p)) < 1e-8


def test_oracle_empty_truncated_dual():
    res = wce_spectral_oracle(LatticeRule(5, (1,)), params(2, [1]), 4)
    assert res.value == 0.0


def test_oracle_random_small_instances():
    rng = np.random.default_rng(2020)
    for _ in range(20):
        N = int(rng.choice([5, 7, 11, 13]))
        alpha = int(rng.choice([1, 2]))
        g = [1.0, 1.0] if rng.random() < 0.5 else [1.0, 1 / 8]
        rule = sample_generating_vector(N, 2, rng)
        res = wce_spectral_oracle(rule, params(alpha, g), 5000)
        assert abs(wce_closed_form(rule, params(alpha, g)) - res.value) <= 1e-7 + res.tail


def test_oracle_high_dimension_n251():
    s = 50
    rule = sample_generating_vector(251, s, np.random.default_rng(1))
    p = params(2, [j ** -3.0 for j in range(1, s + 1)])
    res = wce_spectral_oracle(rule, p, 2000)
    assert abs(wce_closed_form(rule, p) - res.value) <= 1e-7 + res.tail


def test_bound_nonincreasing_in_prime_n():
    p = params(2, [j ** -3.0 for j in range(1, 51)])
    vals = [error_bound_korobov(N, 50, p, 0.25) for N in (251, 509, 1021, 2039)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_bound_single_lambda_endpoint():
    lam = 1 - 1e-4
    N = 251
    expected = (2 * riemann_zeta(2 * lam) / euler_totient(N)) ** (1 / (2 * lam))
    assert korobov_bound_at(lam, N, params(1, [1]), 1.0) == pytest.approx(expected, rel=1e-12)


def test_bound_golden_section_not_worse_than_fine_grid():
    p = params(2, [j ** -3.0 for j in range(1, 21)])
    N, eta = 1021, 0.25
    grid = np.linspace(1 / 4 + 1e-4, 1 - 1e-4, 10_000)
    best_grid = min(korobov_bound_at(float(l), N, p, eta) for l in grid)
    assert error_bound_korobov(N, 20, p, eta) <= best_grid + 1e-6


def test_bound_decreasing_in_eta():
    p = params(2, [j ** -3.0 for j in range(1, 11)])
    assert error_bound_korobov(509, 10, p, 0.25) > error_bound_korobov(509, 10, p, 0.5)
    assert error_bound_korobov(509, 10, p, 0.05) > error_bound_korobov(509, 10, p, 0.25)


def test_bound_argument_checks():
    p = params(2, [1.0])
    for eta in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            error_bound_korobov(11, 1, p, eta)
    with pytest.raises(ValueError):
        korobov_bound_at(0.2, 11, p, 0.5)


def test_minimize_over_lambda_quadratic():
    x, fx = minimize_over_lambda(lambda t: (t - 0.3141) ** 2, 0.0, 1.0)
    assert abs(x - 0.3141) < 1e-6 and fx < 1e-12


def test_failure_probability_examples():
    assert median_failure_probability(1, 0.3) == 0.3
    assert median_failure_probability(3, 0.1) == pytest.approx(0.03, rel=1e-14)


@pytest.mark.parametrize("eta", [0.05, 0.1, 0.2])
def test_failure_probability_exponential_envelope(eta):
    for r in range(3, 50, 2):
        assert median_failure_probability(r, eta) <= (4 * eta) ** ((r + 1) / 2) / 4
