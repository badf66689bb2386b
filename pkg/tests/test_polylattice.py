import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from medianqmc.gfpoly import PolyGF, int_to_poly, is_irreducible, laurent_digits, parse_poly
from medianqmc.korobov import ProductWeights
from medianqmc.polylattice import (
    HoplRule,
    a_alpha_lambda,
    c_alpha,
    digits_of,
    error_bound_sobolev,
    hopl_array,
    hopl_numerators,
    hopl_points,
    is_dual_net,
    mu_alpha,
    parse_hopl_rule,
    sample_generating_vector_poly,
    sobolev_bound_at,
    walsh,
    walsh_character_sum,
    walsh_multi,
)

P52 = parse_poly("x^52+x^3+1", 2)
P3 = parse_poly("x^3+x+1", 2)
CHI2_CRIT_2DOF_1E6 = 27.631


def P(text, b=2):
    return parse_poly(text, b)


def test_sample_trivial_precision():
    q = sample_generating_vector_poly(1, 2, 2, np.random.default_rng(0))
    assert q == (PolyGF.one(2), PolyGF.one(2))


@pytest.mark.parametrize("b,n", [(2, 52), (3, 10), (5, 30), (2, 70)])
def test_sample_outputs_in_range(b, n):
    q = sample_generating_vector_poly(n, 40, b, np.random.default_rng(b * n))
    assert all(not v.is_zero() and v.degree < n for v in q)


def test_sample_uniform_over_g2():
    rng = np.random.default_rng(77)
    q = sample_generating_vector_poly(2, 100_000, 2, rng)
    counts = np.bincount([v.to_int() for v in q], minlength=4)[1:]
    exp = 100_000 / 3
    assert counts.sum() == 100_000
    assert float(((counts - exp) ** 2 / exp).sum()) < CHI2_CRIT_2DOF_1E6


def test_rule_validation_and_text_form():
    rule = HoplRule(2, 3, 6, P("x^6+x+1"), (P("x^2+1"), P("x^5")))
    assert str(rule) == "2;3;6;p=x^6+x+1;q=x^2+1,x^5"
    assert parse_hopl_rule(str(rule)) == rule
    assert rule.N == 8 and rule.order == 2 and rule.s == 2
    with pytest.raises(ValueError):
        HoplRule(2, 3, 4, P("x^4+1"), (P("x"),))  # reducible
    with pytest.raises(ValueError):
        HoplRule(2, 3, 3, P3, (P("x^3"),))  # degree too high
    with pytest.raises(ValueError):
        HoplRule(2, 4, 3, P3, (P("1"),))  # m > n


def test_points_examples():
    rule = HoplRule(2, 3, 3, P3, (P("1"),))
    pts = list(hopl_points(rule))
    assert pts[0].numerators == (0,)
    # digits of 1/(x^3+x+1) start 0, 0, 1
    assert pts[1].numerators == (1,) and pts[1].denominator == 8


def test_one_dimensional_projection_is_full_grid():
    for n in range(1, 5):
        for k in range(1 << n, 1 << (n + 1)):
            p = int_to_poly(k, 2)
            if not is_irreducible(p):
                continue
            for qk in range(1, 1 << n):
                rule = HoplRule(2, n, n, p, (int_to_poly(qk, 2),))
                assert sorted(pt.numerators[0] for pt in hopl_points(rule)) == list(range(1 << n))


@pytest.mark.parametrize("b,n,modulus", [(2, 52, None), (2, 10, "x^10+x^3+1"), (3, 8, None), (5, 6, None), (7, 4, None)])
def test_fast_numerators_match_long_division(b, n, modulus):
    rnd = random.Random(b * 100 + n)
    if b == 2 and modulus is None:
        p = P52
    elif modulus:
        p = P(modulus, b)
    else:
        p = next(q for q in (int_to_poly(rnd.randrange(b ** n, b ** (n + 1)), b) for _ in range(10 ** 5))
                 if q.degree == n and is_irreducible(q))
    m = min(n, 6 if b == 2 else 3)
    q = tuple(int_to_poly(rnd.randrange(1, b ** n), b) for _ in range(3))
    rule = HoplRule(b, m, n, p, q)
    fast = hopl_numerators(rule)
    slow = np.array([pt.numerators for pt in hopl_points(rule)], dtype=np.int64)
    assert np.array_equal(fast, slow)


def test_float_points_exact_for_b2_n52():
    rule = HoplRule(2, 8, 52, P52, sample_generating_vector_poly(52, 4, 2, np.random.default_rng(4)))
    nums = hopl_numerators(rule)
    pts = hopl_array(rule)
    assert np.array_equal((pts * 2.0 ** 52).astype(np.int64), nums)
    assert pts.min() >= 0 and pts.max() < 1


def test_m_rule_is_prefix_of_n_rule():
    q = sample_generating_vector_poly(12, 3, 2, np.random.default_rng(5))
    p = P("x^12+x^3+1")
    assert is_irreducible(p)
    full = hopl_numerators(HoplRule(2, 12, 12, p, q))
    for m in (1, 4, 7):
        assert np.array_equal(hopl_numerators(HoplRule(2, m, 12, p, q)), full[: 1 << m])


def test_dual_net_examples():
    rule = HoplRule(2, 3, 3, P3, (P("1"),))
    assert is_dual_net((0,), rule)
    # 11 = 1011_2, truncated to x + 1
    assert is_dual_net((11,), rule) == (abs(walsh_character_sum((11,), rule) - 1) < 1e-10)
    rule2 = HoplRule(2, 3, 3, P3, (P("x"), P("x^2+1")))
    # k_j = 8 = x^3 truncates to zero in every coordinate
    assert is_dual_net((8, 8), rule2)
    assert abs(walsh_character_sum((8, 8), rule2) - 1) < 1e-12


def test_walsh_examples():
    assert walsh(0, [0, 1, 1], 2) == 1
    assert walsh(1, [1], 2) == -1  # x = 1/2
    assert walsh(3, [1, 1], 2) == 1  # x = 3/4
    # base 3: k = 1, x = 1/3 -> exp(2 pi i / 3)
    assert abs(walsh(1, [1], 3) - complex(-0.5, math.sqrt(3) / 2)) < 1e-15


def test_walsh_multi_is_product():
    rows = [[1, 0, 1], [0, 1, 1]]
    assert walsh_multi((5, 6), rows, 2) == walsh(5, rows[0], 2) * walsh(6, rows[1], 2)


def test_walsh_orthogonality():
    n = 3
    xs = [digits_of(v, 2, n) for v in range(8)]
    for k in range(8):
        for l in range(8):
            ip = sum(walsh(k, x, 2) * walsh(l, x, 2).conjugate() for x in xs) / 8
            assert abs(ip - (k == l)) < 1e-12


def test_walsh_character_sum_matches_dual_net_exhaustively():
    G3 = [int_to_poly(v, 2) for v in range(1, 8)]
    for s in (1, 2):
        for q in itertools.product(G3, repeat=s):
            rule = HoplRule(2, 3, 3, P3, q)
            for k in itertools.product(range(8), repeat=s):
                assert abs(walsh_character_sum(k, rule) - is_dual_net(k, rule)) < 1e-10


def test_walsh_character_sum_matches_dual_net_m_below_n():
    rnd = random.Random(3)
    p = P("x^5+x^2+1")
    for _ in range(10):
        q = tuple(int_to_poly(rnd.randrange(1, 32), 2) for _ in range(2))
        rule = HoplRule(2, 3, 5, p, q)
        for k in itertools.product(range(32), repeat=2):
            assert abs(walsh_character_sum(k, rule) - is_dual_net(k, rule)) < 1e-10


def test_walsh_character_sum_base_three():
    p = P("x^2+1", 3)
    assert is_irreducible(p)
    for qa in range(1, 9):
        rule = HoplRule(3, 2, 2, p, (int_to_poly(qa, 3),))
        for k in range(9):
            assert abs(walsh_character_sum((k,), rule) - is_dual_net((k,), rule)) < 1e-10


def test_mu_alpha_examples():
    assert mu_alpha(1, 3, 2) == 1
    assert mu_alpha(6, 2, 2) == 5
    assert mu_alpha(6, 1, 2) == 3


@given(st.integers(1, 10 ** 9), st.sampled_from([2, 3, 5]))
def test_mu_alpha_monotone_and_leading_digit(k, b):
    vals = [mu_alpha(k, a, b) for a in range(1, 8)]
    assert vals == sorted(vals)
    top = 0
    while b ** top <= k:
        top += 1
    assert vals[0] == top


def test_c_alpha_examples():
    assert c_alpha(2, 2) == pytest.approx(4.5, rel=1e-14)
    assert c_alpha(3, 2) == pytest.approx(7.5, rel=1e-14)
    vals = [c_alpha(a, 2) for a in range(2, 7)]
    assert vals == sorted(vals)


def test_a_alpha_lambda_examples():
    assert a_alpha_lambda(2, 1.0, 2) == pytest.approx(1.5, rel=1e-14)
    assert a_alpha_lambda(3, 1.0, 2) == pytest.approx(1 + 1 / 3 + 1 / 18, rel=1e-14)
    with pytest.raises(ValueError):
        a_alpha_lambda(2, 0.5, 2)
    # grows without bound as lambda approaches 1/alpha
    assert a_alpha_lambda(2, 0.5 + 1e-6, 2) > 1e5


def test_sobolev_bound_nonincreasing_in_m():
    w = ProductWeights.constant(1)
    vals = [error_bound_sobolev(m, 52, 1, 2, w, 0.25) for m in range(4, 17)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def _slope(ms, vals):
    return float(np.polyfit(ms, np.log2(vals), 1)[0])


def test_sobolev_bound_rate_at_fixed_lambda():
    # with lambda pinned and lambda n >= m the bound is proportional to (b^m - 1)^(-1/lambda)
    w = ProductWeights.constant(1)
    for lam in (0.6, 0.8, 0.95):
        scaled = [sobolev_bound_at(lam, m, 52, 2, w, 0.25) * (2.0 ** m - 1) ** (1 / lam) for m in range(6, 17)]
        assert max(scaled) == pytest.approx(min(scaled), rel=1e-12)


def test_sobolev_bound_rate_small_m():
    # the infimum over lambda trades C(lambda)^(1/lambda) against b^(-m/lambda);
    # at m = 6..16 the optimum sits well above 1/alpha
    w = ProductWeights.constant(1)
    ms = list(range(6, 17))
    slope = _slope(ms, [error_bound_sobolev(m, 52, 1, 2, w, 0.25) for m in ms])
    assert -2.0 < slope < -1.3


def test_sobolev_bound_rate_approaches_alpha():
    w = ProductWeights.constant(1)
    slopes = []
    for lo, hi in [(20, 40), (50, 100), (200, 300)]:
        ms = list(range(lo, hi + 1, 5))
        slopes.append(_slope(ms, [error_bound_sobolev(m, 2 * m, 1, 2, w, 0.25) for m in ms]))
    assert slopes == sorted(slopes, reverse=True)
    assert slopes[1] <= -(2 - 0.2)
    assert slopes[2] > -2.0


def test_sobolev_bound_single_lambda_hand_formula():
    lam, m, n, alpha, eta, b = 0.9, 10, 52, 2, 0.25, 2
    g = (1.0, 0.5, 0.25)
    s2 = 2 * math.sin(math.pi / 2)
    C = 1.0 * (3 + 1 + 5) * max(2 / s2 ** 2, 1 / s2)
    t1 = (b - 1) / (b ** lam - 1)
    t2 = t1 * (b - 1) / (b ** (2 * lam) - 1)
    A = t1 + (b ** (2 * lam) - 1) / (b ** (2 * lam) - b) * t2
    prod = math.prod(1 + gj ** lam * C ** lam * A for gj in g)
    expected = (2 * (prod - 1) / (eta * (b ** min(m, lam * n) - 1))) ** (1 / lam)
    got = sobolev_bound_at(lam, m, n, alpha, ProductWeights(g), eta, b)
    assert got == pytest.approx(expected, rel=1e-12)


def test_sobolev_bound_large_m_is_finite():
    w = ProductWeights.constant(1)
    val = error_bound_sobolev(1000, 2000, 1, 2, w, 0.25)
    assert math.isfinite(val) and 0.0 <= val < 1e-250


def test_sobolev_bound_argument_checks():
    w = ProductWeights.constant(1)
    with pytest.raises(ValueError):
        error_bound_sobolev(5, 4, 1, 2, w, 0.25)
    with pytest.raises(ValueError):
        error_bound_sobolev(5, 52, 1, 1, w, 0.25)
    with pytest.raises(ValueError):
        error_bound_sobolev(5, 52, 2, 2, w, 0.25)
