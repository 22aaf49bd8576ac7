import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hyperlf.analytic import (
    ConvergenceError,
    PairShift,
    PowerSeries,
    ShiftClasses,
    b_coefficients,
    b_factors,
    b_of_l,
    b_of_P_closed,
    d_coefficient,
    geometric_e,
    perron_check,
    pole_order_V,
    residue_main_term,
    residue_total_direct,
    rising_factorial,
    rising_factorial_coeffs,
    shifted_circle_check,
    stirling_first,
    stirling_lower,
    zeta_bound_check,
    zeta_series,
)
from hyperlf.fqarith import Poly, enumerate_polys

small_ints = st.lists(st.integers(-5, 5), min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(small_ints, small_ints, small_ints)
def test_power_series_ring(a, b, c):
    A, B, C = (PowerSeries(x, 6) for x in (a, b, c))
    assert A * B == B * A
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C
    assert (A - A) == PowerSeries([0], 6)


@settings(max_examples=40, deadline=None)
@given(small_ints)
def test_power_series_inverse(a):
    a = [1] + a
    A = PowerSeries(a, 6)
    assert A * A.inverse() == PowerSeries([1], 6)


def test_zeta_series():
    Z = zeta_series(3, 3)
    assert [Z[i] for i in range(4)] == [1, 3, 9, 27]
    assert (Z * Z)[2] == 27
    assert (Z ** 2)[3] == 4 * 27


def _product_coeffs(M):
    # ascending coefficients of x (x + 1) ... (x + M - 1) by repeated multiplication
    c = [1]
    for j in range(M):
        nxt = [0] * (len(c) + 1)
        for i, x in enumerate(c):
            nxt[i + 1] += x
            nxt[i] += j * x
        c = nxt
    return c


def test_stirling_and_rising_factorial():
    assert stirling_first(3, 1) == 6
    assert stirling_first(3, 2) == 11
    assert stirling_first(4, 0) == 1
    assert stirling_lower(4, 1) == 50  # 2*3*4 + 1*3*4 + 1*2*4 + 1*2*3
    assert rising_factorial(2, 3) == 12
    assert rising_factorial(3, 2) == 24
    assert rising_factorial(0, 7) == 1
    for M in range(0, 9):
        assert rising_factorial_coeffs(M) == _product_coeffs(M)
    with pytest.raises(ValueError):
        stirling_first(2, 3)


def test_d_coefficient_against_polynomial_expansion():
    # d_l e_{Np-l} / l! is the x^l coefficient of sum_M e_{Np-M} F_M(x) / M!
    e = geometric_e(Fraction(1, 3))
    for Np in range(1, 8):
        for l in range(1, Np + 1):
            coef = sum(e(Np - M) * _product_coeffs(M)[l] / Fraction(math.factorial(M))
                       for M in range(l, Np + 1))
            assert d_coefficient(l, Np, e) == coef * math.factorial(l) / e(Np - l)
    assert d_coefficient(0, 4, e) == 1
    assert d_coefficient(2, 3, geometric_e()) == Fraction(3)


def test_b_of_prime_at_zero_shift():
    # 10 ordered ways to split P^2 into four factors, each of weight 1
    cfg = PairShift((1, 1), (0.0, 0.0), (0.0, 0.0))
    P = Poly.from_ints(3, [1, 1])
    assert b_of_l(P, cfg) == pytest.approx(7.5)
    assert b_of_P_closed(cfg, 3, 1) == pytest.approx(7.5)


@pytest.mark.parametrize("k,theta,alpha", [
    ((1, 2), (0.3, -0.8), (0.1, 0.25)),
    ((2, 2), (1.1, 0.4), (0.0, 0.3)),
    ((3, 1), (2.5, 0.05), (0.2, 0.2)),
])
def test_b_of_prime_routes(k, theta, alpha):
    cfg = PairShift(k, theta, alpha)
    for d in (1, 2, 3):
        for P in list(enumerate_polys("P", 3, d))[:3]:
            assert abs(b_of_l(P, cfg) - b_of_P_closed(cfg, 3, d)) <= 1e-12


def test_b_is_multiplicative():
    cfg = PairShift((1, 2), (0.4, 0.9), (0.1, 0.0))
    P = Poly.from_ints(3, [1, 1])
    Q = Poly.from_ints(3, [1, 0, 1])
    assert abs(b_of_l(P * Q, cfg) - b_of_l(P, cfg) * b_of_l(Q, cfg)) <= 1e-12
    assert b_of_l(Poly.from_ints(3, [1]), cfg) == 1


@pytest.mark.parametrize("N", [0, 1, 3])
def test_perron(N):
    r = perron_check(PairShift((1, 1), (0.4, 1.1), (0.1, 0.2)), 3, N)
    assert r.diff <= 1e-10 * (1 + abs(r.direct))


def test_perron_range():
    with pytest.raises(ValueError):
        perron_check(PairShift(), 3, 9)


def test_pole_order():
    W_all = ShiftClasses((True, True), True, True)
    W_none = ShiftClasses((False, False), False, False)
    assert pole_order_V((1, 1), W_all) == 1 + 1 + 2 + 2 + 4
    assert pole_order_V((1, 1), W_none) == 2
    assert pole_order_V((2, 1), ShiftClasses((True, False), True, False)) == 5 + 6 + 4
    assert len(b_factors((1, 1), (0.1, 0.2), W_all)) == 8


def test_b_coefficients_binomials():
    # one factor (K, z): shifted form binom(K + n, K)(-z)^n, exact form binom(K + n - 1, n)(-z)^n
    z = 0.3 + 0.1j
    shifted = b_coefficients([(2, z)], 3, "shifted")
    exact = b_coefficients([(2, z)], 3, "exact")
    for n in range(4):
        assert shifted[n] == pytest.approx(math.comb(2 + n, 2) * (-z) ** n)
        assert exact[n] == pytest.approx(math.comb(n + 1, n) * (-z) ** n)


@pytest.mark.parametrize("g", [20, 50, 100])
@pytest.mark.parametrize("binomial", ["shifted", "exact"])
def test_residue_three_sums_match_direct(g, binomial):
    theta = (1 / g, 2 / g)
    r = residue_main_term((1, 1), theta, g, binomial=binomial)
    d = residue_total_direct((1, 1), theta, g, binomial=binomial)
    assert abs(r.total - d) <= 1e-12 * abs(d)


def test_residue_leading_zero_shift_closed_form():
    # with every shift finite and theta = 0 all z vanish, so leading = x^V / V!
    g = 40
    W = ShiftClasses((True, True), True, True)
    r = residue_main_term((1, 1), (0.0, 0.0), g, classes=W)
    assert r.V == 10
    assert r.leading == pytest.approx((g / 2) ** 10 / math.factorial(10), rel=1e-13)


def test_residue_convergence_error():
    with pytest.raises(ConvergenceError):
        residue_main_term((1, 1), (1 / 30, 2 / 30), 30, max_terms=3)


def test_zeta_bounds():
    for g in (50, 200):
        for c in (0.5, 3.0):
            zb = zeta_bound_check(3, g, c / g)
            assert zb.branch == "finite" and zb.constant <= 2
        zb = zeta_bound_check(3, g, 0.5)
        assert zb.branch == "infinite" and zb.constant <= 2
    assert shifted_circle_check(3, 100, 0.5).constant <= 2
    with pytest.raises(ValueError):
        zeta_bound_check(3, 10, math.pi)
