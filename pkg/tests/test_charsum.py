import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hyperlf.charsum import (
    CapExceeded,
    QuadChar,
    average_square_char,
    char_sum_Mn,
    chi,
    euler_factor_main,
    jacobi,
    polya_vinogradov_ratio,
    residue_symbol,
    square_decomposition,
    unit_character,
)
from hyperlf.fqarith import Poly, count_squarefree, enumerate_polys, field, is_irreducible


def _all_polys(q, maxdeg):
    F = field(q)
    yield Poly(F, [])
    for d in range(maxdeg + 1):
        for f in enumerate_polys("M", q, d):
            for c in range(1, q):
                yield f.scale(c)


@pytest.mark.parametrize("q,adeg,pdeg", [(3, 4, 4), (5, 2, 3), (7, 2, 2), (9, 2, 2)])
def test_euler_and_reciprocity_agree(q, adeg, pdeg):
    primes = [P for d in range(1, pdeg + 1) for P in enumerate_polys("P", q, d)]
    for a in _all_polys(q, adeg):
        for P in primes:
            assert residue_symbol(a, P, "euler") == residue_symbol(a, P, "jacobi")


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([3, 5, 9]), st.data())
def test_euler_and_reciprocity_agree_random_degree_six(q, data):
    F = field(q)
    d = data.draw(st.integers(1, 6))
    P = None
    while P is None:
        cand = Poly(F, data.draw(st.lists(st.integers(0, q - 1), min_size=d, max_size=d)) + [1])
        if is_irreducible(cand):
            P = cand
    a = Poly(F, data.draw(st.lists(st.integers(0, q - 1), max_size=7)))
    assert residue_symbol(a, P, "euler") == residue_symbol(a, P, "jacobi")


def test_residue_symbol_rejects_reducible_modulus():
    with pytest.raises(ValueError):
        residue_symbol(Poly.from_ints(3, [1]), Poly.from_ints(3, [2, 0, 1]))


@pytest.mark.parametrize("q", [3, 7, 5])
def test_reciprocity_sign(q):
    # (a/b)(b/a) = (-1)^{((q-1)/2) deg a deg b} for coprime monic a, b, checked by factoring
    sq = [f for d in (1, 2, 3) for f in enumerate_polys("H", q, d)]
    for a, b in itertools.islice(itertools.product(sq, sq), 300):
        ab = chi(QuadChar(a), b, "factor") * chi(QuadChar(b), a, "factor")
        if ab == 0:
            continue
        sign = (-1) ** (((q - 1) // 2) * a.degree * b.degree)
        assert ab == sign


def test_chi_routes_and_multiplicativity():
    q = 3
    Ds = list(enumerate_polys("H", q, 4))[:12]
    fs = [f for d in range(0, 4) for f in enumerate_polys("M", q, d)]
    for D in Ds:
        X = QuadChar(D)
        for f in fs:
            assert X(f) == chi(X, f, "factor")
        for f, g in itertools.islice(itertools.product(fs, fs), 200):
            assert X(f * g) == X(f) * X(g)


def test_quadchar_requires_squarefree_monic():
    with pytest.raises(ValueError):
        QuadChar(Poly.from_ints(3, [1, 2, 1]))  # (t + 1)^2
    with pytest.raises(ValueError):
        QuadChar(Poly.from_ints(3, [1, 2]))


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_character_sum_vanishes_past_degree(d):
    for D in enumerate_polys("H", 3, d):
        for n in range(d, d + 2):
            assert char_sum_Mn(D, n) == 0


def test_chi_of_square_is_coprimality():
    q, n = 3, 4
    for f in list(enumerate_polys("M", q, 1)) + list(enumerate_polys("M", q, 2))[:4]:
        brute = sum(jacobi(D, f * f) for D in enumerate_polys("H", q, n))
        avg = average_square_char(q, n, f)
        assert avg.empirical == Fraction(brute, count_squarefree(q, n))


def test_square_average_scaled_errors():
    # exact values for q = 3 at n = 4, 6, 8 (frozen from the gcd-counting route,
    # which test_chi_of_square_is_coprimality ties to direct Jacobi sums)
    t = Poly.from_ints(3, [0, 1])
    t2p1 = Poly.from_ints(3, [1, 0, 1])
    t2p2 = Poly.from_ints(3, [2, 0, 1])
    for n in (4, 6, 8):
        assert average_square_char(3, n, t).scaled_err == Fraction(1, 2)
        assert average_square_char(3, n, t2p1).scaled_err == Fraction(2, 5)
    assert [average_square_char(3, n, t2p2).scaled_err for n in (4, 6, 8)] == [
        Fraction(11, 8), Fraction(19, 8), Fraction(27, 8)]


def test_euler_factor_main():
    f = Poly.from_ints(3, [0, 1]) * Poly.from_ints(3, [0, 1]) * Poly.from_ints(3, [1, 0, 1])
    assert euler_factor_main(f) == Fraction(3, 4) * Fraction(9, 10)


def test_square_decomposition():
    P = Poly.from_ints(3, [1, 1])
    Q = Poly.from_ints(3, [1, 0, 1])
    l1, l2 = square_decomposition(P * P * P * Q)
    assert l1 == P * Q and l2 == P


def test_polya_vinogradov_rejects_square():
    P = Poly.from_ints(3, [1, 1])
    with pytest.raises(ValueError):
        polya_vinogradov_ratio(3, 4, P * P)
    r = polya_vinogradov_ratio(3, 4, P)
    assert r.abs_sum <= count_squarefree(3, 4)


def test_cap():
    with pytest.raises(CapExceeded):
        average_square_char(3, 6, Poly.from_ints(3, [0, 1]), cap=100)


def test_unit_character():
    assert [unit_character(5, c) for c in range(5)] == [0, 1, -1, -1, 1]
