import itertools

import pytest
from hypothesis import given, settings, strategies as st

from hyperlf.fqarith import (
    ExtField,
    FieldMismatch,
    Poly,
    count_monic,
    count_primes,
    count_squarefree,
    enumerate_polys,
    ext_field,
    factor,
    field,
    format_poly,
    is_irreducible,
    is_squarefree,
    parse_poly,
    poly_gcd,
    prime_count_check,
    split_ranges,
)

QS = [3, 5, 7, 9, 25]


@pytest.mark.parametrize("q", QS)
def test_field_axioms(q):
    F = field(q)
    els = range(q)
    for a, b in itertools.product(els, els):
        assert F.add(a, b) == F.add(b, a)
        assert F.mul(a, b) == F.mul(b, a)
        assert F.sub(F.add(a, b), b) == a
    for a in range(1, q):
        assert F.mul(a, F.inv(a)) == 1
    # exactly half of the nonzero elements are squares
    assert sum(1 for a in range(1, q) if F.chi_t[a] == 1) == (q - 1) // 2


def test_field_rejects_even_and_composite():
    for q in (2, 4, 6, 15):
        with pytest.raises(ValueError):
            field(q)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([3, 5, 9]), st.data())
def test_poly_ring_axioms(q, data):
    F = field(q)
    coeffs = st.lists(st.integers(0, q - 1), max_size=6)
    a, b, c = (Poly(F, data.draw(coeffs)) for _ in range(3))
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a - a == Poly(F, [])


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([3, 5, 9]), st.data())
def test_divmod_identity(q, data):
    F = field(q)
    a = Poly(F, data.draw(st.lists(st.integers(0, q - 1), max_size=8)))
    b = Poly(F, data.draw(st.lists(st.integers(0, q - 1), min_size=1, max_size=5)))
    if b.is_zero:
        with pytest.raises(ZeroDivisionError):
            divmod(a, b)
        return
    quo, rem = divmod(a, b)
    assert quo * b + rem == a
    assert rem.degree < b.degree


def test_worked_product():
    # (t + 1)(t + 2) = t^2 + 3t + 2 = t^2 + 2 over F_3
    a = Poly.from_ints(3, [1, 1])
    b = Poly.from_ints(3, [2, 1])
    assert a * b == Poly.from_ints(3, [2, 0, 1])


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        Poly.from_ints(3, [1, 1]) + Poly.from_ints(5, [1, 1])


@pytest.mark.parametrize("q,n", [(3, 1), (3, 2), (3, 3), (3, 4), (3, 5), (5, 2), (5, 3), (9, 2)])
def test_counts_match_enumeration(q, n):
    assert sum(1 for _ in enumerate_polys("M", q, n)) == count_monic(q, n) == q ** n
    assert sum(1 for _ in enumerate_polys("P", q, n)) == count_primes(q, n)
    assert sum(1 for _ in enumerate_polys("H", q, n)) == count_squarefree(q, n)


def test_irreducible_against_brute_force():
    q = 3
    reducible = set()
    for d1 in range(1, 4):
        for d2 in range(1, 5 - d1):
            for a in enumerate_polys("M", q, d1):
                for b in enumerate_polys("M", q, d2):
                    reducible.add(a * b)
    for n in range(1, 5):
        for f in enumerate_polys("M", q, n):
            assert is_irreducible(f) == (f not in reducible)


def test_factor_roundtrip_and_squarefree():
    F = field(5)
    for f in enumerate_polys("M", 5, 4):
        fac = factor(f)
        assert fac.expand(F) == f
        assert is_squarefree(f) == all(e == 1 for _, e in fac.factors)


def test_gcd_is_monic_common_divisor():
    a = Poly.from_ints(3, [2, 0, 1]) * Poly.from_ints(3, [1, 0, 1])
    b = Poly.from_ints(3, [2, 0, 1]) * Poly.from_ints(3, [0, 1])
    g = poly_gcd(a, b)
    assert g == Poly.from_ints(3, [2, 0, 1])
    assert g.is_monic


def test_prime_count_worked_value():
    pc = prime_count_check(5, 2)
    assert pc.count == 10
    assert pc.main_term == 12.5
    assert pc.error == 2.5
    assert pc.constant == pytest.approx(1.0)


def test_rank_roundtrip():
    F = field(9)
    for r in range(0, 81, 7):
        f = Poly.from_rank(F, 2, r)
        assert f.rank() == r and f.is_monic and f.degree == 2


@pytest.mark.parametrize("q", [3, 9])
def test_format_parse_roundtrip(q):
    for f in itertools.islice(enumerate_polys("M", q, 3), 40):
        assert parse_poly(format_poly(f), q) == f


def test_parse_rejects_trailing_zero():
    with pytest.raises(ValueError):
        parse_poly("1,0", 3)


def test_split_ranges_cover():
    parts = split_ranges(103, 8)
    assert parts[0][0] == 0 and parts[-1][1] == 103
    assert all(a[1] == b[0] for a, b in zip(parts, parts[1:]))


@pytest.mark.parametrize("q,k", [(3, 2), (3, 3), (5, 2), (9, 2)])
def test_extension_field_logs(q, k):
    K = ext_field(q, k)
    exp, log, zech = K.exp_table, K.log_table, K.zech_table
    M = K.order - 1
    assert sorted(exp.tolist()) == list(range(1, K.order))
    g = K(int(exp[1]))
    for j in range(0, M, max(1, M // 10)):
        assert (g ** j).code == exp[j]
        one_plus = K(int(exp[j])) + K(1)
        assert zech[j] == (-1 if one_plus.code == 0 else log[one_plus.code])


def test_extension_field_multiplicative_group():
    K = ExtField(field(3), 2)
    for x in K.elements():
        if x.code:
            assert (x ** (K.order - 1)).code == 1
