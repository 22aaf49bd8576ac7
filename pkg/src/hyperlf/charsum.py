"""Quadratic residue symbols over F_q[t] and the character chi_D(f) = (D/f).

Two independent routes are provided: the Euler criterion
a^{(|P|-1)/2} mod P on each prime factor, and a Jacobi-symbol recursion
driven by quadratic reciprocity for monic a, b,

    (a/b) (b/a) = (-1)^{((q-1)/2) deg a deg b}.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple

from .fqarith import (
    Poly,
    count_squarefree,
    enumerate_polys,
    factor,
    field,
    is_irreducible,
    is_squarefree,
    poly_gcd,
    poly_mod,
    poly_powmod,
)

DEFAULT_CAP = 20_000_000


class CapExceeded(RuntimeError):
    """An exhaustive enumeration would exceed the configured cap."""


def check_cap(size: int, cap: int | None) -> None:
    if cap is not None and size > cap:
        raise CapExceeded(f"ensemble of size {size} exceeds cap {cap}")


def residue_symbol(a: Poly, P: Poly, method: str = "euler") -> int:
    """(a/P) for monic irreducible P; 'euler' or 'jacobi'."""
    if P.degree < 1 or not P.is_monic or not is_irreducible(P):
        raise ValueError(f"modulus {P} is not a monic irreducible polynomial")
    if method == "jacobi":
        return jacobi(a, P)
    if method != "euler":
        raise ValueError(f"unknown method {method!r}")
    F = a.F
    r = poly_powmod(a, (P.norm - 1) // 2, P)
    if r.is_zero:
        return 0
    if r.degree != 0:  # pragma: no cover - impossible for irreducible P
        raise ArithmeticError("Euler criterion produced a non-constant")
    if r.coeffs[0] == 1:
        return 1
    if r.coeffs[0] == F.neg(1):
        return -1
    raise ArithmeticError("Euler criterion produced a non-unit")  # pragma: no cover


def jacobi(a: Poly, b: Poly) -> int:
    """Jacobi symbol (a/b) for monic b, by reciprocity and reduction."""
    if not b.is_monic:
        raise ValueError("the lower entry of a Jacobi symbol must be monic")
    F = a.F
    half = (F.q - 1) // 2
    sign = 1
    a = poly_mod(a, b)
    while True:
        if b.degree == 0:
            return sign
        if a.is_zero:
            return 0
        c = a.lead
        if c != 1:
            # (c/b) = chi_q(c)^{deg b}
            if F.chi_t[c] == -1 and b.degree % 2:
                sign = -sign
            a = a.monic()
        if (half * a.degree * b.degree) % 2:
            sign = -sign
        a, b = poly_mod(b, a), a


class QuadChar:
    """chi_D for a monic square-free D."""

    def __init__(self, D: Poly):
        if not D.is_monic:
            raise ValueError("D must be monic")
        if not is_squarefree(D):
            raise ValueError("D must be square-free")
        self.D = D
        self.q = D.F.q
        self._primes = None

    def __repr__(self) -> str:
        return f"QuadChar({self.D})"

    def __call__(self, f: Poly, method: str = "jacobi") -> int:
        return chi(self, f, method)


def chi(D: QuadChar | Poly, f: Poly, method: str = "jacobi") -> int:
    """chi_D(f) for monic f; 'jacobi' or 'factor' (Euler criterion per prime)."""
    if isinstance(D, Poly):
        D = QuadChar(D)
    if not f.is_monic:
        raise ValueError("chi_D is only exposed on monic f")
    if method == "jacobi":
        return jacobi(D.D, f)
    if method != "factor":
        raise ValueError(f"unknown method {method!r}")
    val = 1
    for P, e in factor(f).factors:
        s = residue_symbol(D.D, P)
        if s == 0:
            return 0
        if e % 2:
            val *= s
    return val


def char_sum_Mn(D: QuadChar | Poly, n: int) -> int:
    """Exact sum of chi_D(f) over monic f of degree n."""
    if isinstance(D, Poly):
        D = QuadChar(D)
    if n < 0:
        raise ValueError("n must be >= 0")
    return sum(jacobi(D.D, f) for f in enumerate_polys("M", D.q, n))


class SquareAverage(NamedTuple):
    empirical: Fraction
    main: Fraction
    scaled_err: Fraction


def euler_factor_main(f: Poly) -> Fraction:
    """prod over primes P | f of (1 + 1/|P|)^{-1}."""
    out = Fraction(1)
    if f.degree <= 0:
        return out
    for P, _ in factor(f).factors:
        out /= 1 + Fraction(1, P.norm)
    return out


def average_square_char(q: int, n: int, f: Poly, cap: int | None = DEFAULT_CAP) -> SquareAverage:
    """Mean of chi_D(f^2) over H_n against the Euler-product prediction.

    chi_D(f^2) is 1 when gcd(D, f) = 1 and 0 otherwise.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not f.is_monic:
        raise ValueError("f must be monic")
    check_cap(q ** n, cap)
    size = count_squarefree(q, n)
    hits = 0
    for D in enumerate_polys("H", q, n):
        if f.degree == 0 or poly_gcd(D, f).degree == 0:
            hits += 1
    emp = Fraction(hits, size)
    main = euler_factor_main(f)
    return SquareAverage(emp, main, abs(emp - main) * size)


def square_decomposition(l: Poly) -> tuple[Poly, Poly]:
    """Split monic l as l1 * l2^2 with l1 square-free."""
    F = l.F
    l1 = Poly.one(F)
    l2 = Poly.one(F)
    if l.degree <= 0:
        return l1, l2
    for P, e in factor(l).factors:
        if e % 2:
            l1 = l1 * P
        for _ in range(e // 2):
            l2 = l2 * P
    return l1, l2


class PVRatio(NamedTuple):
    abs_sum: int
    bound_base: float
    l1: Poly
    l2: Poly


def polya_vinogradov_ratio(q: int, n: int, l: Poly, cap: int | None = DEFAULT_CAP) -> PVRatio:
    """|sum_{D in H_n} chi_D(l)| and sqrt(|H_n|) for monic non-square l."""
    if not l.is_monic:
        raise ValueError("l must be monic")
    l1, l2 = square_decomposition(l)
    if l1.degree == 0:
        raise ValueError(f"{l} is a perfect square; the inequality does not apply")
    check_cap(q ** n, cap)
    total = sum(jacobi(D, l) for D in enumerate_polys("H", q, n))
    return PVRatio(abs(total), math.sqrt(count_squarefree(q, n)), l1, l2)


def unit_character(q: int, c: int) -> int:
    """Quadratic character of c in F_q."""
    return field(q).chi_t[c]
