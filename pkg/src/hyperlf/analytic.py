"""Generating-function side of the shifted second moment.

Truncated power series, Z(u) = 1/(1 - qu), the divisor sums b(l) and their
generating function B(u), coefficient extraction, and the residue main term
built from Stirling numbers, rising factorials and the d_l coefficients.
"""

from __future__ import annotations

import cmath
import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .fqarith import Poly, count_primes, enumerate_polys, factor, field

Number = complex | Fraction | int | float


class PowerSeries:
    """Truncated power series c_0 + c_1 u + ... + c_N u^N.

    mode 'exact' keeps Fractions, mode 'complex' keeps Python complex numbers.
    Binary operations truncate to the smaller order.
    """

    __slots__ = ("coeffs", "mode")

    def __init__(self, coeffs: Sequence[Number], N: int | None = None, mode: str = "exact"):
        if mode not in ("exact", "complex"):
            raise ValueError("mode must be 'exact' or 'complex'")
        conv = Fraction if mode == "exact" else complex
        c = [conv(x) for x in coeffs]
        if N is not None:
            c = (c + [conv(0)] * (N + 1))[: N + 1]
        if not c:
            raise ValueError("a power series needs at least one coefficient")
        self.coeffs = tuple(c)
        self.mode = mode

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int) -> Number:
        return self.coeffs[i]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __repr__(self) -> str:
        return f"PowerSeries({list(self.coeffs)!r}, mode={self.mode!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PowerSeries) and self.coeffs == other.coeffs

    def _coerce(self, other: "PowerSeries") -> tuple["PowerSeries", "PowerSeries", str]:
        mode = "exact" if self.mode == other.mode == "exact" else "complex"
        N = min(self.N, other.N)
        return PowerSeries(self.coeffs, N, mode), PowerSeries(other.coeffs, N, mode), mode

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        a, b, mode = self._coerce(other)
        return PowerSeries([x + y for x, y in zip(a.coeffs, b.coeffs)], mode=mode)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        a, b, mode = self._coerce(other)
        return PowerSeries([x - y for x, y in zip(a.coeffs, b.coeffs)], mode=mode)

    def __neg__(self) -> "PowerSeries":
        return PowerSeries([-x for x in self.coeffs], mode=self.mode)

    def __mul__(self, other) -> "PowerSeries":
        if not isinstance(other, PowerSeries):
            mode = self.mode if isinstance(other, (int, Fraction)) else "complex"
            return PowerSeries([x * other for x in self.coeffs], mode=mode)
        a, b, mode = self._coerce(other)
        N = a.N
        out = [0] * (N + 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j in range(N + 1 - i):
                    out[i + j] += x * b.coeffs[j]
        return PowerSeries(out, mode=mode)

    __rmul__ = __mul__

    def scale(self, c: Number) -> "PowerSeries":
        """f(c u)."""
        mode = self.mode if isinstance(c, (int, Fraction)) else "complex"
        return PowerSeries([x * c ** i for i, x in enumerate(self.coeffs)], mode=mode)

    def inverse(self) -> "PowerSeries":
        if self.coeffs[0] == 0:
            raise ZeroDivisionError("constant term is zero")
        N = self.N
        inv0 = 1 / self.coeffs[0]
        out = [inv0]
        for k in range(1, N + 1):
            acc = sum(self.coeffs[j] * out[k - j] for j in range(1, k + 1))
            out.append(-acc * inv0)
        return PowerSeries(out, mode=self.mode)

    def __pow__(self, e: int) -> "PowerSeries":
        if e < 0:
            return self.inverse() ** (-e)
        result = PowerSeries([1], self.N, self.mode)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def partial_sum(self, upto: int | None = None) -> Number:
        upto = self.N if upto is None else upto
        return sum(self.coeffs[: upto + 1])

    def __call__(self, u: Number) -> Number:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc


def zeta_series(q: int, N: int) -> PowerSeries:
    """Z(u) = sum_{f monic} u^{d(f)} = sum q^n u^n, exact to order N."""
    if N < 0:
        raise ValueError("N must be >= 0")
    return PowerSeries([q ** n for n in range(N + 1)])


# --- shift configurations for the two-shift diagonal ------------------------------------

@dataclass(frozen=True)
class PairShift:
    """(k1, k2), (theta1, theta2), (alpha1, alpha2) for the m = 2 diagonal sums."""

    k: tuple[int, int] = (1, 1)
    theta: tuple[float, float] = (0.0, 0.0)
    alpha: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if len(self.k) != 2 or len(self.theta) != 2 or len(self.alpha) != 2:
            raise ValueError("PairShift needs exactly two shifts")
        if any(int(x) != x or x < 1 for x in self.k):
            raise ValueError("k_j must be positive integers")


def _tau_prime_power(k: int, e: int) -> int:
    return math.comb(e + k - 1, k - 1)


def _compositions4(total: int):
    for e1 in range(total + 1):
        for e2 in range(total - e1 + 1):
            for e3 in range(total - e1 - e2 + 1):
                yield e1, e2, e3, total - e1 - e2 - e3


def _local_b(cfg: PairShift, q: int, deg: int, e: int) -> complex:
    """sum over ordered 4-splits of the exponent 2e of P^{2e}, without the Euler factor."""
    k1, k2 = cfg.k
    a1, a2 = cfg.alpha
    t1, t2 = cfg.theta
    norm = q ** deg
    total = 0j
    for e1, e2, e3, e4 in _compositions4(2 * e):
        tau = (_tau_prime_power(k1, e1) * _tau_prime_power(k1, e2)
               * _tau_prime_power(k2, e3) * _tau_prime_power(k2, e4))
        total += (tau * norm ** (-(a1 * (e1 + e2) + a2 * (e3 + e4)))
                  * cmath.exp(1j * deg * (t1 * (e1 - e2) + t2 * (e3 - e4))))
    return total


def b_of_l(l: Poly, cfg: PairShift, cap: int = 10 ** 6) -> complex:
    """b(l) by exhaustive ordered 4-factorisations f1 f2 f3 f4 = l^2.

    Each ordered factorisation of l^2 is a choice, prime by prime, of four
    exponents summing to twice the exponent in l.
    """
    if not l.is_monic:
        raise ValueError("l must be monic")
    if l.degree == 0:
        return 1 + 0j
    sig = tuple(sorted((P.degree, e) for P, e in factor(l).factors))
    return _b_signature(cfg, l.F.q, sig, cap)


@functools.lru_cache(maxsize=100_000)
def _b_signature(cfg: PairShift, q: int, sig: tuple[tuple[int, int], ...], cap: int) -> complex:
    count = 1
    for _, e in sig:
        count *= math.comb(2 * e + 3, 3)
    if count > cap:
        raise ValueError(f"{count} factorisations exceed the cap {cap}")
    k1, k2 = cfg.k
    a1, a2 = cfg.alpha
    t1, t2 = cfg.theta
    total = 0j
    for choice in itertools.product(*[list(_compositions4(2 * e)) for _, e in sig]):
        w = 1 + 0j
        for (deg, _), (e1, e2, e3, e4) in zip(sig, choice):
            norm = q ** deg
            tau = (_tau_prime_power(k1, e1) * _tau_prime_power(k1, e2)
                   * _tau_prime_power(k2, e3) * _tau_prime_power(k2, e4))
            w *= (tau * norm ** (-(a1 * (e1 + e2) + a2 * (e3 + e4)))
                  * cmath.exp(1j * deg * (t1 * (e1 - e2) + t2 * (e3 - e4))))
        total += w
    euler = 1.0
    for deg, _ in sig:
        euler /= 1 + q ** -deg
    return total * euler


def b_of_P_closed(cfg: PairShift, q: int, d: int) -> complex:
    """Closed form of b(P) for a prime of degree d."""
    k1, k2 = cfg.k
    a1, a2 = cfg.alpha
    t1, t2 = cfg.theta
    N = q ** d
    total = 0j
    for kj, tj, aj in ((k1, t1, a1), (k2, t2, a2)):
        for eps in (1, -1):
            total += kj * (kj + 1) / 2 * cmath.exp(2j * eps * tj * d) * N ** (-2 * aj)
        total += kj ** 2 * N ** (-2 * aj)
    for e1 in (1, -1):
        for e2 in (1, -1):
            total += k1 * k2 * N ** (-(a1 + a2)) * cmath.exp(1j * (e1 * t1 + e2 * t2) * d)
    return total / (1 + 1 / N)


def fsum_complex(vals) -> complex:
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


class PerronResult(NamedTuple):
    direct: complex
    extracted: complex
    diff: float


@functools.lru_cache(maxsize=None)
def _b_degree(cfg: PairShift, q: int, m: int) -> tuple[complex, ...]:
    """b(l) for every monic l of degree m, in rank order."""
    return tuple(b_of_l(l, cfg) for l in enumerate_polys("M", q, m))


def _b_table(cfg: PairShift, q: int, N: int) -> dict[int, tuple[complex, ...]]:
    return {m: _b_degree(cfg, q, m) for m in range(N + 1)}


def b_series(cfg: PairShift, q: int, N: int) -> PowerSeries:
    """B(u) to order N as the Euler product over primes of sum_e b(P^e) u^{e d(P)}."""
    B = PowerSeries([1], N, "complex")
    for d in range(1, N + 1):
        local = [0j] * (N + 1)
        for e in range(0, N // d + 1):
            val = 1 + 0j if e == 0 else _local_b(cfg, q, d, e) / (1 + q ** -d)
            local[e * d] = val
        factor_series = PowerSeries(local, N, "complex")
        B = B * (factor_series ** count_primes(q, d))
    return B


def perron_check(cfg: PairShift, q: int, N_trunc: int) -> PerronResult:
    """sum_{d(l) <= N} b(l)/|l| against [u^N] B(u/q) / (1 - u)."""
    if N_trunc < 0 or N_trunc > 8:
        raise ValueError("N_trunc must lie in [0, 8]")
    table = _b_table(cfg, q, N_trunc)
    direct = sum(fsum_complex(vals) / q ** m for m, vals in table.items())
    B = b_series(cfg, q, N_trunc).scale(1 / q)
    geom = PowerSeries([1] * (N_trunc + 1), mode="complex")
    extracted = (B * geom)[N_trunc]
    return PerronResult(complex(direct), complex(extracted), abs(direct - extracted))


# --- Stirling numbers and rising factorials ------------------------------------------------

@functools.lru_cache(maxsize=None)
def _elem_sym_table(k: int) -> tuple[int, ...]:
    """e_0..e_k of the numbers 1..k."""
    e = [1]
    for x in range(1, k + 1):
        nxt = e + [0]
        for i in range(len(e), 0, -1):
            nxt[i] += x * e[i - 1]
        e = nxt
    return tuple(e)


def stirling_first(k: int, i: int) -> int:
    """s^{(k)}_{k-i}: sum over 1 <= l_1 < ... < l_i <= k of l_1 ... l_i."""
    if k < 0 or i < 0:
        raise ValueError("k and i must be >= 0")
    if i > k:
        raise ValueError(f"i = {i} exceeds k = {k}")
    return _elem_sym_table(k)[i]


def stirling_lower(k: int, j: int) -> int:
    """s^{(k)}_j in the lower-index convention, i.e. stirling_first(k, k - j)."""
    return stirling_first(k, k - j)


def rising_factorial(n: int, x: Number) -> Number:
    """F_n(x) = x (x + 1) ... (x + n - 1), F_0 = 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    out = 1
    for j in range(n):
        out *= x + j
    return out


def rising_factorial_coeffs(n: int) -> list[int]:
    """Ascending coefficients of F_n(x): [x^m] F_n = s^{(n-1)}_{m-1} for m >= 1."""
    if n == 0:
        return [1]
    return [0] + [stirling_lower(n - 1, m - 1) for m in range(1, n + 1)]


# --- residue main term -------------------------------------------------------------------

class ConvergenceError(RuntimeError):
    pass


def _series_sum(term: Callable[[int], complex], start: int = 0, rel: float = 1e-14,
                streak: int = 3, max_terms: int = 500) -> complex:
    """Sum term(start), term(start+1), ... until `streak` consecutive terms are tiny."""
    total = 0j
    small = 0
    for i in range(start, start + max_terms):
        t = term(i)
        total += t
        if abs(t) <= rel * abs(total) or t == 0:
            small += 1
            if small >= streak:
                return total
        else:
            small = 0
    raise ConvergenceError(f"series did not converge within {max_terms} terms")


@dataclass(frozen=True)
class ShiftClasses:
    """Finite (True) or infinite (False) membership of the single and pair shifts."""

    single: tuple[bool, bool]
    diff_pair: bool  # theta_1 - theta_2
    sum_pair: bool  # theta_1 + theta_2

    @classmethod
    def from_angles(cls, theta: Sequence[float], g: float, cut: float = 1.0) -> "ShiftClasses":
        """Finite when g |x| <= cut for the single shifts and <= 2 cut for the pair shifts."""
        t1, t2 = theta
        return cls((g * abs(t1) <= cut, g * abs(t2) <= cut),
                   g * abs(t1 - t2) <= 2 * cut, g * abs(t1 + t2) <= 2 * cut)


def pole_order_V(k: Sequence[int], W: ShiftClasses) -> int:
    k1, k2 = k
    V = k1 * k1 + k2 * k2
    for kj, fin in zip(k, W.single):
        if fin:
            V += kj * (kj + 1)
    V += 2 * k1 * k2 * (int(W.diff_pair) + int(W.sum_pair))
    return V


def b_factors(k: Sequence[int], theta: Sequence[float], W: ShiftClasses) -> list[tuple[int, complex]]:
    """(K, z) for every factor sum_n (-1)^n binom(K + n, K) z^n / (1 - qu)^n."""
    k1, k2 = k
    t1, t2 = theta
    out = []
    for kj, tj, fin in ((k1, t1, W.single[0]), (k2, t2, W.single[1])):
        if fin:
            for eps in (1, -1):
                out.append((kj * (kj + 1) // 2, cmath.exp(-2j * eps * tj) - 1))
    for e1 in (1, -1):
        for e2 in (1, -1):
            fin = W.sum_pair if e1 == e2 else W.diff_pair
            if fin:
                out.append((k1 * k2, cmath.exp(-1j * (e1 * t1 + e2 * t2)) - 1))
    return out


def b_coefficients(factors: Sequence[tuple[int, complex]], nmax: int, binomial: str = "shifted") -> list[complex]:
    """b_0..b_nmax of the product of the factor series.

    'shifted' uses binom(K + n, K); 'exact' uses binom(K + n - 1, n), the true
    expansion of (1 + z/w)^{-K}.
    """
    if binomial not in ("shifted", "exact"):
        raise ValueError("binomial must be 'shifted' or 'exact'")
    b = [0j] * (nmax + 1)
    b[0] = 1 + 0j
    for K, z in factors:
        if binomial == "shifted":
            ser = [(-1) ** n * math.comb(K + n, K) * z ** n for n in range(nmax + 1)]
        else:
            ser = [(-1) ** n * math.comb(K + n - 1, n) * z ** n for n in range(nmax + 1)]
        nb = [0j] * (nmax + 1)
        for i, x in enumerate(b):
            if x:
                for j in range(nmax + 1 - i):
                    nb[i + j] += x * ser[j]
        b = nb
    return b


def d_coefficient(l: int, Np: int, e: Callable[[int], Fraction]) -> Fraction:
    """d_l for total index Np = V + n: d_0 = 1 and for 1 <= l <= Np

    d_l = 1 + (l!/e_{Np-l}) sum_{M=l+1}^{Np} s^{(M-1)}_{l-1} e_{Np-M} / M!.
    """
    if l == 0:
        return Fraction(1)
    if not 1 <= l <= Np:
        raise ValueError("d_l needs 0 <= l <= V + n")
    acc = Fraction(0)
    for M in range(l + 1, Np + 1):
        acc += Fraction(stirling_lower(M - 1, l - 1)) * e(Np - M) / math.factorial(M)
    return 1 + math.factorial(l) * acc / e(Np - l)


def geometric_e(ratio: Fraction = Fraction(1, 2)) -> Callable[[int], Fraction]:
    """Synthetic Taylor coefficients e_n = ratio^n."""
    return lambda n: Fraction(ratio) ** n


@dataclass
class ResidueMainTerm:
    V: int
    g: float
    leading: complex
    second: complex
    third: complex
    b: list[complex]
    classes: ShiftClasses
    binomial: str
    convention: str = "verbatim-d"

    @property
    def total(self) -> complex:
        return self.leading + self.second + self.third

    @property
    def ratios(self) -> tuple[float, float]:
        return abs(self.second) / abs(self.leading), abs(self.third) / abs(self.leading)


def residue_main_term(k: Sequence[int], theta: Sequence[float], g: float,
                      e: Callable[[int], Fraction] | Sequence[Fraction] | None = None,
                      classes: ShiftClasses | None = None, binomial: str = "shifted",
                      max_terms: int = 500) -> ResidueMainTerm:
    """The three sums of the residue expansion at x = (k1 + k2) X = g/2.

    leading = e_0 sum_n b_n x^{V+n} / (V+n)!
    second  = sum_{l=1}^{V} e_l x^{V-l} sum_n b_n d_{V+n-l} x^n / (V+n-l)!
    third   = sum_{l>=1} e_{V+l} sum_n b_{n+l} d_n x^n / n!
    where each d carries its own total index V + n.
    """
    if e is None:
        e = geometric_e()
    elif not callable(e):
        seq = [Fraction(x) for x in e]
        e = (lambda n, s=seq: s[n] if n < len(s) else Fraction(0))
    W = classes if classes is not None else ShiftClasses.from_angles(theta, g)
    V = pole_order_V(k, W)
    factors = b_factors(k, theta, W)
    b_cache: list[complex] = [1 + 0j]

    def b(n: int) -> complex:
        nonlocal b_cache
        if n >= len(b_cache):
            b_cache = b_coefficients(factors, max(2 * n, 32), binomial)
        return b_cache[n]

    x = g / 2

    def xpow_over_fact(m: int) -> float:
        return math.exp(m * math.log(x) - math.lgamma(m + 1)) if m > 0 else 1.0

    e0 = float(e(0))
    leading = e0 * _series_sum(lambda n: b(n) * xpow_over_fact(V + n), max_terms=max_terms)
    second = 0j
    for l in range(1, V + 1):
        el = float(e(l))
        if el == 0:
            continue
        inner = _series_sum(
            lambda n, l=l: b(n) * float(d_coefficient(V + n - l, V + n, e)) * xpow_over_fact(V + n - l),
            max_terms=max_terms)
        second += el * inner
    def third_term(l: int) -> complex:
        el = float(e(V + l))
        if el == 0:
            return 0j
        inner = _series_sum(
            lambda n: b(n + l) * float(d_coefficient(n, V + n + l, e)) * xpow_over_fact(n),
            max_terms=max_terms)
        return el * inner

    third = _series_sum(third_term, start=1, max_terms=max_terms)
    return ResidueMainTerm(V, g, leading, second, third, list(b_cache), W, binomial)


def residue_total_direct(k: Sequence[int], theta: Sequence[float], g: float,
                         e: Callable[[int], Fraction] | None = None,
                         classes: ShiftClasses | None = None, binomial: str = "shifted",
                         max_terms: int = 500) -> complex:
    """sum_n b_n sum_{M=0}^{V+n} e_{V+n-M} F_M(g/2) / M!, the unsplit form of the three sums."""
    if e is None:
        e = geometric_e()
    W = classes if classes is not None else ShiftClasses.from_angles(theta, g)
    V = pole_order_V(k, W)
    bs = b_coefficients(b_factors(k, theta, W), max_terms + 1, binomial)
    x = g / 2

    def term(n: int) -> complex:
        Np = V + n
        acc = 0.0
        for M in range(Np + 1):
            acc += float(e(Np - M)) * math.exp(sum(math.log(x + j) for j in range(M)) - math.lgamma(M + 1))
        return bs[n] * acc

    return _series_sum(term, max_terms=max_terms)


# --- zeta bounds near the 1-line -------------------------------------------------------------

class ZetaBound(NamedTuple):
    max_on_contour: float
    comparator: float
    constant: float  # max / comparator
    branch: str  # 'finite' or 'infinite'
    radius: float


def zeta_bound_check(q: int, g: float, theta: float, points: int = 720, finite_cut: float = 10.0) -> ZetaBound:
    """max |Z(u v)| on a circle around 1/q, v = e^{i theta}.

    When g|theta| <= finite_cut the circle has radius (g|theta| + 1)/g and
    the comparator is g; otherwise the radius is 1/g and the comparator 1/|theta|.
    """
    if not -math.pi < theta < math.pi:
        raise ValueError("theta must lie in (-pi, pi)")
    gt = g * abs(theta)
    if gt <= finite_cut:
        radius, comparator, branch = (gt + 1) / g, g, "finite"
    else:
        radius, comparator, branch = 1 / g, 1 / abs(theta), "infinite"
    phi = 2 * np.pi * np.arange(points) / points
    u = 1 / q + radius * np.exp(1j * phi)
    Z = 1 / np.abs(1 - q * u * np.exp(1j * theta))
    m = float(Z.max())
    return ZetaBound(m, comparator, m / comparator, branch, radius)


def shifted_circle_check(q: int, g: float, theta1: float, c_tilde: float = 1.0, points: int = 720) -> ZetaBound:
    """max |Z(u)| on |u - 1/(q e^{2 i theta1})| = c_tilde/g, against 1/|theta1|."""
    phi = 2 * np.pi * np.arange(points) / points
    centre = 1 / (q * cmath.exp(2j * theta1))
    radius = c_tilde / g
    u = centre + radius * np.exp(1j * phi)
    Z = 1 / np.abs(1 - q * u)
    m = float(Z.max())
    comp = 1 / abs(theta1)
    return ZetaBound(m, comp, m / comp, "infinite", radius)
