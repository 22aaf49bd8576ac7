"""L-polynomials L(u, chi_D) of the hyperelliptic ensemble.

For D in H_n the L-polynomial has degree at most n - 1, with
c_i = sum_{f in M_i} chi_D(f).  With lambda = 1 for even n and 0 for odd n,
L* = L / (1 - u)^lambda has degree 2g = n - 1 - lambda and satisfies
c*_i = q^{i - g} c*_{2g - i}.

Two constructions are available: direct character sums (slow, used as an
oracle) and the Euler-product route through the traces

    s_k(D) = sum_{d | k} d * sum_{P in P_d} chi_D(P)^{k/d},

followed by Newton's identity k c_k = sum_{j=1}^k s_j c_{k-j}.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .charsum import DEFAULT_CAP, check_cap, jacobi
from .fqarith import (
    Poly,
    count_primes,
    count_squarefree,
    enumerate_polys,
    ext_eval,
    ext_field,
    factor,
    field,
    format_poly,
    is_squarefree,
    parse_poly,
)


def parity_lambda(n: int) -> int:
    return 1 if n % 2 == 0 else 0


def genus(n: int) -> int:
    return (n - 1 - parity_lambda(n)) // 2


def star_from_coeffs(coeffs: Sequence[int], lam: int) -> list[int]:
    """Exact division by (1 - u)^lam; raises if the division is not exact."""
    c = list(coeffs)
    if not lam:
        return c
    out, acc = [], 0
    for x in c:
        acc += x
        out.append(acc)
    if out[-1] != 0:
        raise ArithmeticError("L(1) != 0 although lambda = 1")
    return out[:-1]


def times_one_minus_u(star: Sequence[int], lam: int) -> list[int]:
    c = list(star)
    if not lam:
        return c
    return [a - b for a, b in zip(c + [0], [0] + c)]


@dataclass(frozen=True)
class LPolynomial:
    """Exact L(u, chi_D) with its completed form."""

    D: Poly | None
    q: int
    n: int
    coeffs: tuple[int, ...]  # c_0 .. c_{n-1}
    lam: int
    g: int
    star: tuple[int, ...] = dc_field(default=())

    @classmethod
    def from_coeffs(cls, q: int, n: int, coeffs: Sequence[int], D: Poly | None = None) -> "LPolynomial":
        lam = parity_lambda(n)
        c = tuple(int(x) for x in coeffs) + (0,) * max(0, n - len(coeffs))
        star = tuple(star_from_coeffs(c, lam))
        while len(star) > 2 * genus(n) + 1 and star[-1] == 0:
            star = star[:-1]
        return cls(D, q, n, c, lam, genus(n), star)

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d] == 0:
            d -= 1
        return d

    def __call__(self, u: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc

    def star_value(self, u: complex) -> complex:
        acc = 0j
        for c in reversed(self.star):
            acc = acc * u + c
        return acc

    def traces(self, kmax: int) -> list[int]:
        """s_1..s_kmax (index 0 unused) from log L = sum s_k u^k / k."""
        return traces_from_coeffs(self.coeffs, kmax)


def traces_from_coeffs(coeffs: Sequence[int], kmax: int) -> list[int]:
    """Inverse Newton identity: s_k = k c_k - sum_{j<k} s_j c_{k-j}."""
    c = list(coeffs)
    s = [0] * (kmax + 1)
    for k in range(1, kmax + 1):
        acc = k * (c[k] if k < len(c) else 0)
        for j in range(1, k):
            if k - j < len(c):
                acc -= s[j] * c[k - j]
        s[k] = acc
    return s


def _check_D(D: Poly) -> None:
    if not D.is_monic or D.degree < 1:
        raise ValueError("D must be monic of degree >= 1")
    if not is_squarefree(D):
        raise ValueError("D must be square-free")


def build_lpoly(D: Poly) -> LPolynomial:
    """Direct construction: c_i as a character sum over M_i, i < d(D)."""
    _check_D(D)
    n = D.degree
    q = D.F.q
    coeffs = [sum(jacobi(D, f) for f in enumerate_polys("M", q, i)) for i in range(n)]
    return LPolynomial.from_coeffs(q, n, coeffs, D)


class FEResult:
    """Outcome of the coefficient identity check; falsy on failure."""

    def __init__(self, ok: bool, index: int | None = None):
        self.ok = ok
        self.index = index

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        return "FEResult(ok)" if self.ok else f"FEResult(fail at {self.index})"


def verify_functional_equation(L: LPolynomial, star: Sequence[int] | None = None) -> FEResult:
    """c*_i = q^{i-g} c*_{2g-i}, checked as integers for i >= g."""
    s = list(L.star if star is None else star)
    g, q = L.g, L.q
    if len(s) > 2 * g + 1:
        return FEResult(False, 2 * g + 1)
    s = s + [0] * (2 * g + 1 - len(s))
    for i in range(g, 2 * g + 1):
        if s[i] != q ** (i - g) * s[2 * g - i]:
            return FEResult(False, i)
    return FEResult(True)


# --- Weil RH -------------------------------------------------------------------

class RHViolation(ArithmeticError):
    pass


@dataclass(frozen=True)
class EigenAngles:
    angles: tuple[float, ...]  # theta_j with inverse roots sqrt(q) e^{i theta_j}
    roots: tuple[complex, ...]
    max_deviation: float  # max | |u_j| - q^{-1/2} |
    residual: float  # max |L*(u_j)|


def _poly_gcd_q(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    def trim(x):
        while x and x[-1] == 0:
            x.pop()
        return x

    a, b = trim(list(a)), trim(list(b))
    while b:
        r = list(a)
        while len(r) >= len(b):
            c = r[-1] / b[-1]
            s = len(r) - len(b)
            for i, y in enumerate(b):
                r[s + i] -= c * y
            trim(r)
            if not r:
                break
        a, b = b, r
    return [x / a[-1] for x in a]


def squarefree_part(coeffs: Sequence[int]) -> list[Fraction]:
    """p / gcd(p, p') over Q, monic, ascending coefficients."""
    p = [Fraction(c) for c in coeffs]
    while p and p[-1] == 0:
        p.pop()
    dp = [i * c for i, c in enumerate(p)][1:]
    g = _poly_gcd_q(p, dp) if dp else [Fraction(1)]
    if len(g) == 1:
        return [x / p[-1] for x in p]
    # exact division p / g
    quo = [Fraction(0)] * (len(p) - len(g) + 1)
    r = list(p)
    for s in range(len(quo) - 1, -1, -1):
        c = r[s + len(g) - 1] / g[-1]
        quo[s] = c
        for i, y in enumerate(g):
            r[s + i] -= c * y
    if any(r):
        raise ArithmeticError("inexact square-free division")  # pragma: no cover
    return [x / quo[-1] for x in quo]


def _polish(coeffs: np.ndarray, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    """Newton steps on ascending-coefficient polynomials, row-wise."""
    desc = coeffs[..., ::-1]
    dcoef = (coeffs[..., 1:] * np.arange(1, coeffs.shape[-1]))[..., ::-1]
    for _ in range(steps):
        pv = np.zeros_like(roots)
        for j in range(desc.shape[-1]):
            pv = pv * roots + desc[..., j : j + 1]
        dv = np.zeros_like(roots)
        for j in range(dcoef.shape[-1]):
            dv = dv * roots + dcoef[..., j : j + 1]
        ok = np.abs(dv) > 1e-8 * (1 + np.abs(pv))
        roots = np.where(ok, roots - np.where(ok, pv / np.where(ok, dv, 1), 0), roots)
    return roots


def _roots_scaled(star_rows: np.ndarray, q: int) -> np.ndarray:
    """Roots w of sum c*_i q^{-i/2} w^i (u = w / sqrt q) for a batch of same-degree rows."""
    N, m1 = star_rows.shape
    deg = m1 - 1
    scale = float(q) ** (-0.5 * np.arange(m1))
    a = star_rows.astype(np.float64) * scale
    lead = a[:, -1:]
    mon = a / lead
    comp = np.zeros((N, deg, deg), dtype=np.float64)
    comp[:, 1:, :-1] = np.eye(deg - 1)
    comp[:, :, -1] = -mon[:, :-1]
    w = np.linalg.eigvals(comp).astype(np.complex128)
    return _polish(a.astype(np.complex128), w)


def _rh_single(star: Sequence[int], q: int) -> np.ndarray:
    """Roots in u of one L*; clustered roots are recomputed from the exact square-free part."""
    deg = len(star) - 1
    if deg == 0:
        return np.zeros(0, dtype=np.complex128)
    w = _roots_scaled(np.array([star], dtype=np.float64), q)[0]
    if deg > 1:
        gaps = np.abs(w[:, None] - w[None, :]) + np.eye(deg)
        if gaps.min() < 1e-3:
            sf = squarefree_part(star)
            if len(sf) == 2:
                w = np.array([-float(sf[0]) * math.sqrt(q)], dtype=np.complex128)
            elif len(sf) - 1 < deg:
                w = _roots_scaled(np.array([[float(x) for x in sf]]), q)[0]
    return w / math.sqrt(q)


def verify_rh(L: LPolynomial | Sequence[int], tol: float = 1e-8, q: int | None = None) -> EigenAngles:
    """Roots of L* and their distance to |u| = q^{-1/2}; raises RHViolation beyond tol."""
    if isinstance(L, LPolynomial):
        star, q = list(L.star), L.q
    else:
        star = list(L)
        if q is None:
            raise ValueError("q is required with a bare coefficient list")
    while len(star) > 1 and star[-1] == 0:
        star.pop()
    roots = _rh_single(star, q)
    target = q ** -0.5
    if len(roots) == 0:
        return EigenAngles((), (), 0.0, 0.0)
    dev = float(np.max(np.abs(np.abs(roots) - target)))
    resid = max(abs(sum(c * r ** i for i, c in enumerate(star))) for r in roots)
    if dev > tol:
        raise RHViolation(f"L* = {star}: root off the circle by {dev:.3e}")
    angles = tuple(float(-cmath.phase(r)) for r in roots)
    return EigenAngles(angles, tuple(complex(r) for r in roots), dev, float(resid))


def rh_max_deviation(star_rows: np.ndarray, q: int) -> tuple[float, int]:
    """Max | |u| - q^{-1/2} | over distinct rows of a (N, 2g+1) star table; also the row count."""
    uniq = np.unique(star_rows, axis=0)
    if uniq.shape[1] <= 1:
        return 0.0, len(uniq)
    target = q ** -0.5
    w = _roots_scaled(uniq, q)
    dev = np.abs(np.abs(w) / math.sqrt(q) - target).max(axis=1)
    suspect = np.nonzero(dev > 1e-10)[0]
    worst = float(dev.max()) if len(dev) else 0.0
    if len(suspect):
        # clustered roots lose accuracy in the companion solve; redo exactly
        worst = float(np.delete(dev, suspect).max()) if len(suspect) < len(dev) else 0.0
        for i in suspect:
            r = _rh_single([int(x) for x in uniq[i]], q)
            worst = max(worst, float(np.max(np.abs(np.abs(r) - target))))
    return worst, len(uniq)


# --- the Euler-product engine ------------------------------------------------------

@functools.lru_cache(maxsize=None)
def prime_root_tables(q: int, d: int):
    """(roots, base_log, zech, M, has_zero_root) for the primes of degree d.

    For d = 1 the prime t has root 0, which has no logarithm; it is flagged
    and handled separately by the callers.
    """
    K = ext_field(q, d)
    _, log, zech = K._log_tables
    M = K.order - 1
    roots = kernels.orbit_representatives(q, d, M)
    zero_root = d == 1
    if len(roots) + zero_root != count_primes(q, d):  # pragma: no cover
        raise AssertionError("Frobenius orbits disagree with the prime count")
    return roots, np.ascontiguousarray(log[:q]), zech, M, zero_root


def _decode(acc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = (acc + (1 << (kernels.ZSHIFT - 1))) >> kernels.ZSHIFT
    return acc - (z << kernels.ZSHIFT), z


def degree_traces(q: int, n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """(T_d, Z_d) indexed by M_n rank: sum of chi_D(P) and number of P | D over P in P_d."""
    roots, base_log, zech, M, zero_root = prime_root_tables(q, d)
    acc = np.zeros(q ** n, dtype=np.int64)
    kernels.accumulate_degree(q, n, n // 2, roots, base_log, zech, M, acc)
    T, Z = _decode(acc)
    if zero_root:
        a0 = np.arange(q ** n, dtype=np.int64) % q
        T += np.asarray(field(q).chi_t, dtype=np.int64)[a0]
        Z += a0 == 0
    return T, Z


def list_traces(q: int, coeffs: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """(T_d, Z_d) for explicit monic D given as rows of ascending codes."""
    roots, base_log, zech, M, zero_root = prime_root_tables(q, d)
    N = coeffs.shape[0]
    T = np.zeros(N, dtype=np.int64)
    Z = np.zeros(N, dtype=np.int64)
    kernels.accumulate_list(np.ascontiguousarray(coeffs, dtype=np.int64), roots, base_log, zech, M, T, Z)
    if zero_root:
        a0 = coeffs[:, 0]
        T += np.asarray(field(q).chi_t, dtype=np.int64)[a0]
        Z += a0 == 0
    return T, Z


def squarefree_ranks(q: int, n: int) -> np.ndarray:
    F = field(q)
    fi = np.array([i % F.p for i in range(n + 2)], dtype=np.int64)
    mask = kernels.squarefree_mask(q, n, np.asarray(F.sub_t, dtype=np.int64), F.mul_array,
                                   np.asarray(F.inv_t, dtype=np.int64), fi)
    return np.nonzero(mask)[0].astype(np.int64)


def ranks_to_coeffs(q: int, n: int, ranks: np.ndarray) -> np.ndarray:
    """Rows (a_0, ..., a_{n-1}, 1) of codes."""
    out = np.empty((len(ranks), n + 1), dtype=np.int64)
    r = np.asarray(ranks, dtype=np.int64).copy()
    for i in range(n):
        out[:, i] = r % q
        r //= q
    out[:, n] = 1
    return out


def _traces_to_S(q: int, kmax: int, per_degree: dict[int, tuple[np.ndarray, np.ndarray]], N: int) -> np.ndarray:
    S = np.zeros((N, kmax + 1), dtype=np.int64)
    for d, (T, Z) in per_degree.items():
        nP = count_primes(q, d)
        for k in range(d, kmax + 1, d):
            S[:, k] += d * (T if (k // d) % 2 else nP - Z)
    return S


@dataclass
class EnsembleL:
    """L-polynomials of a set of D in H_n, stored as integer arrays.

    ranks index M_n (rank = sum a_i q^i); coeffs has columns c_0..c_{n-1};
    star has columns c*_0..c*_{2g}; traces has columns s_0..s_{kmax}
    (s_0 unused) computed from prime sums.
    """

    q: int
    n: int
    method: str
    ranks: np.ndarray
    coeffs: np.ndarray
    star: np.ndarray
    traces: np.ndarray
    seed: int | None = None

    @property
    def g(self) -> int:
        return genus(self.n)

    @property
    def lam(self) -> int:
        return parity_lambda(self.n)

    def __len__(self) -> int:
        return len(self.ranks)

    def lpoly(self, i: int) -> LPolynomial:
        D = Poly.from_rank(field(self.q), self.n, int(self.ranks[i]))
        return LPolynomial(D, self.q, self.n, tuple(int(x) for x in self.coeffs[i]), self.lam, self.g,
                           tuple(int(x) for x in self.star[i]))

    def D(self, i: int) -> Poly:
        return Poly.from_rank(field(self.q), self.n, int(self.ranks[i]))

    def values(self, u: complex) -> np.ndarray:
        """L(u) for every member (Horner, complex128)."""
        acc = np.zeros(len(self), dtype=np.complex128)
        for j in range(self.coeffs.shape[1] - 1, -1, -1):
            acc = acc * u + self.coeffs[:, j]
        return acc

    def all_traces(self, kmax: int) -> np.ndarray:
        """s_0..s_kmax for every member, extending past the stored traces by the inverse Newton identity."""
        if kmax < self.traces.shape[1]:
            return self.traces[:, : kmax + 1]
        c = self.coeffs
        N = len(self)
        s = np.zeros((N, kmax + 1), dtype=np.int64)
        for k in range(1, kmax + 1):
            acc = k * c[:, k] if k < c.shape[1] else np.zeros(N, dtype=np.int64)
            for j in range(1, k):
                if k - j < c.shape[1]:
                    acc = acc - s[:, j] * c[:, k - j]
            s[:, k] = acc
        return s


def _complete(q: int, n: int, S: np.ndarray, method: str) -> tuple[np.ndarray, np.ndarray]:
    """(coeffs, star) from the trace table."""
    lam, g = parity_lambda(n), genus(n)
    N = S.shape[0]
    if method == "full":
        C = kernels.newton_from_traces(S, n)
        star = np.cumsum(C, axis=1)[:, : 2 * g + 1] if lam else C.copy()
        if lam and np.any(np.cumsum(C, axis=1)[:, -1] != 0):
            raise ArithmeticError("L(1) != 0 for an even-degree D")
        return C, star
    # half: c*_0..c*_g from the traces, the rest from the functional equation
    C = kernels.newton_from_traces(S, g + 1)
    star = np.zeros((N, 2 * g + 1), dtype=np.int64)
    star[:, : g + 1] = np.cumsum(C, axis=1) if lam else C
    for i in range(g):
        star[:, 2 * g - i] = q ** (g - i) * star[:, i]
    if lam:
        coeffs = np.zeros((N, n), dtype=np.int64)
        coeffs[:, : 2 * g + 1] += star
        coeffs[:, 1:] -= star
    else:
        coeffs = star.copy()
    return coeffs, star


def _resolve_method(q: int, n: int, method: str) -> str:
    if method == "auto":
        # the full route needs primes up to degree n - 1
        return "full" if q ** n * sum(count_primes(q, d) for d in range(1, n)) <= 6e9 else "half"
    if method not in ("full", "half"):
        raise ValueError(f"unknown construction method {method!r}")
    return method


def ensemble_lpolys(q: int, n: int, method: str = "auto", cap: int | None = DEFAULT_CAP) -> EnsembleL:
    """Exhaustive L-polynomials over H_n in rank order.

    'full' computes every c_i from prime traces of degree <= n - 1;
    'half' computes c*_0..c*_g and completes L* by the functional equation.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    check_cap(q ** n, cap)
    return _ensemble_cached(q, n, _resolve_method(q, n, method))


@functools.lru_cache(maxsize=32)
def _ensemble_cached(q: int, n: int, method: str) -> EnsembleL:
    ranks = squarefree_ranks(q, n)
    kmax = n - 1 if method == "full" else genus(n)
    per = {}
    for d in range(1, kmax + 1):
        T, Z = degree_traces(q, n, d)
        per[d] = (T[ranks], Z[ranks])
    S = _traces_to_S(q, kmax, per, len(ranks))
    coeffs, star = _complete(q, n, S, method)
    return EnsembleL(q, n, method, ranks, coeffs, star, S)


def sample_squarefree(q: int, n: int, count: int, seed: int) -> np.ndarray:
    """Uniform sample from H_n by rejection: rows of codes (a_0..a_{n-1}, 1)."""
    rng = np.random.default_rng(seed)
    F = field(q)
    fi = np.array([i % F.p for i in range(n + 2)], dtype=np.int64)
    sub = np.asarray(F.sub_t, dtype=np.int64)
    inv = np.asarray(F.inv_t, dtype=np.int64)
    rows = []
    have = 0
    while have < count:
        batch = rng.integers(0, q, size=(max(16, 2 * (count - have)), n))
        full = np.concatenate([batch, np.ones((batch.shape[0], 1), dtype=batch.dtype)], axis=1)
        ok = kernels.squarefree_rows(np.ascontiguousarray(full, dtype=np.int64), sub, F.mul_array, inv, fi)
        keep = full[ok][: count - have]
        rows.append(keep)
        have += len(keep)
    return np.concatenate(rows, axis=0).astype(np.int64)


def sampled_lpolys(q: int, n: int, count: int, seed: int, method: str = "half") -> EnsembleL:
    """L-polynomials of a seeded uniform sample of H_n (with repetition)."""
    method = _resolve_method(q, n, method) if method == "auto" else method
    if method not in ("full", "half"):
        raise ValueError(f"unknown construction method {method!r}")
    rows = sample_squarefree(q, n, count, seed)
    kmax = n - 1 if method == "full" else genus(n)
    per = {d: list_traces(q, rows, d) for d in range(1, kmax + 1)}
    S = _traces_to_S(q, kmax, per, len(rows))
    coeffs, star = _complete(q, n, S, method)
    ranks = np.zeros(len(rows), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        ranks = ranks * q + rows[:, i]
    return EnsembleL(q, n, method, ranks, coeffs, star, S, seed)


def ensemble_degree_traces(E: EnsembleL, d: int) -> np.ndarray:
    """T_d(D) = sum over P in P_d of chi_D(P), for every member of E."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if E.seed is None:
        T, _ = degree_traces(E.q, E.n, d)
        return T[E.ranks]
    T, _ = list_traces(E.q, ranks_to_coeffs(E.q, E.n, E.ranks), d)
    return T


def prime_characters(E: EnsembleL, d: int) -> np.ndarray:
    """Matrix chi_D(P) (int8), one row per member of E and one column per prime of degree d."""
    roots, base_log, zech, M, zero_root = prime_root_tables(E.q, d)
    cols = len(roots) + int(zero_root)
    out = np.zeros((len(E), cols), dtype=np.int64)
    kernels.chi_matrix(E.q, E.n, E.n // 2, roots, base_log, zech, M,
                       np.ascontiguousarray(E.ranks, dtype=np.int64), out, 0)
    if zero_root:
        a0 = E.ranks % E.q
        out[:, -1] = np.asarray(field(E.q).chi_t, dtype=np.int64)[a0]
    return out.astype(np.int8)


# --- approximate functional equation ---------------------------------------------------

def x_factor(n: int, q: int, s: complex) -> complex:
    """X(s): q^{s-1/2} for odd n, (1-q^{-s})/(1-q^{-(1-s)}) q^{-1+2s} for even n."""
    if n % 2:
        return q ** (s - 0.5)
    return (1 - q ** (-s)) / (1 - q ** (-(1 - s))) * q ** (-1 + 2 * s)


def x_d_factor(n: int, q: int, s: complex) -> complex:
    """X_D(s) = |D|^{1/2 - s} X(s)."""
    return q ** (n * (0.5 - s)) * x_factor(n, q, s)


class AFEResult(NamedTuple):
    lhs: complex
    rhs: complex
    terms: tuple[complex, complex, complex, complex]
    ok: bool


def approx_functional_equation(L: LPolynomial | Poly, s: complex, rtol: float = 1e-10) -> AFEResult:
    """L(s) evaluated directly against the four-sum expansion; c_i are the M_i character sums."""
    if isinstance(L, Poly):
        L = build_lpoly(L)
    q, n, g, lam = L.q, L.n, L.g, L.lam
    c = L.coeffs
    lhs = L(q ** (-s))
    XD = x_d_factor(n, q, s)
    t1 = sum(c[i] * q ** (-i * s) for i in range(g + 1))
    t2 = XD * sum(c[i] * q ** (-i * (1 - s)) for i in range(g))
    t3 = -lam * q ** (-s * (g + 1)) * sum(c[i] for i in range(g + 1))
    t4 = -lam * XD * q ** (-(1 - s) * g) * sum(c[i] for i in range(g))
    rhs = t1 + t2 + t3 + t4
    ok = abs(lhs - rhs) <= rtol * (1 + abs(lhs))
    return AFEResult(complex(lhs), complex(rhs), (complex(t1), complex(t2), complex(t3), complex(t4)), ok)


def afe_max_error(E: EnsembleL, s: float) -> float:
    """max over the ensemble of |lhs - rhs| / (1 + |lhs|)."""
    q, n, g, lam = E.q, E.n, E.g, E.lam
    c = E.coeffs.astype(np.float64)
    lhs = E.values(q ** (-s))
    XD = x_d_factor(n, q, s)
    w1 = q ** (-np.arange(g + 1) * s)
    w2 = q ** (-np.arange(g) * (1 - s))
    rhs = c[:, : g + 1] @ w1 + XD * (c[:, :g] @ w2)
    if lam:
        rhs = rhs - q ** (-s * (g + 1)) * c[:, : g + 1].sum(axis=1) - XD * q ** (-(1 - s) * g) * c[:, :g].sum(axis=1)
    return float(np.max(np.abs(lhs - rhs) / (1 + np.abs(lhs)))) if len(E) else 0.0


# --- derivatives, point counts, von Mangoldt ------------------------------------------------

def derivative_value(L: LPolynomial | Sequence[int], l: int, u: complex | None = None, q: int | None = None) -> complex:
    """l-th derivative of u -> L(u) at u (default q^{-1/2}), from exact differentiated coefficients."""
    if l < 0:
        raise ValueError("derivative order must be >= 0")
    if isinstance(L, LPolynomial):
        coeffs, q = L.coeffs, L.q
    else:
        coeffs = list(L)
    if u is None:
        if q is None:
            raise ValueError("q is required to default u to q^{-1/2}")
        u = q ** -0.5
    dc = [math.perm(i, l) * c for i, c in enumerate(coeffs)][l:]
    acc = 0j
    for c in reversed(dc):
        acc = acc * u + c
    return acc


class PointCount(NamedTuple):
    k: int
    direct: int
    from_L: int


def points_at_infinity(n: int) -> int:
    return 1 if n % 2 else 2


def point_count_direct(D: Poly, k: int) -> int:
    """#{(x, y) in F_{q^k}^2 : y^2 = D(x)} plus the points at infinity."""
    K = ext_field(D.F.q, k)
    square_count: dict[int, int] = {}
    for y in K.elements():
        v = (y * y).code
        square_count[v] = square_count.get(v, 0) + 1
    affine = sum(square_count.get(ext_eval(D, x).code, 0) for x in K.elements())
    return affine + points_at_infinity(D.degree)


def point_counts_from_star(star: Sequence[int], q: int, kmax: int) -> list[int]:
    """N_1..N_kmax from log(L*(u) / ((1-u)(1-qu))) = sum N_k u^k / k."""
    p = traces_from_coeffs(star, kmax)
    return [p[k] + 1 + q ** k for k in range(1, kmax + 1)]


def point_count_crosscheck(D: Poly, k_max: int) -> list[PointCount]:
    if D.degree < 3:
        raise ValueError("a genuine curve needs d(D) >= 3")
    if not 1 <= k_max <= 4:
        raise ValueError("k_max must lie in [1, 4]")
    L = build_lpoly(D)
    from_L = point_counts_from_star(L.star, L.q, k_max)
    return [PointCount(k, point_count_direct(D, k), from_L[k - 1]) for k in range(1, k_max + 1)]


def von_mangoldt(f: Poly) -> int:
    """d(P) if f = P^e with P prime, else 0."""
    if not f.is_monic:
        raise ValueError("f must be monic")
    if f.degree < 1:
        return 0
    fac = factor(f).factors
    return fac[0][0].degree if len(fac) == 1 else 0


# --- the log|L| upper bound -----------------------------------------------------------------

def a_alpha(k: int, alpha: float, q: int) -> float:
    """1/(k q^{k alpha}) - 1/(k q^{2k}); the O-term of the bound is not modelled."""
    return 1.0 / (k * q ** (k * alpha)) - 1.0 / (k * q ** (2 * k))


def log_bound_main(g: int, q: int, N: int, alpha: float) -> float:
    return (2 * g / (N + 1)) * math.log((1 + q ** (-alpha * (N + 1))) / (1 + q ** (-2 * (N + 1))))


def prime_power_sum_direct(D: Poly, N: int, alpha: float, theta: float) -> complex:
    """sum over monic f with d(f) <= N of a_alpha(d(f)) chi_D(f) Lambda(f) v^{d(f)} / |f|^{1/2}."""
    q = D.F.q
    v = cmath.exp(1j * theta)
    total = 0j
    for k in range(1, N + 1):
        part = 0
        for f in enumerate_polys("M", q, k):
            lam = von_mangoldt(f)
            if lam:
                part += jacobi(D, f) * lam
        total += a_alpha(k, alpha, q) * part * v ** k * q ** (-k / 2)
    return total


def log_bound_constants(E: EnsembleL, N: int, alpha: float, theta: float) -> np.ndarray:
    """Per-D additive constant C = log|L| - (main + Re prime sum); -inf where L vanishes."""
    q, g = E.q, E.g
    v = cmath.exp(1j * theta)
    u = v * q ** (-0.5 - alpha)
    val = np.abs(E.values(u))
    s = E.all_traces(N)
    w = np.array([0] + [a_alpha(k, alpha, q) * v ** k * q ** (-k / 2) for k in range(1, N + 1)])
    psum = (s.astype(np.complex128) @ w).real
    with np.errstate(divide="ignore"):
        lhs = np.log(val)
    return lhs - log_bound_main(g, q, N, alpha) - psum


# --- export ---------------------------------------------------------------------------------

def export_record(L: LPolynomial) -> str:
    """'D-coeffs;lambda;g;c_0,..;c*_0,..' with decimal integers."""
    D = format_poly(L.D) if L.D is not None else ""
    return ";".join([D, str(L.lam), str(L.g), ",".join(map(str, L.coeffs)), ",".join(map(str, L.star))])


def parse_record(text: str, q: int) -> LPolynomial:
    D_txt, lam, g, c, st = text.strip().split(";")
    D = parse_poly(D_txt, q)
    L = LPolynomial(D, q, D.degree, tuple(int(x) for x in c.split(",")), int(lam), int(g),
                    tuple(int(x) for x in st.split(",")))
    return L


def coefficients_via_traces(q: int, d: int, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    """(ranks of H_d, c_0..c_nmax per D) from prime traces up to degree nmax and Newton's identity.

    Nothing here assumes c_n = 0 for n >= d, so the vanishing is a genuine check.
    """
    ranks = squarefree_ranks(q, d)
    per = {}
    for k in range(1, nmax + 1):
        T, Z = degree_traces(q, d, k)
        per[k] = (T[ranks], Z[ranks])
    S = _traces_to_S(q, nmax, per, len(ranks))
    return ranks, kernels.newton_from_traces(S, nmax + 1)
