"""Shifted moments of L(v_j / q^{1/2 + alpha_j}, chi_D) over the hyperelliptic ensemble.

Covers the predicted magnitudes mu and sigma, the Cauchy-Schwarz lower-bound
pipeline built on the truncated series sum_{d(f) <= T} a_f chi_D(f)/|f|^{1/2},
tail counts of the log-magnitude, the prime-sum split used for large values,
and derivative moments.

Float reductions go through math.fsum, which is correctly rounded and so
independent of summation order and thread count.
"""

from __future__ import annotations

import cmath
import itertools
import math
import time
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple, Sequence

import numpy as np

from .analytic import ShiftClasses
from .charsum import DEFAULT_CAP, check_cap, jacobi
from .fqarith import Poly, count_primes, count_squarefree, enumerate_polys, factor
from .lfunc import (
    EnsembleL,
    a_alpha,
    ensemble_degree_traces,
    ensemble_lpolys,
    genus,
    prime_characters,
    sampled_lpolys,
)

A_CAP = 10.0  # alpha_j <= A_CAP / g


class DegenerateConfig(ValueError):
    """Repeated shift angles where a pair term needs them distinct."""


def fsum_c(values) -> complex:
    arr = np.asarray(values, dtype=np.complex128)
    return complex(math.fsum(arr.real), math.fsum(arr.imag))


@dataclass(frozen=True)
class ShiftConfig:
    """m shifts v_j = e^{i theta_j} with exponents k_j and real offsets alpha_j.

    Negative angles are accepted (the moment only sees |theta| through
    conjugation symmetry); mu and sigma use |theta_j|.
    """

    k: tuple[int, ...]
    theta: tuple[float, ...]
    alpha: tuple[float, ...] = ()

    def __post_init__(self):
        k = tuple(int(x) for x in self.k)
        theta = tuple(float(x) for x in self.theta)
        alpha = tuple(float(x) for x in self.alpha) or (0.0,) * len(k)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "alpha", alpha)
        if not k:
            raise ValueError("at least one shift is required")
        if len(theta) != len(k) or len(alpha) != len(k):
            raise ValueError("k, theta and alpha must have the same length")
        if any(x < 1 for x in k):
            raise ValueError("k_j must be positive integers")
        if any(not -math.pi <= t <= math.pi for t in theta):
            raise ValueError("theta_j must lie in [-pi, pi]")
        if any(not 0 <= a < 0.5 for a in alpha):
            raise ValueError("alpha_j must lie in [0, 1/2)")

    @property
    def m(self) -> int:
        return len(self.k)

    def check_alpha(self, g: float) -> None:
        for a in self.alpha:
            if a > A_CAP / g:
                raise ValueError(f"alpha = {a} exceeds the cap {A_CAP}/g = {A_CAP / g:.4g}")

    def check_distinct(self) -> None:
        th = [abs(t) for t in self.theta]
        for i, j in itertools.combinations(range(self.m), 2):
            if th[i] == th[j]:
                raise DegenerateConfig(f"theta_{i + 1} and theta_{j + 1} coincide; pair terms are degenerate")

    def points(self, q: int) -> list[complex]:
        """Evaluation points v_j / q^{1/2 + alpha_j}."""
        return [cmath.exp(1j * t) * q ** (-0.5 - a) for t, a in zip(self.theta, self.alpha)]

    def conjugate(self) -> "ShiftConfig":
        return ShiftConfig(self.k, tuple(-t for t in self.theta), self.alpha)


def _log_min(x: float, g: float) -> float:
    """log min{1/x, g}, with 1/0 read as +infinity."""
    return math.log(g) if x == 0 or 1 / x >= g else -math.log(x)


@dataclass
class PredictedMagnitude:
    mu: float
    sigma: float
    F: tuple[float, ...]  # log min{1/(2|theta_j|), g}
    F_pairs: dict  # (i, j) -> (log min{1/|theta_i - theta_j|, g}, log min{1/|theta_i + theta_j|, g})
    W: tuple[bool, ...]
    c_v: float

    @property
    def predicted(self) -> float:
        return math.exp(self.mu + self.sigma / 2)


def mu_sigma(cfg: ShiftConfig, g: float, finite_cut: float = 1.0) -> PredictedMagnitude:
    """mu = sum k_j log min{1/(2|theta_j|), g} and the matching sigma."""
    if g < 2:
        raise ValueError("g must be >= 2")
    if cfg.m > 1:
        cfg.check_distinct()
    th = [abs(t) for t in cfg.theta]
    F = tuple(_log_min(2 * t, g) for t in th)
    mu = sum(k * f for k, f in zip(cfg.k, F))
    sq = sum(k * k for k in cfg.k)
    sigma = 2 * sq * math.log(g) + 2 * sum(k * k * f for k, f in zip(cfg.k, F))
    pairs = {}
    for i, j in itertools.combinations(range(cfg.m), 2):
        fd = _log_min(abs(th[i] - th[j]), g)
        fs = _log_min(th[i] + th[j], g)
        pairs[(i, j)] = (fd, fs)
        sigma += 4 * cfg.k[i] * cfg.k[j] * (fd + fs)
    W = tuple(g * t <= finite_cut for t in th)
    entries = [g * t for t, w in zip(th, W) if w]
    if cfg.m == 2:
        for x in (abs(th[0] - th[1]), th[0] + th[1]):
            if g * x <= 2 * finite_cut:
                entries.append(g * x)
    c_v = max(entries) if entries else math.inf
    return PredictedMagnitude(mu, sigma, F, pairs, W, c_v)


def tau_k(k: int, f: Poly) -> int:
    """Number of ordered k-tuples of monics with product f."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not f.is_monic:
        raise ValueError("f must be monic")
    if f.degree == 0:
        return 1
    out = 1
    for _, e in factor(f).factors:
        out *= math.comb(e + k - 1, k - 1)
    return out


def tau_k_brute(k: int, f: Poly) -> int:
    """tau_k by counting ordered factorisations through monic divisors."""
    if k == 1:
        return 1
    q = f.F.q
    total = 0
    for d in range(f.degree + 1):
        for g_ in enumerate_polys("M", q, d):
            quo, rem = divmod(f, g_)
            if rem.is_zero:
                total += tau_k_brute(k - 1, quo)
    return total


@dataclass
class TruncatedSeries:
    X: float
    T: int  # largest degree kept
    coeffs: dict  # Poly -> complex
    cfg: ShiftConfig

    def __getitem__(self, f: Poly) -> complex:
        return self.coeffs[f]

    def __len__(self) -> int:
        return len(self.coeffs)


def _a_f(cfg: ShiftConfig, f: Poly) -> complex:
    """a_f as a sum over ordered factorisations f = f_1 ... f_m, grouped prime by prime."""
    q = f.F.q
    if f.degree == 0:
        return 1 + 0j
    fac = [(P.degree, e) for P, e in factor(f).factors]
    m = cfg.m
    total = 0j
    per_prime = []
    for _, e in fac:
        per_prime.append([c for c in itertools.product(range(e + 1), repeat=m) if sum(c) == e])
    for choice in itertools.product(*per_prime):
        w = 1.0
        degs = [0] * m
        for (d, _), exps in zip(fac, choice):
            for j, ej in enumerate(exps):
                w *= math.comb(ej + cfg.k[j] - 1, cfg.k[j] - 1)
                degs[j] += ej * d
        ph = sum(t * dj for t, dj in zip(cfg.theta, degs))
        nm = sum(a * dj for a, dj in zip(cfg.alpha, degs))
        total += w * q ** (-nm) * cmath.exp(1j * ph)
    return total


def build_af(cfg: ShiftConfig, q: int, X: float) -> TruncatedSeries:
    """a_f for every monic f with d(f) <= (sum k_j) X."""
    if X <= 0:
        raise ValueError("X must be > 0")
    T = int(math.floor(sum(cfg.k) * X + 1e-12))
    K = sum(cfg.k)
    out = {}
    for d in range(T + 1):
        for f in enumerate_polys("M", q, d):
            a = _a_f(cfg, f)
            if abs(a) > tau_k(K, f) * (1 + 1e-12):
                raise ArithmeticError(f"|a_f| exceeds tau_{K}(f) at f = {f}")
            out[f] = a
    return TruncatedSeries(X, T, out, cfg)


# --- moments ---------------------------------------------------------------------------

def _ensemble(q: int, n: int, mode: str, samples: int | None, seed: int | None, cap: int | None) -> EnsembleL:
    if n < 1:
        raise ValueError("n must be >= 1")
    if mode == "enumerate":
        check_cap(count_squarefree(q, n), cap)
        return ensemble_lpolys(q, n, "auto", cap)
    if mode == "sample":
        if not samples or samples < 1 or seed is None:
            raise ValueError("sample mode needs a positive sample count and a seed")
        return sampled_lpolys(q, n, samples, seed)
    raise ValueError(f"unknown mode {mode!r}")


def shift_values(E: EnsembleL, cfg: ShiftConfig) -> np.ndarray:
    """Matrix of L(v_j / q^{1/2 + alpha_j}, chi_D), shape (len(E), m)."""
    return np.stack([E.values(u) for u in cfg.points(E.q)], axis=1)


@dataclass
class MomentReport:
    q: int
    n: int
    g: int
    cfg: ShiftConfig
    mode: str
    seed: int | None
    size: int  # |H_n|
    count: int  # number of D summed
    S: float
    mean: float
    mu: float
    sigma: float
    predicted: float
    ratio: float
    S1: float | None = None
    S2: float | None = None
    cauchy_lower: float | None = None
    zero_count: int = 0
    wall_time_ms: float | None = None
    imag_residue: float = 0.0

    FIELDS = ("q", "n", "g", "m", "k", "theta", "alpha", "mode", "seed", "S", "S_over_H", "mu", "sigma",
              "predicted", "ratio", "S1", "S2", "cauchy_lower", "zero_count", "wall_time_ms")

    def record(self, timing: bool = False) -> dict:
        """Flat record; wall_time_ms only when timing is requested."""
        rec = {
            "q": self.q, "n": self.n, "g": self.g, "m": self.cfg.m,
            "k": list(self.cfg.k), "theta": list(self.cfg.theta), "alpha": list(self.cfg.alpha),
            "mode": self.mode, "seed": self.seed, "S": self.S, "S_over_H": self.mean,
            "mu": self.mu, "sigma": self.sigma, "predicted": self.predicted, "ratio": self.ratio,
            "S1": self.S1, "S2": self.S2, "cauchy_lower": self.cauchy_lower,
            "zero_count": self.zero_count,
        }
        if timing:
            rec["wall_time_ms"] = self.wall_time_ms
        return rec


def shifted_moment(cfg: ShiftConfig, q: int, n: int, mode: str = "enumerate", samples: int | None = None,
                   seed: int | None = None, cap: int | None = DEFAULT_CAP, signed: bool = False) -> MomentReport:
    """S = sum_D prod_j |L(v_j/q^{1/2+alpha_j}, chi_D)|^{2 k_j}.

    With signed=True the product prod_j L^{2k_j} is summed without absolute
    values; the real part is reported and the imaginary part kept in imag_residue.
    In sample mode S is |H_n| times the sample mean.
    """
    t0 = time.perf_counter()
    g = genus(n)
    if g >= 1:
        cfg.check_alpha(g)
    E = _ensemble(q, n, mode, samples, seed, cap)
    vals = shift_values(E, cfg)
    kk = np.asarray(cfg.k)
    zero = int(np.count_nonzero(np.any(vals == 0, axis=1)))
    if signed:
        prod = np.prod(vals ** (2 * kk), axis=1)
    else:
        prod = np.prod(np.abs(vals) ** (2 * kk), axis=1)
    total = fsum_c(prod)
    size = count_squarefree(q, n)
    mean = total.real / len(E)
    S = mean * size
    pm = mu_sigma(cfg, max(g, 2)) if g >= 2 else None
    mu = pm.mu if pm else 0.0
    sigma = pm.sigma if pm else 0.0
    predicted = math.exp(mu + sigma / 2)
    rep = MomentReport(q, n, g, cfg, mode, seed, size, len(E), S, mean, mu, sigma, predicted,
                       mean / predicted, zero_count=zero, imag_residue=abs(total.imag))
    rep.wall_time_ms = (time.perf_counter() - t0) * 1e3
    return rep


# --- Cauchy-Schwarz lower bound ---------------------------------------------------------------

class LowerBound(NamedTuple):
    S1: float
    S2: float
    cauchy_lower: float
    full: float  # sum_D |prod_j L_j^{k_j}|^2
    predicted: float
    S2_form: float  # S2 from the quadratic form in character sums
    T: int


def truncated_values(E: EnsembleL, cfg: ShiftConfig, T: int) -> np.ndarray:
    """sum_{d(f) <= T} a_f chi_D(f)/|f|^{1/2} per D, as the degree <= T part of prod_j L(c_j w)^{k_j}."""
    N = len(E)
    prod = np.zeros((N, T + 1), dtype=np.complex128)
    prod[:, 0] = 1
    C = E.coeffs
    for u, k in zip(cfg.points(E.q), cfg.k):
        L = np.zeros((N, T + 1), dtype=np.complex128)
        for i in range(min(T + 1, C.shape[1])):
            L[:, i] = C[:, i] * u ** i
        for _ in range(k):
            new = np.zeros_like(prod)
            for a in range(T + 1):
                for b in range(T + 1 - a):
                    new[:, a + b] += prod[:, a] * L[:, b]
            prod = new
    return prod.sum(axis=1)


def quadratic_form_S2(E: EnsembleL, series: TruncatedSeries) -> float:
    """sum_{f, f'} a_f conj(a_f') |f f'|^{-1/2} sum_D chi_D(f f'), with chi_D(f) from the Jacobi symbol."""
    fs = list(series.coeffs)
    chi = np.zeros((len(E), len(fs)), dtype=np.int64)
    for i in range(len(E)):
        D = E.D(i)
        for j, f in enumerate(fs):
            chi[i, j] = jacobi(D, f) if f.degree > 0 else 1
    G = chi.T @ chi  # G[f, f'] = sum_D chi_D(f f')
    w = np.array([series[f] * f.norm ** -0.5 for f in fs])
    val = w @ G @ np.conj(w)
    return float(val.real)


def lower_bound_pipeline(cfg: ShiftConfig, q: int, n: int, X: float | None = None,
                         cap: int | None = DEFAULT_CAP, rtol: float = 1e-9,
                         quadratic_form: bool = True) -> LowerBound:
    """S1, S2 and S1^2/S2 for the truncated series of length (sum k_j) X.

    X defaults to g/(2 sum k_j).  Raises ArithmeticError if Cauchy-Schwarz
    fails beyond rtol or the two S2 routes disagree.
    """
    g = genus(n)
    if X is None:
        X = g / (2 * sum(cfg.k))
    if g >= 1:
        cfg.check_alpha(g)
    E = _ensemble(q, n, "enumerate", None, None, cap)
    T = int(math.floor(sum(cfg.k) * X + 1e-12))
    vals = shift_values(E, cfg)
    prodL = np.prod(vals ** np.asarray(cfg.k), axis=1)
    trunc = truncated_values(E, cfg, T)
    S1 = math.fsum(np.abs(prodL * np.conj(trunc)))
    S2 = math.fsum(np.abs(trunc) ** 2)
    full = math.fsum(np.abs(prodL) ** 2)
    if S1 * S1 > S2 * full * (1 + rtol):
        raise ArithmeticError("Cauchy-Schwarz violated")
    S2_form = float("nan")
    if quadratic_form:
        S2_form = quadratic_form_S2(E, build_af(cfg, q, X))
        if abs(S2_form - S2) > 1e-9 * max(1.0, S2):
            raise ArithmeticError(f"S2 routes disagree: {S2} vs {S2_form}")
    pm = mu_sigma(cfg, max(g, 2))
    return LowerBound(S1, S2, S1 * S1 / S2, full, pm.predicted * len(E), S2_form, T)


# --- tails and the prime-sum split ------------------------------------------------------------

@dataclass
class TailHistogram:
    V: np.ndarray
    counts: np.ndarray
    size: int
    zero_count: int
    mu: float
    sigma: float
    values: np.ndarray  # sum_j 2 k_j log|L_j| - mu per retained D

    @property
    def reference(self) -> np.ndarray:
        """|H_n| exp(-V^2 / sigma)."""
        return self.size * np.exp(-self.V ** 2 / self.sigma)

    def slope_fit(self, lo: float = 0.01, hi: float = 0.5) -> tuple[float, int]:
        """Least-squares slope of log(count/|H_n|) against -V^2/sigma over bins with V > 0
        and tail fraction in [lo, hi]; returns (slope, number of bins)."""
        frac = self.counts / self.size
        sel = (self.V > 0) & (frac >= lo) & (frac <= hi)
        if sel.sum() < 2:
            raise ValueError("fewer than two central bins")
        x = -self.V[sel] ** 2 / self.sigma
        y = np.log(frac[sel])
        A = np.stack([x, np.ones_like(x)], axis=1)
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        return float(coef[0]), int(sel.sum())


def log_magnitudes(E: EnsembleL, cfg: ShiftConfig) -> tuple[np.ndarray, np.ndarray]:
    """(sum_j 2 k_j log|L_j| per D, mask of D where no L_j vanishes)."""
    vals = np.abs(shift_values(E, cfg))
    ok = np.all(vals > 0, axis=1)
    with np.errstate(divide="ignore"):
        logs = np.log(vals) @ (2 * np.asarray(cfg.k, dtype=float))
    return logs, ok


def tail_histogram(cfg: ShiftConfig, q: int, n: int, V_grid: Sequence[float],
                   cap: int | None = DEFAULT_CAP) -> TailHistogram:
    """Upsilon(V) = #{D : sum_j 2 k_j log|L_j| >= mu + V}; D with a vanishing L_j are excluded."""
    g = genus(n)
    E = _ensemble(q, n, "enumerate", None, None, cap)
    pm = mu_sigma(cfg, max(g, 2))
    logs, ok = log_magnitudes(E, cfg)
    vals = np.sort(logs[ok] - pm.mu)
    V = np.asarray(V_grid, dtype=float)
    counts = len(vals) - np.searchsorted(vals, V, side="left")
    return TailHistogram(V, counts.astype(np.int64), len(E), int((~ok).sum()), pm.mu, pm.sigma, vals)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def choose_N(g: float, V: float, A: float) -> int:
    """N with g/(N + 1) = V/A, rounded."""
    return max(1, round_half_up(g * A / V) - 1)


def choose_N0(N: int, g: float, q: int) -> int:
    return max(1, round_half_up(N / math.log(g, q)))


def prime_split_weight(cfg: ShiftConfig, q: int, d: int) -> float:
    """sum_j k_j a_{alpha_j}(d) d cos(theta_j d)."""
    return sum(k * a_alpha(d, a, q) * d * math.cos(t * d) for k, t, a in zip(cfg.k, cfg.theta, cfg.alpha))


@dataclass
class PrimeSplit:
    S1: np.ndarray
    S2: np.ndarray
    lhs: np.ndarray  # sum_j 2 k_j log|L_j|
    residual: np.ndarray  # lhs - (S1 + S2 + mu + 5 g K/(N + 1))
    N: int
    N0: int
    weight_max: float  # max over d, j of |a_{alpha_j}(d) d cos(theta_j d)|


def prime_split_decomposition(cfg: ShiftConfig, q: int, n: int, N: int, N0: int | None = None,
                           cap: int | None = DEFAULT_CAP, E: EnsembleL | None = None) -> PrimeSplit:
    """S1(D) over d(P) <= N0 and S2(D) over N0 < d(P) <= N, each 2 sum chi_D(P)/|P|^{1/2} weight."""
    g = genus(n)
    if g < 2:
        raise ValueError("needs g >= 2")
    if N0 is None:
        N0 = choose_N0(N, g, q)
    if not 1 <= N0 < N:
        raise ValueError("need 1 <= N0 < N")
    if E is None:
        E = _ensemble(q, n, "enumerate", None, None, cap)
    S1 = np.zeros(len(E))
    S2 = np.zeros(len(E))
    wmax = 0.0
    for d in range(1, N + 1):
        T = ensemble_degree_traces(E, d)
        w = prime_split_weight(cfg, q, d)
        for t, a in zip(cfg.theta, cfg.alpha):
            wmax = max(wmax, abs(a_alpha(d, a, q) * d * math.cos(t * d)))
        contrib = 2 * T * q ** (-d / 2) * w
        if d <= N0:
            S1 += contrib
        else:
            S2 += contrib
    pm = mu_sigma(cfg, g)
    logs, ok = log_magnitudes(E, cfg)
    K = sum(cfg.k)
    resid = np.where(ok, logs - (S1 + S2 + pm.mu + 5 * g * K / (N + 1)), -np.inf)
    return PrimeSplit(S1, S2, logs, resid, N, N0, wmax)


class PrimeSumMoment(NamedTuple):
    lhs: float
    bound_base: float  # |H_n| (2l)!/(l! 2^l) (sum |a(P)|^2/|P|)^l
    ratio: float
    y: int


def random_prime_weights(q: int, y: int, seed: int) -> dict[int, np.ndarray]:
    """Complex Gaussian a(P) for every prime of degree <= y, grouped by degree."""
    rng = np.random.default_rng(seed)
    return {d: rng.standard_normal(count_primes(q, d)) + 1j * rng.standard_normal(count_primes(q, d))
            for d in range(1, y + 1)}


def prime_sum_moment(q: int, n: int, l: int, seed: int, y: int | None = None,
                     cap: int | None = DEFAULT_CAP) -> PrimeSumMoment:
    """sum_D |sum_{d(P) <= y} a(P) chi_D(P)/|P|^{1/2}|^{2l} for random a(P), y = floor(n/(2l))."""
    if l < 1:
        raise ValueError("l must be >= 1")
    if y is None:
        y = n // (2 * l)
    if y < 1 or 2 * l * y > n:
        raise ValueError("need 1 <= y and 2 l y <= n")
    E = _ensemble(q, n, "enumerate", None, None, cap)
    a = random_prime_weights(q, y, seed)
    s = np.zeros(len(E), dtype=np.complex128)
    mass = 0.0
    for d in range(1, y + 1):
        chi = prime_characters(E, d).astype(np.float64)
        s += chi @ a[d] * q ** (-d / 2)
        mass += math.fsum(np.abs(a[d]) ** 2) / q ** d
    lhs = math.fsum(np.abs(s) ** (2 * l))
    base = len(E) * math.factorial(2 * l) / (math.factorial(l) * 2 ** l) * mass ** l
    return PrimeSumMoment(lhs, base, lhs / base, y)


# --- cosine sums and derivatives ------------------------------------------------------------

def cosine_defect(theta: float, n: int) -> float:
    """sum_{m <= n} cos(theta m)/m - log min{n, 1/|theta|}."""
    if theta == 0:
        raise ValueError("theta must be nonzero")
    m = np.arange(1, n + 1)
    s = math.fsum(np.cos(theta * m) / m)
    return s - math.log(min(n, 1 / abs(theta)))


def cosine_grid(thetas: Sequence[float] | None = None, ns: Sequence[int] = (10, 100, 1000, 10000)) -> tuple[float, np.ndarray]:
    """Max defect over the grid, and the full table (rows theta, columns n)."""
    if thetas is None:
        thetas = np.logspace(-4, math.log10(3), 50)
    table = np.array([[cosine_defect(t, n) for n in ns] for t in thetas])
    return float(table.max()), table


def derivative_moment(q: int, n: int, k: int, l: int, cap: int | None = DEFAULT_CAP) -> tuple[float, float]:
    """(mean over H_n of |L^{(l)}(q^{-1/2})|^k, g^{k(k+1)/2 + l k})."""
    if l < 1:
        raise ValueError("l must be >= 1")
    if n == 1:
        return 0.0, 0.0
    E = _ensemble(q, n, "enumerate", None, None, cap)
    u = q ** -0.5
    C = E.coeffs
    acc = np.zeros(len(E))
    for i in range(l, C.shape[1]):
        acc = acc + math.perm(i, l) * C[:, i] * u ** (i - l)
    g = E.g
    return math.fsum(np.abs(acc) ** k) / len(E), float(g) ** (k * (k + 1) / 2 + l * k)
