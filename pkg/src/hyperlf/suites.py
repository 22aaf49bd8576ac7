"""Verification suites behind `hyperlf verify --suite NAME`.

Each check function takes explicit parameters and returns (rows, ok); the
SUITES table adapts them to command-line options.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .analytic import (
    PairShift,
    b_of_l,
    b_of_P_closed,
    perron_check,
    rising_factorial_coeffs,
    shifted_circle_check,
    stirling_first,
    zeta_bound_check,
)
from .charsum import average_square_char, char_sum_Mn, polya_vinogradov_ratio
from .fqarith import Poly, enumerate_polys, factor, format_poly, parse_poly
from .lfunc import (
    afe_max_error,
    coefficients_via_traces,
    ensemble_lpolys,
    log_bound_constants,
    point_count_direct,
    point_counts_from_star,
    rh_max_deviation,
)
from .moments import cosine_grid, prime_sum_moment

# default grids
LOG_BOUND_N = tuple(range(2, 9))
LOG_BOUND_ALPHA = (0.0, 0.1, 0.25)
LOG_BOUND_THETA = (0.0, 0.3, 1.0)
BOFP_GRID = (
    PairShift((1, 1), (0.0, 0.0), (0.0, 0.0)),
    PairShift((1, 1), (0.1, 0.3), (0.05, 0.1)),
    PairShift((2, 1), (0.2, -0.1), (0.0, 0.2)),
    PairShift((1, 2), (0.7, 0.05), (0.1, 0.0)),
    PairShift((2, 2), (0.01, 0.02), (0.3, 0.3)),
)
PERRON_GRID = (
    PairShift((1, 1), (0.4, 1.1), (0.0, 0.0)),
    PairShift((1, 1), (0.0, 0.0), (0.0, 0.0)),
    PairShift((2, 1), (0.2, -0.1), (0.0, 0.2)),
    PairShift((1, 2), (0.05, 0.6), (0.1, 0.0)),
    PairShift((2, 2), (0.3, 0.31), (0.02, 0.04)),
)


def check_fe(q: int, ns: Sequence[int], per_D: bool = True) -> tuple[list[dict], bool]:
    """c*_{2g-i} = q^{g-i} c*_i for every D, from the full trace construction."""
    rows, ok = [], True
    for n in ns:
        E = ensemble_lpolys(q, n, "full")
        g = E.g
        good = np.ones(len(E), dtype=bool)
        if E.star.shape[1] != 2 * g + 1:
            good[:] = False
        for i in range(g):
            good &= E.star[:, 2 * g - i] == q ** (g - i) * E.star[:, i]
        ok &= bool(good.all())
        if per_D:
            for i in range(len(E)):
                rows.append({"q": q, "n": n, "D": format_poly(E.D(i)), "ok": bool(good[i])})
        else:
            rows.append({"q": q, "n": n, "count": len(E), "failures": int((~good).sum())})
    return rows, ok


def check_rh(q: int, ns: Sequence[int], tol: float = 1e-8) -> tuple[list[dict], bool]:
    rows, ok = [], True
    for n in ns:
        E = ensemble_lpolys(q, n, "auto")
        dev, count = rh_max_deviation(E.star, q) if E.g > 0 else (0.0, 0)
        rows.append({"q": q, "n": n, "count": len(E), "max_deviation": dev, "ok": dev <= tol})
        ok &= dev <= tol
    return rows, ok


def check_afe(q: int, ns: Sequence[int], s_list: Sequence[float] = (0.5, 0.6, 0.75, 0.9),
              tol: float = 1e-10) -> tuple[list[dict], bool]:
    rows, ok = [], True
    for n in ns:
        E = ensemble_lpolys(q, n, "auto")
        for s in s_list:
            err = afe_max_error(E, s)
            rows.append({"q": q, "n": n, "s": s, "max_rel_error": err, "ok": err <= tol})
            ok &= err <= tol
    return rows, ok


def check_pointcount(q: int, ns: Sequence[int], kmax: int = 3) -> tuple[list[dict], bool]:
    """N_k by counting points over F_{q^k} against N_k from the L-polynomial, every D."""
    rows, ok = [], True
    for n in ns:
        E = ensemble_lpolys(q, n, "auto")
        for i in range(len(E)):
            D = E.D(i)
            from_L = point_counts_from_star([int(x) for x in E.star[i]], q, kmax)
            direct = [point_count_direct(D, k) for k in range(1, kmax + 1)]
            good = direct == from_L
            ok &= good
            rows.append({"q": q, "n": n, "D": format_poly(D), "direct": direct, "from_L": from_L, "ok": good})
    return rows, ok


def check_charsum(q: int, dmax: int, extra: int = 4, direct_upto: int = 6) -> tuple[list[dict], bool]:
    """sum_{f in M_n} chi_D(f) = 0 for d(D) <= n <= d(D) + extra.

    Route one builds c_n from prime traces and Newton's identity; route two
    sums the Jacobi symbol over M_n directly for n = d(D) when d(D) <= direct_upto.
    """
    rows, ok = [], True
    for d in range(1, dmax + 1):
        ranks, C = coefficients_via_traces(q, d, d + extra)
        worst = int(np.abs(C[:, d:]).max())
        direct_worst = None
        if d <= direct_upto:
            direct_worst = max(abs(char_sum_Mn(D, d)) for D in enumerate_polys("H", q, d))
        good = worst == 0 and (direct_worst in (None, 0))
        ok &= good
        rows.append({"q": q, "d": d, "count": len(ranks), "n_range": f"{d}..{d + extra}",
                     "max_abs_traces": worst, "max_abs_direct": direct_worst, "ok": good})
    return rows, ok


def square_average_test_set(q: int) -> list[Poly]:
    """The monic degree-1 polynomials and the first seven monic quadratics, in rank order."""
    return list(enumerate_polys("M", q, 1)) + list(enumerate_polys("M", q, 2))[:7]


def check_square_average(q: int = 3, ns: Sequence[int] = (4, 6, 8), band: float = 3.0) -> tuple[list[dict], bool]:
    rows, ok = [], True
    for f in square_average_test_set(q):
        vals = []
        for n in ns:
            avg = average_square_char(q, n, f)
            vals.append(float(avg.scaled_err))
            rows.append({"q": q, "f": format_poly(f), "n": n, "empirical": float(avg.empirical),
                         "main": float(avg.main), "scaled_err": float(avg.scaled_err)})
        finite = all(math.isfinite(v) for v in vals)
        lo, hi = min(vals), max(vals)
        spread = hi / lo if lo > 0 else (1.0 if hi == 0 else math.inf)
        good = finite and spread <= band
        ok &= good
        rows.append({"q": q, "f": format_poly(f), "n": "all", "spread": spread, "ok": good})
    return rows, ok


def check_character_sum_bound(q: int, n: int, dmax: int = 4) -> tuple[list[dict], bool]:
    """|sum_D chi_D(l)| against the explicit bound q g^{k-1} (sum d(P_i)) / prod d(P_i) |l_1|^{1/2}
    for square-free non-square l of degree <= min(n, dmax); the ratio to sqrt|H_n| is recorded."""
    from .lfunc import genus
    g = genus(n)
    rows, ok = [], True
    for d in range(1, min(n, dmax) + 1):
        worst_ratio = 0.0
        worst_explicit = 0.0
        for l in enumerate_polys("H", q, d):
            r = polya_vinogradov_ratio(q, n, l)
            degs = [P.degree for P, _ in factor(r.l1).factors]
            explicit = q * g ** (len(degs) - 1) * sum(degs) / math.prod(degs) * r.l1.norm ** 0.5
            worst_ratio = max(worst_ratio, r.abs_sum / r.bound_base)
            worst_explicit = max(worst_explicit, r.abs_sum / explicit)
        good = worst_explicit <= 1.0
        ok &= good
        rows.append({"q": q, "n": n, "d": d, "max_ratio_sqrtH": worst_ratio,
                     "max_ratio_explicit": worst_explicit, "ok": good})
    return rows, ok


def check_log_bound(q: int = 5, ns: Sequence[int] = LOG_BOUND_N, Ns: Sequence[int] = tuple(range(2, 9)),
                  alphas: Sequence[float] = LOG_BOUND_ALPHA, thetas: Sequence[float] = LOG_BOUND_THETA,
                  C: float = 5.0) -> tuple[list[dict], bool]:
    rows, ok = [], True
    for n in ns:
        E = ensemble_lpolys(q, n, "auto")
        worst = -math.inf
        for N in Ns:
            for a in alphas:
                for t in thetas:
                    worst = max(worst, float(np.max(log_bound_constants(E, N, a, t))))
        good = worst <= C
        ok &= good
        rows.append({"q": q, "n": n, "count": len(E), "max_constant": worst, "ok": good})
    return rows, ok


def check_cosine_sums(bound: float = 2.0) -> tuple[list[dict], bool]:
    ns = (10, 100, 1000, 10000)
    thetas = np.logspace(-4, math.log10(3), 50)
    mx, table = cosine_grid(thetas, ns)
    rows = [{"n": n, "max_defect": float(table[:, j].max()), "argmax_theta": float(thetas[table[:, j].argmax()])}
            for j, n in enumerate(ns)]
    rows.append({"n": "all", "max_defect": mx, "ok": mx <= bound})
    return rows, mx <= bound


def check_prime_sum_moments(q: int = 3, n: int = 9, ls: Sequence[int] = (1, 2, 3), seeds: Sequence[int] = (0, 1, 2),
                  C: float = 4.0) -> tuple[list[dict], bool]:
    rows, ok = [], True
    for l in ls:
        for seed in seeds:
            r = prime_sum_moment(q, n, l, seed)
            good = r.lhs <= C * r.bound_base
            ok &= good
            rows.append({"q": q, "n": n, "l": l, "seed": seed, "y": r.y, "lhs": r.lhs,
                         "bound_base": r.bound_base, "ratio": r.ratio, "ok": good})
    return rows, ok


def check_zeta_bounds(q: int = 3, gs: Sequence[int] = (50, 100, 200, 400),
                  scaled: Sequence[float] = (0.0, 0.5, 1.0), fixed: Sequence[float] = (0.5, 1.0),
                  C: float = 10.0) -> tuple[list[dict], bool]:
    rows, ok = [], True
    for g in gs:
        for c in scaled:
            z = zeta_bound_check(q, g, c / g)
            rows.append({"q": q, "g": g, "theta": c / g, "branch": z.branch, "max": z.max_on_contour,
                         "comparator": z.comparator, "constant": z.constant})
            ok &= z.constant <= C
        for t in fixed:
            z = zeta_bound_check(q, g, t)
            s = shifted_circle_check(q, g, t)
            rows.append({"q": q, "g": g, "theta": t, "branch": z.branch, "max": z.max_on_contour,
                         "comparator": z.comparator, "constant": z.constant, "shifted_constant": s.constant})
            ok &= z.constant <= C and s.constant <= C
    return rows, ok


def check_bofp(q: int = 3, dmax: int = 4, grid: Sequence[PairShift] = BOFP_GRID,
               tol: float = 1e-12) -> tuple[list[dict], bool]:
    rows, ok = [], True
    for cfg in grid:
        worst = 0.0
        count = 0
        for d in range(1, dmax + 1):
            closed = b_of_P_closed(cfg, q, d)
            for P in enumerate_polys("P", q, d):
                worst = max(worst, abs(b_of_l(P, cfg) - closed))
                count += 1
        good = worst <= tol
        ok &= good
        rows.append({"k": list(cfg.k), "theta": list(cfg.theta), "alpha": list(cfg.alpha), "primes": count,
                     "max_diff": worst, "ok": good})
    return rows, ok


def check_perron(q: int = 3, N_trunc: int = 6, grid: Sequence[PairShift] = PERRON_GRID,
                 tol: float = 1e-10) -> tuple[list[dict], bool]:
    rows, ok = [], True
    for cfg in grid:
        for N in range(N_trunc + 1):
            r = perron_check(cfg, q, N)
            good = r.diff <= tol * (1 + abs(r.direct))
            ok &= good
            rows.append({"k": list(cfg.k), "theta": list(cfg.theta), "alpha": list(cfg.alpha), "N": N,
                         "direct_re": r.direct.real, "direct_im": r.direct.imag, "diff": r.diff, "ok": good})
    return rows, ok


def check_stirling(kmax: int = 8, nmax: int = 6) -> tuple[list[dict], bool]:
    """s^{(k)}_{k-i} <= (k+1)! and the coefficients of F_n(x) against a direct polynomial product."""
    rows, ok = [], True
    for k in range(kmax + 1):
        worst = max(stirling_first(k, i) for i in range(k + 1))
        good = worst <= math.factorial(k + 1)
        ok &= good
        rows.append({"kind": "bound", "k": k, "max": worst, "limit": math.factorial(k + 1), "ok": good})
    for n in range(nmax + 1):
        poly = [1]
        for j in range(n):  # multiply by (x + j)
            nxt = [0] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i] += j * c
                nxt[i + 1] += c
            poly = nxt
        good = poly == rising_factorial_coeffs(n)
        ok &= good
        rows.append({"kind": "rising", "k": n, "coeffs": poly, "ok": good})
    return rows, ok


# --- option adapters -------------------------------------------------------------------------

def _ns(opts, default):
    from .cli import _n_list
    if opts.get("n") is None and opts.get("nmax") is None:
        return list(default)
    return _n_list(opts)


def _q(opts, default):
    from .cli import _one_int
    return _one_int(opts, "q", default)


SUITES = {
    "fe": lambda o: check_fe(_q(o, 3), _ns(o, range(2, 9))),
    "rh": lambda o: check_rh(_q(o, 3), _ns(o, range(2, 9))),
    "afe": lambda o: check_afe(_q(o, 5), _ns(o, range(2, 9)),
                               [float(x) for x in o["s"].split(",")] if o.get("s") else (0.5, 0.6, 0.75, 0.9)),
    "pointcount": lambda o: check_pointcount(_q(o, 3), _ns(o, (3, 4, 5)), int(o.get("kmax") or 3)),
    "charsum": lambda o: check_charsum(_q(o, 3), int(o.get("nmax") or 6)),
    "lemma32": lambda o: check_square_average(_q(o, 3), _ns(o, (4, 6, 8))),
    "lemma33": lambda o: check_character_sum_bound(_q(o, 3), _ns(o, (6,))[0]),
    "lemma34": lambda o: check_log_bound(_q(o, 5), _ns(o, LOG_BOUND_N)),
    "lemma35": lambda o: check_cosine_sums(),
    "lemma36": lambda o: check_prime_sum_moments(_q(o, 3), _ns(o, (9,))[0]),
    "lemma37": lambda o: check_zeta_bounds(_q(o, 3)),
    "bofp": lambda o: check_bofp(_q(o, 3)),
    "perron": lambda o: check_perron(_q(o, 3), int(o.get("nmax") or 6)),
    "stirling": lambda o: check_stirling(),
}
