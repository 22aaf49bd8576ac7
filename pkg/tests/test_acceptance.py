"""Acceptance criteria 1-16, each at its stated tolerance.

Every test records a PASS/FAIL line that is printed at the end of the run.
Criteria 9 and 10 do not hold at desk scale; they run at full tolerance and
are marked as expected failures.
"""

import math
import subprocess
import sys

import numpy as np
import pytest

from hyperlf.analytic import residue_main_term
from hyperlf.lfunc import genus
from hyperlf import suites
from hyperlf.moments import ShiftConfig, lower_bound_pipeline, shifted_moment, tail_histogram

def test_c01_functional_equation(criterion):
    counts, ok = 0, True
    for q in (3, 5):
        rows, good = suites.check_fe(q, range(2, 9), per_D=False)
        ok &= good and all(r["failures"] == 0 for r in rows)
        counts += sum(r["count"] for r in rows)
    assert criterion(1, ok, f"{counts} curves, q in (3, 5), 2 <= n <= 8")


def test_c02_riemann_hypothesis(criterion):
    worst, ok = 0.0, True
    for q in (3, 5):
        rows, good = suites.check_rh(q, range(2, 9), tol=1e-8)
        ok &= good
        worst = max([worst] + [r["max_deviation"] for r in rows])
    assert criterion(2, ok, f"max ||u| - q^-1/2| = {worst:.2e}")


def test_c03_point_counts(criterion):
    rows, ok = suites.check_pointcount(3, (3, 4, 5), kmax=3)
    assert criterion(3, ok, f"{len(rows)} curves, k <= 3, exact")


def test_c04_character_sum_vanishing(criterion):
    rows, ok = suites.check_charsum(3, 6, extra=4, direct_upto=6)
    assert criterion(4, ok, f"d(D) <= 6, n in [d, d + 4], {sum(r['count'] for r in rows)} D")


def test_c05_approximate_functional_equation(criterion):
    rows, ok = suites.check_afe(5, range(1, 9), (0.5, 0.6, 0.75, 0.9), tol=1e-10)
    worst = max(r["max_rel_error"] for r in rows)
    assert criterion(5, ok, f"max relative error {worst:.2e}")


def test_c06_square_average(criterion):
    rows, ok = suites.check_square_average(3, (4, 6, 8), band=3.0)
    spreads = [r["spread"] for r in rows if r["n"] == "all"]
    assert len(spreads) == 10
    assert criterion(6, ok, f"max spread over n = {max(spreads):.3f} (limit 3)")


def test_c07_b_of_prime(criterion):
    rows, ok = suites.check_bofp(3, 4, tol=1e-12)
    assert len(rows) == 5
    worst = max(r["max_diff"] for r in rows)
    assert criterion(7, ok, f"max |exhaustive - closed| = {worst:.2e}")


def test_c08_perron(criterion):
    rows, ok = suites.check_perron(3, 6, tol=1e-10)
    worst = max(r["diff"] / (1 + math.hypot(r["direct_re"], r["direct_im"])) for r in rows)
    assert criterion(8, ok, f"max relative diff {worst:.2e} over 5 configs, N <= 6")


RESIDUE_CONFIGS = [(0.3, 0.7), (0.5, 1.0), (1.0, -0.4)]  # g * theta_j


@pytest.mark.xfail(strict=True, reason="correction sums exceed half the leading term for g <= 200")
def test_c09_residue_main_term(criterion):
    ok = True
    worst = []
    for c in RESIDUE_CONFIGS:
        ratios = []
        for g in (50, 100, 200, 400):
            r = residue_main_term((1, 1), (c[0] / g, c[1] / g), g)
            assert all(g * abs(t) <= 1 for t in (c[0] / g, c[1] / g))
            ratios.append(max(r.ratios))
        ok &= all(x < 0.5 for x in ratios) and all(b < a for a, b in zip(ratios, ratios[1:]))
        worst.append(ratios)
    detail = "max correction/leading at g = 50..400: " + ", ".join(f"{x:.3f}" for x in worst[0])
    assert criterion(9, ok, detail)


@pytest.mark.xfail(strict=True, reason="growth at g = 3..6 is far steeper than g^10 times a bounded factor")
def test_c10_moment_growth(criterion):
    vals = []
    for n in (7, 9, 11, 13):
        g = genus(n)
        rep = shifted_moment(ShiftConfig((1, 1), (1 / g, 2 / g)), 3, n)
        vals.append(rep.mean / g ** 10)
    spread = max(vals) / min(vals)
    assert criterion(10, spread <= 10, f"max/min of mean/g^10 = {spread:.2f} (limit 10)")


def test_c11_cauchy_schwarz(criterion):
    ok = True
    worst_fraction = math.inf
    for n in range(5, 10):
        g = genus(n)
        for c in ((0.3, 0.7), (1.0, 0.5)):
            lb = lower_bound_pipeline(ShiftConfig((1, 1), (c[0] / g, c[1] / g)), 3, n)
            ok &= lb.S1 ** 2 <= lb.S2 * lb.full * (1 + 1e-9)
            ok &= abs(lb.S2_form - lb.S2) <= 1e-9 * lb.S2
            frac = lb.cauchy_lower / lb.full
            ok &= frac >= 0.1
            worst_fraction = min(worst_fraction, frac)
    assert criterion(11, ok, f"min lower-bound fraction {worst_fraction:.3f} (limit 0.1)")


def test_c12_log_bound(criterion):
    rows, ok = suites.check_log_bound(5, range(2, 9), C=5.0)
    worst = max(r["max_constant"] for r in rows)
    assert criterion(12, ok, f"max additive constant {worst:.3f} (limit 5)")


def test_c13_cosine_sums(criterion):
    rows, ok = suites.check_cosine_sums(2.0)
    assert criterion(13, ok, f"max defect {rows[-1]['max_defect']:.3f} (limit 2)")


def test_c14_prime_sum_moments(criterion):
    rows, ok = suites.check_prime_sum_moments(3, 9, (1, 2, 3), (0, 1, 2), C=4.0)
    assert len(rows) == 9
    worst = max(r["ratio"] for r in rows)
    assert criterion(14, ok, f"max LHS/base {worst:.3f} (limit 4)")


TAIL_GRID = np.concatenate([[-1e6], np.arange(-10, 10.01, 0.25)])


def test_c15_tail_decay(criterion):
    g = genus(11)
    h = tail_histogram(ShiftConfig((1,), (1 / g,)), 3, 11, TAIL_GRID)
    assert h.counts[0] == h.size - h.zero_count
    frac = h.counts / h.size
    decreasing = bool(np.all(np.diff(frac) <= 0))
    slope, bins = h.slope_fit()
    ok = decreasing and 0.3 <= slope <= 3
    assert criterion(15, ok, f"slope {slope:.3f} over {bins} central bins (range [0.3, 3])")


def _cli_bytes(args, threads):
    cmd = [sys.executable, "-m", "hyperlf", *args, "--threads", str(threads)]
    res = subprocess.run(cmd, capture_output=True, check=False)
    assert res.returncode in (0, 2), res.stderr.decode()
    return res.stdout


def test_c16_thread_determinism(criterion):
    runs = {
        10: ["moments", "--q", "3", "--n", "7,9,11,13", "--k", "1,1", "--theta-g", "1,2"],
        15: ["moments", "--q", "3", "--n", "11", "--k", "1", "--theta-g", "1", "--tail=-10:10:0.25"],
    }
    ok = True
    for args in runs.values():
        outs = [_cli_bytes(args, t) for t in (1, 4, 8)]
        ok &= outs[0] == outs[1] == outs[2] and len(outs[0]) > 0
    assert criterion(16, ok, "criteria 10 and 15 reports byte-identical for 1, 4, 8 threads")
