import math

import numpy as np
import pytest

from hyperlf.fqarith import Poly, count_squarefree, enumerate_polys
from hyperlf.charsum import jacobi
from hyperlf.lfunc import a_alpha, build_lpoly, ensemble_lpolys
from hyperlf.moments import (
    DegenerateConfig,
    ShiftConfig,
    build_af,
    choose_N0,
    cosine_defect,
    derivative_moment,
    lower_bound_pipeline,
    mu_sigma,
    prime_sum_moment,
    prime_split_decomposition,
    prime_split_weight,
    shifted_moment,
    tail_histogram,
    tau_k,
    tau_k_brute,
    truncated_values,
)


def test_mu_single_shift_at_pi():
    pm = mu_sigma(ShiftConfig((1,), (math.pi,)), 100)
    assert pm.mu == pytest.approx(math.log(1 / (2 * math.pi)))
    assert pm.mu == pytest.approx(-1.8379, abs=1e-4)


def test_mu_sigma_pair():
    pm = mu_sigma(ShiftConfig((1, 2), (0.5, 0.25)), 10)
    assert pm.mu == pytest.approx(2 * math.log(2))
    sigma = 2 * 5 * math.log(10) + 2 * 4 * math.log(2) + 8 * (math.log(4) + math.log(4 / 3))
    assert pm.sigma == pytest.approx(sigma)


def test_mu_caps_at_g():
    g = 100
    pm = mu_sigma(ShiftConfig((1, 1), (1 / (2 * g), 1 / (2 * g) + 1e-9)), g)
    assert pm.F == pytest.approx((math.log(g), math.log(g)), rel=1e-6)
    # exactly at the tie 1/(2 theta) = g both branches agree
    assert mu_sigma(ShiftConfig((1,), (1 / (2 * g),)), g).mu == pytest.approx(math.log(g))


def test_degenerate_pair():
    with pytest.raises(DegenerateConfig):
        mu_sigma(ShiftConfig((1, 1), (0.3, 0.3)), 10)
    with pytest.raises(DegenerateConfig):
        mu_sigma(ShiftConfig((1, 1), (0.3, -0.3)), 10)


def test_shift_config_validation():
    with pytest.raises(ValueError):
        ShiftConfig((1,), (4.0,))
    with pytest.raises(ValueError):
        ShiftConfig((1,), (0.1,), (0.5,))
    with pytest.raises(ValueError):
        ShiftConfig((0,), (0.1,))
    with pytest.raises(ValueError):
        ShiftConfig((1,), (0.1,), (0.2,)).check_alpha(100)


def test_tau():
    P = Poly.from_ints(3, [1, 1])
    one = Poly.from_ints(3, [1])
    assert tau_k(2, P * P) == 3
    assert tau_k(5, one) == 1
    assert tau_k(3, P) == 3
    for f in list(enumerate_polys("M", 3, 3))[::3]:
        for k in (2, 3):
            assert tau_k(k, f) == tau_k_brute(k, f)


def test_af_examples():
    cfg = ShiftConfig((1, 2), (0.4, 1.3))
    s = build_af(cfg, 3, 1.0)
    assert s[Poly.from_ints(3, [1])] == 1
    for P in enumerate_polys("P", 3, 1):
        assert s[P] == pytest.approx(np.exp(0.4j) + 2 * np.exp(1.3j))


@pytest.mark.parametrize("k", [(1, 1), (1, 2), (2, 2)])
def test_af_at_zero_shift_is_tau(k):
    cfg = ShiftConfig(k, (0.0, 0.0))
    K = sum(k)
    s = build_af(cfg, 3, 4 / K)
    assert s.T == 4
    for f, a in s.coeffs.items():
        assert a == pytest.approx(tau_k(K, f), abs=1e-12)


def test_moment_small_exhaustive():
    # mean of |L(q^{-1/2})|^2 over H_3, q = 3, from directly built L-polynomials
    u = 3 ** -0.5
    direct = [abs(build_lpoly(D)(u)) ** 2 for D in enumerate_polys("H", 3, 3)]
    rep = shifted_moment(ShiftConfig((1,), (1e-12,)), 3, 3)
    assert rep.count == 18
    assert rep.mean == pytest.approx(math.fsum(direct) / 18, rel=1e-12)
    assert rep.mean == pytest.approx(44 / 9, rel=1e-9)


def test_moment_degree_one():
    rep = shifted_moment(ShiftConfig((2,), (0.7,)), 3, 1)
    assert rep.S == 3


def test_conjugation_symmetry():
    cfg = ShiftConfig((1, 2), (0.4, 1.1), (0.0, 0.05))
    a = shifted_moment(cfg, 3, 6)
    b = shifted_moment(cfg.conjugate(), 3, 6)
    assert a.S == pytest.approx(b.S, rel=1e-12)


def test_signed_moment_residue():
    rep = shifted_moment(ShiftConfig((1,), (0.0,)), 3, 5, signed=True)
    assert rep.imag_residue <= 1e-12 * abs(rep.S)


def test_sample_mode_is_seeded():
    cfg = ShiftConfig((1,), (0.2,))
    a = shifted_moment(cfg, 3, 8, mode="sample", samples=200, seed=11)
    b = shifted_moment(cfg, 3, 8, mode="sample", samples=200, seed=11)
    assert a.S == b.S and a.count == 200
    with pytest.raises(ValueError):
        shifted_moment(cfg, 3, 8, mode="sample", samples=200)


def test_record_timing_field():
    rep = shifted_moment(ShiftConfig((1,), (0.2,)), 3, 4)
    assert "wall_time_ms" not in rep.record()
    assert rep.record(timing=True)["wall_time_ms"] >= 0


def test_lower_bound_small_X_is_plain_cauchy_schwarz():
    cfg = ShiftConfig((1, 1), (0.3, 0.7))
    lb = lower_bound_pipeline(cfg, 3, 5, X=0.1)
    size = count_squarefree(3, 5)
    assert lb.T == 0
    assert lb.S2 == pytest.approx(size)
    assert lb.cauchy_lower <= lb.full


def test_lower_bound_routes_agree():
    lb = lower_bound_pipeline(ShiftConfig((1, 1), (0.3, 0.7)), 3, 5)
    assert lb.S2_form == pytest.approx(lb.S2, rel=1e-9)
    assert lb.S1 ** 2 <= lb.S2 * lb.full * (1 + 1e-9)


def test_truncated_values_match_direct_sum():
    cfg = ShiftConfig((1, 1), (0.3, 0.7))
    E = ensemble_lpolys(3, 5)
    s = build_af(cfg, 3, 1.0)
    got = truncated_values(E, cfg, s.T)
    for i in range(0, len(E), 40):
        D = E.D(i)
        want = sum(a * (jacobi(D, f) if f.degree else 1) * f.norm ** -0.5 for f, a in s.coeffs.items())
        assert got[i] == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_tail_histogram_monotone():
    g = 3
    cfg = ShiftConfig((1,), (1 / g,))
    grid = np.linspace(-1e6, 10, 50)
    h = tail_histogram(cfg, 3, 7, grid)
    assert h.counts[0] == h.size - h.zero_count
    assert np.all(np.diff(h.counts) <= 0)


def test_prime_split_weights():
    cfg = ShiftConfig((1,), (math.pi,))
    assert prime_split_weight(cfg, 3, 1) == pytest.approx(-a_alpha(1, 0.0, 3))
    assert choose_N0(10, 10, 3) == 5
    s5 = prime_split_decomposition(ShiftConfig((1,), (0.2,)), 3, 9, N=4)
    assert s5.N0 == 3
    assert np.all(np.isfinite(s5.S1))


def test_prime_sum_moment_seeded():
    a = prime_sum_moment(3, 6, 1, seed=3)
    b = prime_sum_moment(3, 6, 1, seed=3)
    assert a == b and a.y == 3


def test_cosine_defect():
    assert cosine_defect(1.0, 1) == pytest.approx(math.cos(1.0))
    with pytest.raises(ValueError):
        cosine_defect(0.0, 10)


def test_derivative_moment():
    assert derivative_moment(3, 1, 2, 1) == (0.0, 0.0)
    val, pred = derivative_moment(3, 7, 2, 1)
    E = ensemble_lpolys(3, 7)
    u = 3 ** -0.5
    want = math.fsum(abs(sum(i * c * u ** (i - 1) for i, c in enumerate(E.lpoly(j).coeffs))) ** 2
                     for j in range(len(E))) / len(E)
    assert val == pytest.approx(want, rel=1e-12)
    assert pred == 3.0 ** 5
