"""Compiled inner loops for exhaustive character sums.

Elements of F_{q^d} are handled in the log domain with respect to a fixed
primitive element gamma: an element is its discrete log in [0, M) with
M = q^d - 1, and -1 stands for zero.  Addition uses the Zech table
zech[j] = log(1 + gamma^j).  The quadratic character of gamma^j is (-1)^j.

For monic D of degree n and a prime P of degree d with root alpha in
F_{q^d}, (D/P) is the quadratic character of D(alpha).  D is split as
lo(alpha) + alpha^h * hi(alpha) so each (D, P) pair costs one Zech lookup.
"""

from __future__ import annotations

import os

# allow up to 8 worker threads even on small machines so thread-count runs are comparable
os.environ.setdefault("NUMBA_NUM_THREADS", str(max(8, os.cpu_count() or 1)))

import numba  # noqa: E402
import numpy as np  # noqa: E402
from numba import njit, prange  # noqa: E402

# the bundled TBB is too old; the workqueue layer is always available
numba.config.THREADING_LAYER = "workqueue"


@njit(cache=True)
def powers_of(g_cols, add, mul, q, k, M):
    """Codes of g^0 .. g^{M-1} given multiplication-by-g as columns; empty if g is not primitive."""
    out = np.empty(M, dtype=np.int64)
    v = np.zeros(k, dtype=np.int64)
    w = np.zeros(k, dtype=np.int64)
    v[0] = 1
    for j in range(M):
        code = 0
        pw = 1
        for i in range(k):
            code += v[i] * pw
            pw *= q
        if j > 0 and code == 1:
            return out[:0]
        out[j] = code
        for r in range(k):
            w[r] = 0
        for i in range(k):
            a = v[i]
            if a != 0:
                for r in range(k):
                    w[r] = add[w[r], mul[a, g_cols[i, r]]]
        for r in range(k):
            v[r] = w[r]
    return out


@njit(cache=True)
def zech_from_exp(exp, add, q, M):
    """zech[j] = log(1 + gamma^j) or -1; only digit 0 changes when adding 1."""
    log = np.full(M + 1, -1, dtype=np.int64)
    for j in range(M):
        log[exp[j]] = j
    zech = np.empty(M, dtype=np.int64)
    for j in range(M):
        c = exp[j]
        d0 = c % q
        zech[j] = log[c - d0 + add[d0, 1]]
    return log, zech


@njit(cache=True, inline="always")
def zadd(a, b, zech, M):
    if a < 0:
        return b
    if b < 0:
        return a
    d = b - a
    if d < 0:
        d += M
    z = zech[d]
    if z < 0:
        return -1
    r = a + z
    if r >= M:
        r -= M
    return r


@njit(cache=True, inline="always")
def zshift(a, s, M):
    if a < 0:
        return -1
    r = a + s
    if r >= M:
        r -= M
    return r


@njit(cache=True)
def orbit_representatives(q, d, M):
    """Minimal logs j whose Frobenius orbit j -> q j mod M has exact size d.

    Each orbit is the set of roots of one monic irreducible of degree d.
    """
    seen = np.zeros(M, dtype=np.uint8)
    reps = []
    for j in range(M):
        if seen[j]:
            continue
        size = 0
        x = j
        while True:
            seen[x] = 1
            size += 1
            x = (x * q) % M
            if x == j:
                break
        if size == d:
            reps.append(j)
    out = np.empty(len(reps), dtype=np.int64)
    for i in range(len(reps)):
        out[i] = reps[i]
    return out


@njit(cache=True)
def horner_logs(ndig, q, root, base_log, zech, M, leading_one):
    """log of sum_i a_i alpha^i (plus alpha^ndig if leading_one) for every digit rank."""
    prev = np.empty(1, dtype=np.int64)
    prev[0] = 0 if leading_one else -1
    size = 1
    for _ in range(ndig):
        cur = np.empty(size * q, dtype=np.int64)
        for rr in range(size):
            t = zshift(prev[rr], root, M)
            for a in range(q):
                cur[a + q * rr] = zadd(base_log[a], t, zech, M)
        prev = cur
        size *= q
    return prev


ZSHIFT = 32  # packed accumulator: trace + (zero count << ZSHIFT)


@njit(cache=True)
def zech_chi(zech):
    """chi(1 + gamma^j) in {-1, 0, 1}."""
    out = np.empty(zech.shape[0], dtype=np.int64)
    for j in range(zech.shape[0]):
        z = zech[j]
        out[j] = 0 if z < 0 else (1 - 2 * (z & 1))
    return out


@njit(cache=True, parallel=True)
def accumulate_degree(q, n, h, roots, base_log, zech, M, acc):
    """acc[rank(D)] += (D/P) + ([P | D] << ZSHIFT) for every root and every monic D of degree n.

    M is even, so the parity of a log is unchanged by reduction mod M and
    chi(x + y) = chi(x) * chi(1 + y/x).
    """
    Qlo = q ** h
    Qhi = q ** (n - h)
    cz = zech_chi(zech)
    one = np.int64(1) << ZSHIFT
    for pi in range(roots.shape[0]):
        root = roots[pi]
        lo = horner_logs(h, q, root, base_log, zech, M, False)
        hi = horner_logs(n - h, q, root, base_log, zech, M, True)
        sgn = np.empty(Qlo, dtype=np.int64)
        for rl in range(Qlo):
            sgn[rl] = 1 - 2 * (lo[rl] & 1)
        sh = (root * h) % M
        for rh in prange(Qhi):
            b = zshift(hi[rh], sh, M)
            off = rh * Qlo
            if b < 0:
                for rl in range(Qlo):
                    if lo[rl] < 0:
                        acc[off + rl] += one
                    else:
                        acc[off + rl] += sgn[rl]
                continue
            cb = 1 - 2 * (b & 1)
            for rl in range(Qlo):
                a = lo[rl]
                if a < 0:
                    acc[off + rl] += cb
                else:
                    d = b - a
                    if d < 0:
                        d += M
                    c = cz[d]
                    acc[off + rl] += sgn[rl] * c + (1 - c * c) * one


@njit(cache=True, parallel=True)
def chi_matrix(q, n, h, roots, base_log, zech, M, ranks, out, col0):
    """out[i, col0 + j] = (D_i / P_j) for D given by M_n ranks."""
    Qlo = q ** h
    for pi in range(roots.shape[0]):
        root = roots[pi]
        lo = horner_logs(h, q, root, base_log, zech, M, False)
        hi = horner_logs(n - h, q, root, base_log, zech, M, True)
        sh = (root * h) % M
        for i in prange(ranks.shape[0]):
            r = ranks[i]
            v = zadd(lo[r % Qlo], zshift(hi[r // Qlo], sh, M), zech, M)
            if v < 0:
                out[i, col0 + pi] = 0
            elif v & 1:
                out[i, col0 + pi] = -1
            else:
                out[i, col0 + pi] = 1


@njit(cache=True, parallel=True)
def accumulate_list(coeffs, roots, base_log, zech, M, T, Z):
    """Same as accumulate_degree for an explicit list of monic D (rows of codes, ascending)."""
    N, L = coeffs.shape
    for i in prange(N):
        t = 0
        z = 0
        for pi in range(roots.shape[0]):
            root = roots[pi]
            acc = 0  # log of the leading 1
            for j in range(L - 2, -1, -1):
                acc = zadd(base_log[coeffs[i, j]], zshift(acc, root, M), zech, M)
            if acc < 0:
                z += 1
            elif acc & 1:
                t -= 1
            else:
                t += 1
        T[i] += t
        Z[i] += z


@njit(cache=True)
def _poly_rem(a, la, b, lb, sub, mul, inv):
    """In-place remainder of a (length la) by b (length lb, nonzero lead); returns new length."""
    ib = inv[b[lb - 1]]
    while la >= lb:
        c = mul[a[la - 1], ib]
        s = la - lb
        for i in range(lb):
            a[s + i] = sub[a[s + i], mul[c, b[i]]]
        while la > 0 and a[la - 1] == 0:
            la -= 1
    return la


@njit(cache=True)
def _codes_is_squarefree(codes, n, sub, mul, inv, fromint):
    """gcd(D, D') == 1 for monic D with ascending codes (length n + 1)."""
    a = np.empty(n + 1, dtype=np.int64)
    b = np.empty(n + 1, dtype=np.int64)
    for i in range(n + 1):
        a[i] = codes[i]
    for i in range(n):
        b[i] = mul[fromint[i + 1], a[i + 1]]
    la = n + 1
    lb = n
    while lb > 0 and b[lb - 1] == 0:
        lb -= 1
    if lb == 0:
        return n == 0
    while lb > 0:
        la = _poly_rem(a, la, b, lb, sub, mul, inv)
        a, b = b, a
        la, lb = lb, la
    return la == 1


@njit(cache=True)
def _rank_is_squarefree(r, q, n, sub, mul, inv, fromint):
    codes = np.empty(n + 1, dtype=np.int64)
    x = r
    for i in range(n):
        codes[i] = x % q
        x //= q
    codes[n] = 1
    return _codes_is_squarefree(codes, n, sub, mul, inv, fromint)


@njit(cache=True, parallel=True)
def squarefree_rows(rows, sub, mul, inv, fromint):
    N = rows.shape[0]
    n = rows.shape[1] - 1
    out = np.zeros(N, dtype=np.bool_)
    for i in prange(N):
        out[i] = _codes_is_squarefree(rows[i], n, sub, mul, inv, fromint)
    return out


@njit(cache=True, parallel=True)
def squarefree_mask(q, n, sub, mul, inv, fromint):
    """mask[rank] = gcd(D, D') == 1 for every monic D of degree n."""
    total = q ** n
    mask = np.zeros(total, dtype=np.bool_)
    for r in prange(total):
        mask[r] = _rank_is_squarefree(r, q, n, sub, mul, inv, fromint)
    return mask


@njit(cache=True, parallel=True)
def newton_from_traces(S, nc):
    """Coefficients c_0..c_{nc-1} of exp(sum_k S[:, k] u^k / k), exact in int64."""
    N, K = S.shape
    C = np.zeros((N, nc), dtype=np.int64)
    for i in prange(N):
        C[i, 0] = 1
        for k in range(1, nc):
            acc = 0
            for j in range(1, k + 1):
                if j < K:
                    acc += S[i, j] * C[i, k - j]
            C[i, k] = acc // k
    return C
