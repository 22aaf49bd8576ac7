"""Exact arithmetic in F_q, its extensions F_{q^k}, and the ring F_q[t].

Elements of F_q (q = p^r, p odd) are encoded as integer codes in [0, q).
For r = 1 the code is the residue itself; for r > 1 the code packs the
F_p-vector (a_0, ..., a_{r-1}) of a_0 + a_1 x + ... modulo a fixed
irreducible polynomial as a_0 + a_1 p + ... + a_{r-1} p^{r-1}.

Polynomials store ascending coefficient codes with no trailing zeros.
Monic polynomials of degree n are ranked by rank(f) = sum_{i<n} a_i q^i,
which is the enumeration order of every ensemble in this module.
"""

from __future__ import annotations

import functools
import math
from typing import Iterator, NamedTuple, Sequence

import numpy as np

ZERO_DEGREE = -1  # sentinel degree of the zero polynomial


def _factor_prime_power(q: int) -> tuple[int, int]:
    if q < 3:
        raise ValueError(f"q must be an odd prime power, got {q}")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    r, m = 0, q
    while m % p == 0:
        m //= p
        r += 1
    if m != 1 or p == 2:
        raise ValueError(f"q must be an odd prime power, got {q}")
    return p, r


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


# --- bootstrap arithmetic over F_p, used only to build F_q tables -----------

def _fp_polymod(a: list[int], m: list[int], p: int) -> list[int]:
    a = list(a)
    inv = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        c = a[-1] * inv % p
        shift = len(a) - len(m)
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def _fp_irreducible(m: list[int], p: int) -> bool:
    deg = len(m) - 1
    for d in range(1, deg // 2 + 1):
        for code in range(p ** d):
            cand = [(code // p ** i) % p for i in range(d)] + [1]
            if not _fp_polymod(m, cand, p):
                return False
    return True


class FieldSpec:
    """The finite field F_q with q = p^r odd, backed by lookup tables.

    Instances are cached per q by :func:`field`; compare by identity.
    """

    def __init__(self, p: int, r: int = 1, modulus: Sequence[int] = ()):
        if p % 2 == 0 or not _is_prime(p):
            raise ValueError(f"p must be an odd prime, got {p}")
        if r < 1:
            raise ValueError("extension degree r must be >= 1")
        self.p = p
        self.r = r
        self.q = p ** r
        self.modulus = tuple(modulus)
        if r > 1:
            m = list(self.modulus)
            if len(m) != r + 1 or m[-1] != 1 or not _fp_irreducible(m, p):
                raise ValueError("modulus must be monic irreducible of degree r over F_p")
        q = self.q
        digits = [[(c // p ** i) % p for i in range(r)] for c in range(q)]
        pw = [p ** i for i in range(r)]

        def enc(v):
            return sum(x * w for x, w in zip(v, pw))

        self.add_t = [[enc([(x + y) % p for x, y in zip(digits[a], digits[b])]) for b in range(q)]
                      for a in range(q)]
        self.neg_t = [enc([(-x) % p for x in digits[a]]) for a in range(q)]
        mul = [[0] * q for _ in range(q)]
        for a in range(q):
            for b in range(a, q):
                prod = [0] * (2 * r - 1)
                for i, x in enumerate(digits[a]):
                    if x:
                        for j, y in enumerate(digits[b]):
                            prod[i + j] = (prod[i + j] + x * y) % p
                if r > 1:
                    prod = _fp_polymod(prod, list(self.modulus), p)
                prod = (list(prod) + [0] * r)[:r]
                mul[a][b] = mul[b][a] = enc(prod)
        self.mul_t = mul
        self.inv_t = [0] * q
        for a in range(1, q):
            self.inv_t[a] = next(b for b in range(1, q) if mul[a][b] == 1)
        squares = {mul[a][a] for a in range(1, q)}
        # quadratic character of F_q
        self.chi_t = [0] + [1 if a in squares else -1 for a in range(1, q)]
        self.sub_t = [[self.add_t[a][self.neg_t[b]] for b in range(q)] for a in range(q)]

    def __repr__(self) -> str:
        return f"GF({self.q})"

    def __reduce__(self):
        return field, (self.q,)

    # scalar helpers
    def add(self, a: int, b: int) -> int:
        return self.add_t[a][b]

    def sub(self, a: int, b: int) -> int:
        return self.sub_t[a][b]

    def mul(self, a: int, b: int) -> int:
        return self.mul_t[a][b]

    def neg(self, a: int) -> int:
        return self.neg_t[a]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return self.inv_t[a]

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> F_p -> F_q."""
        return n % self.p

    def format_elem(self, a: int) -> str:
        if self.r == 1:
            return str(a)
        return "/".join(str((a // self.p ** i) % self.p) for i in range(self.r))

    def parse_elem(self, text: str) -> int:
        parts = text.strip().split("/")
        if len(parts) != self.r:
            raise ValueError(f"expected {self.r} slash-separated F_{self.p} digits, got {text!r}")
        vals = [int(x) for x in parts]
        if any(not 0 <= v < self.p for v in vals):
            raise ValueError(f"digit out of range in {text!r}")
        return sum(v * self.p ** i for i, v in enumerate(vals))

    @functools.cached_property
    def add_array(self) -> np.ndarray:
        return np.array(self.add_t, dtype=np.int64)

    @functools.cached_property
    def mul_array(self) -> np.ndarray:
        return np.array(self.mul_t, dtype=np.int64)


@functools.lru_cache(maxsize=None)
def field(q: int) -> FieldSpec:
    """Return the cached F_q; for q = p^r the modulus is the smallest monic irreducible."""
    p, r = _factor_prime_power(q)
    if r == 1:
        return FieldSpec(p)
    for code in range(p ** r):
        m = [(code // p ** i) % p for i in range(r)] + [1]
        if _fp_irreducible(m, p):
            return FieldSpec(p, r, m)
    raise AssertionError("no irreducible modulus found")  # pragma: no cover


class FieldMismatch(ValueError):
    pass


class Poly:
    """Immutable polynomial over F_q, ascending coefficient codes."""

    __slots__ = ("F", "coeffs", "_hash")

    def __init__(self, F: FieldSpec, coeffs: Sequence[int] = ()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        for a in c:
            if not 0 <= a < F.q:
                raise ValueError(f"coefficient code {a} outside [0, {F.q})")
        self.F = F
        self.coeffs = tuple(c)
        self._hash = None

    # constructors
    @classmethod
    def from_ints(cls, q: int, coeffs: Sequence[int]) -> "Poly":
        F = field(q)
        return cls(F, [F.from_int(a) for a in coeffs])

    @classmethod
    def monomial(cls, F: FieldSpec, n: int, c: int = 1) -> "Poly":
        return cls(F, [0] * n + [c])

    @classmethod
    def one(cls, F: FieldSpec) -> "Poly":
        return cls(F, [1])

    @classmethod
    def from_rank(cls, F: FieldSpec, n: int, rank: int) -> "Poly":
        q = F.q
        c = []
        for _ in range(n):
            rank, a = divmod(rank, q)
            c.append(a)
        return cls(F, c + [1])

    # basic properties
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else ZERO_DEGREE

    @property
    def norm(self) -> int:
        return self.F.q ** self.degree if self.coeffs else 0

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def rank(self) -> int:
        """Position of a monic polynomial inside its M_n enumeration."""
        q = self.F.q
        return sum(a * q ** i for i, a in enumerate(self.coeffs[:-1]))

    def __getitem__(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.F is other.F and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.F.q, self.coeffs))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly({self.F!r}, {format_poly(self)!r})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            a = self.coeffs[i]
            if not a:
                continue
            c = self.F.format_elem(a)
            if self.F.r > 1:
                c = f"({c})"
            if i == 0:
                terms.append(c)
            else:
                mon = "t" if i == 1 else f"t^{i}"
                terms.append(mon if a == 1 else f"{c}*{mon}")
        return " + ".join(terms)

    def _check(self, other: "Poly") -> None:
        if not isinstance(other, Poly):
            raise TypeError("Poly expected")
        if other.F is not self.F:
            raise FieldMismatch(f"field mismatch: {self.F!r} vs {other.F!r}")

    # ring operations
    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        add = self.F.add_t
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly(self.F, [add[x][b[i]] if i < len(b) else x for i, x in enumerate(a)])

    def __neg__(self) -> "Poly":
        neg = self.F.neg_t
        return Poly(self.F, [neg[x] for x in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        return poly_mul(self, other)

    def __divmod__(self, other: "Poly") -> tuple["Poly", "Poly"]:
        return poly_divmod(self, other)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return poly_divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return poly_mod(self, other)

    def scale(self, c: int) -> "Poly":
        mul = self.F.mul_t[c]
        return Poly(self.F, [mul[x] for x in self.coeffs])

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        return self.scale(self.F.inv(self.coeffs[-1]))

    def derivative(self) -> "Poly":
        F = self.F
        return Poly(F, [F.mul(F.from_int(i), a) for i, a in enumerate(self.coeffs)][1:])

    def __call__(self, x: int) -> int:
        """Evaluate at a point of F_q."""
        F = self.F
        acc = 0
        for a in reversed(self.coeffs):
            acc = F.add_t[F.mul_t[acc][x]][a]
        return acc


def poly_mul(a: Poly, b: Poly) -> Poly:
    a._check(b)
    if a.is_zero or b.is_zero:
        return Poly(a.F)
    F = a.F
    add, mul = F.add_t, F.mul_t
    out = [0] * (len(a.coeffs) + len(b.coeffs) - 1)
    for i, x in enumerate(a.coeffs):
        if x:
            row = mul[x]
            for j, y in enumerate(b.coeffs):
                out[i + j] = add[out[i + j]][row[y]]
    return Poly(F, out)


def poly_divmod(a: Poly, m: Poly) -> tuple[Poly, Poly]:
    a._check(m)
    if m.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    F = a.F
    sub, mul = F.sub_t, F.mul_t
    r = list(a.coeffs)
    dm = m.degree
    inv = F.inv(m.lead)
    quo = [0] * max(len(r) - dm, 0)
    mc = m.coeffs
    while len(r) > dm:
        c = mul[r[-1]][inv]
        shift = len(r) - 1 - dm
        quo[shift] = c
        row = mul[c]
        for i, y in enumerate(mc):
            r[shift + i] = sub[r[shift + i]][row[y]]
        while r and r[-1] == 0:
            r.pop()
    return Poly(F, quo), Poly(F, r)


def poly_mod(a: Poly, m: Poly) -> Poly:
    return poly_divmod(a, m)[1]


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd; gcd(a, 0) is a made monic, gcd(0, 0) = 0."""
    a._check(b)
    while not b.is_zero:
        a, b = b, poly_mod(a, b)
    return a.monic()


def poly_powmod(a: Poly, e: int, m: Poly) -> Poly:
    result = Poly.one(a.F) if m.degree > 0 else Poly(a.F)
    base = poly_mod(a, m)
    while e:
        if e & 1:
            result = poly_mod(result * base, m)
        e >>= 1
        if e:
            base = poly_mod(base * base, m)
    return result


def _prime_divisors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(f: Poly) -> bool:
    """Rabin's test: t^{q^n} = t mod f and gcd(t^{q^{n/r}} - t, f) = 1 for primes r | n."""
    n = f.degree
    if n < 1:
        raise ValueError("irreducibility is undefined for constants")
    if n == 1:
        return True
    F = f.F
    f = f.monic()
    t = Poly(F, [0, 1])

    def frob(k):  # t^{q^k} mod f
        x = t
        for _ in range(k):
            x = poly_powmod(x, F.q, f)
        return x

    if frob(n) != poly_mod(t, f):
        return False
    for r in _prime_divisors(n):
        if poly_gcd(frob(n // r) - t, f).degree > 0:
            return False
    return True


def is_squarefree(f: Poly) -> bool:
    """gcd(f, f') = 1; a vanishing derivative means f is a p-th power."""
    if f.is_zero:
        raise ValueError("square-freeness of the zero polynomial is undefined")
    if f.degree == 0:
        return True
    df = f.derivative()
    if df.is_zero:
        return False
    return poly_gcd(f, df).degree == 0


class Factorization(NamedTuple):
    unit: int
    factors: tuple[tuple[Poly, int], ...]

    def expand(self, F: FieldSpec) -> Poly:
        out = Poly(F, [self.unit])
        for P, e in self.factors:
            for _ in range(e):
                out = out * P
        return out


def factor(f: Poly) -> Factorization:
    """Trial division by monic irreducibles of degree <= deg/2, in rank order."""
    if f.is_zero:
        raise ValueError("cannot factor the zero polynomial")
    F = f.F
    unit = f.lead
    g = f.monic()
    found: list[tuple[Poly, int]] = []
    d = 1
    while 2 * d <= g.degree:
        for P in enumerate_polys("P", F.q, d):
            if 2 * d > g.degree:
                break
            e = 0
            while True:
                quo, rem = poly_divmod(g, P)
                if not rem.is_zero:
                    break
                g, e = quo, e + 1
            if e:
                found.append((P, e))
        d += 1
    if g.degree > 0:
        found.append((g, 1))
    found.sort(key=lambda pe: (pe[0].degree, pe[0].rank()))
    merged: list[tuple[Poly, int]] = []
    for P, e in found:
        if merged and merged[-1][0] == P:
            merged[-1] = (P, merged[-1][1] + e)
        else:
            merged.append((P, e))
    return Factorization(unit, tuple(merged))


# --- ensembles ---------------------------------------------------------------

KINDS = ("M", "P", "H", "M<=")


def count_monic(q: int, n: int) -> int:
    return q ** n


def count_squarefree(q: int, n: int) -> int:
    if n == 0:
        return 1
    if n == 1:
        return q
    return q ** (n - 1) * (q - 1)


def _mobius(n: int) -> int:
    primes = _prime_divisors(n)
    m = n
    for p in primes:
        m //= p
        if m % p == 0:
            return 0
    return (-1) ** len(primes)


def count_primes(q: int, n: int) -> int:
    """Necklace count (1/n) sum_{d|n} mu(d) q^{n/d}."""
    if n < 1:
        raise ValueError("prime polynomials have degree >= 1")
    return sum(_mobius(d) * q ** (n // d) for d in range(1, n + 1) if n % d == 0) // n


def ensemble_size(kind: str, q: int, n: int) -> int:
    if kind == "M":
        return count_monic(q, n)
    if kind == "H":
        return count_squarefree(q, n)
    if kind == "P":
        return count_primes(q, n)
    if kind == "M<=":
        return sum(q ** i for i in range(n + 1))
    raise ValueError(f"unknown ensemble kind {kind!r}")


def split_ranges(total: int, parts: int) -> list[tuple[int, int]]:
    """Split [0, total) into contiguous rank ranges, sizes differing by at most one."""
    parts = max(1, min(parts, total)) if total else 1
    base, extra = divmod(total, parts)
    out, start = [], 0
    for i in range(parts):
        stop = start + base + (i < extra)
        out.append((start, stop))
        start = stop
    return out


class EnsembleCursor:
    """Streams a monic ensemble in rank order over the rank window [start, stop).

    The window indexes M_n; filtered kinds (P_n, H_n) yield the members that
    fall inside it, so disjoint windows partition the ensemble exactly.
    """

    def __init__(self, kind: str, q: int, n: int, start: int = 0, stop: int | None = None):
        if kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {kind!r}")
        if n < 0 or (n == 0 and kind in ("H", "P")):
            raise ValueError(f"n must be >= 1 for kind {kind}")
        self.kind, self.q, self.n = kind, q, n
        self.F = field(q)
        total = sum(q ** i for i in range(n + 1)) if kind == "M<=" else q ** n
        self.start = start
        self.stop = total if stop is None else min(stop, total)

    def __iter__(self) -> Iterator[Poly]:
        F, n, q = self.F, self.n, self.q
        if self.kind == "M<=":
            offset = 0
            for d in range(n + 1):
                size = q ** d
                lo, hi = max(self.start - offset, 0), min(self.stop - offset, size)
                for r in range(lo, hi):
                    yield Poly.from_rank(F, d, r)
                offset += size
            return
        for r in range(self.start, self.stop):
            f = Poly.from_rank(F, n, r)
            if self.kind == "M":
                yield f
            elif self.kind == "H":
                if is_squarefree(f):
                    yield f
            elif is_irreducible(f):
                yield f


def enumerate_polys(kind: str, q: int, n: int, start: int = 0, stop: int | None = None) -> Iterator[Poly]:
    """Stream M_n, P_n, H_n or M_{<=n} (which includes the constant 1) in rank order."""
    return iter(EnsembleCursor(kind, q, n, start, stop))


class PrimeCount(NamedTuple):
    count: int
    main_term: float
    error: float
    constant: float  # error / (q^{n/2} / n)


def prime_count_check(q: int, n: int) -> PrimeCount:
    """Exhaustive |P_n| against q^n/n, with the constant of the q^{n/2}/n error."""
    if n < 1:
        raise ValueError("n must be >= 1")
    count = sum(1 for _ in enumerate_polys("P", q, n))
    main = q ** n / n
    err = abs(count - main)
    return PrimeCount(count, main, err, err / (q ** (n / 2) / n))


# --- extension fields ---------------------------------------------------------

def smallest_irreducible(F: FieldSpec, k: int) -> Poly:
    """Lexicographically (rank-)smallest monic irreducible of degree k."""
    for r in range(F.q ** k):
        f = Poly.from_rank(F, k, r)
        if is_irreducible(f):
            return f
    raise RuntimeError(f"no irreducible polynomial of degree {k} over {F}")  # pragma: no cover


class ExtField:
    """F_{q^k} realised as F_q[t]/(m), elements coded base q (ascending digits)."""

    def __init__(self, F: FieldSpec, k: int, modulus: Poly | None = None):
        if k < 1:
            raise ValueError("extension degree must be >= 1")
        self.base = F
        self.k = k
        self.modulus = modulus if modulus is not None else smallest_irreducible(F, k)
        if self.modulus.degree != k or not self.modulus.is_monic:
            raise ValueError("modulus must be monic of degree k")
        self.order = F.q ** k

    def __repr__(self) -> str:
        return f"GF({self.base.q}^{self.k})"

    def digits(self, code: int) -> list[int]:
        q = self.base.q
        return [(code // q ** i) % q for i in range(self.k)]

    def encode(self, poly: Poly) -> int:
        q = self.base.q
        return sum(a * q ** i for i, a in enumerate(poly.coeffs))

    def to_poly(self, code: int) -> Poly:
        return Poly(self.base, self.digits(code))

    def __call__(self, code: int) -> "ExtFieldElement":
        return ExtFieldElement(self, code)

    def embed(self, a: int) -> "ExtFieldElement":
        return ExtFieldElement(self, a)

    def elements(self) -> Iterator["ExtFieldElement"]:
        for c in range(self.order):
            yield ExtFieldElement(self, c)

    def mul_codes(self, a: int, b: int) -> int:
        return self.encode(poly_mod(self.to_poly(a) * self.to_poly(b), self.modulus))

    def add_codes(self, a: int, b: int) -> int:
        return self.encode(self.to_poly(a) + self.to_poly(b))

    @functools.cached_property
    def _log_tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(exp, log, zech) tables for the first primitive element in code order.

        exp[j] = code of g^j, log[code] = j (log[0] = -1), and
        zech[j] = log(1 + g^j) with -1 when 1 + g^j = 0.
        """
        from . import kernels

        F, k, q = self.base, self.k, self.base.q
        M = self.order - 1
        add, mul = F.add_array, F.mul_array
        for cand in range(1, self.order):
            cols = np.array([self.digits(self.mul_codes(q ** i, cand)) for i in range(k)],
                            dtype=np.int64)
            exp = kernels.powers_of(cols, add, mul, q, k, M)
            if len(exp) == M:
                break
        else:  # pragma: no cover
            raise RuntimeError("no primitive element found")
        log, zech = kernels.zech_from_exp(exp, add, q, M)
        return exp, log[: self.order], zech

    @property
    def exp_table(self) -> np.ndarray:
        return self._log_tables[0]

    @property
    def log_table(self) -> np.ndarray:
        return self._log_tables[1]

    @property
    def zech_table(self) -> np.ndarray:
        return self._log_tables[2]


class ExtFieldElement:
    __slots__ = ("K", "code")

    def __init__(self, K: ExtField, code: int):
        if not 0 <= code < K.order:
            raise ValueError("element code out of range")
        self.K = K
        self.code = code

    def _other(self, other) -> int:
        if isinstance(other, ExtFieldElement):
            if other.K is not self.K:
                raise FieldMismatch("extension field mismatch")
            return other.code
        if isinstance(other, int):
            return other % self.K.base.p
        return NotImplemented

    def __add__(self, other):
        return ExtFieldElement(self.K, self.K.add_codes(self.code, self._other(other)))

    __radd__ = __add__

    def __mul__(self, other):
        return ExtFieldElement(self.K, self.K.mul_codes(self.code, self._other(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return ExtFieldElement(self.K, self.K.encode(-self.K.to_poly(self.code)))

    def __sub__(self, other):
        return self + (-ExtFieldElement(self.K, self._other(other)))

    def __pow__(self, e: int):
        result, base = ExtFieldElement(self.K, 1), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.code == other % self.K.base.p and (self.code < self.K.base.p)
        return isinstance(other, ExtFieldElement) and other.K is self.K and other.code == self.code

    def __hash__(self) -> int:
        return hash((id(self.K), self.code))

    def __repr__(self) -> str:
        return f"{self.K!r}({self.code})"


@functools.lru_cache(maxsize=None)
def ext_field(q: int, k: int) -> ExtField:
    return ExtField(field(q), k)


def ext_eval(f: Poly, x: ExtFieldElement) -> ExtFieldElement:
    """Image of f under the evaluation homomorphism F_q[t] -> F_{q^k}, t -> x."""
    if f.F is not x.K.base:
        raise FieldMismatch("polynomial and extension field disagree on F_q")
    K = x.K
    acc = 0
    for a in reversed(f.coeffs):
        acc = K.add_codes(K.mul_codes(acc, x.code), a)
    return ExtFieldElement(K, acc)


# --- text format --------------------------------------------------------------

def format_poly(f: Poly) -> str:
    """Comma-separated ascending coefficients; '' for the zero polynomial."""
    return ",".join(f.F.format_elem(a) for a in f.coeffs)


def parse_poly(text: str, q: int | FieldSpec) -> Poly:
    """Inverse of :func:`format_poly`; rejects non-canonical input."""
    F = q if isinstance(q, FieldSpec) else field(q)
    text = text.strip()
    if not text:
        return Poly(F)
    coeffs = []
    for tok in text.split(","):
        tok = tok.strip()
        if F.r == 1:
            if not tok.isdigit() or tok != str(int(tok)):
                raise ValueError(f"bad coefficient {tok!r}")
            a = int(tok)
            if a >= F.p:
                raise ValueError(f"coefficient {a} outside [0, {F.p})")
            coeffs.append(a)
        else:
            coeffs.append(F.parse_elem(tok))
    if coeffs[-1] == 0:
        raise ValueError("trailing zero coefficient: polynomial text must be canonical")
    return Poly(F, coeffs)
