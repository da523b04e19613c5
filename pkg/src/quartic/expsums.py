"""Complete exponential sums mod q, their CRT structure, and kernel counts.

Individual sums S_{a,q} and T(a,q;v) are computed as complex doubles from a
precomputed root-of-unity table (phases are exact residues, so there is no
trigonometric drift), with a stated error bound.  Aggregates that feed the
singular series use an exact integer path through solution counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .counting import factorint, solutions_mod_q
from .errors import BudgetExceeded, DimensionMismatch, NotCoprime
from .forms import CubicData, IntPolynomial, hessian

DEFAULT_BUDGET = 20_000_000


@dataclass
class ExpSumValue:
    value: complex
    err: float
    exact: int | None = None
    q: int = 0
    n: int = 0


@lru_cache(maxsize=256)
def roots_of_unity(q: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(q) / q)


def _phase_counts(poly: IntPolynomial, mult: int, q: int, v=None, budget: int = DEFAULT_BUDGET):
    """Histogram over residues of (mult*poly(x) + v.x) mod q on [0,q)^n."""
    n = poly.n
    total = q ** n
    if total > budget:
        raise BudgetExceeded(f"{q}^{n} = {total} cells exceeds budget {budget}")
    counts = np.zeros(q, dtype=np.int64)
    luts = {}
    for (i, k) in {(i, k) for e in poly.coeffs for i, k in enumerate(e) if k}:
        luts[(i, k)] = np.array([pow(x, k, q) for x in range(q)], dtype=np.int64)
    chunk = max(1, min(total, 1 << 22))
    start = 0
    while start < total:
        stop = min(start + chunk, total)
        idx = np.arange(start, stop, dtype=np.int64)
        coords = [(idx // q ** i) % q for i in range(n)]
        vals = np.zeros(stop - start, dtype=np.int64)
        for e, c in poly.coeffs.items():
            term = np.full(stop - start, (c * mult) % q, dtype=np.int64)
            for i, k in enumerate(e):
                if k:
                    term = term * luts[(i, k)][coords[i]] % q
            vals = (vals + term) % q
        if v is not None:
            for i in range(n):
                vi = int(v[i]) % q
                if vi:
                    vals = (vals + vi * coords[i]) % q
        counts += np.bincount(vals, minlength=q)
        start = stop
    return counts


def _sum_from_counts(counts: np.ndarray, q: int, n: int) -> ExpSumValue:
    val = complex(counts @ roots_of_unity(q))
    err = 4e-15 * float(counts.sum()) * max(math.log2(q), 1.0)
    return ExpSumValue(value=val, err=err, q=q, n=n)


def complete_sum(
    F: IntPolynomial, a: int, q: int, method: str = "auto", budget: int = DEFAULT_BUDGET
) -> ExpSumValue:
    """S_{a,q} = sum over x mod q of e_q(a F(x))."""
    if q == 1:
        return ExpSumValue(1.0 + 0j, 0.0, exact=1, q=1, n=F.n)
    if method == "auto":
        method = "direct" if q ** F.n <= budget else "crt"
    if method == "direct":
        return _sum_from_counts(_phase_counts(F, a, q, budget=budget), q, F.n)
    if method == "crt":
        return _crt_sum(F, a, q, None, budget)
    raise ValueError(f"unknown method {method!r}")


def twisted_sum(
    g, a: int, q: int, v, method: str = "auto", budget: int = DEFAULT_BUDGET
) -> ExpSumValue:
    """T(a,q;v) = sum over y mod q of e_q(a g(y) + v.y)."""
    poly = g.poly if isinstance(g, CubicData) else g
    if len(v) != poly.n:
        raise DimensionMismatch("v length != variable count")
    if q == 1:
        return ExpSumValue(1.0 + 0j, 0.0, exact=1, q=1, n=poly.n)
    if method == "auto":
        method = "direct" if q ** poly.n <= budget else "crt"
    if method == "direct":
        return _sum_from_counts(_phase_counts(poly, a, q, v=v, budget=budget), q, poly.n)
    if method == "crt":
        return _crt_sum(poly, a, q, tuple(int(x) for x in v), budget)
    raise ValueError(f"unknown method {method!r}")


def _crt_sum(poly: IntPolynomial, a: int, q: int, v, budget: int) -> ExpSumValue:
    """Multiplicative splitting over the prime powers of q.

    Peels prime powers off via T(a, rs; v) = T(a sbar, r; sbar v) T(a rbar, s; rbar v)
    where r rbar + s sbar = 1.
    """
    parts = [p ** e for p, e in sorted(factorint(q).items())]
    val = 1.0 + 0j
    err = 0.0
    a_cur, v_cur, q_cur = a % q, v, q
    while len(parts) > 1:
        r = parts.pop(0)
        s = q_cur // r
        _, rbar, sbar = _xgcd(r, s)  # r*rbar + s*sbar = 1
        left = _direct_or_recurse(poly, (a_cur * sbar) % r, r, _scale_v(v_cur, sbar, r), budget)
        err = err * abs(left.value) + left.err * abs(val)
        val *= left.value
        a_cur = (a_cur * rbar) % s
        v_cur = _scale_v(v_cur, rbar, s)
        q_cur = s
    last = _direct_or_recurse(poly, a_cur, q_cur, v_cur, budget)
    err = err * abs(last.value) + last.err * abs(val)
    val *= last.value
    return ExpSumValue(val, err + 1e-12, q=q, n=poly.n)


def _scale_v(v, s, q):
    if v is None:
        return None
    return tuple((s * x) % q for x in v)


def _direct_or_recurse(poly, a, q, v, budget):
    if q ** poly.n > budget:
        raise BudgetExceeded(f"prime power {q} too large for direct path")
    counts = _phase_counts(poly, a, q, v=v, budget=budget)
    return _sum_from_counts(counts, q, poly.n)


def _xgcd(a: int, b: int):
    if b == 0:
        return abs(a), (1 if a >= 0 else -1), 0
    g, x, y = _xgcd(b, a % b)
    return g, y, x - (a // b) * y


# -- exact aggregated sums -----------------------------------------------------


def unit_sum_prime_power(F: IntPolynomial, p: int, k: int, budget: int = DEFAULT_BUDGET) -> int:
    """A_{p^k} = sum over gcd(a,p)=1 of S_{a,p^k}, exactly.

    Summing S_{a,q} over all a mod q counts solutions, so
    A_{p^k} = p^k rho(p^k) - p^{n+k-1} rho(p^{k-1}).
    """
    n = F.n
    if k == 0:
        return 1
    rho_k = solutions_mod_q(F, p ** k, budget=budget)
    rho_km1 = solutions_mod_q(F, p ** (k - 1), budget=budget)
    return p ** k * rho_k - p ** (n + k - 1) * rho_km1


def sum_over_units(F: IntPolynomial, q: int, budget: int = DEFAULT_BUDGET) -> int:
    """A_q = sum over gcd(a,q)=1 of S_{a,q} as an exact integer (multiplicative)."""
    if q == 1:
        return 1
    out = 1
    for p, e in factorint(q).items():
        out *= unit_sum_prime_power(F, p, e, budget=budget)
    return out


def sum_over_units_float(F: IntPolynomial, q: int, budget: int = DEFAULT_BUDGET) -> complex:
    """Float cross-check of A_q by direct summation over the units."""
    total = 0.0 + 0j
    for a in range(1, q + 1):
        if math.gcd(a, q) == 1:
            total += complete_sum(F, a, q, budget=budget).value
    return total


# -- modulus factorization q = b c^2 d -------------------------------------------


@dataclass
class ModulusFactorization:
    q: int
    b: int
    c: int
    d: int
    d0: int
    prime_table: dict
    b_i: list = field(default_factory=list)
    d_i: list = field(default_factory=list)
    r_i: list = field(default_factory=list)

    def verify(self) -> bool:
        ok = self.q == self.b * self.c ** 2 * self.d
        ok &= math.gcd(self.b, self.c ** 2 * self.d) == 1
        ok &= self.c % self.d == 0
        ok &= self.d % self.d0 == 0
        ok &= _is_squarefull(self.c // (self.d * self.d0))
        if self.r_i:
            prod = 1
            for r in self.r_i:
                prod *= r
            ok &= prod == self.b * self.d
            ok &= all(self.r_i[i] == self.b_i[i] * self.d_i[i] for i in range(len(self.r_i)))
        return ok


def _is_squarefull(m: int) -> bool:
    return all(e >= 2 for e in factorint(m).values()) if m > 1 else True


def factor_bcd(q: int, s_map: dict | None = None, n: int | None = None) -> ModulusFactorization:
    """Write q = b c^2 d with b the small-exponent part and d the odd-exponent tail.

    b collects p^e with e <= 2, d the primes with odd e >= 3, and c^2 the rest;
    d divides c and there is a least divisor d0 of d with c/(d*d0) square-full.
    With s_map (p -> s_p) the classified tables b_i, d_i, r_i are filled for
    0 <= i <= n (r_i multiplies the p^e || bd with s_p = i-1).
    """
    fac = factorint(q) if q > 1 else {}
    b = d = 1
    c2 = 1
    for p, e in fac.items():
        if e <= 2:
            b *= p ** e
        elif e % 2 == 1:
            d *= p
            c2 *= p ** (e - 1)
        else:
            c2 *= p ** e
    c = math.isqrt(c2)
    assert c * c == c2
    d0 = 1
    if d > 1:
        cd = c // d
        for p in factorint(d):
            if cd % p == 0 and cd % (p * p) != 0:
                d0 *= p
    mf = ModulusFactorization(q=q, b=b, c=c, d=d, d0=d0, prime_table=dict(sorted(fac.items())))
    if s_map is not None:
        if n is None:
            n = max((s + 1 for s in s_map.values()), default=0) + 1
        b_i, d_i, r_i = [], [], []
        for i in range(n + 1):
            bi = di = 1
            for p, e in fac.items():
                sp = s_map.get(p)
                if sp is None or sp != i - 1:
                    continue
                if e <= 2:
                    bi *= p ** e
                elif e % 2 == 1:
                    di *= p
            b_i.append(bi)
            d_i.append(di)
            r_i.append(bi * di)
        mf.b_i, mf.d_i, mf.r_i = b_i, d_i, r_i
    return mf


# -- multiplicativity check -------------------------------------------------------


def split_multiplicative(g, a: int, r: int, s: int, v, budget: int = DEFAULT_BUDGET) -> dict:
    """Residual of T(a,rs;v) = T(a sbar, r; sbar v) T(a rbar, s; rbar v)."""
    poly = g.poly if isinstance(g, CubicData) else g
    if math.gcd(r, s) != 1:
        raise NotCoprime(f"gcd({r},{s}) != 1")
    gcd, rbar, sbar = _xgcd(r, s)  # r*rbar + s*sbar = 1
    direct = twisted_sum(poly, a % (r * s) or r * s, r * s, v, method="direct", budget=budget)
    left = twisted_sum(poly, (a * sbar) % r or r, r, _scale_v(tuple(v), sbar, r), method="direct", budget=budget)
    right = twisted_sum(poly, (a * rbar) % s or s, s, _scale_v(tuple(v), rbar, s), method="direct", budget=budget)
    prod = left.value * right.value
    residual = abs(direct.value - prod)
    return {
        "direct": direct.value,
        "left": left.value,
        "right": right.value,
        "product": prod,
        "residual": residual,
        "scale": float(r * s) ** poly.n,
    }


# -- kernel counts M_m, N_m --------------------------------------------------------


def smith_diagonal(M) -> list:
    """Diagonal of the Smith normal form of a small integer matrix."""
    A = [list(map(int, row)) for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    diag = []
    top = 0
    while top < min(rows, cols):
        # find the smallest nonzero entry in the submatrix
        best = None
        for i in range(top, rows):
            for j in range(top, cols):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        A[top], A[bi] = A[bi], A[top]
        for row in A:
            row[top], row[bj] = row[bj], row[top]
        pivot = A[top][top]
        dirty = False
        for i in range(top + 1, rows):
            f = A[i][top] // pivot
            if f:
                for j in range(top, cols):
                    A[i][j] -= f * A[top][j]
            if A[i][top]:
                dirty = True
        for j in range(top + 1, cols):
            f = A[top][j] // pivot
            if f:
                for i in range(top, rows):
                    A[i][j] -= f * A[i][top]
            if A[top][j]:
                dirty = True
        if dirty:
            continue
        diag.append(abs(pivot))
        top += 1
    while len(diag) < min(rows, cols):
        diag.append(0)
    return diag


def kernel_count_mod(M, m: int) -> int:
    """#{y mod m : M y = 0 mod m} = prod gcd(d_i, m) over the SNF diagonal."""
    if m == 1:
        return 1
    n = len(M[0]) if M else 0
    diag = smith_diagonal(M)
    out = 1
    for d in diag:
        out *= math.gcd(d, m) if d else m
    # non-square matrices: extra free columns
    out *= m ** (n - len(diag))
    return out


def mn_counts(g: CubicData, x, m: int) -> tuple:
    """(M_m(x), N_m(x)): kernels mod m of the full Hessian and of H_{g0}."""
    Mmat = hessian(g.poly, x)
    Nmat = hessian(g.g0, x)
    return kernel_count_mod(Mmat, m), kernel_count_mod(Nmat, m)


# -- the box-and-congruence sum S(V, a) ---------------------------------------------


def _residue_count_in_window(center: int, V: float, c: int, t: int) -> int:
    """#{v in [center-V, center+V] integer : v = t mod c}."""
    lo = math.ceil(center - V)
    hi = math.floor(center + V)
    if hi < lo:
        return 0
    first = lo + ((t - lo) % c)
    if first > hi:
        return 0
    return (hi - first) // c + 1


def s_va(
    g: CubicData,
    V: float,
    a: int,
    v0,
    c: int,
    d: int,
    budget: int = DEFAULT_BUDGET,
) -> dict:
    """S(V,a) = sum over |v - v0| <= V and r mod c with c | (a grad g(r) + v) of sqrt(M_d(r)).

    Exact integer when every M_d value is a perfect square; float otherwise.
    """
    n = g.n
    if d > 1 and c % d != 0:
        raise ValueError("d must divide c")
    if c ** n > budget:
        raise BudgetExceeded(f"{c}^{n} residue points exceed budget")
    # M_d depends on r mod d only
    md_table = {}
    for idx in range(max(d, 1) ** n):
        r = tuple((idx // max(d, 1) ** i) % max(d, 1) for i in range(n))
        md_table[r] = kernel_count_mod(hessian(g.poly, r), d) if d > 1 else 1
    grads = [g.poly.partial(i) for i in range(n)]
    total_int = 0
    total_float = 0.0
    all_square = True
    for idx in range(c ** n):
        r = tuple((idx // c ** i) % c for i in range(n))
        window = 1
        for i in range(n):
            u = (a * grads[i].evaluate(r)) % c
            window *= _residue_count_in_window(int(v0[i]), V, c, (-u) % c)
            if window == 0:
                break
        if window == 0:
            continue
        Md = md_table[tuple(ri % max(d, 1) for ri in r)]
        root = math.isqrt(Md)
        if root * root == Md:
            total_int += window * root
        else:
            all_square = False
            total_float += window * math.sqrt(Md)
    value = total_int + total_float
    return {"value": value, "exact": all_square, "int_part": total_int}
