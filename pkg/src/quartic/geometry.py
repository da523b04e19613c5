"""Singular-locus dimensions over finite fields and hyperplane sections.

Dimension estimates are made by exact point counting over F_{p^k} (extension
fields realized as polynomial quotient rings with a deterministic modulus)
followed by a band test: an affine set of dimension d over F_q should carry
between q^d/C and C*q^d points.  No Groebner bases, no guessing: when the
bands do not single out a dimension we raise AmbiguousDimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import (
    AmbiguousDimension,
    BudgetExceeded,
    CompositeP,
    DimensionMismatch,
    NoAnchor,
    SearchExhausted,
)
from .forms import CubicData, IntPolynomial, hessian_form_rows

DEFAULT_BUDGET = 20_000_000
PROXY_PRIMES = (1009, 1013, 1019)
BAND_CONSTANT = 4.0


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_up_to(n: int):
    return [p for p in range(2, n + 1) if is_prime(p)]


# -- finite fields -------------------------------------------------------------


def _poly_mul_mod(a, b, modulus, p):
    """Multiply coefficient tuples mod (modulus, p); modulus monic of degree k."""
    k = len(modulus) - 1
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    # reduce by modulus
    for i in range(len(out) - 1, k - 1, -1):
        c = out[i]
        if c:
            out[i] = 0
            for j in range(k):
                out[i - k + j] = (out[i - k + j] - c * modulus[j]) % p
    return tuple(out[:k])


def _poly_pow_mod(a, e, modulus, p):
    result = (1,) + (0,) * (len(modulus) - 2)
    base = a
    while e:
        if e & 1:
            result = _poly_mul_mod(result, base, modulus, p)
        base = _poly_mul_mod(base, base, modulus, p)
        e >>= 1
    return result


def _poly_gcd_deg(a, b, p):
    """Degree of gcd of coefficient lists over F_p."""
    a, b = list(a), list(b)

    def deg(u):
        d = len(u) - 1
        while d >= 0 and u[d] % p == 0:
            d -= 1
        return d

    while True:
        da, db = deg(a), deg(b)
        if db < 0:
            return da
        if da < db:
            a, b = b, a
            continue
        inv = pow(b[db], -1, p)
        f = a[da] * inv % p
        for j in range(db + 1):
            a[da - db + j] = (a[da - db + j] - f * b[j]) % p
        # loop continues with reduced a


def find_irreducible(p: int, k: int):
    """Lexicographically least monic irreducible of degree k over F_p.

    Coefficient tuples (c_0, ..., c_{k-1}, 1) are ordered by the base-p value
    of (c_{k-1}, ..., c_0), which makes the choice reproducible.
    """
    if k == 1:
        return (0, 1)
    for value in range(p ** k):
        coeffs = []
        v = value
        for _ in range(k):
            coeffs.append(v % p)
            v //= p
        f = tuple(coeffs) + (1,)
        # f is irreducible iff x^(p^k) = x mod f and gcd(x^(p^d) - x, f) = 1
        # for every maximal proper divisor d of k
        x = (0, 1) + (0,) * (k - 2) if k > 1 else (0,)
        xq = _poly_pow_mod(x, p ** k, f, p)
        if xq != x:
            continue
        ok = True
        for d in range(1, k):
            if k % d == 0:
                xd = _poly_pow_mod(x, p ** d, f, p)
                diff = tuple((a - b) % p for a, b in zip(xd, x))
                if _poly_gcd_deg(list(f), list(diff), p) > 0:
                    ok = False
                    break
        if ok:
            return f
    raise RuntimeError("no irreducible found (unreachable)")


class GF:
    """F_{p^k} with elements encoded as integers 0..p^k-1 (base-p digits).

    For k >= 2 full multiplication tables are precomputed, so grid arithmetic
    is numpy fancy indexing; for k = 1 plain modular arithmetic is used.
    """

    _cache: dict = {}
    MAX_TABLE_Q = 4096  # k >= 2 uses q x q tables; refuse anything bigger

    def __new__(cls, p: int, k: int = 1):
        key = (p, k)
        if key in cls._cache:
            return cls._cache[key]
        if not is_prime(p):
            raise CompositeP(f"{p} is not prime")
        if k >= 2 and p ** k > cls.MAX_TABLE_Q:
            raise BudgetExceeded(f"F_{p}^{k} needs {p ** (2 * k)} table cells")
        self = super().__new__(cls)
        self.p, self.k, self.q = p, k, p ** k
        self.modulus = find_irreducible(p, k)
        if k >= 2:
            self._build_tables()
        cls._cache[key] = self
        return self

    def _build_tables(self):
        p, k, q = self.p, self.k, self.q
        elems = [self.decode(c) for c in range(q)]
        mul = np.zeros((q, q), dtype=np.int32)
        for a in range(q):
            for b in range(a, q):
                v = self.encode(_poly_mul_mod(elems[a], elems[b], self.modulus, p))
                mul[a, b] = v
                mul[b, a] = v
        digits = np.array(elems, dtype=np.int64)  # (q, k)
        add = np.zeros((q, q), dtype=np.int32)
        for a in range(q):
            s = (digits + digits[a]) % p
            add[a] = (s * (p ** np.arange(k))).sum(axis=1)
        self.mul_table = mul
        self.add_table = add
        self.neg_table = np.array(
            [self.encode(tuple((-c) % p for c in e)) for e in elems], dtype=np.int32
        )

    def decode(self, code: int):
        out = []
        for _ in range(self.k):
            out.append(code % self.p)
            code //= self.p
        return tuple(out)

    def encode(self, coeffs) -> int:
        return sum(int(c) % self.p * self.p ** i for i, c in enumerate(coeffs))

    def embed(self, c: int) -> int:
        """Image of an integer constant."""
        return int(c) % self.p

    # vectorized ops on code arrays
    def add(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        return self.add_table[a, b]

    def mul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        return self.mul_table[a, b]

    def neg(self, a):
        if self.k == 1:
            return (-a) % self.p
        return self.neg_table[a]

    def pow_lut(self, e: int):
        """Array L with L[code] = code ** e in the field."""
        lut = np.full(self.q, self.embed(1), dtype=np.int64)
        base = np.arange(self.q, dtype=np.int64)
        ee = e
        acc = base
        while ee:
            if ee & 1:
                lut = self.mul(lut, acc)
            acc = self.mul(acc, acc)
            ee >>= 1
        return lut


def eval_poly_codes(poly: IntPolynomial, gf: GF, coords):
    """Evaluate poly over arrays of field codes; coords is a list of n arrays."""
    if len(coords) != poly.n:
        raise DimensionMismatch("coordinate arrays do not match variable count")
    shape = np.broadcast(*[np.asarray(c) for c in coords]).shape if coords else ()
    total = np.full(shape, gf.embed(0), dtype=np.int64)
    luts = {}
    for e, c in poly.coeffs.items():
        term = np.full(shape, gf.embed(c), dtype=np.int64)
        for i, k in enumerate(e):
            if k:
                if (i, k) not in luts:
                    luts[(i, k)] = gf.pow_lut(k)
                term = gf.mul(term, luts[(i, k)][coords[i]])
        total = gf.add(total, term)
    return total


def _affine_grid(gf: GF, n: int, budget: int):
    N = gf.q ** n
    if N > budget:
        raise BudgetExceeded(f"{gf.q}^{n} = {N} grid cells exceeds budget {budget}")
    idx = np.arange(N, dtype=np.int64)
    return [(idx // gf.q ** i) % gf.q for i in range(n)]


def count_points_ext(polys, p: int, k: int = 1, mode: str = "affine", budget: int = DEFAULT_BUDGET) -> int:
    """Exact count of common zeros over F_{p^k} in affine/cone/projective space."""
    polys = list(polys)
    if not polys:
        n = 0
    else:
        n = polys[0].n
        if any(g.n != n for g in polys):
            raise DimensionMismatch("mixed variable counts in system")
    if p ** (k * max(n - (1 if mode == "projective" else 0), 0)) > budget:
        raise BudgetExceeded(f"{p}^{k * n} points exceed budget {budget}")
    gf = GF(p, k)
    if mode in ("affine", "cone"):
        if n == 0:
            return 1 if all(g.evaluate([]) % p == 0 for g in polys) else 0
        coords = _affine_grid(gf, n, budget)
        ok = np.ones(gf.q ** n, dtype=bool)
        for g in polys:
            ok &= eval_poly_codes(g, gf, coords) == 0
        return int(ok.sum())
    if mode == "projective":
        for g in polys:
            if not g.is_homogeneous():
                raise ValueError("projective counting needs homogeneous forms")
        total = 0
        for j in range(n):  # chart: x_1..x_j = 0, x_{j+1} = 1, rest free
            free = n - j - 1
            if gf.q ** max(free, 0) > budget:
                raise BudgetExceeded("projective chart exceeds budget")
            if free:
                tail = _affine_grid(gf, free, budget)
            else:
                tail = []
            coords = [np.zeros(1 if not free else gf.q ** free, dtype=np.int64)] * j
            coords = coords + [np.full(1 if not free else gf.q ** free, gf.embed(1), dtype=np.int64)]
            coords = coords + tail
            ok = np.ones(coords[0].shape, dtype=bool)
            for g in polys:
                ok &= eval_poly_codes(g, gf, coords) == 0
            total += int(ok.sum())
        return total
    raise ValueError(f"unknown mode {mode!r}")


# -- dimension estimation ------------------------------------------------------


@dataclass
class DimEstimate:
    dim: int
    counts: dict
    confident: bool


def estimate_dim(counts: dict, p: int, C: float = BAND_CONSTANT, nmax: int = 64) -> DimEstimate:
    """Affine dimension from exact counts over F_{p^k}, k in counts.

    A set of dimension d over F_q should have between q^d/C and C*q^d points;
    the returned dimension is the unique d consistent with every count
    (count 0 forces d = -1, count 1 forces d = 0 for cones through 0).
    """
    if not counts:
        raise ValueError("need at least one count")
    candidates = None
    for k, cnt in counts.items():
        q = p ** k
        if cnt == 0:
            local = {-1}
        elif cnt == 1:
            local = {0}  # decisive for cones: dim >= 1 forces >= q points
        else:
            local = {d for d in range(0, nmax + 1) if q ** d / C <= cnt <= C * q ** d}
        candidates = local if candidates is None else (candidates & local)
    if candidates is None or len(candidates) != 1:
        raise AmbiguousDimension(
            f"counts {counts} at p={p} leave candidate dimensions {sorted(candidates or ())}"
        )
    (d,) = candidates
    # confident when some usable count came from a field with disjoint bands
    confident = any(p ** k > C * C for k in counts) or d == -1
    return DimEstimate(dim=d, counts=dict(counts), confident=confident)


def _reduced_nonzero(G: IntPolynomial, p: int) -> bool:
    return any(c % p for c in G.coeffs.values())


def sing_dim(
    G: IntPolynomial,
    p: int | None = None,
    kmax: int = 2,
    C: float = BAND_CONSTANT,
    budget: int = DEFAULT_BUDGET,
    proxy_primes=PROXY_PRIMES,
):
    """Projective dimension s_v of the singular locus of the hypersurface G = 0.

    With a prime p this is s_p; with p=None it is the rational proxy
    max over a configured set of large primes of s_p (sound upper bound only,
    since s_p >= s_infinity for every p), returned as (value, "proxy").
    """
    if p is None:
        vals = [sing_dim(G, q, kmax=1, C=C, budget=budget) for q in proxy_primes]
        return max(vals), "proxy"
    n = G.n
    if not _reduced_nonzero(G, p):
        return n - 1  # convention: G vanishes identically mod p
    if n == 1:
        return -1  # protocol for forms in one variable
    system = [G] + [G.partial(i) for i in range(n)]
    counts = {}
    for k in range(1, kmax + 1):
        if (p ** k) ** max(n - 1, 0) > budget or (k >= 2 and p ** k > GF.MAX_TABLE_Q):
            break
        counts[k] = count_points_ext(system, p, k, mode="projective", budget=budget)
    if not counts:
        raise BudgetExceeded(f"no extension degree of F_{p} fits the budget")
    if all(c == 0 for c in counts.values()):
        return -1
    est = estimate_dim(counts, p, C=C, nmax=n - 2)
    return min(est.dim, n - 2)


# -- Hessian rank loci ---------------------------------------------------------


def _ranks_of_matrix_grid(entry_vals, gf: GF, n: int):
    """Vectorized rank of many symmetric n x n matrices given as value arrays."""
    if n == 1:
        return (np.asarray(entry_vals[0][0]) != 0).astype(np.int8)
    if n == 2:
        a, b, d = entry_vals[0][0], entry_vals[0][1], entry_vals[1][1]
        det = gf.add(gf.mul(a, d), gf.neg(gf.mul(b, b)))
        nonzero = (a != 0) | (b != 0) | (d != 0)
        return ((det != 0).astype(np.int8) + nonzero.astype(np.int8)).astype(np.int8)
    if n == 3:
        m = entry_vals

        def mul(x, y):
            return gf.mul(x, y)

        def add(x, y):
            return gf.add(x, y)

        def sub(x, y):
            return gf.add(x, gf.neg(y))

        a, b, c = m[0][0], m[0][1], m[0][2]
        d, e, f = m[1][1], m[1][2], m[2][2]
        # symmetric matrix [[a,b,c],[b,d,e],[c,e,f]]
        det = sub(
            add(add(mul(a, sub(mul(d, f), mul(e, e))), mul(b, sub(mul(c, e), mul(b, f)))),
                mul(c, sub(mul(b, e), mul(c, d)))),
            np.zeros_like(a),
        )
        minors = [
            sub(mul(d, f), mul(e, e)),
            sub(mul(b, f), mul(c, e)),
            sub(mul(b, e), mul(c, d)),
            sub(mul(a, f), mul(c, c)),
            sub(mul(a, e), mul(b, c)),
            sub(mul(a, d), mul(b, b)),
        ]
        any_minor = np.zeros_like(a, dtype=bool)
        for t in minors:
            any_minor |= t != 0
        any_entry = np.zeros_like(a, dtype=bool)
        for t in (a, b, c, d, e, f):
            any_entry |= t != 0
        rank = (det != 0).astype(np.int8) * 3
        rank = np.where((rank == 0) & any_minor, 2, rank).astype(np.int8)
        rank = np.where((rank == 0) & any_entry, 1, rank).astype(np.int8)
        return rank
    # small-n fallback: Gaussian elimination per point (codes decoded on demand)
    raise BudgetExceeded("vectorized rank profiles are implemented for n <= 3")


def hessian_rank_grid(G: IntPolynomial, p: int, k: int = 1, budget: int = DEFAULT_BUDGET):
    """Array of rank H_G(x) over all x in F_{p^k}^n (mix-radix order)."""
    gf = GF(p, k)
    n = G.n
    coords = _affine_grid(gf, n, budget)
    rows = hessian_form_rows(G)
    entry_vals = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = eval_poly_codes(rows[i][j], gf, coords)
            entry_vals[i][j] = v
            entry_vals[j][i] = v
    return _ranks_of_matrix_grid(entry_vals, gf, n)


_rank_count_cache: dict = {}


def _rank_counts(G: IntPolynomial, p: int, k: int, budget: int) -> list:
    """counts[r] = #{x in F_{p^k}^n : rank H_G(x) = r}, cached per (G, p, k)."""
    key = (G, p, k)
    if key not in _rank_count_cache:
        ranks = hessian_rank_grid(G, p, k, budget=budget)
        _rank_count_cache[key] = np.bincount(ranks, minlength=G.n + 1).tolist()
    return _rank_count_cache[key]


def _dim_or_none(counts: dict, p: int, C: float, nmax: int):
    if all(c == 0 for c in counts.values()):
        return -1
    try:
        return estimate_dim(counts, p, C=C, nmax=nmax).dim
    except AmbiguousDimension:
        return None


def hessian_rank_profile(
    G: IntPolynomial,
    p: int,
    r: int,
    kmax: int = 2,
    C: float = BAND_CONSTANT,
    budget: int = DEFAULT_BUDGET,
) -> dict:
    """#T_r over F_p plus a dimension check against dim T_r <= r + s_p + 1."""
    if p % 3 == 0:
        raise ValueError("rank lemma requires p not dividing 3 (cubic forms)")
    n = G.n
    counts = {}
    for k in range(1, kmax + 1):
        if (p ** k) ** n > budget or (k >= 2 and p ** k > GF.MAX_TABLE_Q):
            break
        by_rank = _rank_counts(G, p, k, budget)
        counts[k] = int(sum(by_rank[: min(r, n) + 1]))
    sp = sing_dim(G, p, kmax=kmax, C=C, budget=budget)
    bound = min(r + sp + 1, n)
    dim = _dim_or_none(counts, p, C, n)
    ratio = counts[1] / p ** bound if bound >= 0 else float(counts[1])
    return {
        "count": counts[1],
        "counts": counts,
        "dim": dim,
        "s_p": sp,
        "bound": bound,
        "dim_ok": None if dim is None else dim <= bound,
        "ratio": ratio,
    }


def b_set_profile(
    G: IntPolynomial,
    p: int,
    s: int,
    kmax: int = 2,
    C: float = BAND_CONSTANT,
    budget: int = DEFAULT_BUDGET,
) -> dict:
    """#B_s over F_p for a cubic form G, with its dimension check.

    For cubic G the symmetry H_G(x)h = H_G(h)x turns dim A_h into
    n - rank H_G(h), so B_s is the rank <= n-s locus of the Hessian in h.
    """
    if p % 3 == 0:
        raise ValueError("requires p not dividing 3")
    if G.degree != 3 or not G.is_homogeneous(3):
        raise ValueError("b_set_profile expects a cubic form")
    n = G.n
    if s > n:
        return {"count": 0, "counts": {}, "dim": -1, "s_p": None, "bound": -1, "dim_ok": True, "ratio": 0.0}
    counts = {}
    for k in range(1, kmax + 1):
        if (p ** k) ** n > budget or (k >= 2 and p ** k > GF.MAX_TABLE_Q):
            break
        by_rank = _rank_counts(G, p, k, budget)
        counts[k] = int(sum(by_rank[: max(n - s, -1) + 1]))
    sp = sing_dim(G, p, kmax=kmax, C=C, budget=budget)
    bound = min(n, n - s + sp + 1)
    dim = _dim_or_none(counts, p, C, n)
    ratio = counts[1] / p ** bound if bound >= 0 else float(counts[1])
    return {
        "count": counts[1],
        "counts": counts,
        "dim": dim,
        "s_p": sp,
        "bound": bound,
        "dim_ok": None if dim is None else dim <= bound,
        "ratio": ratio,
    }


def dim_A_h(G: IntPolynomial, p: int, h, budget: int = DEFAULT_BUDGET) -> int:
    """Affine dimension of A_h = {x: H_G(x) h = 0} over F_p by direct count."""
    gf = GF(p, 1)
    n = G.n
    rows = hessian_form_rows(G)
    coords = _affine_grid(gf, n, budget)
    ok = np.ones(gf.q ** n, dtype=bool)
    for i in range(n):
        acc = np.zeros(gf.q ** n, dtype=np.int64)
        for j in range(n):
            if h[j] % p:
                acc = gf.add(acc, gf.mul(eval_poly_codes(rows[i][j], gf, coords), h[j] % p))
        ok &= acc == 0
    cnt = int(ok.sum())
    return round(math.log(cnt, p)) if cnt > 1 else 0


# -- hyperplane sections -------------------------------------------------------


def restrict_to_hyperplane_mod_p(G: IntPolynomial, m, p: int) -> IntPolynomial:
    """The section form G|_{m.x=0} in n-1 variables, valid mod p."""
    n = G.n
    pivot = next((i for i in range(n) if m[i] % p), None)
    if pivot is None:
        raise ValueError("m vanishes mod p; no hyperplane")
    inv = pow(int(m[pivot]) % p, -1, p)
    cols = []
    for j in range(n):
        if j == pivot:
            continue
        col = [0] * n
        col[j] = 1
        col[pivot] = (-m[j] * inv) % p
        cols.append(col)
    return G.substitute_affine([0] * n, cols)


def _primitive_vectors_by_norm(n: int, M_max: int):
    """Primitive m with |m| = M, first nonzero coordinate positive, lex order."""
    for M in range(1, M_max + 1):
        shell = []
        for m in product(range(-M, M + 1), repeat=n):
            if max(abs(x) for x in m) != M:
                continue
            nz = next((x for x in m if x), None)
            if nz is None or nz < 0:
                continue
            if math.gcd(*[abs(x) for x in m]) != 1:
                continue
            shell.append(m)
        shell.sort()
        yield from shell


def shortest_orthogonal_gap(m, bound: float) -> bool:
    """True iff no nonzero integer e with |e| < bound satisfies m.e = 0."""
    n = len(m)
    B = math.ceil(bound) - 1
    if B < 1:
        return True
    for e in product(range(-B, B + 1), repeat=n):
        if any(e) and sum(a * b for a, b in zip(m, e)) == 0:
            return False
    return True


def find_hyperplane(
    G: IntPolynomial,
    primes,
    M_max: int,
    kappa: float = 0.5,
    min_prime: int = 5,
    kmax: int = 2,
    C: float = BAND_CONSTANT,
    budget: int = DEFAULT_BUDGET,
    proxy_primes=PROXY_PRIMES,
) -> dict:
    """Search for a primitive m whose hyperplane section drops s_v by one.

    Checks v = rational proxy and all p in `primes` with p >= min_prime; also
    requires the shortest vector orthogonal to m to have length at least
    kappa * |m|^(1/(n-1)).  The first acceptable m in increasing max-norm
    (lexicographic tie-break) is returned along with the observed data.
    """
    n = G.n
    if n < 2:
        raise ValueError("need at least two variables to slice")
    checked = [p for p in primes if p >= min_prime]
    s_proxy, _ = sing_dim(G, None, C=C, budget=budget, proxy_primes=proxy_primes)
    targets = {"proxy": max(-1, s_proxy - 1)}
    for p in checked:
        targets[p] = max(-1, sing_dim(G, p, kmax=kmax, C=C, budget=budget) - 1)
    for m in _primitive_vectors_by_norm(n, M_max):
        L = max(abs(x) for x in m) ** (1.0 / (n - 1))
        if not shortest_orthogonal_gap(m, kappa * L):
            continue
        ok = True
        observed = {}
        for p in checked:
            sec = restrict_to_hyperplane_mod_p(G, m, p)
            sv = sing_dim(sec, p, kmax=kmax, C=C, budget=budget) if sec.n > 1 else -1
            observed[p] = sv
            if sv != targets[p]:
                ok = False
                break
        if ok:
            vals = []
            for p in proxy_primes:
                sec = restrict_to_hyperplane_mod_p(G, m, p)
                vals.append(sing_dim(sec, p, kmax=1, C=C, budget=budget) if sec.n > 1 else -1)
            observed["proxy"] = max(vals)
            if observed["proxy"] != targets["proxy"]:
                ok = False
        if ok:
            return {"m": m, "targets": targets, "observed": observed, "norm": max(abs(x) for x in m)}
    raise SearchExhausted(f"no hyperplane with |m| <= {M_max} passed all checks")


# -- integer lattices ----------------------------------------------------------


def _xgcd(a: int, b: int):
    if b == 0:
        return abs(a), (1 if a >= 0 else -1), 0
    g, x, y = _xgcd(b, a % b)
    return g, y, x - (a // b) * y


def solve_unimodular(m):
    """(g, U) with U unimodular (columns) and m . U = (g, 0, ..., 0)."""
    n = len(m)
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]  # columns U[j]
    U = [list(col) for col in zip(*U)]
    v = [int(x) for x in m]
    for i in range(1, n):
        a, b = v[0], v[i]
        if b == 0:
            continue
        g, s, t = _xgcd(a, b)
        # new col0 = s*col0 + t*coli ; new coli = -(b/g)*col0 + (a/g)*coli
        c0 = [s * U[0][r] + t * U[i][r] for r in range(n)]
        ci = [-(b // g) * U[0][r] + (a // g) * U[i][r] for r in range(n)]
        U[0], U[i] = c0, ci
        v[0], v[i] = g, 0
    if v[0] < 0:
        v[0] = -v[0]
        U[0] = [-t for t in U[0]]
    return v[0], U


def kernel_basis(m):
    """Integer basis of {y: m.y = 0} plus a vector u0 with m.u0 = gcd(m)."""
    g, U = solve_unimodular(m)
    return U[1:], U[0], g


def lll_reduce(basis, delta=Fraction(3, 4)):
    """Exact LLL on a list of integer vectors (rows); returns a new list."""
    b = [list(map(int, v)) for v in basis]
    n = len(b)

    def gso():
        star = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            vi = [Fraction(x) for x in b[i]]
            for j in range(i):
                num = sum(Fraction(b[i][t]) * star[j][t] for t in range(len(vi)))
                den = sum(star[j][t] * star[j][t] for t in range(len(vi)))
                mu[i][j] = num / den if den else Fraction(0)
                vi = [a - mu[i][j] * c for a, c in zip(vi, star[j])]
            star.append(vi)
        return star, mu

    star, mu = gso()
    i = 1
    while i < n:
        for j in range(i - 1, -1, -1):
            if abs(mu[i][j]) > Fraction(1, 2):
                r = round(mu[i][j])
                b[i] = [x - r * y for x, y in zip(b[i], b[j])]
                star, mu = gso()
        Bi = sum(x * x for x in star[i])
        Bi1 = sum(x * x for x in star[i - 1])
        if Bi >= (delta - mu[i][i - 1] ** 2) * Bi1:
            i += 1
        else:
            b[i], b[i - 1] = b[i - 1], b[i]
            star, mu = gso()
            i = max(i - 1, 1)
    return [tuple(v) for v in b]


def babai_reduce(t, basis):
    """Greedily shrink t modulo the lattice rows of `basis` (max-norm aim)."""
    t = list(map(int, t))
    changed = True
    while changed:
        changed = False
        for bvec in basis:
            num = sum(a * b for a, b in zip(t, bvec))
            den = sum(b * b for b in bvec)
            r = round(Fraction(num, den)) if den else 0
            if r:
                t2 = [a - r * b for a, b in zip(t, bvec)]
                if max(map(abs, t2)) <= max(map(abs, t)):
                    t, changed = t2, True
    return tuple(t)


@dataclass
class SectionData:
    m: tuple
    basis: list
    L: float
    t: tuple
    restricted: CubicData
    P: int
    checks: dict


def section_data(g: CubicData, m, P: int, k: int = 0, c_anchor: float = 4.0) -> dict | SectionData:
    """Lattice data for the slice m.x = k and the restricted cubic h(u)."""
    m = tuple(int(x) for x in m)
    n = len(m)
    if g.n != n:
        raise DimensionMismatch("m length does not match the cubic")
    if math.gcd(*[abs(x) for x in m]) != 1:
        raise ValueError("m must be primitive")
    raw, u0, gcd_m = kernel_basis(m)
    basis = lll_reduce(raw) if n > 2 else [tuple(v) for v in raw]
    for e in basis:
        assert sum(a * b for a, b in zip(m, e)) == 0
    L = max(abs(x) for x in m) ** (1.0 / (n - 1))
    if k == 0:
        t = (0,) * n
    else:
        t = babai_reduce([k * x for x in u0], basis)
        if max(map(abs, t)) > c_anchor * max(P, 1):
            raise NoAnchor(f"anchor for m.t={k} has height {max(map(abs, t))} > {c_anchor}*P")
    h = CubicData.from_poly(g.poly.substitute_affine(t, basis))
    # covolume check: det Gram(basis) must equal the squared euclidean norm of m
    gram = [[sum(a * b for a, b in zip(u, v)) for v in basis] for u in basis]
    det = _int_det(gram)
    norm2 = sum(x * x for x in m)
    from .forms import heights  # local import to avoid cycle noise

    hP = float(heights(g.poly, P)[1])
    PL = max(P / L, 1.0)
    h_height = max(
        (abs(c) * PL ** (sum(e) - 3) for e, c in h.poly.coeffs.items()), default=0.0
    )
    checks = {
        "gram_det": det,
        "m_norm2": norm2,
        "covolume_ok": det == norm2,
        "basis_max": max((max(map(abs, e)) for e in basis), default=0),
        "L": L,
        "height_ratio": (h_height / (L ** 3 * hP)) if hP else 0.0,
    }
    return SectionData(m=m, basis=[tuple(e) for e in basis], L=L, t=tuple(t), restricted=h, P=P, checks=checks)


def _int_det(M):
    """Exact determinant of a small integer matrix (fraction-free not needed)."""
    from fractions import Fraction as Fr

    n = len(M)
    A = [[Fr(x) for x in row] for row in M]
    det = Fr(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if A[r][i] != 0), None)
        if piv is None:
            return 0
        if piv != i:
            A[i], A[piv] = A[piv], A[i]
            det = -det
        det *= A[i][i]
        for r in range(i + 1, n):
            f = A[r][i] / A[i][i]
            A[r] = [a - f * b for a, b in zip(A[r], A[i])]
    assert det.denominator == 1
    return int(det)
