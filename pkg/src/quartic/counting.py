"""Exact point counts: weighted counts, projective height counts, counts mod q.

Two backends: brute enumeration over the weight's support box, and a
meet-in-the-middle (mitm) path for diagonal forms that hashes partial sums of
one half of the variables against the other half.  Both are exact; they agree
wherever both run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, MitmNotApplicable
from .forms import IntPolynomial, sym_tensor
from .weights import WeightSpec, box, lattice_ranges

DEFAULT_BUDGET = 40_000_000


@dataclass
class CountResult:
    count: float  # exact int for indicator weights, float for smooth weights
    method: str
    P: float
    elapsed: float
    meta: dict = field(default_factory=dict)


def is_diagonal(F: IntPolynomial) -> bool:
    """True when every monomial involves at most one variable."""
    return all(sum(1 for k in e if k) <= 1 for e in F.coeffs)


def _int64_safe(F: IntPolynomial, ranges) -> bool:
    """Can every partial sum of axis values be held exactly in int64?"""
    bound = 0
    for e, c in F.coeffs.items():
        scale = 1
        for i, k in enumerate(e):
            if k:
                a, b = ranges[i]
                scale *= max(abs(a), abs(b)) ** k
        bound += abs(c) * scale
    return bound < 2 ** 62


def _axis_values(F: IntPolynomial, i: int, xs: np.ndarray) -> np.ndarray:
    """Values of the x_i-part of a diagonal F on integer points xs (exact int64)."""
    out = np.zeros(len(xs), dtype=np.int64)
    for e, c in F.coeffs.items():
        if e[i]:
            out = out + c * xs ** e[i]
    return out


def _merge_half(F, w: WeightSpec, P, idxs, ranges, weighted: bool):
    """Value distribution of the sum of axis parts over the variables `idxs`.

    Returns (sorted distinct int64 values, accumulated weights); weight factors
    come from the separable factors of w when `weighted`.
    """
    factors = w.separable_factors() if weighted else None
    vals = np.array([0], dtype=np.int64)
    wts = np.array([1.0])
    for i in idxs:
        a, b = ranges[i]
        xs = np.arange(a, b + 1, dtype=np.int64)
        axis = _axis_values(F, i, xs)
        if weighted:
            fw = factors[i](xs / P)
            keep = fw > 0
            xs, axis, fw = xs[keep], axis[keep], fw[keep]
        else:
            fw = np.ones(len(xs))
        newv = (vals[:, None] + axis[None, :]).ravel()
        neww = (wts[:, None] * fw[None, :]).ravel()
        vals, inverse = np.unique(newv, return_inverse=True)
        wts = np.bincount(inverse, weights=neww, minlength=len(vals))
    return vals, wts


def weighted_count(
    F: IntPolynomial,
    w: WeightSpec,
    P: float,
    method: str = "auto",
    budget: int = DEFAULT_BUDGET,
) -> CountResult:
    """N_w(F;P) = sum over integer x with F(x)=0 of w(x/P)."""
    if w.n != F.n:
        raise DimensionMismatch("weight dimension != variable count")
    t0 = time.time()
    ranges = lattice_ranges(w, P)
    cells = 1
    for a, b in ranges:
        cells *= max(b - a + 1, 0)
    if method == "auto":
        method = "mitm" if (is_diagonal(F) and w.separable_factors() is not None) else "brute"
        if method == "brute" and cells > budget:
            raise BudgetExceeded(f"{cells} cells exceed budget and mitm not applicable")
    if method == "brute":
        if cells > budget:
            raise BudgetExceeded(f"{cells} cells exceed budget {budget}")
        grids = np.meshgrid(*[np.arange(a, b + 1, dtype=np.int64) for a, b in ranges], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1) if cells else np.zeros((0, F.n), dtype=np.int64)
        use_obj = not _int64_safe(F, ranges)
        vals = np.zeros(len(pts), dtype=object if use_obj else np.int64)
        for e, c in F.coeffs.items():
            term = np.full(len(pts), c, dtype=object if use_obj else np.int64)
            for i, k in enumerate(e):
                if k:
                    col = pts[:, i].astype(object) if use_obj else pts[:, i]
                    term = term * col ** k
            vals = vals + term
        mask = vals == 0
        weights = w.eval_many(pts[mask] / P) if mask.any() else np.zeros(0)
        total = float(weights.sum())
        if not w.smooth:
            total = int(round(total))
        return CountResult(total, "brute", P, time.time() - t0, {"cells": cells})
    if method == "mitm":
        if not is_diagonal(F):
            raise MitmNotApplicable("mitm needs a diagonal form")
        if w.separable_factors() is None:
            raise MitmNotApplicable("mitm needs a separable (or box) weight")
        if not _int64_safe(F, ranges):
            raise BudgetExceeded("mitm partial values overflow int64 at this height")
        weighted = w.smooth
        n = F.n
        left = list(range(n // 2))
        right = list(range(n // 2, n))
        lv, lw = _merge_half(F, w, P, left, ranges, weighted)
        rv, rw = _merge_half(F, w, P, right, ranges, weighted)
        const = F.coeffs.get((0,) * n, 0)
        # join: lv + rv + const = 0  ->  rv = -(lv + const)
        target = -(lv + const)
        pos = np.searchsorted(rv, target, side="left")
        pos = np.clip(pos, 0, len(rv) - 1) if len(rv) else pos
        total = 0.0
        if len(rv):
            hit = rv[pos] == target
            total = float((lw[hit] * rw[pos[hit]]).sum())
        if not weighted:
            total = int(round(total))
        return CountResult(total, "mitm", P, time.time() - t0, {"left": len(lv), "right": len(rv)})
    raise ValueError(f"unknown method {method!r}")


def _nonzero_solution_count(F: IntPolynomial, P: int, budget: int) -> int:
    """#{x != 0, |x| <= P, F(x) = 0} via mitm (diagonal) or brute."""
    w = box(F.n)
    method = "mitm" if is_diagonal(F) else "brute"
    res = weighted_count(F, w, P, method=method, budget=budget)
    return int(res.count) - 1  # remove x = 0


def _mobius_sieve(N: int):
    mu = np.ones(N + 1, dtype=np.int64)
    primes = []
    is_comp = np.zeros(N + 1, dtype=bool)
    for i in range(2, N + 1):
        if not is_comp[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            if i * p > N:
                break
            is_comp[i * p] = True
            if i % p == 0:
                mu[i * p] = 0
                break
            mu[i * p] = -mu[i]
    return mu


def height_count(F: IntPolynomial, P: int, budget: int = DEFAULT_BUDGET) -> CountResult:
    """Projective points of height <= P: primitive vectors mod sign with F = 0."""
    t0 = time.time()
    mu = _mobius_sieve(max(P, 1))
    cache = {}
    total = 0
    for k in range(1, P + 1):
        if mu[k] == 0:
            continue
        m = P // k
        if m == 0:
            break
        if m not in cache:
            cache[m] = _nonzero_solution_count(F, m, budget)
        total += int(mu[k]) * cache[m]
    assert total % 2 == 0, "nonzero primitive solutions come in +- pairs"
    return CountResult(total // 2, "mobius+mitm", P, time.time() - t0, {"pm_classes": True})


# -- counts mod q ----------------------------------------------------------------


def factorint(q: int):
    out = {}
    d = 2
    while d * d <= q:
        while q % d == 0:
            out[d] = out.get(d, 0) + 1
            q //= d
        d += 1
    if q > 1:
        out[q] = out.get(q, 0) + 1
    return out


def _rho_prime_power(F: IntPolynomial, q: int, budget: int) -> int:
    """#{x mod q : F(x) = 0 mod q} for one modulus by diagonal convolution or grid."""
    n = F.n
    if is_diagonal(F):
        # value distribution of each axis part mod q, then cyclic convolution;
        # counts stay below q^n so int64 is exact whenever n*log2(q) < 62
        exact64 = n * math.log2(q) < 62
        dt = np.int64 if exact64 else object
        dist = np.zeros(q, dtype=dt)
        dist[F.coeffs.get((0,) * n, 0) % q] = 1
        shift = (np.arange(q)[:, None] - np.arange(q)[None, :]) % q
        for i in range(n):
            vals = np.zeros(q, dtype=np.int64)
            for e, c in F.coeffs.items():
                if e[i]:
                    lut = np.array([pow(int(x), e[i], q) for x in range(q)], dtype=np.int64)
                    vals = (vals + (c % q) * lut) % q
            hist = np.bincount(vals % q, minlength=q).astype(dt)
            dist = hist[shift] @ dist  # cyclic convolution, exact
        return int(dist[0])
    if q ** n > budget:
        raise BudgetExceeded(f"{q}^{n} exceeds budget {budget}")
    idx = np.arange(q ** n, dtype=np.int64)
    coords = [(idx // q ** i) % q for i in range(n)]
    vals = np.zeros(q ** n, dtype=np.int64)
    for e, c in F.coeffs.items():
        term = np.full(q ** n, c % q, dtype=np.int64)
        for i, k in enumerate(e):
            if k:
                lut = np.array([pow(int(x), k, q) for x in range(q)], dtype=np.int64)
                term = term * lut[coords[i]] % q
        vals = (vals + term) % q
    return int((vals == 0).sum())


def solutions_mod_q(F: IntPolynomial, q: int, budget: int = DEFAULT_BUDGET) -> int:
    """rho_F(q), exact; multiplicative over the prime powers of q (CRT)."""
    if q == 1:
        return 1
    out = 1
    for p, e in factorint(q).items():
        out *= _rho_prime_power(F, p ** e, budget)
    return out


# -- auxiliary trilinear counts ---------------------------------------------------


def _box_pts(R: int):
    return np.arange(-R, R + 1, dtype=np.int64)


def auxiliary_counts(F: IntPolynomial, kind: str, budget: int = DEFAULT_BUDGET, **params) -> int:
    """T(R), N(alpha, P) and S(R, Q) for the trilinear system of F.

    T(R): triples (w,x,y) in [-R,R]^{3n} with all L_i(w;x;y) = 0.
    N(alpha,P): |w|,|x|,|y| <= c*P with ||alpha L_i|| < 1/P for all i.
    S(R,Q): |w|,|x|,|y| <= R with ||alpha L_i|| < 1/Q for all i.
    alpha is a Fraction (exact fractional-part arithmetic).
    """
    T = sym_tensor(F)
    n = F.n
    if kind == "T":
        R = int(params["R"])
        lim = (2 * R + 1) ** (3 * n)
        if lim > budget:
            raise BudgetExceeded(f"T(R) enumeration {lim} exceeds budget")
        pts = _box_pts(R)
        count = 0
        for wv in product(pts.tolist(), repeat=n):
            for xv in product(pts.tolist(), repeat=n):
                # L_i(w;x;y) = sum_l C_il y_l with C from contracting twice
                C = _contract_two(T, wv, xv)
                count += _kernel_count_in_box(C, R)
        return count
    if kind in ("N", "S"):
        from fractions import Fraction

        alpha = params["alpha"]
        if not isinstance(alpha, Fraction):
            alpha = Fraction(alpha)
        if kind == "N":
            P = params["P"]
            c = params.get("c", 1.0)
            R = int(math.floor(c * P))
            thresh = Fraction(1, int(P))
        else:
            R = int(params["R"])
            thresh = Fraction(1, int(params["Q"]))
        lim = (2 * R + 1) ** (3 * n)
        if lim > budget:
            raise BudgetExceeded(f"{kind} enumeration {lim} exceeds budget")
        pts = _box_pts(R)
        count = 0
        for wv in product(pts.tolist(), repeat=n):
            for xv in product(pts.tolist(), repeat=n):
                C = _contract_two(T, wv, xv)
                for yv in product(pts.tolist(), repeat=n):
                    ok = True
                    for i in range(n):
                        Li = sum(C[i][l] * yv[l] for l in range(n))
                        frac = (alpha * Li) % 1
                        dist = min(frac, 1 - frac)
                        if not dist < thresh:
                            ok = False
                            break
                    if ok:
                        count += 1
        return count
    raise ValueError(f"unknown auxiliary count kind {kind!r}")


def _contract_two(T, wv, xv):
    """Matrix C with C[i][l] = sum_{jk} N_ijkl w_j x_k."""
    n = T.n
    C = [[0] * n for _ in range(n)]
    from itertools import permutations as _perms

    for key, val in T.entries.items():
        for p in set(_perms(key)):
            C[p[0]][p[3]] += val * wv[p[1]] * xv[p[2]]
    return C


def _kernel_count_in_box(C, R: int) -> int:
    """#{y in [-R,R]^n : C y = 0} for a small integer matrix C."""
    n = len(C)
    pts = _box_pts(R)
    if n == 1:
        return len(pts) if C[0][0] == 0 else 1
    # generic: enumerate the box (small n only)
    count = 0
    for yv in product(pts.tolist(), repeat=n):
        if all(sum(C[i][l] * yv[l] for l in range(n)) == 0 for i in range(n)):
            count += 1
    return count
