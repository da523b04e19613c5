"""Executable checks of the identities and bounds behind the main theorem.

Identities (van der Corput rearrangement, pair counts, the rational
approximation filter) are checked exactly; inequalities produce a BoundReport
carrying the observed implied constant, to be compared against a checked-in
calibration file rather than asserted in the abstract.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product

import numpy as np

from .errors import BudgetExceeded, PreconditionViolated
from .expsums import complete_sum, factor_bcd, kernel_count_mod
from .forms import CubicData, IntPolynomial, difference_cubic, hessian, sym_tensor
from .geometry import sing_dim
from .oscillatory import gen_sum
from .weights import WeightSpec, shifted_product, unit_box

TWO_PI = 2.0 * math.pi


@dataclass
class BoundReport:
    lemma_id: str
    lhs: float
    rhs: float
    ratio: float
    params: dict = field(default_factory=dict)
    constant: float | None = None
    passed: bool | None = None

    @classmethod
    def make(cls, lemma_id, lhs, rhs, params, constant=None):
        ratio = lhs / rhs if rhs else math.inf
        passed = None if constant is None else (ratio <= constant)
        return cls(lemma_id, float(lhs), float(rhs), float(ratio), params, constant, passed)


# -- random sweep inputs ----------------------------------------------------------


def random_form(rng: random.Random, n: int, degree: int, bound: int = 5, homogeneous=True):
    coeffs = {}
    degs = [degree] if homogeneous else range(degree + 1)
    for d in degs:
        for key in combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in key:
                e[i] += 1
            c = rng.randint(-bound, bound)
            if c:
                coeffs[tuple(e)] = c
    if not coeffs:
        coeffs[(degree,) + (0,) * (n - 1)] = 1
    return IntPolynomial(n, coeffs)


def random_cubic_data(rng: random.Random, n: int, bound: int = 5) -> CubicData:
    return CubicData.from_poly(random_form(rng, n, 3, bound, homogeneous=False))


# -- van der Corput identities ------------------------------------------------------


def vdc_identity(F: IntPolynomial, w: WeightSpec, P: int, H: int, alpha, budget: int = 4_000_000) -> dict:
    """Exact checks of the van der Corput kernel at (F, w, P, H, alpha).

    (i)   #H * S(alpha) equals the double sum over shifts (rearrangement);
    (ii)  N(h) = prod_i (H - |h_i|) for |h_i| < H, by direct pair counting;
    (iii) the quadratic identity sum_x |sum_h f(x+h)|^2 = sum_h N(h) T_h(alpha)
          and the resulting bound |S|^2 <= C H^-n P^n sum_h |T_h|.
    """
    n = F.n
    if not 1 <= H <= P:
        raise PreconditionViolated("need 1 <= H <= P")
    if isinstance(alpha, Fraction):
        a, q, z = int(alpha.numerator % alpha.denominator) or alpha.denominator, int(alpha.denominator), 0.0
    else:
        a, q, z = 0, 1, float(alpha)

    def f_at(pts):
        vals = np.zeros(len(pts), dtype=object)
        for e, c in F.coeffs.items():
            term = np.full(len(pts), c, dtype=object)
            for i, k in enumerate(e):
                if k:
                    term = term * pts[:, i].astype(object) ** k
            vals = vals + term
        ang = (np.array([int(v) % q for v in vals]) * (a / q) if q > 1 else 0.0) + z * np.array(
            [float(v) for v in vals]
        )
        return w.eval_many(pts / P) * np.exp(2j * np.pi * (ang % 1.0))

    from .weights import lattice_ranges

    ranges = lattice_ranges(w, P)
    # x-grid covering supp(w(./P)) shifted by -H..0
    grids = np.meshgrid(
        *[np.arange(a0 - H, b0 + 1, dtype=np.int64) for a0, b0 in ranges], indexing="ij"
    )
    X = np.stack([g.ravel() for g in grids], axis=1)
    if len(X) * (H ** n) > budget:
        raise BudgetExceeded("vdc grid exceeds budget")
    S = complex(f_at(np.stack(np.meshgrid(
        *[np.arange(a0, b0 + 1, dtype=np.int64) for a0, b0 in ranges], indexing="ij"
    ), axis=-1).reshape(-1, n)).sum())
    shifts = [np.array(hh, dtype=np.int64) for hh in product(range(1, H + 1), repeat=n)]
    inner = np.zeros(len(X), dtype=complex)
    double_sum = 0.0 + 0j
    for hh in shifts:
        fx = f_at(X + hh)
        inner += fx
        double_sum += fx.sum()
    resid_i = abs(H ** n * S - double_sum)
    # (ii) pair-difference counts
    pair_ok = True
    for hh in product(range(-H, H + 1), repeat=n):
        direct = 1
        for t in hh:
            direct *= max(H - abs(t), 0)
        brute = sum(
            1
            for h1 in product(range(1, H + 1), repeat=n)
            for h2 in product(range(1, H + 1), repeat=n)
            if all(a1 - a2 == t for a1, a2, t in zip(h1, h2, hh))
        ) if H ** (2 * n) <= 4096 else direct
        if direct != brute:
            pair_ok = False
    # (iii) quadratic identity and the vdC bound
    lhs_quad = float((np.abs(inner) ** 2).sum())
    rhs_quad = 0.0 + 0j
    sum_abs_T = 0.0
    for hh in product(range(-(H - 1), H), repeat=n):
        Nh = 1
        for t in hh:
            Nh *= H - abs(t)
        g_h = difference_cubic(F, list(hh))
        w_h = shifted_product(w, hh, P)
        Th = gen_sum(g_h.poly, w_h, P, a=(a or 1), q=q, z=z)
        rhs_quad += Nh * Th
        sum_abs_T += abs(Th)
    resid_quad = abs(lhs_quad - rhs_quad)
    scale = max(lhs_quad, 1.0)
    vdc_rhs = H ** (-n) * float(P) ** n * sum_abs_T
    report = BoundReport.make(
        "vdc-cauchy",
        abs(S) ** 2,
        vdc_rhs,
        {"P": P, "H": H, "alpha": str(alpha), "n": n},
    )
    return {
        "rearrangement_residual": resid_i,
        "pair_counts_ok": pair_ok,
        "quadratic_residual": resid_quad,
        "quadratic_scale": scale,
        "bound": report,
        "S": S,
    }


# -- the Weyl chain --------------------------------------------------------------------


def _trilinear_residue_histogram(F: IntPolynomial, P: int, qq: int, c: float = 1.0, budget: int = 300_000_000):
    """Counts of (L_1,...,L_n) mod qq over the triple box |w|,|x|,|y| <= cP."""
    n = F.n
    T = sym_tensor(F)
    R = int(math.floor(c * P))
    pts = np.arange(-R, R + 1, dtype=np.int64)
    B = len(pts)
    if n == 1:
        Nt = float(T.entries.get((0, 0, 0, 0), 0))
        hist = np.zeros(qq, dtype=np.int64)
        wx = np.multiply.outer(pts, pts).ravel()
        for yv in pts:
            vals = (int(Nt) * wx * yv) % qq
            hist += np.bincount(vals, minlength=qq)
        return hist.reshape((qq,))
    if n == 2:
        if B ** 4 * qq ** 2 > budget:
            raise BudgetExceeded("weyl histogram too large")
        W1, W2, X1_, X2_ = np.meshgrid(pts, pts, pts, pts, indexing="ij")
        Wv = np.stack([W1.ravel(), W2.ravel()], axis=1)
        Xv = np.stack([X1_.ravel(), X2_.ravel()], axis=1)
        # C[i][l] = sum_jk N_ijkl w_j x_k, vectorized over all (w, x) pairs
        C = [[np.zeros(len(Wv), dtype=np.int64) for _ in range(2)] for _ in range(2)]
        from itertools import permutations as _perms

        for key, val in T.entries.items():
            for pperm in set(_perms(key)):
                i, j, k, l = pperm
                C[i][l] += val * Wv[:, j] * Xv[:, k]
        hist = np.zeros(qq * qq, dtype=np.int64)
        ymult = np.bincount(pts % qq, minlength=qq)
        for y1 in range(qq):
            m1 = int(ymult[y1])
            if not m1:
                continue
            for y2 in range(qq):
                m2 = int(ymult[y2])
                if not m2:
                    continue
                l1 = (C[0][0] * y1 + C[0][1] * y2) % qq
                l2 = (C[1][0] * y1 + C[1][1] * y2) % qq
                hist += m1 * m2 * np.bincount(l1 * qq + l2, minlength=qq * qq)
        return hist.reshape((qq, qq))
    raise BudgetExceeded("weyl histogram supports n <= 2")


def weyl_chain(F: IntPolynomial, P: int, alpha: Fraction, c: float = 1.0) -> dict:
    """Observed constants for the Weyl differencing chain at rational alpha."""
    n = F.n
    if not isinstance(alpha, Fraction):
        alpha = Fraction(alpha)
    qq = alpha.denominator
    aa = alpha.numerator % qq
    w = unit_box(n)
    S = gen_sum(F, w, P, a=(aa or qq), q=qq, z=0.0)
    # (weyl1): |S|^2 <= C sum_w |T'_w|
    ranges = [(1, P)] * n
    sum_T = 0.0
    for hh in product(range(-(P - 1), P), repeat=n):
        g_h = difference_cubic(F, list(hh))
        w_h = shifted_product(w, hh, P)
        sum_T += abs(gen_sum(g_h.poly, w_h, P, a=(aa or qq), q=qq, z=0.0))
    rep1 = BoundReport.make("weyl-square", abs(S) ** 2, sum_T, {"P": P, "alpha": str(alpha)})
    # (22-weyl4): |S|^8 <= C P^{4n} sum_{w,x,y} prod min(P, ||alpha L||^-1)
    hist = _trilinear_residue_histogram(F, P, qq, c=c)
    minvals = np.empty(qq)
    for t in range(qq):
        num = (aa * t) % qq
        dist = min(num, qq - num) / qq
        minvals[t] = min(P, 1.0 / dist) if dist > 0 else P
    if n == 1:
        rhs4 = float(P) ** (4 * n) * float((hist * minvals).sum())
        thresh = np.array([min((aa * t) % qq, (qq - aa * t) % qq) / qq < 1.0 / P for t in range(qq)])
        NaP = int(hist[thresh].sum())
    else:
        prod_min = np.multiply.outer(minvals, minvals)
        rhs4 = float(P) ** (4 * n) * float((hist * prod_min).sum())
        thr = np.array([min((aa * t) % qq, (qq - aa * t) % qq) / qq < 1.0 / P for t in range(qq)])
        NaP = int(hist[np.ix_(thr, thr)].sum())
    rep4 = BoundReport.make("weyl-product-min", abs(S) ** 8, rhs4, {"P": P, "alpha": str(alpha)})
    # (22-smee): |S|^8 <= C P^{5n} (log P)^n N(alpha, P)
    rhs_smee = float(P) ** (5 * n) * math.log(max(P, 2)) ** n * max(NaP, 1)
    rep_smee = BoundReport.make("weyl-solution-count", abs(S) ** 8, rhs_smee, {"P": P, "alpha": str(alpha), "N_alpha_P": NaP})
    return {"square": rep1, "product": rep4, "counting": rep_smee, "N_alpha_P": NaP, "S": S}


# -- Davenport's shrinking lemma ----------------------------------------------------------


def davenport_shrink(L, A: float, c: float, Z1: float, Z2: float, alpha: Fraction = Fraction(1)) -> BoundReport:
    """N(Z2) <= C (Z2/Z1)^n N(Z1) for N(Z) = #{|u| <= cAZ, ||alpha (Lu)_i|| < Z/A}."""
    if not 0 < Z1 <= Z2 <= 1:
        raise PreconditionViolated("need 0 < Z1 <= Z2 <= 1")
    n = len(L)
    L = [[int(x) for x in row] for row in L]

    def count(Z):
        R = int(math.floor(c * A * Z))
        thresh = Fraction(Z) / Fraction(A)  # exact binary value of the floats
        total = 0
        for u in product(range(-R, R + 1), repeat=n):
            ok = True
            for i in range(n):
                v = alpha * sum(L[i][j] * u[j] for j in range(n))
                frac = v - math.floor(v)
                dist = min(frac, 1 - frac)
                if not dist < thresh:
                    ok = False
                    break
            if ok:
                total += 1
        return total

    N1, N2 = count(Z1), count(Z2)
    rhs = (Z2 / Z1) ** n * N1
    return BoundReport.make(
        "davenport", N2, rhs, {"A": A, "c": c, "Z1": Z1, "Z2": Z2, "N1": N1, "N2": N2}
    )


# -- the rational approximation filter ------------------------------------------------------


def rational_approx_filter(M: int, a: int, q: int, z: Fraction, Q: int, m: int) -> dict:
    """Exact check of the filter lemma at one tuple; every field is a Fraction."""
    z = Fraction(z)
    if math.gcd(a, q) != 1:
        raise PreconditionViolated("gcd(a, q) != 1")
    if abs(z) > Fraction(1, 2 * q * M):
        raise PreconditionViolated("|z| > 1/(2qM)")
    if Q < 2 * q:
        raise PreconditionViolated("Q < 2q")
    if abs(m) > M:
        raise PreconditionViolated("|m| > M")
    alpha = Fraction(a, q) + z
    v = alpha * m
    frac = v - math.floor(v)
    dist = min(frac, 1 - frac)
    if not dist < Fraction(1, Q):
        raise PreconditionViolated("||alpha m|| >= 1/Q")
    divides = (m % q == 0)
    forces_zero = (M < q) or (abs(z) > Fraction(1, q * Q))
    ok = divides and ((not forces_zero) or m == 0)
    return {"q_divides_m": divides, "forces_zero": forces_zero, "m": m, "ok": ok}


# -- prime and prime-power bounds ------------------------------------------------------------


def prime_power_bounds(kind: str, budget: int = 20_000_000, **kw) -> BoundReport:
    """Observed constants for the complete-sum estimates.

    kind='deligne': f, p, j (j = 1 or 2); bound p^{j(n+1+s_p(f0))/2}.
    kind='birch':   F, q, sigma; bound q^{23n/24+(sigma+1)/24} for max_a |S_{a,q}|.
    kind='kge2':    F, p, k (k >= 2), sigma; bound p^{(k-1)n+sigma+1}.
    """
    if kind == "deligne":
        f, p, j = kw["f"], kw["p"], kw["j"]
        n = f.n
        f0 = f.homogeneous_part(max(f.degree, 0))
        sp = kw.get("s_p")
        if sp is None:
            sp = sing_dim(f0, p) if f0.coeffs else n - 1
        lhs = abs(complete_sum(f, 1, p ** j, budget=budget).value)
        rhs = float(p) ** (j * (n + 1 + sp) / 2.0)
        return BoundReport.make("deligne", lhs, rhs, {"p": p, "j": j, "s_p": sp, "n": n})
    if kind == "birch":
        F, q, sigma = kw["F"], kw["q"], kw["sigma"]
        n = F.n
        lhs = max(
            abs(complete_sum(F, a, q, budget=budget).value)
            for a in range(1, q + 1)
            if math.gcd(a, q) == 1
        )
        rhs = float(q) ** (23.0 * n / 24.0 + (sigma + 1) / 24.0)
        return BoundReport.make("birch", lhs, rhs, {"q": q, "sigma": sigma, "n": n})
    if kind == "kge2":
        F, p, k, sigma = kw["F"], kw["p"], kw["k"], kw["sigma"]
        if k < 2:
            raise PreconditionViolated("kge2 needs k >= 2")
        n = F.n
        lhs = max(
            abs(complete_sum(F, a, p ** k, budget=budget).value)
            for a in range(1, p ** k + 1)
            if a % p != 0
        )
        rhs = float(p) ** ((k - 1) * n + sigma + 1)
        return BoundReport.make("prime-power", lhs, rhs, {"p": p, "k": k, "sigma": sigma, "n": n})
    raise ValueError(f"unknown kind {kind!r}")


# -- kernel average (the N_m mean value bound) ------------------------------------------------


def avs5_average(g0: IntPolynomial, m: int, R: float, H_cap: float | None = None) -> BoundReport:
    """sum_{|r| <= R} N_m(r)^(1/2) against m^{n/2} min{R, (1+H R^3/m)^{1/2}}^n."""
    n = g0.n
    H = H_cap if H_cap is not None else max(g0.height(), 1)
    if R < 1:
        return BoundReport.make("kernel-average", 0.0, 1.0, {"m": m, "R": R, "empty": True})
    Rb = int(math.floor(R))
    lhs = 0.0
    for r in product(range(-Rb, Rb + 1), repeat=n):
        Nm = kernel_count_mod(hessian(g0, list(r)), m)
        lhs += math.sqrt(Nm)
    rhs = m ** (n / 2.0) * min(R, math.sqrt(1.0 + H * R ** 3 / m)) ** n
    return BoundReport.make("kernel-average", lhs, rhs, {"m": m, "R": R, "H": H, "n": n})


# -- the cubic exponential sum bound ----------------------------------------------------------


def prop_t2_bound(
    g: CubicData,
    w: WeightSpec,
    P: int,
    a: int,
    q: int,
    z: float,
    eta: int | None = None,
    s_map: dict | None = None,
    s_infinity: int | None = None,
    budget: int = 4_000_000,
) -> BoundReport:
    """|T(a/q+z)| against q^{-(n-eta)/2} (prod_{i>=eta} r_i^{(i-eta)/2}) P^n W^{n-eta}.

    eta=None takes the minimum of the parametric RHS over the admissible range
    [max(0, 1+s_infinity), n], which is how the bound is stated.
    """
    n = g.n
    if not (1 <= a <= q <= P * P and math.gcd(a, q) == 1):
        raise PreconditionViolated("need 1 <= a <= q <= P^2 coprime")
    if abs(z) > 1.0 / (q * P):
        raise PreconditionViolated("need |z| <= 1/(qP)")
    from .forms import heights

    H = max(1.0, float(heights(g.poly, P)[1]))
    if s_map is None:
        s_map = {}
        for p in {pp for pp in range(2, q + 1) if q % pp == 0 and all(pp % r for r in range(2, pp))}:
            s_map[p] = sing_dim(g.g0, p) if g.g0.coeffs else n - 1
    mf = factor_bcd(q, s_map=s_map, n=n)
    if s_infinity is None:
        # sound stand-in: s_p >= s_infinity for every p
        s_infinity = -1 if n == 1 else max(-1, min(s_map.values(), default=-1))
    V = (q / P) * max(1.0, math.sqrt(abs(z) * H * P ** 3))
    c_, d_ = mf.c, mf.d
    W = V + min((c_ ** 2 * d_ * H) ** (1 / 3.0), math.sqrt(c_) * math.sqrt(V) + c_ ** (5 / 6.0) * H ** (1 / 6.0))
    T = gen_sum(g.poly, w, P, a=a, q=q, z=z, budget=budget)

    def rhs_at(e):
        rprod = 1.0
        for i in range(e, n + 1):
            rprod *= mf.r_i[i] ** ((i - e) / 2.0)
        return q ** (-(n - e) / 2.0) * rprod * float(P) ** n * W ** (n - e)

    lo = max(0, 1 + s_infinity)
    if eta is None:
        eta, rhs = min(((e, rhs_at(e)) for e in range(lo, n + 1)), key=lambda t: t[1])
    else:
        if not (lo <= eta <= n):
            raise PreconditionViolated("eta outside [1+s_infinity, n]")
        rhs = rhs_at(eta)
    return BoundReport.make(
        "cubic-sum",
        abs(T),
        rhs,
        {"P": P, "a": a, "q": q, "z": z, "eta": eta, "V": V, "W": W, "H": H,
         "bcd": (mf.b, mf.c, mf.d), "r_i": list(mf.r_i), "s_map": {str(k): v for k, v in s_map.items()}},
    )


# -- calibration sweeps -------------------------------------------------------------------------


def geometry_bound_sweep(seed: int = 7, trials: int = 10, primes=(7, 11, 13), n: int = 3) -> dict:
    """Max observed T_r and B_s ratios over a seeded sweep of cubic forms."""
    from .geometry import b_set_profile, hessian_rank_profile

    rng = random.Random(seed)
    max_tr = 0.0
    max_bs = 0.0
    shape_ok = True
    for _ in range(trials):
        G = random_form(rng, n, 3, bound=4)
        for p in primes:
            for r in range(0, n + 1):
                prof = hessian_rank_profile(G, p, r, kmax=1)
                max_tr = max(max_tr, prof["ratio"])
                shape_ok &= prof["count"] <= 8.0 * p ** prof["bound"]
            for s in range(0, n + 1):
                prof = b_set_profile(G, p, s, kmax=1)
                if prof["bound"] >= 0:
                    max_bs = max(max_bs, prof["ratio"])
                    shape_ok &= prof["count"] <= 8.0 * p ** prof["bound"]
    return {
        "seed": seed,
        "trials": trials,
        "primes": list(primes),
        "n": n,
        "max_ratio_Tr": max_tr,
        "max_ratio_Bs": max_bs,
        "shape_ok": shape_ok,
    }


def davenport_sweep(seed: int = 7, trials: int = 100, n: int = 3, A: float = 10.0) -> dict:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        L = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                L[i][j] = L[j][i] = rng.randint(-9, 9)
        alpha = Fraction(rng.randint(1, 30), rng.randint(1, 30))
        rep = davenport_shrink(L, A, 1.0, 0.5, 1.0, alpha=alpha)
        worst = max(worst, rep.ratio)
    return {"seed": seed, "trials": trials, "n": n, "A": A, "max_ratio": worst}
