"""Arc decomposition, singular series, local densities, and the main term.

The singular series is handled entirely in exact rational arithmetic: the
unit-restricted sums A_q are integers obtained from solution counts, so S(R)
is a Fraction and identities like 1 + sum_k p^{-kn} A_{p^k} =
p^{-K(n-1)} rho(p^K) are checked with zero tolerance.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .counting import factorint, solutions_mod_q, weighted_count
from .errors import ArcsOverlap, DeltaOutOfRange, Inconclusive
from .expsums import unit_sum_prime_power
from .forms import IntPolynomial
from .oscillatory import QuadratureConfig, singular_integral
from .weights import WeightSpec


# -- rational approximation ------------------------------------------------------


@dataclass(frozen=True)
class RationalApprox:
    a: int
    q: int
    z: Fraction
    alpha: Fraction

    def check(self, Q: int) -> bool:
        ok = 1 <= self.a <= self.q <= Q and math.gcd(self.a, self.q) == 1
        ok &= abs(self.z) * self.q * Q <= 1
        shift = self.alpha - (Fraction(self.a, self.q) + self.z)
        return ok and shift.denominator == 1


def _to_fraction(alpha) -> Fraction:
    if isinstance(alpha, Fraction):
        return alpha
    if isinstance(alpha, int):
        return Fraction(alpha)
    return Fraction(float(alpha))  # exact binary expansion of the double


def dirichlet_approx(alpha, Q: int) -> RationalApprox:
    """alpha = a/q + z (mod 1) with 1 <= a <= q <= Q, gcd(a,q)=1, |z| <= 1/(qQ)."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    alpha = _to_fraction(alpha)
    beta = alpha - math.floor(alpha)
    if beta == 0:
        beta = Fraction(1)  # treat integers as the point 1 = 1/1
    # continued-fraction convergents of beta, last with denominator <= Q
    h_prev2, k_prev2 = 0, 1
    h_prev1, k_prev1 = 1, 0
    x = beta
    a_best, q_best = 0, 1
    while True:
        a0 = math.floor(x)
        h = a0 * h_prev1 + h_prev2
        k = a0 * k_prev1 + k_prev2
        if k > Q:
            break
        a_best, q_best = h, k
        frac = x - a0
        if frac == 0:
            break
        x = 1 / frac
        h_prev2, k_prev2, h_prev1, k_prev1 = h_prev1, k_prev1, h, k
    z = beta - Fraction(a_best, q_best)
    if a_best == 0:
        a_best = q_best  # 0/1 and 1/1 are the same point mod 1
    return RationalApprox(a=a_best, q=q_best, z=z, alpha=alpha)


# -- major/minor arcs --------------------------------------------------------------


@dataclass
class ArcPartition:
    delta: float
    P: float
    q_max: int
    half_width: float
    arcs: list = field(default_factory=list)  # (a, q, center Fraction)

    @property
    def total_measure(self) -> float:
        return 2.0 * self.half_width * len(self.arcs)


def arc_partition(delta: float, P: float, verify: bool = True) -> ArcPartition:
    """Arcs |alpha - a/q| <= P^(delta-4) for q <= P^delta, checked disjoint."""
    if not 0 < delta < 4.0 / 3.0:
        raise DeltaOutOfRange("delta must lie in (0, 4/3)")
    q_max = int(math.floor(P ** delta + 1e-9))
    width = float(P) ** (delta - 4.0)
    arcs = []
    for q in range(1, q_max + 1):
        for a in range(1, q + 1):
            if math.gcd(a, q) == 1:
                arcs.append((a, q, Fraction(a, q)))
    arcs.sort(key=lambda t: t[2])
    if verify:
        centers = [c for (_, _, c) in arcs]
        for c1, c2 in zip(centers, centers[1:]):
            if float(c2 - c1) <= 2 * width:
                raise ArcsOverlap(
                    f"arcs at {c1} and {c2} overlap for delta={delta}, P={P}"
                )
        if len(centers) > 1 and float(centers[0] + 1 - centers[-1]) <= 2 * width:
            raise ArcsOverlap("wrap-around overlap at 0 = 1")
    return ArcPartition(delta=delta, P=P, q_max=q_max, half_width=width, arcs=arcs)


def classify(alpha, delta: float, P: float):
    """('major', a, q) when alpha lies in some arc, else ('minor', None, None)."""
    if not 0 < delta < 4.0 / 3.0:
        raise DeltaOutOfRange("delta must lie in (0, 4/3)")
    beta = _to_fraction(alpha)
    beta -= math.floor(beta)
    q_max = int(math.floor(P ** delta + 1e-9))
    width = Fraction(float(P) ** (delta - 4.0))
    for q in range(1, q_max + 1):
        a = round(beta * q)
        aa = int(a)
        cand = Fraction(aa, q)
        if abs(beta - cand) <= width:
            if aa == 0:
                aa, qq = 1, 1
            else:
                g = math.gcd(aa, q)
                aa, qq = aa // g, q // g
            return ("major", aa, qq)
    return ("minor", None, None)


# -- singular series ----------------------------------------------------------------


class SeriesCache:
    """Per-form memo of rho(q) and A_q so sweeps over R reuse the counts."""

    def __init__(self, F: IntPolynomial, budget: int = 40_000_000):
        self.F = F
        self.budget = budget
        self.rho: dict = {}
        self.aq: dict = {}

    def rho_at(self, q: int) -> int:
        if q not in self.rho:
            self.rho[q] = solutions_mod_q(self.F, q, budget=self.budget)
        return self.rho[q]

    def a_at(self, q: int) -> int:
        if q not in self.aq:
            out = 1
            for p, e in factorint(q).items():
                key = p ** e
                if key not in self.aq:
                    n = self.F.n
                    self.aq[key] = p ** e * self.rho_at(p ** e) - p ** (
                        n + e - 1
                    ) * self.rho_at(p ** (e - 1))
                out *= self.aq[key]
            self.aq[q] = out
        return self.aq[q]


def singular_series(F: IntPolynomial, R: float, cache: SeriesCache | None = None) -> Fraction:
    """S(R) = sum_{q <= R} q^-n A_q as an exact rational."""
    cache = cache or SeriesCache(F)
    total = Fraction(0)
    n = F.n
    for q in range(1, int(math.floor(R)) + 1):
        total += Fraction(cache.a_at(q), q ** n)
    return total


def euler_view(F: IntPolynomial, R: float, cache: SeriesCache | None = None) -> Fraction:
    """prod_p (1 + sum_{p^k <= R} p^-kn A_{p^k}), the Euler grouping of S."""
    cache = cache or SeriesCache(F)
    n = F.n
    out = Fraction(1)
    for p in range(2, int(math.floor(R)) + 1):
        if any(p % r == 0 for r in range(2, p)):
            continue
        local = Fraction(1)
        k = 1
        while p ** k <= R:
            local += Fraction(cache.a_at(p ** k), p ** (k * n))
            k += 1
        out *= local
    return out


@dataclass
class LocalFactor:
    p: int
    K: int
    partial_sums: list  # chi_p(k) = sum_{j<=k} p^-jn A_{p^j}, exact Fractions
    densities: list  # p^{-k(n-1)} rho(p^k), exact Fractions
    identity_ok: bool


def local_factor(F: IntPolynomial, p: int, K: int, budget: int = 40_000_000) -> LocalFactor:
    """Exact check of 1 + chi_p(K) = p^{-K(n-1)} rho(p^K) for every K' <= K."""
    n = F.n
    chi = []
    dens = []
    acc = Fraction(0)
    ok = True
    for k in range(1, K + 1):
        acc += Fraction(unit_sum_prime_power(F, p, k, budget=budget), p ** (k * n))
        chi.append(acc)
        rho = solutions_mod_q(F, p ** k, budget=budget)
        dk = Fraction(rho, p ** (k * (n - 1)))
        dens.append(dk)
        ok &= (1 + acc) == dk
    return LocalFactor(p=p, K=K, partial_sums=chi, densities=dens, identity_ok=ok)


# -- main term ------------------------------------------------------------------------


def main_term_pipeline(
    F: IntPolynomial,
    w: WeightSpec,
    P: float,
    R_series: float,
    R_integral: float,
    cfg: QuadratureConfig | None = None,
    cache: SeriesCache | None = None,
    budget: int = 40_000_000,
) -> dict:
    """N_w(F;P) against the model S(R_series) * J(R_integral) * P^{n-4}."""
    cfg = cfg or QuadratureConfig()
    n = F.n
    count = weighted_count(F, w, P, budget=budget)
    S = singular_series(F, R_series, cache=cache)
    J = singular_integral(F, w, R_integral, cfg=cfg)
    main = float(S) * J * float(P) ** (n - 4)
    ratio = count.count / main if main else math.inf
    return {
        "N_omega": count.count,
        "count_method": count.method,
        "S": S,
        "S_float": float(S),
        "J": J,
        "P": P,
        "main": main,
        "ratio": ratio,
    }


# -- local solubility ------------------------------------------------------------------


def _val_p(x: int, p: int, cap: int = 64) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def hensel_criterion(F: IntPolynomial, x, p: int, cap: int = 64):
    """(ok, vF, vGrad): ok when v_p(F(x)) > 2 min_i v_p(dF/dx_i(x))."""
    vF = _val_p(F.evaluate(list(x)), p, cap)
    vg = min(_val_p(gi, p, cap) for gi in F.gradient_at(list(x)))
    return vF > 2 * vg, vF, vg


def local_witness(
    F: IntPolynomial,
    p: int,
    k_max: int = 12,
    cap: int = 20000,
    seed: int = 1,
):
    """Search x (not all = 0 mod p) that Hensel-lifts to a p-adic zero of F.

    Returns (x, k) on success; raises Inconclusive when the budget runs out.
    Level k holds solutions of F = 0 mod p^k; each is lifted through the
    linearization F(x + p^k d) = F(x) + p^k d.grad F(x) mod p^{k+1}.
    """
    n = F.n
    rng = random.Random(seed * 1_000_003 + p)
    # level 1 candidates
    level = []
    if p ** n <= 200_000:
        import numpy as _np

        idx = _np.arange(p ** n, dtype=_np.int64)
        coords = [(idx // p ** i) % p for i in range(n)]
        vals = _np.zeros(p ** n, dtype=_np.int64)
        for e, c in F.coeffs.items():
            term = _np.full(p ** n, c % p, dtype=_np.int64)
            for i, k in enumerate(e):
                if k:
                    lut = _np.array([pow(t, k, p) for t in range(p)], dtype=_np.int64)
                    term = term * lut[coords[i]] % p
            vals = (vals + term) % p
        sols = _np.nonzero(vals == 0)[0]
        for s in sols[: 10 * cap]:
            x = tuple(int((s // p ** i) % p) for i in range(n))
            if any(x):
                level.append(x)
    else:
        seen = set()
        for _ in range(60 * p):
            x = tuple(rng.randrange(p) for _ in range(n))
            if not any(x) or x in seen:
                continue
            seen.add(x)
            if F.evaluate(list(x)) % p == 0:
                level.append(x)
    from itertools import product as _product

    for k in range(1, k_max + 1):
        for x in level:
            ok, vF, vg = hensel_criterion(F, x, p)
            # the Newton limit stays nonzero when some coordinate valuation
            # is at most vg (coordinates move by multiples of p^{vF - vg})
            if ok and min(_val_p(xi, p) for xi in x) <= vg:
                return tuple(x), k
        # lift to level k+1 through F(x + p^k d) = F(x) + p^k d.grad F(x)
        pk = p ** k
        nxt = []
        seen = set()
        for x in level:
            c = (F.evaluate(list(x)) // pk) % p
            grad = [gi % p for gi in F.gradient_at(list(x))]
            support = [i for i, gi in enumerate(grad) if gi]
            if not support:
                if c % p != 0:
                    continue  # no lift on this branch
                if p ** n <= 4096:
                    deltas = list(_product(range(p), repeat=n))
                else:
                    deltas = [tuple(rng.randrange(p) for _ in range(n)) for _ in range(64)]
            else:
                i0 = support[0]
                inv = pow(grad[i0], -1, p)
                frees = [j for j in range(n) if j != i0]
                if p ** len(frees) <= 4096:
                    free_iter = _product(range(p), repeat=len(frees))
                else:
                    free_iter = (
                        tuple(rng.randrange(p) for _ in frees) for _ in range(64)
                    )
                deltas = []
                for fv in free_iter:
                    d = [0] * n
                    for j, val in zip(frees, fv):
                        d[j] = val
                    rest = sum(grad[j] * d[j] for j in frees)
                    d[i0] = (-(c + rest) * inv) % p
                    deltas.append(tuple(d))
            for d in deltas:
                y = tuple(x[i] + pk * d[i] for i in range(n))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                if len(nxt) >= cap:
                    break
            if len(nxt) >= cap:
                break
        level = nxt
        if not level:
            break
    raise Inconclusive(f"no Hensel witness mod {p} within k <= {k_max}")


def real_point_probe(F: IntPolynomial, budget: int = 2000, seed: int = 1):
    """Nonsingular real zero on the unit sphere via sign change + bisection."""
    n = F.n
    rng = random.Random(seed)
    probes = []
    for i in range(n):
        e = [0.0] * n
        e[i] = 1.0
        probes.append(tuple(e))
    while len(probes) < budget:
        v = [rng.gauss(0, 1) for _ in range(n)]
        norm = math.sqrt(sum(t * t for t in v))
        probes.append(tuple(t / norm for t in v))
    vals = [float(F.evaluate(list(x))) for x in probes]
    pos = next((i for i, v in enumerate(vals) if v > 0), None)
    neg = next((i for i, v in enumerate(vals) if v < 0), None)
    zero = next((i for i, v in enumerate(vals) if v == 0), None)
    if zero is not None and any(F.gradient_at(list(probes[zero]))):
        return True, probes[zero]
    if pos is None or neg is None:
        return False, None
    # bisect along the great-circle-ish segment between the two probes
    xa, xb = probes[pos], probes[neg]
    for _ in range(200):
        mid = tuple((a + b) / 2 for a, b in zip(xa, xb))
        v = float(F.evaluate(list(mid)))
        if v == 0.0:
            break
        if v > 0:
            xa = mid
        else:
            xb = mid
    mid = tuple((a + b) / 2 for a, b in zip(xa, xb))
    grad = F.gradient_at(list(mid))
    gnorm = math.sqrt(sum(float(g) ** 2 for g in grad))
    return gnorm > 1e-9, mid


def hasse_report(
    F: IntPolynomial,
    p_max: int = 100,
    k_max: int = 12,
    real_probe_budget: int = 2000,
    seed: int = 1,
) -> dict:
    """Local solubility table: R plus every prime p <= p_max."""
    from .geometry import primes_up_to

    real_ok, real_witness = real_point_probe(F, budget=real_probe_budget, seed=seed)
    locals_ = {}
    all_ok = real_ok
    for p in primes_up_to(p_max):
        try:
            x, k = local_witness(F, p, k_max=k_max, seed=seed)
            locals_[p] = {"soluble": True, "witness": x, "level": k}
        except Inconclusive as exc:
            locals_[p] = {"soluble": None, "note": str(exc)}
            all_ok = False
    return {
        "real": {"soluble": real_ok, "witness": real_witness},
        "primes": locals_,
        "everywhere_locally_soluble": all_ok and all(
            rec["soluble"] for rec in locals_.values()
        ),
    }
