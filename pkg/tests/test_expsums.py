import cmath
import math
import random
from itertools import product

import numpy as np
import pytest

from quartic.counting import factorint, solutions_mod_q
from quartic.errors import NotCoprime
from quartic.expsums import (
    complete_sum,
    factor_bcd,
    kernel_count_mod,
    mn_counts,
    s_va,
    smith_diagonal,
    split_multiplicative,
    sum_over_units,
    sum_over_units_float,
    twisted_sum,
    unit_sum_prime_power,
)
from quartic.forms import CubicData, IntPolynomial, hessian, parse_form
from quartic.verify import random_cubic_data, random_form


class TestCompleteSum:
    def test_x4_mod2(self):
        assert abs(complete_sum(parse_form("x1^4"), 1, 2).value) < 1e-12

    def test_q1(self):
        assert complete_sum(parse_form("x1^4 + x2^4"), 1, 1).value == 1

    def test_x4_mod5(self):
        got = complete_sum(parse_form("x1^4"), 1, 5).value
        assert abs(got - (1 + 4 * cmath.exp(2j * cmath.pi / 5))) < 1e-12

    def test_crt_vs_direct_sweep(self):
        rng = random.Random(0)
        for q in range(2, 61):
            F = random_form(rng, 2, 4, bound=5)
            a = next(t for t in range(1, q + 1) if math.gcd(t, q) == 1)
            d = complete_sum(F, a, q, method="direct").value
            c = complete_sum(F, a, q, method="crt").value
            assert abs(d - c) <= 1e-9 * q ** 2

    def test_conjugation(self):
        rng = random.Random(1)
        F = random_form(rng, 2, 4, bound=5)
        for q in (7, 12, 25):
            for a in range(1, q):
                if math.gcd(a, q) == 1:
                    s1 = complete_sum(F, a, q).value
                    s2 = complete_sum(F, q - a, q).value
                    assert abs(s2 - s1.conjugate()) <= 1e-9 * q ** 2


class TestUnitSums:
    def test_q1(self):
        assert sum_over_units(parse_form("x1^4"), 1) == 1

    def test_prime_identity(self):
        rng = random.Random(2)
        F = random_form(rng, 2, 4, bound=5)
        for p in (3, 5, 7, 11):
            assert unit_sum_prime_power(F, p, 1) == p * solutions_mod_q(F, p) - p ** 2

    def test_a2_vanishes(self):
        assert sum_over_units(parse_form("x1^4 + x2^4"), 2) == 0

    def test_exact_vs_float(self):
        rng = random.Random(3)
        F = random_form(rng, 2, 4, bound=4)
        for q in (2, 3, 4, 6, 8, 9, 12, 18):
            exact = sum_over_units(F, q)
            approx = sum_over_units_float(F, q)
            ndiv = len([d for d in range(1, q + 1) if q % d == 0])
            assert abs(exact - approx) <= 1e-6 * q ** 2 * ndiv

    def test_mobius_route_matches_multiplicative(self):
        # A_q from inclusion-exclusion over divisors, no multiplicativity used
        rng = random.Random(4)
        F = random_form(rng, 2, 4, bound=3)
        n = F.n
        for q in (6, 12, 20, 36):
            direct = 0
            for qp in range(1, q + 1):
                if q % qp:
                    continue
                mu_arg = q // qp
                fac = factorint(mu_arg)
                if any(e > 1 for e in fac.values()):
                    continue
                mu = (-1) ** len(fac)
                direct += mu * (q // qp) ** n * qp * solutions_mod_q(F, qp)
            assert direct == sum_over_units(F, q)


class TestTwisted:
    def test_v0_equals_complete(self):
        rng = random.Random(5)
        g = random_cubic_data(rng, 2, bound=4)
        for q in (5, 8, 9):
            t = twisted_sum(g, 2 if q != 8 else 3, q, [0, 0]).value
            s = complete_sum(g.poly, 2 if q != 8 else 3, q).value
            assert abs(t - s) < 1e-9 * q ** 2

    def test_x3_mod2_twisted(self):
        g = CubicData.from_poly(parse_form("x1^3"))
        assert abs(twisted_sum(g, 1, 2, [1]).value - 2) < 1e-12

    def test_crt_agrees(self):
        rng = random.Random(6)
        for q in (6, 10, 12, 15, 30):
            g = random_cubic_data(rng, 2, bound=3)
            v = [rng.randint(-3, 3) for _ in range(2)]
            a = next(t for t in range(1, q) if math.gcd(t, q) == 1)
            d = twisted_sum(g, a, q, v, method="direct").value
            c = twisted_sum(g, a, q, v, method="crt").value
            assert abs(d - c) <= 1e-9 * q ** 2


class TestSplitMultiplicative:
    def test_s1_trivial(self):
        g = CubicData.from_poly(parse_form("x1^3"))
        rep = split_multiplicative(g, 1, 5, 1, [0])
        assert rep["right"] == 1 and rep["residual"] < 1e-12

    def test_example_2_3(self):
        g = CubicData.from_poly(parse_form("x1^3"))
        rep = split_multiplicative(g, 1, 2, 3, [0])
        assert rep["residual"] <= 1e-9

    def test_not_coprime(self):
        g = CubicData.from_poly(parse_form("x1^3"))
        with pytest.raises(NotCoprime):
            split_multiplicative(g, 1, 4, 6, [0])

    def test_random_trials(self):
        rng = random.Random(7)
        for _ in range(30):
            n = rng.choice([1, 2])
            g = random_cubic_data(rng, n, bound=5)
            while True:
                r, s = rng.randint(2, 60), rng.randint(2, 60)
                if math.gcd(r, s) == 1 and (r * s) ** n <= 4_000_000:
                    break
            v = [rng.randint(-5, 5) for _ in range(n)]
            a = rng.randrange(1, r * s)
            rep = split_multiplicative(g, a, r, s, v)
            assert rep["residual"] <= 1e-6 * rep["scale"]


class TestFactorBCD:
    @pytest.mark.parametrize(
        "q,b,c,d",
        [(72, 9, 2, 2), (32, 1, 4, 2), (16, 1, 4, 1), (1, 1, 1, 1), (360, 45, 2, 2)],
    )
    def test_examples(self, q, b, c, d):
        mf = factor_bcd(q)
        assert (mf.b, mf.c, mf.d) == (b, c, d)
        assert mf.verify()

    def test_sweep(self):
        for q in range(1, 20001):
            mf = factor_bcd(q)
            assert mf.q == mf.b * mf.c ** 2 * mf.d
            assert mf.c % mf.d == 0
        # full invariant check on every q <= 10^6 via a smallest-prime sieve
        N = 1_000_000
        spf = np.arange(N + 1, dtype=np.int64)
        for p in range(2, int(N ** 0.5) + 1):
            if spf[p] == p:
                sl = spf[p * p :: p]
                sl[sl == np.arange(p * p, N + 1, p)] = p
        bad = 0
        for q in range(2, N + 1):
            b = d = 1
            c2 = 1
            m = q
            while m > 1:
                p = int(spf[m])
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                if e <= 2:
                    b *= p ** e
                elif e % 2:
                    d *= p
                    c2 *= p ** (e - 1)
                else:
                    c2 *= p ** e
            c = math.isqrt(c2)
            if not (c * c == c2 and q == b * c * c * d and c % d == 0 and math.gcd(b, c * c * d) == 1):
                bad += 1
        assert bad == 0
        # spot-check d0 and the square-full witness on larger moduli
        rng = random.Random(8)
        for _ in range(500):
            q = rng.randint(20001, 1_000_000)
            assert factor_bcd(q).verify()

    def test_classified_tables(self):
        mf = factor_bcd(72, s_map={2: 0, 3: -1}, n=3)
        # r_i = prod of p^e || bd with s_p = i - 1; bd = 9 * 2 = 18
        assert mf.r_i[0] == 9  # s_3 = -1
        assert mf.r_i[1] == 2  # s_2 = 0
        assert math.prod(mf.r_i) == mf.b * mf.d


class TestKernelCounts:
    def test_smith_diag(self):
        assert smith_diagonal([[2, 0], [0, 3]]) == [1, 6] or smith_diagonal(
            [[2, 0], [0, 3]]
        ) == [2, 3]

    def test_kernel_vs_enumeration(self):
        rng = random.Random(9)
        for _ in range(40):
            n = rng.randint(1, 3)
            M = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(n)]
            m = rng.randint(1, 12)
            brute = 0
            for y in product(range(m), repeat=n):
                if all(sum(M[i][j] * y[j] for j in range(n)) % m == 0 for i in range(n)):
                    brute += 1
            assert kernel_count_mod(M, m) == brute

    def test_mn_examples(self):
        g = CubicData.from_poly(parse_form("x1^3 + x2^3"))
        assert mn_counts(g, (1, 1), 1) == (1, 1)
        assert mn_counts(g, (1, 1), 5) == (1, 1)  # invertible Hessian mod 5
        # at (1,0) the Hessian is diag(6,0), zero mod 3, so both kernels fill F_3^2
        assert mn_counts(g, (1, 0), 3) == (9, 9)

    def test_mn_multiplicative(self):
        rng = random.Random(10)
        for _ in range(20):
            g = random_cubic_data(rng, 2, bound=4)
            x = [rng.randint(-4, 4) for _ in range(2)]
            for m1, m2 in [(2, 3), (4, 9), (5, 8)]:
                M1, N1 = mn_counts(g, x, m1)
                M2, N2 = mn_counts(g, x, m2)
                M12, N12 = mn_counts(g, x, m1 * m2)
                assert (M12, N12) == (M1 * M2, N1 * N2)

    def test_N_symmetry(self):
        # N_m(x) counts y with H(x) y = 0, equivalently H(y) x = 0
        rng = random.Random(11)
        for _ in range(10):
            g = random_cubic_data(rng, 2, bound=3)
            x = [rng.randint(-3, 3) for _ in range(2)]
            m = rng.randint(1, 9)
            brute = 0
            for y in product(range(m), repeat=2):
                H = hessian(g.g0, list(y))
                if all(sum(H[i][j] * x[j] for j in range(2)) % m == 0 for i in range(2)):
                    brute += 1
            assert mn_counts(g, x, m)[1] == brute


class TestSVa:
    def naive(self, g, V, a, v0, c, d):
        n = g.n
        grads = [g.poly.partial(i) for i in range(n)]
        total = 0.0
        vr = [range(math.ceil(v0[i] - V), math.floor(v0[i] + V) + 1) for i in range(n)]
        for v in product(*vr):
            for idx in range(c ** n):
                r = tuple((idx // c ** i) % c for i in range(n))
                if all((a * grads[i].evaluate(r) + v[i]) % c == 0 for i in range(n)):
                    total += math.sqrt(kernel_count_mod(hessian(g.poly, r), d)) if d > 1 else 1.0
        return total

    def test_against_naive(self):
        rng = random.Random(12)
        for _ in range(10):
            n = rng.choice([1, 2])
            g = random_cubic_data(rng, n, bound=3)
            c = rng.choice([1, 2, 3, 4, 6])
            d = rng.choice([e for e in (1, 2, 3) if c % e == 0])
            V = rng.uniform(0.5, 3.5)
            a = rng.randrange(1, 10)
            v0 = [rng.randint(-4, 4) for _ in range(n)]
            got = s_va(g, V, a, v0, c, d)["value"]
            want = self.naive(g, V, a, v0, c, d)
            assert abs(got - want) <= 1e-9 * max(1.0, abs(want))

    def test_unit_box_count(self):
        rng = random.Random(13)
        g = random_cubic_data(rng, 2, bound=3)
        assert s_va(g, 2.5, 1, [0, 0], 1, 1)["value"] == 25

    def test_empty_window(self):
        rng = random.Random(14)
        g = random_cubic_data(rng, 2, bound=3)
        assert s_va(g, 0.2, 1, [10 ** 6 + 0.5, 3], 5, 1)["value"] == 0
