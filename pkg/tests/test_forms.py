import random
from fractions import Fraction
from itertools import combinations_with_replacement, permutations

import pytest

from quartic.errors import (
    DimensionMismatch,
    MalformedExponent,
    NonIntegerCoefficient,
    NotQuarticForm,
)
from quartic.forms import (
    CubicData,
    IntPolynomial,
    dehomogenize,
    difference_cubic,
    evaluate_and_gradient,
    heights,
    hessian,
    hessian_form_rows,
    homogenize,
    parse_form,
    sym_tensor,
    weyl_difference,
)


def random_form(rng, n, degree, bound=9, homogeneous=True):
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
    return IntPolynomial(n, coeffs)


def rand_vec(rng, n, bound=5):
    return [rng.randint(-bound, bound) for _ in range(n)]


class TestParse:
    def test_x1_example(self):
        F = parse_form("4*x1^4 + 9*x2^4 - 8*x3^4 - 8*x4^4")
        assert F.n == 4 and F.degree == 4 and len(F.coeffs) == 4
        assert F.evaluate([1, 1, 1, 1]) == 4 + 9 - 16

    def test_single_monomial(self):
        F = parse_form("x1^4")
        assert F.coeffs == {(4,): 1}

    def test_non_integer_coefficient(self):
        with pytest.raises(NonIntegerCoefficient):
            parse_form("x1^4 + 0.5*x2^4")

    def test_malformed_exponent(self):
        with pytest.raises(MalformedExponent):
            parse_form("x1^-2")
        with pytest.raises(MalformedExponent):
            parse_form("x1^1.5")

    def test_json_roundtrip(self):
        F = parse_form("3*x1^2*x2 - x3 + 7")
        assert IntPolynomial.from_json(F.to_json()) == F

    def test_canonical_order_is_graded(self):
        F = parse_form("x1 + x2^3 + 5")
        degs = [sum(e) for e, _ in F.monomials()]
        assert degs == sorted(degs)


class TestSymTensor:
    def test_pure_power(self):
        assert sym_tensor(parse_form("x1^4")).entries == {(0, 0, 0, 0): 24}

    def test_mixed_monomial(self):
        assert sym_tensor(parse_form("x1^3*x2")).entries == {(0, 0, 0, 1): 6}

    def test_not_quartic(self):
        with pytest.raises(NotQuarticForm):
            sym_tensor(parse_form("x1^3"))
        with pytest.raises(NotQuarticForm):
            sym_tensor(parse_form("x1^4 + x1"))

    def test_reconstruction_oracle(self):
        # oracle: direct polynomial evaluation of 24*F at random points
        rng = random.Random(1)
        for _ in range(10):
            n = rng.randint(1, 4)
            F = random_form(rng, n, 4)
            T = sym_tensor(F)
            R = T.reconstruct()
            for _ in range(5):
                x = rand_vec(rng, n)
                assert R.evaluate(x) == 24 * F.evaluate(x)

    def test_trilinear_example(self):
        assert sym_tensor(parse_form("x1^4")).trilinear([2], [3], [5]) == (720,)

    def test_trilinear_symmetry(self):
        rng = random.Random(2)
        F = random_form(rng, 3, 4)
        T = sym_tensor(F)
        w, x, y = (rand_vec(rng, 3) for _ in range(3))
        vals = {T.trilinear(*p) for p in permutations((tuple(w), tuple(x), tuple(y)))}
        assert len(vals) == 1

    def test_trilinear_is_z_derivative_of_weyl(self):
        # F(w,x,y;z) - sum_i z_i L_i independent of z
        rng = random.Random(3)
        for n in (1, 2, 3):
            F = random_form(rng, n, 4)
            T = sym_tensor(F)
            w, x, y = (rand_vec(rng, n, 3) for _ in range(3))
            L = T.trilinear(w, x, y)
            W = weyl_difference(F, 3, [w, x, y])
            z1, z2 = rand_vec(rng, n), rand_vec(rng, n)
            resid1 = W.evaluate(z1) - sum(L[i] * z1[i] for i in range(n))
            resid2 = W.evaluate(z2) - sum(L[i] * z2[i] for i in range(n))
            assert resid1 == resid2


class TestCalculus:
    def test_evaluate_and_gradient(self):
        v, g = evaluate_and_gradient(parse_form("x1^4"), [2])
        assert (v, g) == (16, (32,))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            parse_form("x1^4 + x2^4").evaluate([1])

    def test_euler_identity(self):
        rng = random.Random(4)
        for _ in range(10):
            n = rng.randint(1, 4)
            F = random_form(rng, n, 4)
            x = rand_vec(rng, n)
            v, g = evaluate_and_gradient(F, x)
            assert sum(a * b for a, b in zip(x, g)) == 4 * v

    def test_hessian_diag_cubic(self):
        H = hessian(parse_form("x1^3 + x2^3"), [1, 2])
        assert H == [[6, 0], [0, 12]]

    def test_hessian_symmetry_identity_cubic(self):
        # H_G(x) y = H_G(y) x for cubic forms
        rng = random.Random(5)
        for _ in range(8):
            n = rng.randint(2, 4)
            G = random_form(rng, n, 3)
            x, y = rand_vec(rng, n), rand_vec(rng, n)
            Hx, Hy = hessian(G, x), hessian(G, y)
            lhs = [sum(Hx[i][j] * y[j] for j in range(n)) for i in range(n)]
            rhs = [sum(Hy[i][j] * x[j] for j in range(n)) for i in range(n)]
            assert lhs == rhs

    def test_hessian_rows_are_linear(self):
        G = parse_form("x1^3 + x1*x2^2")
        rows = hessian_form_rows(G)
        assert all(p.degree <= 1 for row in rows for p in row)

    def test_hessian_decomposition_constant_difference(self):
        # grad^2 g - H_{g0} does not depend on the evaluation point
        rng = random.Random(6)
        for _ in range(6):
            n = rng.randint(2, 3)
            g = random_form(rng, n, 3, homogeneous=False)
            g0 = g.homogeneous_part(3)
            x, y = rand_vec(rng, n), rand_vec(rng, n)
            dx = [
                [a - b for a, b in zip(r1, r2)]
                for r1, r2 in zip(hessian(g, x), hessian(g0, x))
            ]
            dy = [
                [a - b for a, b in zip(r1, r2)]
                for r1, r2 in zip(hessian(g, y), hessian(g0, y))
            ]
            assert dx == dy

    def test_rational_point_hessian(self):
        H = hessian(parse_form("x1^3"), [Fraction(1, 2)])
        assert H == [[3]]


class TestDifference:
    def test_one_var_example(self):
        D = difference_cubic(parse_form("x1^4"), [1])
        assert D.poly == parse_form("4*x1^3 + 6*x1^2 + 4*x1 + 1")
        assert D.g0 == parse_form("4*x1^3")

    def test_zero_shift(self):
        D = difference_cubic(parse_form("x1^4 + x2^4"), [0, 0])
        assert D.poly.coeffs == {}

    def test_cubic_part_is_h_dot_grad(self):
        rng = random.Random(7)
        for _ in range(8):
            n = rng.randint(1, 4)
            F = random_form(rng, n, 4)
            h = rand_vec(rng, n, 3)
            D = difference_cubic(F, h)
            hdg = IntPolynomial(n, {})
            for i, hi in enumerate(h):
                hdg = hdg + hi * F.partial(i)
            assert D.g0 == hdg
            assert D.poly.degree <= 3
            # parts sum back to the polynomial
            assert D.g0 + D.f2 + D.f1 + D.f0 == D.poly

    def test_degree_two_remainder(self):
        rng = random.Random(8)
        F = random_form(rng, 2, 4)
        h = [2, -1]
        D = difference_cubic(F, h)
        assert (D.poly - D.g0).degree <= 2


class TestWeyl:
    def test_zero_point_vanishes(self):
        F = parse_form("x1^4 + x1*x2^3")
        W = weyl_difference(F, 3, [[0, 0], [1, 2], [3, 4]])
        assert W.coeffs == {}

    def test_one_var_coefficient(self):
        F = parse_form("x1^4")
        W = weyl_difference(F, 3, [[1], [1], [1]])
        # coefficient of z equals L_1(1;1;1) = 24
        assert W.coeffs.get((1,)) == 24

    def test_affine_linear_in_z(self):
        # second finite difference in z vanishes
        rng = random.Random(9)
        F = random_form(rng, 2, 4)
        pts = [rand_vec(rng, 2, 3) for _ in range(3)]
        W = weyl_difference(F, 3, pts)
        z = rand_vec(rng, 2)
        e = [1, 0]
        second = (
            W.evaluate([a + 2 * b for a, b in zip(z, e)])
            - 2 * W.evaluate([a + b for a, b in zip(z, e)])
            + W.evaluate(z)
        )
        assert second == 0


class TestHeights:
    def test_inhomogeneous_shrinks(self):
        h, hP = heights(parse_form("x1^2"), 10)
        assert h == 1 and hP == Fraction(1, 10)

    def test_homogeneous_cubic_fixed_point(self):
        g = parse_form("5*x1^3 - 2*x1*x2^2")
        for P in (1, 2, 10, 97):
            h, hP = heights(g, P)
            assert hP == h == 5

    def test_chain_inequality(self):
        rng = random.Random(10)
        for _ in range(10):
            g = random_form(rng, 2, 3, homogeneous=False)
            if g.degree < 3:
                continue
            g0 = g.homogeneous_part(3)
            P = rng.randint(1, 50)
            assert heights(g0, P)[1] <= heights(g, P)[1] <= heights(g, P)[0]

    def test_homogenize_roundtrip(self):
        f = parse_form("x1^3 + x1")
        F = homogenize(f)
        assert F == parse_form("x1^3 + x1*x2^2", n=2)
        assert dehomogenize(F) == f
