import random
from fractions import Fraction

import pytest

from quartic.counting import (
    auxiliary_counts,
    height_count,
    is_diagonal,
    solutions_mod_q,
    weighted_count,
)
from quartic.errors import MitmNotApplicable
from quartic.forms import parse_form
from quartic.verify import random_form
from quartic.weights import box, bump, separable_bump

X1 = parse_form("4*x1^4 + 9*x2^4 - 8*x3^4 - 8*x4^4")


class TestWeightedCount:
    def test_posdef_off_origin(self):
        w = bump((0.5, 0.5), 0.2)
        assert weighted_count(parse_form("x1^4 + x2^4"), w, 10, method="brute").count == 0

    def test_box_21_points(self):
        res = weighted_count(parse_form("x1^4 - x2^4"), box(2), 5, method="brute")
        assert res.count == 21

    def test_mitm_equals_brute_box(self):
        res_b = weighted_count(parse_form("x1^4 - x2^4"), box(2), 5, method="brute")
        res_m = weighted_count(parse_form("x1^4 - x2^4"), box(2), 5, method="mitm")
        assert res_b.count == res_m.count

    def test_mitm_equals_brute_diag4(self):
        F = parse_form("x1^4 + x2^4 - x3^4 - x4^4")
        b = weighted_count(F, box(4), 8, method="brute").count
        m = weighted_count(F, box(4), 8, method="mitm").count
        assert b == m

    def test_mitm_weighted_matches_brute(self):
        F = parse_form("x1^4 - x2^4")
        w = separable_bump((0.0, 0.0), 0.8)
        b = weighted_count(F, w, 12, method="brute").count
        m = weighted_count(F, w, 12, method="mitm").count
        assert abs(b - m) <= 1e-9 * max(1.0, abs(b))

    def test_mitm_random_diagonals(self):
        rng = random.Random(0)
        for _ in range(6):
            coeffs = [rng.choice([-3, -2, -1, 1, 2, 3]) for _ in range(3)]
            F = parse_form(
                f"{coeffs[0]}*x1^4 + {coeffs[1]}*x2^4 + {coeffs[2]}*x3^4"
            )
            b = weighted_count(F, box(3), 6, method="brute").count
            m = weighted_count(F, box(3), 6, method="mitm").count
            assert b == m

    def test_mitm_rejects_nondiagonal(self):
        with pytest.raises(MitmNotApplicable):
            weighted_count(parse_form("x1^3*x2"), box(2), 5, method="mitm")

    def test_mitm_rejects_radial_bump(self):
        with pytest.raises(MitmNotApplicable):
            weighted_count(parse_form("x1^4 - x2^4"), bump((0, 0), 0.5), 5, method="mitm")


class TestHeightCount:
    def test_x1_empty(self):
        assert height_count(X1, 100).count == 0

    def test_small_diag_has_111(self):
        assert height_count(parse_form("x1^4 + x2^4 - 2*x3^4"), 1).count >= 1

    def test_pm_classes_n2(self):
        assert height_count(parse_form("x1^4 - x2^4"), 7).count == 2

    def test_monotone_in_P(self):
        F = parse_form("x1^4 + x2^4 - 2*x3^4")
        counts = [height_count(F, P).count for P in (1, 2, 4, 8)]
        assert counts == sorted(counts)


class TestSolutionsModQ:
    def test_examples(self):
        assert solutions_mod_q(parse_form("x1^4 + x2^4"), 2) == 2
        assert solutions_mod_q(parse_form("x1^4 + x2^4"), 1) == 1

    def test_multiplicative(self):
        rng = random.Random(1)
        for _ in range(5):
            F = random_form(rng, 2, 4, bound=4)
            assert solutions_mod_q(F, 6) == solutions_mod_q(F, 2) * solutions_mod_q(F, 3)

    def test_diagonal_vs_grid(self):
        rng = random.Random(2)
        F = parse_form("2*x1^4 + 3*x2^4 + x3^4")
        for q in (2, 3, 4, 5, 8, 9, 25):
            conv = solutions_mod_q(F, q)
            brute = sum(
                1
                for x1 in range(q)
                for x2 in range(q)
                for x3 in range(q)
                if (2 * x1 ** 4 + 3 * x2 ** 4 + x3 ** 4) % q == 0
            )
            assert conv == brute

    def test_lifting_bound(self):
        rng = random.Random(3)
        F = random_form(rng, 2, 4, bound=4)
        for p in (2, 3, 5):
            for k in (1, 2):
                assert solutions_mod_q(F, p ** (k + 1)) <= p ** 2 * solutions_mod_q(F, p ** k)

    def test_is_diagonal(self):
        assert is_diagonal(parse_form("x1^4 + 7*x2^4 + 3"))
        assert not is_diagonal(parse_form("x1^3*x2"))


class TestAuxiliaryCounts:
    def test_T_closed_form_n1(self):
        F = parse_form("x1^4")
        for R in (1, 2, 3):
            got = auxiliary_counts(F, "T", R=R)
            assert got == (2 * R + 1) ** 3 - (2 * R) ** 3

    def test_N_alpha0_everything(self):
        F = parse_form("x1^4")
        P = 4
        got = auxiliary_counts(F, "N", alpha=Fraction(0, 1), P=P)
        assert got == (2 * P + 1) ** 3

    def test_S_contains_T(self):
        F = parse_form("x1^4")
        R, Q = 2, 9
        T = auxiliary_counts(F, "T", R=R)
        S = auxiliary_counts(F, "S", alpha=Fraction(1, 7), R=R, Q=Q)
        assert S >= T

    def test_T_growth_bound(self):
        # #T(R) <= C R^{2n + sigma + 1} with sigma = -1 for a nonsingular form
        F = parse_form("x1^4")
        ratios = []
        for R in (1, 2, 3, 4):
            ratios.append(auxiliary_counts(F, "T", R=R) / R ** 2)
        # the exponent is right: the observed constant does not grow with R
        assert max(ratios) == ratios[0] and ratios[0] <= 24

    def test_T_n2_matches_brute(self):
        from itertools import product as prod

        from quartic.forms import sym_tensor

        rng = random.Random(4)
        F = random_form(rng, 2, 4, bound=2)
        T = sym_tensor(F)
        R = 1
        brute = 0
        pts = range(-R, R + 1)
        for w in prod(pts, repeat=2):
            for x in prod(pts, repeat=2):
                for y in prod(pts, repeat=2):
                    if T.trilinear(list(w), list(x), list(y)) == (0, 0):
                        brute += 1
        assert auxiliary_counts(F, "T", R=R) == brute


class TestBudgets:
    def test_brute_budget(self):
        from quartic.errors import BudgetExceeded

        with pytest.raises(BudgetExceeded):
            weighted_count(parse_form("x1^3*x2"), box(2), 10 ** 5, method="brute", budget=100)

    def test_rho_budget(self):
        from quartic.errors import BudgetExceeded

        with pytest.raises(BudgetExceeded):
            solutions_mod_q(parse_form("x1^3*x2 + x2^4"), 97, budget=100)
