#!/usr/bin/env python3
"""The circle-method main term S * J * P^{n-4} against a real count.

For the n = 8 form F = x1^4+..+x4^4 - x5^4-..-x8^4 and a separable bump
centred at a real zero, the weighted count is computed exactly by
meet-in-the-middle and compared with the product of the exact singular
series and the numerically integrated singular integral.

The prescribed centre sits on the 4-dimensional subspaces
{x_{i+4} = x_{sigma(i)}} inside the hypersurface, whose lattice points
contribute at the same order P^4 as the main term at n = 8; the script
therefore also prints the count with the permutation family split off, which
is the part the main term actually models.
"""

import math
from collections import defaultdict

from quartic.circle import SeriesCache, singular_series
from quartic.counting import weighted_count
from quartic.forms import parse_form
from quartic.oscillatory import singular_integral
from quartic.weights import gamma_bump, separable_bump

F8 = parse_form("x1^4 + x2^4 + x3^4 + x4^4 - x5^4 - x6^4 - x7^4 - x8^4")
x0 = (0.3, 0.4, 0.5, 0.6, 0.3, 0.4, 0.5, 0.6)
P, rho = 40, 0.2
w = separable_bump(x0, rho)

N = weighted_count(F8, w, P, method="mitm").count
S = singular_series(F8, 64, cache=SeriesCache(F8))
J = singular_integral(F8, w, 50)
main = float(S) * J * P ** 4
print(f"N_omega(F;{P})          = {N:.4f}")
print(f"S(64)                  = {float(S):.4f} (exact rational)")
print(f"J(50)                  = {J:.4e}")
print(f"S * J * P^4            = {main:.4f}")
print(f"ratio                  = {N / main:.2f}")

# split off solutions whose two halves are permutations of each other
wins, wts = [], []
for c in (0.3, 0.4, 0.5, 0.6):
    xs = list(range(math.ceil(P * (c - rho)), math.floor(P * (c + rho)) + 1))
    wins.append(xs)
    wts.append([float(gamma_bump((x / P - c) / rho)) for x in xs])
ms = defaultdict(float)
for i1, x1 in enumerate(wins[0]):
    for i2, x2 in enumerate(wins[1]):
        for i3, x3 in enumerate(wins[2]):
            for i4, x4 in enumerate(wins[3]):
                ms[tuple(sorted((x1, x2, x3, x4)))] += (
                    wts[0][i1] * wts[1][i2] * wts[2][i3] * wts[3][i4]
                )
N_perm = sum(v * v for v in ms.values())
print(f"\npermutation family     = {N_perm:.4f}  (linear subspaces inside X)")
print(f"generic part           = {N - N_perm:.4f}")
print(f"generic / main term    = {(N - N_perm) / main:.2f}  <- what the main term models")
