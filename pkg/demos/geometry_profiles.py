#!/usr/bin/env python3
"""Hessian rank loci over finite fields against their dimension bounds.

For a cubic form G the Hessian H_G(x) is a matrix of linear forms and the
symmetry H_G(x)y = H_G(y)x turns the sets

    T_r = {x : rank H_G(x) <= r},    B_s = {h : dim ker H_G(h) >= s}

into exactly countable rank loci.  Counting over F_p and F_{p^2} estimates
their dimensions, which the theory bounds by r + s_p + 1 and
min(n, n - s + s_p + 1).
"""

from quartic.forms import parse_form
from quartic.geometry import b_set_profile, find_hyperplane, hessian_rank_profile, sing_dim

G = parse_form("x1^3 + x2^3 + x3^3")
print("G =", G, " (Fermat cubic, s_p = -1 away from 3)")
for p in (7, 11, 13):
    print(f"  p = {p}:")
    for r in range(3):
        prof = hessian_rank_profile(G, p, r)
        print(
            f"    #T_{r}(F_p) = {prof['count']:5d}  dim {prof['dim']} <= {prof['bound']}"
            f"  (counts over F_p, F_p^2: {prof['counts']})"
        )
    for s in (1, 2, 3):
        prof = b_set_profile(G, p, s)
        print(f"    #B_{s}(F_p) = {prof['count']:5d}  dim {prof['dim']} <= {prof['bound']}")

print("\nsingular-locus dimensions:")
print("  s_7(G) =", sing_dim(G, 7), "  rational proxy:", sing_dim(G, None))

print("\nhyperplane slice that preserves nonsingularity (shell search over primitive m):")
out = find_hyperplane(G, [7], 3)
print("  m =", out["m"], " observed section dims:", out["observed"])
