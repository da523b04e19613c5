"""Exact integer polynomials, symmetric tensors and difference calculus.

Everything here is exact: coefficients are Python integers, evaluation at
integer (or Fraction) points is exact, and the symmetric tensor of a quartic
form is stored with the 4! denominator cleared so all downstream contractions
stay in Z.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .errors import (
    DimensionMismatch,
    MalformedExponent,
    NonIntegerCoefficient,
    NotQuarticForm,
)

Expt = tuple  # exponent vector, tuple[int, ...]


def _monomial_key(e: Expt):
    # graded lexicographic: total degree first, then leading variables first
    return (sum(e), tuple(-x for x in e))


class IntPolynomial:
    """Multivariate polynomial with integer coefficients.

    Stored as a map {exponent tuple: coefficient} with no zero coefficients
    and no duplicate exponent vectors.  The canonical monomial order used for
    serialization and hashing is graded lexicographic.
    """

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs=None):
        if n < 0:
            raise ValueError("variable count must be >= 0")
        self.n = int(n)
        clean = {}
        for e, c in (coeffs or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != self.n:
                raise DimensionMismatch(f"exponent {e} has length {len(e)}, expected {self.n}")
            if any(x < 0 for x in e):
                raise MalformedExponent(f"negative exponent in {e}")
            c = int(c)
            if c != 0:
                clean[e] = clean.get(e, 0) + c
                if clean[e] == 0:
                    del clean[e]
        self.coeffs = clean

    # -- basic structure ---------------------------------------------------

    @property
    def degree(self) -> int:
        """Max total degree; -1 for the zero polynomial."""
        if not self.coeffs:
            return -1
        return max(sum(e) for e in self.coeffs)

    def monomials(self):
        """Canonically ordered list of (exponent tuple, coefficient)."""
        return [(e, self.coeffs[e]) for e in sorted(self.coeffs, key=_monomial_key)]

    def is_homogeneous(self, d=None) -> bool:
        if not self.coeffs:
            return True
        degs = {sum(e) for e in self.coeffs}
        if len(degs) != 1:
            return False
        return True if d is None else degs == {d}

    def homogeneous_part(self, d: int) -> "IntPolynomial":
        return IntPolynomial(self.n, {e: c for e, c in self.coeffs.items() if sum(e) == d})

    def graded_parts(self):
        """Dict degree -> homogeneous part (only nonzero parts)."""
        out = {}
        for e, c in self.coeffs.items():
            out.setdefault(sum(e), {})[e] = c
        return {d: IntPolynomial(self.n, m) for d, m in sorted(out.items())}

    def height(self) -> int:
        """Max modulus of the coefficients, read in the monomial basis."""
        return max((abs(c) for c in self.coeffs.values()), default=0)

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return IntPolynomial(self.n, out)

    def __neg__(self):
        return IntPolynomial(self.n, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPolynomial(self.n, {e: c * other for e, c in self.coeffs.items()})
        other = self._coerce(other)
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return IntPolynomial(self.n, out)

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, IntPolynomial):
            if other.n != self.n:
                raise DimensionMismatch("mixed variable counts")
            return other
        if isinstance(other, int):
            return IntPolynomial(self.n, {(0,) * self.n: other})
        raise TypeError(f"cannot combine IntPolynomial with {type(other)!r}")

    def __eq__(self, other):
        return isinstance(other, IntPolynomial) and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, tuple(self.monomials())))

    def __repr__(self):
        if not self.coeffs:
            return "IntPolynomial(0)"
        parts = []
        for e, c in self.monomials():
            vars_ = "*".join(
                f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k
            )
            parts.append(f"{c}" if not vars_ else (f"{c}*{vars_}" if c != 1 else vars_))
        return " + ".join(parts).replace("+ -", "- ")

    # -- calculus ------------------------------------------------------------

    def evaluate(self, x):
        """Exact value at an integer or Fraction point."""
        if len(x) != self.n:
            raise DimensionMismatch(f"point has length {len(x)}, expected {self.n}")
        total = 0
        for e, c in self.coeffs.items():
            term = c
            for xi, k in zip(x, e):
                if k:
                    term *= xi ** k
            total += term
        return total

    def partial(self, i: int) -> "IntPolynomial":
        out = {}
        for e, c in self.coeffs.items():
            if e[i] == 0:
                continue
            e2 = list(e)
            e2[i] -= 1
            out[tuple(e2)] = out.get(tuple(e2), 0) + c * e[i]
        return IntPolynomial(self.n, out)

    def gradient(self):
        return [self.partial(i) for i in range(self.n)]

    def gradient_at(self, x):
        return tuple(self.partial(i).evaluate(x) for i in range(self.n))

    def substitute_affine(self, t, cols) -> "IntPolynomial":
        """Exact composition g(t + sum_j u_j cols[j]) as a polynomial in u.

        `t` is an integer vector of length n, `cols` a list of integer vectors
        of length n; the result has len(cols) variables.
        """
        m = len(cols)
        if len(t) != self.n or any(len(col) != self.n for col in cols):
            raise DimensionMismatch("affine map shape does not match variable count")
        # linear forms for each original variable: x_i = t_i + sum_j cols[j][i) u_j
        lin = []
        for i in range(self.n):
            coeffs = {(0,) * m: int(t[i])}
            for j, col in enumerate(cols):
                if col[i]:
                    e = [0] * m
                    e[j] = 1
                    coeffs[tuple(e)] = int(col[i])
            lin.append(IntPolynomial(m, coeffs))
        out = IntPolynomial(m, {})
        for e, c in self.coeffs.items():
            term = IntPolynomial(m, {(0,) * m: c})
            for i, k in enumerate(e):
                for _ in range(k):
                    term = term * lin[i]
            out = out + term
        return out

    def shift(self, h) -> "IntPolynomial":
        """g(x + h) for an integer vector h."""
        eye = [[1 if i == j else 0 for i in range(self.n)] for j in range(self.n)]
        return self.substitute_affine(h, eye)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "degree": self.degree,
                "monomials": [[list(e), c] for e, c in self.monomials()],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "IntPolynomial":
        obj = json.loads(text)
        poly = cls(obj["n"], {tuple(e): c for e, c in obj["monomials"]})
        if "degree" in obj and obj["degree"] != poly.degree:
            raise MalformedExponent("declared degree does not match monomials")
        return poly


# -- parsing -------------------------------------------------------------------

_VAR_RE = re.compile(r"^x(\d+)(?:\^(-?[0-9.]+))?$")


def _parse_factor(fac, exps):
    m = _VAR_RE.match(fac)
    if not m:
        raise MalformedExponent(f"cannot parse factor {fac!r}")
    idx = int(m.group(1))
    etext = m.group(2)
    if etext is None:
        e = 1
    else:
        if "." in etext:
            raise MalformedExponent(f"non-integer exponent {etext!r}")
        e = int(etext)
        if e < 0:
            raise MalformedExponent(f"negative exponent {etext!r}")
    exps[idx] = exps.get(idx, 0) + e
    return idx


def parse_form(source: str, n: int | None = None) -> IntPolynomial:
    """Parse a human-readable form like ``4*x1^4 + 9*x2^4 - 8*x3^4``.

    Coefficients must be integers and exponents nonnegative integers;
    variables are x1..xn (n inferred from the largest index unless given).
    """
    text = source.replace("**", "^").replace("-", "+-").replace(" ", "")
    terms = [t for t in text.split("+") if t]
    parsed = []  # (coeff, dict var->exp)
    max_var = 0
    for term in terms:
        sign = 1
        if term.startswith("-"):
            sign, term = -1, term[1:]
        coeff = 1
        exps = {}
        for k, fac in enumerate(term.split("*")):
            if k == 0 and not fac.startswith("x"):
                if "." in fac:
                    raise NonIntegerCoefficient(f"non-integer coefficient {fac!r}")
                try:
                    coeff = int(fac)
                except ValueError:
                    raise MalformedExponent(f"cannot parse term {term!r}") from None
                continue
            max_var = max(max_var, _parse_factor(fac, exps))
        parsed.append((sign * coeff, exps))
    nvars = n if n is not None else max_var
    coeffs = {}
    for coeff, exps in parsed:
        if any(i > nvars for i in exps):
            raise DimensionMismatch("variable index exceeds declared n")
        e = tuple(exps.get(i + 1, 0) for i in range(nvars))
        coeffs[e] = coeffs.get(e, 0) + coeff
    return IntPolynomial(nvars, coeffs)


# -- symmetric tensor ------------------------------------------------------------


class SymTensor:
    """Integer symmetric tensor N with N_ijkl = 24 * f_ijkl for a quartic form.

    Entries are stored on sorted index 4-tuples (i<=j<=k<=l, zero-based); the
    full symmetric tensor takes the same value on every rearrangement.  For a
    monomial with exponent vector e the stored value is coeff * prod(e_i!),
    which is always an integer.
    """

    __slots__ = ("n", "entries")

    def __init__(self, n: int, entries):
        self.n = n
        self.entries = {tuple(k): int(v) for k, v in entries.items() if v}

    def reconstruct(self) -> IntPolynomial:
        """Sum N_ijkl x_i x_j x_k x_l over all ordered index tuples (= 24 F)."""
        coeffs = {}
        for key, val in self.entries.items():
            mult = _n_arrangements(key)
            e = [0] * self.n
            for i in key:
                e[i] += 1
            e = tuple(e)
            coeffs[e] = coeffs.get(e, 0) + val * mult
        return IntPolynomial(self.n, coeffs)

    def trilinear(self, w, x, y):
        """L_i(w;x;y) = sum_jkl N_ijkl w_j x_k y_l, exactly (eq. uses 4! f)."""
        for v in (w, x, y):
            if len(v) != self.n:
                raise DimensionMismatch("vector length mismatch in trilinear form")
        L = [0] * self.n
        for key, val in self.entries.items():
            for p in set(permutations(key)):
                L[p[0]] += val * w[p[1]] * x[p[2]] * y[p[3]]
        return tuple(L)


def _n_arrangements(key) -> int:
    counts = {}
    for i in key:
        counts[i] = counts.get(i, 0) + 1
    out = math.factorial(len(key))
    for c in counts.values():
        out //= math.factorial(c)
    return out


def sym_tensor(F: IntPolynomial) -> SymTensor:
    """Symmetric tensor of a homogeneous quartic form (exact, denominator-free)."""
    if F.degree != 4 or not F.is_homogeneous(4):
        raise NotQuarticForm("sym_tensor needs a homogeneous form of degree 4")
    entries = {}
    for e, c in F.coeffs.items():
        key = []
        fact = 1
        for i, k in enumerate(e):
            key.extend([i] * k)
            fact *= math.factorial(k)
        entries[tuple(key)] = c * fact
    return SymTensor(F.n, entries)


def evaluate_and_gradient(g: IntPolynomial, x):
    """Exact (g(x), grad g(x)) at an integer point."""
    return g.evaluate(x), g.gradient_at(x)


def hessian(g: IntPolynomial, x):
    """Symmetric matrix of second partials of g at x (exact; x may be rational)."""
    if len(x) != g.n:
        raise DimensionMismatch("point length mismatch in hessian")
    H = [[0] * g.n for _ in range(g.n)]
    for i in range(g.n):
        gi = g.partial(i)
        for j in range(i, g.n):
            v = gi.partial(j).evaluate(x)
            H[i][j] = v
            H[j][i] = v
    return H


def hessian_form_rows(g0: IntPolynomial):
    """Hessian of a form as a matrix of polynomials (linear forms for cubic g0)."""
    return [[g0.partial(i).partial(j) for j in range(g0.n)] for i in range(g0.n)]


# -- cubic data -------------------------------------------------------------------


@dataclass(frozen=True)
class CubicData:
    """A polynomial of degree <= 3 with its graded parts g0 + f2 + f1 + f0."""

    poly: IntPolynomial
    g0: IntPolynomial
    f2: IntPolynomial
    f1: IntPolynomial
    f0: IntPolynomial

    @classmethod
    def from_poly(cls, g: IntPolynomial) -> "CubicData":
        if g.degree > 3:
            raise NotQuarticForm("CubicData needs degree <= 3")
        z = IntPolynomial(g.n, {})
        parts = g.graded_parts()
        return cls(
            poly=g,
            g0=parts.get(3, z),
            f2=parts.get(2, z),
            f1=parts.get(1, z),
            f0=parts.get(0, z),
        )

    @property
    def n(self) -> int:
        return self.poly.n


def difference_cubic(F: IntPolynomial, h) -> CubicData:
    """F(x+h) - F(x) for a homogeneous quartic F; cubic part is h . grad F."""
    if F.degree != 4 or not F.is_homogeneous(4):
        raise NotQuarticForm("difference_cubic needs a homogeneous quartic")
    if len(h) != F.n:
        raise DimensionMismatch("shift vector length mismatch")
    return CubicData.from_poly(F.shift(h) - F)


def weyl_difference(F: IntPolynomial, level: int, points) -> IntPolynomial:
    """Alternating multi-difference of F along `points`, as a polynomial in z.

    level 1 gives F(z+w) - F(z); level 3 gives the eight-term alternating sum
    which is affine-linear in z with linear coefficients the trilinear forms.
    """
    if level not in (1, 2, 3):
        raise ValueError("level must be 1, 2 or 3")
    if len(points) != level:
        raise DimensionMismatch(f"need exactly {level} shift vectors")
    for pt in points:
        if len(pt) != F.n:
            raise DimensionMismatch("shift vector length mismatch")
    out = IntPolynomial(F.n, {})
    for mask in range(1 << level):
        shift = [0] * F.n
        bits = 0
        for t in range(level):
            if mask >> t & 1:
                bits += 1
                for i in range(F.n):
                    shift[i] += points[t][i]
        term = F.shift(shift)
        if (level - bits) % 2 == 1:
            term = -term
        out = out + term
    return out


# -- heights and homogenization ------------------------------------------------------


def heights(g: IntPolynomial, P: int):
    """(||g||, ||g||_P) with ||g||_P = ||P^-3 g(P x)|| as an exact Fraction."""
    if P < 1:
        raise ValueError("P must be >= 1")
    h = g.height()
    hP = Fraction(0)
    for e, c in g.coeffs.items():
        hP = max(hP, Fraction(abs(c)) * Fraction(P) ** (sum(e) - 3))
    return h, hP


def homogenize(f: IntPolynomial) -> IntPolynomial:
    """F(x, z) = z^d f(x/z); appends z as the last variable."""
    d = max(f.degree, 0)
    coeffs = {}
    for e, c in f.coeffs.items():
        coeffs[e + (d - sum(e),)] = c
    return IntPolynomial(f.n + 1, coeffs)


def dehomogenize(F: IntPolynomial) -> IntPolynomial:
    """Set the last variable to 1."""
    coeffs = {}
    for e, c in F.coeffs.items():
        coeffs[e[:-1]] = coeffs.get(e[:-1], 0) + c
    return IntPolynomial(F.n - 1, coeffs)
