"""Weighted generating sums and oscillatory integrals.

Quadrature is tensor-product composite Simpson with oscillation-aware initial
grids (at least four points per expected cycle of the dominant phase) and
Richardson-style doubling until the requested tolerance is met.  The Poisson
identity check evaluates the whole family I(z; v/q) in one batched FFT on a
uniform grid instead of one quadrature per v, which is what makes the default
truncation affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    PreconditionViolated,
    ToleranceNotMet,
)
from .expsums import complete_sum, twisted_sum
from .forms import CubicData, IntPolynomial
from .weights import (  # noqa: F401  (re-exported public surface)
    WeightSpec,
    bump,
    box,
    gamma_bump,
    lattice_ranges,
    separable_bump,
    shifted_product,
    unit_box,
    weight_eval,
)

TWO_PI = 2.0 * math.pi


@dataclass
class QuadratureConfig:
    tolerance: float = 1e-8
    base_points: int = 64
    max_points_1d: int = 1 << 18
    max_cells: int = 1 << 24
    max_refinements: int = 12


DEFAULT_CFG = QuadratureConfig()


# -- lattice sums -----------------------------------------------------------------


def _support_grid(w: WeightSpec, P: float, budget: int):
    ranges = lattice_ranges(w, P)
    cells = 1
    for a, b in ranges:
        cells *= max(b - a + 1, 0)
    if cells > budget:
        raise BudgetExceeded(f"{cells} lattice points exceed budget {budget}")
    if cells == 0:
        return np.zeros((0, w.n), dtype=np.int64)
    grids = np.meshgrid(
        *[np.arange(a, b + 1, dtype=np.int64) for a, b in ranges], indexing="ij"
    )
    return np.stack([g.ravel() for g in grids], axis=1)


def gen_sum(
    poly: IntPolynomial,
    w: WeightSpec,
    P: float,
    alpha=None,
    a: int | None = None,
    q: int | None = None,
    z: float = 0.0,
    budget: int = 4_000_000,
) -> complex:
    """S(alpha) = sum_x w(x/P) e(alpha poly(x)), alpha = a/q + z when (a,q) given.

    The rational part of the phase is computed from exact residues mod q.
    """
    if w.n != poly.n:
        raise DimensionMismatch("weight dimension != variable count")
    if alpha is not None:
        if isinstance(alpha, Fraction):
            a, q, z = int(alpha.numerator % alpha.denominator), int(alpha.denominator), float(z)
            if a == 0:
                a = q
        else:
            a, q, z = 0, 1, float(alpha)
    elif a is None or q is None:
        raise ValueError("supply alpha or (a, q, z)")
    pts = _support_grid(w, P, budget)
    if not len(pts):
        return 0.0 + 0.0j
    wv = w.eval_many(pts / P)
    keep = wv > 0
    pts, wv = pts[keep], wv[keep]
    vals = np.zeros(len(pts), dtype=object)
    for e, c in poly.coeffs.items():
        term = np.full(len(pts), c, dtype=object)
        for i, k in enumerate(e):
            if k:
                term = term * pts[:, i].astype(object) ** k
        vals = vals + term
    phases = np.zeros(len(pts), dtype=complex)
    resid = np.array([int(val) % q for val in vals], dtype=np.int64) if q > 1 else None
    zpart = np.array([float(val) for val in vals]) * z
    phase_angles = (a * resid / q if resid is not None else 0.0) + zpart
    phases = np.exp(2j * np.pi * (phase_angles % 1.0))
    return complex((wv * phases).sum())


# -- 1-D and tensor quadrature --------------------------------------------------------


def _simpson_1d(fvals: np.ndarray, h: float):
    N = len(fvals) - 1
    assert N % 2 == 0
    wts = np.ones(N + 1)
    wts[1:-1:2] = 4.0
    wts[2:-1:2] = 2.0
    return (h / 3.0) * np.tensordot(wts, fvals, axes=(0, 0))


def integrate_1d(fn, a: float, b: float, cfg: QuadratureConfig = DEFAULT_CFG, cycles: float = 0.0):
    """Adaptive composite Simpson of a vectorized callable on [a, b]."""
    if b <= a:
        return 0.0, 0.0
    N = max(cfg.base_points, 4 * math.ceil(cycles + 1))
    N += N % 2
    prev = None
    for _ in range(cfg.max_refinements):
        xs = np.linspace(a, b, N + 1)
        cur = _simpson_1d(fn(xs), (b - a) / N)
        if prev is not None and abs(cur - prev) <= cfg.tolerance:
            return cur, abs(cur - prev)
        prev = cur
        N *= 2
        if N > cfg.max_points_1d:
            raise ToleranceNotMet(f"1-D quadrature did not reach {cfg.tolerance}")
    raise ToleranceNotMet("refinement limit reached")


def _grad_bound(f: IntPolynomial, box_phys) -> list:
    """Per-axis bound on |df/dx_i| over a physical box [(lo,hi)] per axis."""
    mx = [max(abs(lo), abs(hi)) for lo, hi in box_phys]
    out = []
    for i in range(f.n):
        tot = 0.0
        for e, c in f.coeffs.items():
            if e[i]:
                term = abs(c) * e[i]
                for j, k in enumerate(e):
                    term *= mx[j] ** (k - (1 if j == i else 0))
                tot += term
        out.append(tot)
    return out


def _diagonal_parts(f: IntPolynomial):
    """Axis polynomials f_i plus constant, or None when f is not diagonal."""
    n = f.n
    parts = [dict() for _ in range(n)]
    const = 0
    for e, c in f.coeffs.items():
        nz = [i for i, k in enumerate(e) if k]
        if len(nz) > 1:
            return None, 0
        if not nz:
            const += c
            continue
        i = nz[0]
        parts[i][(e[i],)] = parts[i].get((e[i],), 0) + c
    return [IntPolynomial(1, d) for d in parts], const


def osc_integral(
    f: IntPolynomial,
    w: WeightSpec,
    z: float,
    beta,
    cfg: QuadratureConfig = DEFAULT_CFG,
    P: float = 1.0,
):
    """I(z; beta) = integral of w(x/P) e(z f(x) - beta.x) dx.

    Separable weight + diagonal f factor into 1-D integrals; otherwise a
    tensor-product Simpson grid is used (n <= 3).
    """
    n = f.n
    if len(beta) != n:
        raise DimensionMismatch("beta length != variable count")
    box_phys = [(lo * P, hi * P) for lo, hi in w.support_box()]
    factors = w.separable_factors()
    parts, const = _diagonal_parts(f)
    if factors is not None and parts is not None:
        total = complex(np.exp(2j * np.pi * z * const))
        err = 0.0
        for i in range(n):
            lo, hi = box_phys[i]
            fi = parts[i]
            cycles = (abs(z) * _grad_bound(fi, [(lo, hi)])[0] + abs(beta[i])) * (hi - lo)

            def fn(xs, i=i, fi=fi):
                ph = z * np.array([float(fi.evaluate([float(t)])) for t in xs]) - beta[i] * xs
                return factors[i](xs / P) * np.exp(2j * np.pi * ph)

            val, e1 = integrate_1d(fn, lo, hi, cfg, cycles)
            err = err * abs(val) + e1 * abs(total)
            total *= val
        return total, err
    if n > 3:
        raise BudgetExceeded("tensor-grid quadrature supports n <= 3")
    gb = _grad_bound(f, box_phys)
    axes_pts = []
    for i in range(n):
        lo, hi = box_phys[i]
        cycles = (abs(z) * gb[i] + abs(beta[i])) * (hi - lo)
        N = max(cfg.base_points, 4 * math.ceil(cycles + 1))
        N += N % 2
        axes_pts.append(N)
    prev = None
    for _ in range(cfg.max_refinements):
        cells = 1
        for N in axes_pts:
            cells *= N + 1
        if cells > cfg.max_cells:
            raise ToleranceNotMet("tensor grid exceeded the cell budget before converging")
        grids = [np.linspace(lo, hi, N + 1) for (lo, hi), N in zip(box_phys, axes_pts)]
        mesh = np.meshgrid(*grids, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        fv = np.zeros(len(pts))
        for e, c in f.coeffs.items():
            term = np.full(len(pts), float(c))
            for i, k in enumerate(e):
                if k:
                    term = term * pts[:, i] ** k
            fv += term
        integrand = (
            w.eval_many(pts / P)
            * np.exp(2j * np.pi * (z * fv - pts @ np.asarray(beta, dtype=float)))
        ).reshape([N + 1 for N in axes_pts])
        cur = integrand
        for ax in range(n - 1, -1, -1):
            lo, hi = box_phys[ax]
            N = axes_pts[ax]
            wts = np.ones(N + 1)
            wts[1:-1:2], wts[2:-1:2] = 4.0, 2.0
            wts *= (hi - lo) / (3.0 * N)
            cur = np.tensordot(cur, wts, axes=([ax], [0])) if cur.ndim > 1 else cur @ wts
        cur = complex(cur)
        if prev is not None and abs(cur - prev) <= cfg.tolerance:
            return cur, abs(cur - prev)
        prev = cur
        axes_pts = [2 * N for N in axes_pts]
    raise ToleranceNotMet("tensor quadrature refinement limit reached")


def i_gamma(F: IntPolynomial, w: WeightSpec, gamma: float, cfg: QuadratureConfig = DEFAULT_CFG):
    """I(gamma) = integral of w(x) e(gamma F(x)) dx (weight-space scale, P = 1)."""
    val, err = osc_integral(F, w, gamma, [0.0] * F.n, cfg=cfg, P=1.0)
    return val, err


# -- singular integral ------------------------------------------------------------------


def _factored_gamma_table(F: IntPolynomial, w: WeightSpec, gammas: np.ndarray, cfg: QuadratureConfig):
    """I(gamma) for every gamma in one vectorized pass (diagonal F, separable w)."""
    parts, const = _diagonal_parts(F)
    factors = w.separable_factors()
    if parts is None or factors is None:
        raise PreconditionViolated("factored path needs diagonal F and separable w")
    out = np.exp(2j * np.pi * np.outer(gammas, [const])).ravel()
    for i in range(F.n):
        lo, hi = w.support_box()[i]
        spread = 0.0
        fi = parts[i]
        N = cfg.base_points
        xs = np.linspace(lo, hi, 2)
        fv = [float(fi.evaluate([float(t)])) for t in xs]
        spread = max(fv) - min(fv)
        cycles = float(np.max(np.abs(gammas))) * max(spread, _grad_bound(fi, [(lo, hi)])[0] * (hi - lo))
        N = max(cfg.base_points, 4 * math.ceil(cycles + 1), 256)
        N += N % 2
        xs = np.linspace(lo, hi, N + 1)
        fv = np.array([float(fi.evaluate([float(t)])) for t in xs])
        wts = np.ones(N + 1)
        wts[1:-1:2], wts[2:-1:2] = 4.0, 2.0
        wts *= (hi - lo) / (3.0 * N)
        wv = factors[i](xs)
        phase = np.exp(2j * np.pi * np.outer(gammas, fv))
        out = out * (phase @ (wts * wv))
    return out


def singular_integral(
    F: IntPolynomial,
    w: WeightSpec,
    R: float,
    cfg: QuadratureConfig = DEFAULT_CFG,
    method: str = "auto",
):
    """J(R) = integral over |gamma| <= R of integral w(x) e(gamma F(x)) dx dgamma."""
    if R == 0:
        return 0.0
    if method == "auto":
        parts, _ = _diagonal_parts(F)
        method = "factored" if (parts is not None and w.separable_factors() is not None) else "direct"
    if method == "factored":
        M = 512
        prev = None
        for _ in range(cfg.max_refinements):
            gammas = np.linspace(-R, R, M + 1)
            Iv = _factored_gamma_table(F, w, gammas, cfg)
            cur = complex(_simpson_1d(Iv, 2 * R / M))
            if prev is not None and abs(cur - prev) <= max(cfg.tolerance, 1e-12):
                if abs(cur.imag) > 1e-6 * max(abs(cur), 1.0):
                    raise ToleranceNotMet("singular integral should be real")
                return cur.real
            prev = cur
            M *= 2
        raise ToleranceNotMet("gamma refinement limit reached")
    if method == "direct":
        def fn(gs):
            return np.array([i_gamma(F, w, float(g), cfg)[0] for g in gs])

        val, _ = integrate_1d(fn, -R, R, cfg, cycles=R)
        return float(np.real(val))
    if method == "sine":
        return singular_integral_sine(F, w, R, cfg)
    raise ValueError(f"unknown method {method!r}")


def singular_integral_sine(F: IntPolynomial, w: WeightSpec, R: float, cfg: QuadratureConfig = DEFAULT_CFG):
    """Same quantity via the closed z-integral: integral w(x) sin(2 pi R F)/(pi F) dx."""
    n = F.n
    if n > 3:
        raise BudgetExceeded("sine-kernel form supports n <= 3")
    box_phys = w.support_box()
    fmax = 0.0
    for e, c in F.coeffs.items():
        term = abs(c)
        for i, k in enumerate(e):
            if k:
                term *= max(abs(box_phys[i][0]), abs(box_phys[i][1])) ** k
        fmax += term
    cycles = R * fmax
    N = max(cfg.base_points, 4 * math.ceil(cycles + 1))
    N += N % 2
    prev = None
    for _ in range(cfg.max_refinements):
        grids = [np.linspace(lo, hi, N + 1) for lo, hi in box_phys]
        mesh = np.meshgrid(*grids, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        fv = np.zeros(len(pts))
        for e, c in F.coeffs.items():
            term = np.full(len(pts), float(c))
            for i, k in enumerate(e):
                if k:
                    term = term * pts[:, i] ** k
            fv += term
        kernel = 2.0 * R * np.sinc(2.0 * R * fv)  # sin(2 pi R F)/(pi F)
        cur = (w.eval_many(pts) * kernel).reshape([N + 1] * n)
        for ax in range(n - 1, -1, -1):
            lo, hi = box_phys[ax]
            wts = np.ones(N + 1)
            wts[1:-1:2], wts[2:-1:2] = 4.0, 2.0
            wts *= (hi - lo) / (3.0 * N)
            cur = np.tensordot(cur, wts, axes=([ax], [0])) if np.ndim(cur) > 1 else cur @ wts
        cur = float(cur)
        if prev is not None and abs(cur - prev) <= max(cfg.tolerance, 1e-9 * abs(cur)):
            return cur
        prev = cur
        N *= 2
        if (N + 1) ** n > cfg.max_cells:
            raise ToleranceNotMet("sine-kernel grid exceeded cell budget")
    raise ToleranceNotMet("sine-kernel refinement limit reached")


# -- Poisson summation check ---------------------------------------------------------------


@dataclass
class PoissonReport:
    lhs: complex
    rhs: complex
    residual: float
    relative: float
    v_cut: int
    tail_estimate: float
    grid_shape: tuple
    mass: float


def _default_v_cut(g: IntPolynomial, q: int, z: float, box_phys, margin_cycles: float = 30.0) -> int:
    gb = _grad_bound(g, box_phys)
    v0max = max(q * abs(z) * b for b in gb) if gb else 0.0
    width = min(hi - lo for lo, hi in box_phys)
    margin = q * margin_cycles / max(width, 1e-9)
    return max(4 * q, math.ceil(v0max + margin))


def poisson_check(
    g,
    w: WeightSpec,
    P: float,
    a: int,
    q: int,
    z: float,
    v_cut: int | None = None,
    oversample: int = 4,
    max_cells: int = 1 << 25,
    budget: int = 4_000_000,
) -> PoissonReport:
    """Residual of T(a/q+z) = q^-n sum_v T(a,q;v) I(z; v/q) with truncation |v| <= v_cut.

    The I values for the whole v-box come from one zero-padded FFT per run on
    a uniform grid whose step resolves v_cut/q cycles per unit with the given
    oversampling; the reported tail estimate is the boundary-shell mass.
    """
    poly = g.poly if isinstance(g, CubicData) else g
    n = poly.n
    if math.gcd(a, q) != 1 or not 1 <= a <= q:
        raise PreconditionViolated("need 1 <= a <= q with gcd(a, q) = 1")
    box_phys = [(lo * P, hi * P) for lo, hi in w.support_box()]
    if v_cut is None:
        v_cut = _default_v_cut(poly, q, z, box_phys)
    lhs = gen_sum(poly, w, P, a=a, q=q, z=z, budget=budget)
    mass = abs(gen_sum(poly, w, P, a=q, q=q, z=0.0, budget=budget))
    # grid: step h = q/M, FFT length L a multiple of M covering the support
    M = oversample * max(v_cut, 1)
    axes = []
    cells = 1
    for lo, hi in box_phys:
        h = q / M
        N = int(math.ceil((hi - lo) / h)) + 1
        L = M * int(math.ceil(N / M))
        axes.append((lo, h, N, L))
        cells *= L
    if cells > max_cells:
        raise BudgetExceeded(f"FFT grid of {cells} cells exceeds {max_cells}")
    grids = [lo + h * np.arange(N) for (lo, h, N, L) in axes]
    mesh = np.meshgrid(*grids, indexing="ij")
    pts = np.stack([gme.ravel() for gme in mesh], axis=1)
    fv = np.zeros(len(pts))
    for e, c in poly.coeffs.items():
        term = np.full(len(pts), float(c))
        for i, k in enumerate(e):
            if k:
                term = term * pts[:, i] ** k
        fv += term
    u = (w.eval_many(pts / P) * np.exp(2j * np.pi * z * fv)).reshape([N for (_, _, N, _) in axes])
    U = np.fft.fftn(u, s=[L for (_, _, _, L) in axes], axes=list(range(n)))
    # T table over residues
    Ttab = np.zeros((q,) * n, dtype=complex)
    for idx in np.ndindex(*(q,) * n):
        Ttab[idx] = twisted_sum(poly, a, q, list(idx), method="direct", budget=budget).value
    vs = np.arange(-v_cut, v_cut + 1)
    vgrids = np.meshgrid(*[vs] * n, indexing="ij")
    hprod = 1.0
    phase0 = np.zeros(vgrids[0].shape)
    fft_idx = []
    for i, (lo, h, N, L) in enumerate(axes):
        hprod *= h
        stride = L // M
        fft_idx.append(((vgrids[i] * stride) % L).astype(np.int64))
        phase0 = phase0 + vgrids[i] * lo / q
    Ivals = hprod * np.exp(-2j * np.pi * phase0) * U[tuple(fft_idx)]
    Tvals = Ttab[tuple((vg % q) for vg in vgrids)]
    rhs = (Tvals * Ivals).sum() / q ** n
    # tail: mass of |T I| on the boundary shell of the v-box
    shell = np.zeros(vgrids[0].shape, dtype=bool)
    for vg in vgrids:
        shell |= np.abs(vg) == v_cut
    tail = float(np.abs(Tvals[shell] * Ivals[shell]).sum()) / q ** n
    resid = abs(lhs - rhs)
    rel = resid / max(abs(lhs), 1e-4 * mass)
    return PoissonReport(
        lhs=lhs,
        rhs=complex(rhs),
        residual=resid,
        relative=rel,
        v_cut=v_cut,
        tail_estimate=tail,
        grid_shape=tuple(L for (_, _, _, L) in axes),
        mass=mass,
    )


# -- major arc model ---------------------------------------------------------------------


def major_arc_model(
    F: IntPolynomial,
    w: WeightSpec,
    P: float,
    a: int,
    q: int,
    z: float,
    cfg: QuadratureConfig = DEFAULT_CFG,
    budget: int = 4_000_000,
) -> dict:
    """S(a/q+z) against the model q^-n P^n S_{a,q} I(z P^4)."""
    n = F.n
    if q > P:
        raise PreconditionViolated("major arc model needs q <= P")
    if abs(z) > P ** -3:
        raise PreconditionViolated("major arc model needs |z| <= P^-3")
    S = gen_sum(F, w, P, a=a, q=q, z=z, budget=budget)
    Saq = complete_sum(F, a, q).value
    Iz, err = i_gamma(F, w, z * P ** 4, cfg)
    model = q ** -n * P ** n * Saq * Iz
    diff = abs(S - model)
    return {
        "S": S,
        "S_aq": Saq,
        "I": Iz,
        "model": model,
        "diff": diff,
        "relative": diff / max(abs(S), 1e-12),
        "error_scale": abs(z) * q * P ** (n + 3) + q * P ** (n - 1),
    }
