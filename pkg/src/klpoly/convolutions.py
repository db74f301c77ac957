"""Sneddon and Yakubovich-Britvina convolutions and the three-function polyconvolution.

The polyconvolution is available through three routes that share no numerical
code beyond the quadrature primitives:

* ``polyconv_direct``: the triple integral of ``Phi f g h``. The innermost
  ``w`` integral is done once per ``h`` into a smooth even profile
  ``Lambda_h(s) = int h(w) exp(-w cosh s) dw`` (tabulated by fixed-node
  Gauss-Legendre in ``w`` and interpolated by a clamped cubic spline), after
  which ``Phi`` collapses to four profile lookups.
* ``polyconv_spectral``: the Parseval form ``sqrt(2/pi) int S(y) sin(xy) dy``
  with ``S = F_s f * F_c g * K[h]``.
* ``polyconv_composed``: ``(f *1 g) *2 h`` through an intermediate table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import DomainError, NonConvergence
from .funcmodel import (
    INF,
    Computed,
    FunctionExpr,
    GridSpec,
    NormSpec,
    SampledFunction,
    Tabulated,
    TwoParam,
    norm,
)
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    composite_rule,
    cosh_truncation,
    integrate_finite,
    oscillation_width,
    panel_edges,
    safe_exp,
)
from .reports import InequalityReport
from .special import k0, sech
from .transforms import SQRT_2_PI, fourier_values, kl_values

POLY_SCALE = 1.0 / (2.0 * math.sqrt(2.0 * math.pi))
SNEDDON_SCALE = 1.0 / math.sqrt(2.0 * math.pi)
COMPOSED_GRID = GridSpec.log_uniform(1e-3, 40.0, 400)
# truncation of the u and v integrals: L1 tail of each factor below this
FACTOR_TAIL = 1e-11


@dataclass(frozen=True)
class PolyconvInput:
    f: FunctionExpr
    g: FunctionExpr
    h: FunctionExpr
    beta: float = 0.5

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise DomainError("beta must lie in (0, 1]")

    def is_zero(self) -> bool:
        return self.f.is_zero() or self.g.is_zero() or self.h.is_zero()


def kernel_phi(x, u, v, w):
    """``Phi(x,u,v,w)``; broadcasts over its arguments."""
    x, u, v, w = (np.asarray(a, dtype=float) for a in (x, u, v, w))
    if np.any(w <= 0):
        raise DomainError("kernel_phi needs w > 0")

    def e(s):
        return safe_exp(-w * np.cosh(s))

    out = e(x - u + v) + e(x - u - v) - e(x + u + v) - e(x + u - v)
    # the four terms cancel pairwise at x = 0 and at u = 0; drop the rounding residue
    out = np.where((x == 0) | (u == 0), 0.0, out)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# the w-profile of h


class Profile:
    """``Lambda_h(s)`` for ``s`` in R, tabulated once and spline-interpolated.

    The table is built twice, with Gauss-Legendre orders 16 and 24 on the same
    graded panels, and the build fails with NonConvergence (axis ``w``) if the
    two disagree beyond ``cfg.abs_tol * 1e-2``.
    """

    STEP = 0.0025

    def __init__(self, h: FunctionExpr, cfg: QuadratureConfig = DEFAULT_CONFIG):
        self.h = h
        sup = h.sup_beyond(0.0)
        lo, hi = h.support()
        # Lambda_h(s) <= sup / cosh s
        self.s_max = max(1.0, math.acosh(max(1.0, 2.0 * sup / 1e-17)))
        W = h.cutoff(1e-15)
        edges = panel_edges(max(lo, 0.0), W, h.breakpoints(), max_width=0.5, graded=True,
                            grading_depth=60)
        s = np.arange(0.0, self.s_max + self.STEP, self.STEP)
        c = np.cosh(s)
        tables = []
        for order in (16, 24):
            nodes, weights = composite_rule(edges, order)
            hw = np.asarray(h(nodes), dtype=float) * weights
            vals = np.empty(s.shape)
            chunk = max(1, int(2e6 // nodes.size))
            for i in range(0, s.size, chunk):
                vals[i : i + chunk] = safe_exp(-np.outer(c[i : i + chunk], nodes)) @ hw
            tables.append(vals)
        gap = float(np.max(np.abs(tables[0] - tables[1])))
        if gap > 1e-2 * cfg.abs_tol:
            raise NonConvergence(f"profile table of {h} moved by {gap:.2e}", axis="w")
        self.error = gap + h.tail_mass(W)
        self.s = s
        self.values = tables[1]
        self._spline = CubicSpline(s, self.values, bc_type=((1, 0.0), "not-a-knot"))

    def __call__(self, s):
        a = np.abs(np.asarray(s, dtype=float))
        out = np.zeros(a.shape)
        inside = a <= self.s_max
        if np.any(inside):
            out[inside] = self._spline(a[inside])
        return out


@lru_cache(maxsize=64)
def profile(h: FunctionExpr, cfg: QuadratureConfig = DEFAULT_CONFIG) -> Profile:
    return Profile(h, cfg)


# --------------------------------------------------------------------------
# two-function convolutions


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError("convolutions are evaluated at x >= 0")
    return np.atleast_1d(arr), arr.ndim == 0


def sneddon_conv(f: FunctionExpr, g: FunctionExpr, x, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """``(1/sqrt(2 pi)) int_0^inf f(u) [g(|x-u|) - g(x+u)] du`` at each ``x``."""
    xs, scalar = _as_array(x)
    out = np.zeros(xs.shape)
    if f.is_zero() or g.is_zero():
        return float(out[0]) if scalar else out
    U = f.cutoff(FACTOR_TAIL)
    bf, bg = f.breakpoints(), g.breakpoints()
    for i, xv in enumerate(xs):
        if xv == 0.0:
            continue
        bps = [xv, *bf]
        for b in bg:
            bps += [xv + b, xv - b, b - xv]

        def integrand(u, xv=xv):
            return f(u) * (g(np.abs(xv - u)) - g(xv + u))

        out[i] = integrate_finite(integrand, 0.0, U, cfg, breakpoints=bps).value
    out *= SNEDDON_SCALE
    return float(out[0]) if scalar else out


def yb_conv(f: FunctionExpr, g: FunctionExpr, x, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """``(1/2) int int [exp(-u cosh(v-x)) - exp(-u cosh(v+x))] f(v) g(u) du dv``.

    The ``u`` integral is the profile of ``g``, leaving
    ``(1/2) int f(v) [Lambda_g(v-x) - Lambda_g(v+x)] dv``.
    """
    xs, scalar = _as_array(x)
    out = np.zeros(xs.shape)
    if f.is_zero() or g.is_zero():
        return float(out[0]) if scalar else out
    lam = profile(g, cfg)
    V = f.cutoff(FACTOR_TAIL)
    bf = f.breakpoints()
    for i, xv in enumerate(xs):
        if xv == 0.0:
            continue

        def integrand(v, xv=xv):
            return f(v) * (lam(v - xv) - lam(v + xv))

        out[i] = integrate_finite(
            integrand, 0.0, V, cfg, breakpoints=[*bf, xv], max_width=1.0
        ).value
    out *= 0.5
    return float(out[0]) if scalar else out


def _sneddon_points(f: FunctionExpr, g: FunctionExpr) -> tuple:
    pts = {0.0}
    for a in (0.0, *f.breakpoints()):
        for b in (0.0, *g.breakpoints()):
            pts.update((a + b, abs(a - b)))
    return tuple(sorted(pts))


def sneddon_function(f: FunctionExpr, g: FunctionExpr, cfg=DEFAULT_CONFIG) -> Computed:
    """``f *1 g`` as a function object (evaluated on demand)."""
    hi = f.cutoff(FACTOR_TAIL) + g.cutoff(FACTOR_TAIL)
    bound = SNEDDON_SCALE * norm(f, NormSpec(1.0), cfg) * 2.0 * g.sup_beyond(0.0)
    return Computed(
        lambda x: sneddon_conv(f, g, x, cfg), hi, bound, _sneddon_points(f, g), "f*1g"
    )


def yb_function(f: FunctionExpr, g: FunctionExpr, cfg=DEFAULT_CONFIG) -> Computed:
    """``f *2 g`` as a function object."""
    lam = profile(g, cfg)
    hi = f.cutoff(FACTOR_TAIL) + lam.s_max
    bound = norm(f, NormSpec(1.0), cfg) * float(lam(0.0))
    return Computed(lambda x: yb_conv(f, g, x, cfg), hi, bound, f.breakpoints(), "f*2g")


# --------------------------------------------------------------------------
# direct route


def _factor_rule(f: FunctionExpr, width: float) -> tuple[np.ndarray, np.ndarray]:
    U = f.cutoff(FACTOR_TAIL)
    lo = f.support()[0]
    edges = panel_edges(lo, U, f.breakpoints(), max_width=width)
    nodes, weights = composite_rule(edges, 16)
    return nodes, np.asarray(f(nodes), dtype=float) * weights


def _direct_sum(lam: Profile, fu, Fw, gv, Gw, xs: np.ndarray) -> np.ndarray:
    out = np.empty(xs.shape)
    up = fu[:, None] + gv[None, :]
    um = fu[:, None] - gv[None, :]
    for i, x in enumerate(xs):
        if x == 0.0:
            out[i] = 0.0
            continue
        psi = lam(x - um) + lam(x - up) - lam(x + up) - lam(x + um)
        out[i] = Fw @ psi @ Gw
    return POLY_SCALE * out


def polyconv_direct(inp: PolyconvInput, x, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Triple-integral form at each ``x``; tensor Gauss-Legendre in ``(u, v)``.

    The ``(u, v)`` rule is run at panel widths 1 and 1/2; disagreement above
    the tolerance raises NonConvergence naming the ``u/v`` axis.
    """
    xs, scalar = _as_array(x)
    if inp.is_zero():
        out = np.zeros(xs.shape)
        return float(out[0]) if scalar else out
    lam = profile(inp.h, cfg)
    results = []
    for width in (1.0, 0.5):
        fu, Fw = _factor_rule(inp.f, width)
        gv, Gw = _factor_rule(inp.g, width)
        results.append(_direct_sum(lam, fu, Fw, gv, Gw, xs))
    gap = np.abs(results[0] - results[1])
    tol = np.maximum(1e-2 * np.sqrt(cfg.abs_tol), cfg.rel_tol * np.abs(results[1]))
    if np.any(gap > tol):
        j = int(np.argmax(gap - tol))
        raise NonConvergence(f"direct route moved by {gap[j]:.2e} at x = {xs[j]:.4g}", axis="u/v")
    out = results[1]
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# spectral route


def _kl_majorant_cutoff(inp: PolyconvInput, cfg: QuadratureConfig, eps: float) -> float:
    """Y with int_Y^inf |F_s f F_c g K[h]| dy below eps.

    Uses ``|F_s f F_c g| <= (2/pi) |f|_1 |g|_1`` and
    ``|K[h](y)| <= exp(-y arccos b) |h|_{L_1^{0,b}}`` for ``b`` in
    ``{beta, 0.05}``, keeping whichever gives the smaller Y.
    """
    c = (2.0 / math.pi) * norm(inp.f, NormSpec(1.0), cfg) * norm(inp.g, NormSpec(1.0), cfg)
    best = INF
    for b in sorted({min(inp.beta, 0.999), 0.05}):
        rate = math.acos(b)
        m = norm(inp.h, NormSpec(1.0, TwoParam(0.0, b)), cfg)
        if c * m == 0:
            return 0.0
        Y = max(1.0, math.log(c * m / (rate * eps)) / rate)
        best = min(best, Y)
    return best


class SpectralPoly:
    """The Parseval form on a Gauss-Legendre ``y`` rule fitted to ``x <= x_max``."""

    def __init__(self, inp: PolyconvInput, x_max: float, cfg: QuadratureConfig = DEFAULT_CONFIG):
        self.inp = inp
        self.cfg = cfg
        self.x_max = float(x_max)
        self.Y = _kl_majorant_cutoff(inp, cfg, 1e-2 * cfg.abs_tol)
        width = min(0.5, oscillation_width(max(self.x_max, 1.0), cfg, 16))
        self.rules = []
        for w in (width, 0.5 * width):
            y, wy = composite_rule(panel_edges(0.0, self.Y, max_width=w), 16)
            self.rules.append((y, wy * self.symbol(y)))

    def symbol(self, y: np.ndarray) -> np.ndarray:
        """``(F_s f)(F_c g) K[h]`` at ``y``."""
        fs, _ = fourier_values(self.inp.f, y, "sine", self.cfg)
        fc, _ = fourier_values(self.inp.g, y, "cosine", self.cfg)
        kh, _ = kl_values(self.inp.h, y, self.cfg)
        return fs * fc * kh

    def _eval(self, rule, xs: np.ndarray) -> np.ndarray:
        y, wS = rule
        return SQRT_2_PI * (np.sin(np.outer(xs, y)) @ wS)

    def __call__(self, x, check: bool = True):
        xs, scalar = _as_array(x)
        if np.any(xs > self.x_max * (1 + 1e-12)):
            raise DomainError(f"spectral rule was built for x <= {self.x_max}")
        fine = self._eval(self.rules[1], xs)
        if check:
            coarse = self._eval(self.rules[0], xs)
            gap = np.abs(fine - coarse)
            if np.any(gap > self.cfg.tolerance(fine)):
                raise NonConvergence(f"spectral route moved by {gap.max():.2e}", axis="y")
        return float(fine[0]) if scalar else fine


@lru_cache(maxsize=64)
def spectral_poly(inp: PolyconvInput, x_max: float, cfg: QuadratureConfig = DEFAULT_CONFIG):
    return SpectralPoly(inp, x_max, cfg)


def polyconv_spectral(
    inp: PolyconvInput, xgrid: GridSpec, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> SampledFunction:
    xs = xgrid.points()
    if inp.is_zero():
        return SampledFunction.from_arrays(xgrid, np.zeros(xs.shape))
    sp = spectral_poly(inp, float(xs.max()), cfg)
    return SampledFunction.from_arrays(xgrid, sp(xs))


def polyconv_spectral_at(inp: PolyconvInput, x, cfg: QuadratureConfig = DEFAULT_CONFIG):
    xs, scalar = _as_array(x)
    if inp.is_zero():
        out = np.zeros(xs.shape)
    else:
        out = spectral_poly(inp, max(40.0, float(xs.max())), cfg)(xs)
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# composed route


@lru_cache(maxsize=64)
def sneddon_table(
    f: FunctionExpr, g: FunctionExpr, grid: GridSpec = COMPOSED_GRID, cfg=DEFAULT_CONFIG
) -> Tabulated:
    return Tabulated(SampledFunction.from_arrays(grid, sneddon_conv(f, g, grid.points(), cfg)))


def polyconv_composed(
    inp: PolyconvInput, x, cfg: QuadratureConfig = DEFAULT_CONFIG, grid: GridSpec = COMPOSED_GRID
):
    """``((f *1 g) *2 h)(x)`` with ``f *1 g`` tabulated on ``grid``."""
    xs, scalar = _as_array(x)
    if inp.is_zero():
        out = np.zeros(xs.shape)
        return float(out[0]) if scalar else out
    inner = sneddon_table(inp.f, inp.g, grid, cfg)
    return yb_conv(inner, inp.h, x, cfg)


# --------------------------------------------------------------------------
# lemma audit


def _abs_integral(fn, a: float, b: float, probe: np.ndarray, cfg, extra: Sequence[float] = ()):
    """``int_a^b |fn|`` with sign changes located first."""
    grid = np.unique(np.concatenate([probe, np.asarray(extra, dtype=float)]))
    grid = grid[(grid >= a) & (grid <= b)]
    vals = fn(grid)
    roots = []
    for i in np.nonzero(vals[:-1] * vals[1:] < 0)[0]:
        roots.append(brentq(lambda t: float(fn(np.array([t]))[0]), grid[i], grid[i + 1], xtol=1e-15))
    return integrate_finite(
        lambda t: np.abs(fn(t)), a, b, cfg, breakpoints=[*roots, *extra]
    ).value


def kernel_bound_audit(a: float, b: float, c: float, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Bounds on the four one-variable integrals of ``|Phi|``.

    With the triple held fixed in the remaining slots:

    * ``I1 = int |Phi(., a, b, c)| dx``, ``I2 = int |Phi(a, ., b, c)| du`` and
      ``I3 = int |Phi(a, b, ., c)| dv`` are each compared with ``4 K_0(c)``;
    * ``I4 = int |Phi(a, b, c, .)| dw`` is compared with ``4 sech(t_min)``,
      ``cosh t_min`` being the smallest of the four ``cosh`` arguments.

    Returns the four reports in that order.
    """
    if not c > 0:
        raise DomainError("kernel_bound_audit needs w > 0 in the first three checks")
    cfg_local = cfg
    k0c = float(k0(c, cfg))
    Tw = cosh_truncation(c, 1e-3 * cfg.abs_tol)
    reach = a + b + c + Tw + 1.0
    probe = np.linspace(0.0, reach, 4097)
    centers = [abs(a - b), a + b, a, b, c, abs(a - c), abs(b - c), a + c, b + c, abs(a + b - c),
               abs(a - b - c) , abs(c - a + b)]
    tol = 10 * cfg.abs_tol
    reports = []
    one_var = [
        ("I1", lambda t: kernel_phi(t, a, b, c), "(u,v,w)"),
        ("I2", lambda t: kernel_phi(a, t, b, c), "(x,v,w)"),
        ("I3", lambda t: kernel_phi(a, b, t, c), "(x,u,w)"),
    ]
    for name, fn, slots in one_var:
        lhs = _abs_integral(fn, 0.0, reach, probe, cfg_local, centers)
        reports.append(
            InequalityReport(
                name, lhs, 4 * k0c, constant_used=4.0, tol=tol,
                detail=f"{slots}=({a}, {b}, {c}); rhs = 4 K0({c})",
            )
        )
    args = np.array([a - b + c, a - b - c, a + b + c, a + b - c])
    cmin = float(np.min(np.cosh(args)))
    Wmax = -math.log(1e-3 * cfg.abs_tol) / cmin + 1.0
    wprobe = np.concatenate([np.geomspace(1e-8, Wmax, 2049), [0.0]])
    fn4 = lambda w: kernel_phi(a, b, c, np.maximum(w, 1e-300))  # noqa: E731
    lhs4 = _abs_integral(fn4, 0.0, Wmax, wprobe, cfg_local)
    t_min = math.acosh(cmin)
    reports.append(
        InequalityReport(
            "I4", lhs4, 4 * float(sech(t_min)), constant_used=4.0, tol=tol,
            detail=f"(x,u,v)=({a}, {b}, {c}); cosh t_min = {cmin:.12g}",
        )
    )
    return reports
