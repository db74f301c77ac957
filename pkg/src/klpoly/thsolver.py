"""Spectral solver for ``f + (f *1 phi) = P(xi, phi, h)``.

With ``S = F_c phi / (1 + F_c phi)`` (the cosine spectrum of the resolvent
kernel ``ell``) the solution is the polyconvolution ``P(xi, ell, h)``
evaluated in Parseval form,

    f(x) = sqrt(2/pi) int_0^inf (F_s xi)(y) S(y) K[h](y) sin(x y) dy,

so ``ell`` itself is only needed for the composed cross-check and the
a-priori bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp_special
from scipy.interpolate import CubicSpline

from .convolutions import (
    COMPOSED_GRID,
    PolyconvInput,
    polyconv_spectral_at,
    sneddon_conv,
    sneddon_table,
    yb_conv,
)
from .errors import DomainError, NonConvergence, SingularSymbol
from .funcmodel import (
    INF,
    Computed,
    FunctionExpr,
    GridSpec,
    NormSpec,
    SampledFunction,
    Tabulated,
    TwoParam,
    Custom,
    Product,
    norm,
)
from .inequalities import ExponentTuple, constant_c1
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    composite_rule,
    filon_linear,
    oscillation_width,
    panel_edges,
)
from .reports import InequalityReport
from .special import k0
from .transforms import DEFAULT_YGRID, SQRT_2_PI, fourier_values, kl_values

DEFAULT_DELTA = 1e-8
ELL_YGRID = GridSpec.log_uniform(1e-4, 200.0, 4000)
ELL_XGRID = GridSpec.uniform(0.0, 40.0, 4001)
X_SOLUTION = 40.0


@dataclass(frozen=True)
class SolveReport:
    solution: SampledFunction
    ell_spectrum: SampledFunction
    ell_function: SampledFunction | None
    residual_linf: float
    residual_l1: float
    l1_bound_lhs: float
    l1_bound_rhs: float
    symbol_min_modulus: float

    @property
    def bound_holds(self) -> bool:
        return self.l1_bound_lhs <= self.l1_bound_rhs * (1 + 1e-9)

    def to_dict(self) -> dict:
        return {
            "residual_linf": self.residual_linf,
            "residual_l1": self.residual_l1,
            "l1_bound_lhs": self.l1_bound_lhs,
            "l1_bound_rhs": self.l1_bound_rhs,
            "l1_bound_holds": self.bound_holds,
            "symbol_min_modulus": self.symbol_min_modulus,
            "solution": {"x": self.solution.x.tolist(), "value": list(self.solution.values)},
        }


def _symbol_values(phi: FunctionExpr, y: np.ndarray, cfg, delta: float) -> tuple[np.ndarray, float]:
    fc, _ = fourier_values(phi, y, "cosine", cfg)
    mod = np.abs(1.0 + fc)
    j = int(np.argmin(mod)) if y.size else 0
    if y.size and mod[j] < delta:
        raise SingularSymbol(float(y[j]), float(mod[j]), delta)
    return fc / (1.0 + fc), float(mod[j]) if y.size else INF


def resolvent_symbol(
    phi: FunctionExpr,
    ygrid: GridSpec = DEFAULT_YGRID,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    delta: float = DEFAULT_DELTA,
) -> SampledFunction:
    """``(F_c ell)(y) = F_c phi / (1 + F_c phi)`` on ``ygrid``."""
    vals, _ = _symbol_values(phi, ygrid.points(), cfg, delta)
    return SampledFunction.from_arrays(ygrid, vals)


# --------------------------------------------------------------------------
# inverse cosine transform with an analytic tail


def _tail_integrals(x: np.ndarray, Y: float) -> tuple[np.ndarray, np.ndarray]:
    """``int_Y^inf cos(x y) y**-n dy`` for n = 2 and n = 4."""
    xY = x * Y
    si, _ = sp_special.sici(xY)
    J1 = np.where(x > 0, 0.5 * math.pi - si, 0.0)
    c, s = np.cos(xY), np.sin(xY)
    I2 = c / Y - x * J1
    J3 = s / (2 * Y**2) + 0.5 * x * I2
    I4 = c / (3 * Y**3) - x / 3.0 * J3
    return I2, I4


def recover_ell(
    ell_spectrum: SampledFunction, xgrid: GridSpec, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> SampledFunction:
    """``ell(x) = sqrt(2/pi) int_0^inf S(y) cos(x y) dy``.

    ``S`` is integrated as the piecewise-linear function through its samples
    (held constant below the first node). Above the last node ``Y`` it is
    continued by ``A/y^2 + B/y^4`` matched at ``Y`` and ``Y/2``.
    """
    y, S = ell_spectrum.x, ell_spectrum.y
    xs = xgrid.points()
    if not np.any(S):
        return SampledFunction.from_arrays(xgrid, np.zeros(xs.shape))
    if y[0] > 0:
        y = np.concatenate([[0.0], y])
        S = np.concatenate([[S[0]], S])
    body = filon_linear(y, S, xs, "cosine")
    Y = float(y[-1])
    half = float(np.interp(0.5 * Y, y, S))
    # S(Y) = A/Y^2 + B/Y^4 and S(Y/2) = 4A/Y^2 + 16B/Y^4
    B = (half - 4.0 * S[-1]) * Y**4 / 12.0
    A = (S[-1] - B / Y**4) * Y**2
    I2, I4 = _tail_integrals(xs, Y)
    return SampledFunction.from_arrays(xgrid, SQRT_2_PI * (body + A * I2 + B * I4))


def ell_function(ell: SampledFunction) -> Computed:
    """Cubic-spline interpolant of a recovered ``ell`` (0 beyond the grid)."""
    spline = CubicSpline(ell.x, ell.y)
    bound = 2.0 * float(np.max(np.abs(ell.y)))
    return Computed(lambda x: spline(x), float(ell.x[-1]), bound, label="ell")


# --------------------------------------------------------------------------
# solution


class SpectralSolution:
    """``P(xi, ell, h)`` in Parseval form with ``F_c ell`` taken from ``phi``."""

    def __init__(self, xi, phi, h, beta: float, cfg=DEFAULT_CONFIG, delta=DEFAULT_DELTA,
                 x_max: float = X_SOLUTION):
        self.cfg = cfg
        self.x_max = x_max
        c = (2.0 / math.pi) * norm(xi, NormSpec(1.0), cfg) * norm(phi, NormSpec(1.0), cfg)
        b = min(beta, 0.999)
        rate = math.acos(b)
        m = norm(h, NormSpec(1.0, TwoParam(0.0, b)), cfg)
        eps = 1e-2 * cfg.abs_tol
        # |S| <= |F_c phi| / min|1 + F_c phi|, the minimum taken on ELL_YGRID
        _, self.min_modulus = _symbol_values(phi, ELL_YGRID.points(), cfg, delta)
        Y = max(1.0, math.log(max(c * m / (self.min_modulus * rate * eps), 1.0)) / rate)
        width = min(0.5, oscillation_width(max(x_max, 1.0), cfg, 16))
        self.rules = []
        for w in (width, 0.5 * width):
            y, wy = composite_rule(panel_edges(0.0, Y, max_width=w), 16)
            S, mm = _symbol_values(phi, y, cfg, delta)
            self.min_modulus = min(self.min_modulus, mm)
            fs, _ = fourier_values(xi, y, "sine", cfg)
            kh, _ = kl_values(h, y, cfg)
            self.rules.append((y, wy * fs * S * kh))
        self.Y = Y

    def _eval(self, rule, xs):
        y, wS = rule
        return SQRT_2_PI * (np.sin(np.outer(xs, y)) @ wS)

    def __call__(self, x, check: bool = False) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        fine = self._eval(self.rules[1], xs)
        if check:
            gap = np.abs(fine - self._eval(self.rules[0], xs))
            if np.any(gap > self.cfg.tolerance(fine)):
                raise NonConvergence(f"solution integral moved by {gap.max():.2e}", axis="y")
        return fine

    def as_function(self, bound: float) -> Computed:
        return Computed(lambda x: self(x), self.x_max, bound, label="solution")


def _trapezoid_abs(xs: np.ndarray, r: np.ndarray) -> float:
    return float(np.trapezoid(np.abs(r), xs)) if xs.size > 1 else 0.0


def residual_check(f, phi, xi, h, beta: float = 0.5, cfg=DEFAULT_CONFIG, xgrid=None):
    """``(max|res|, int|res|)`` of ``res = f + (f *1 phi) - P(xi, phi, h)`` on the grid.

    ``f`` is a SampledFunction (interpolated linearly, which bounds the
    attainable residual by the grid resolution) or any FunctionExpr. For the
    latter ``xgrid`` selects the evaluation points.
    """
    if isinstance(f, SampledFunction):
        grid = f.grid if xgrid is None else xgrid
        fexpr = Tabulated(f)
    else:
        if xgrid is None:
            raise DomainError("residual_check needs xgrid for a function argument")
        grid, fexpr = xgrid, f
    xs = grid.points()
    fx = np.asarray(fexpr(xs), dtype=float)
    conv = sneddon_conv(fexpr, phi, xs, cfg)
    rhs = polyconv_spectral_at(PolyconvInput(xi, phi, h, beta), xs, cfg)
    res = fx + conv - rhs
    return float(np.max(np.abs(res))) if xs.size else 0.0, _trapezoid_abs(xs, res)


def solve_th(
    xi: FunctionExpr,
    phi: FunctionExpr,
    h: FunctionExpr,
    beta: float = 0.5,
    xgrid: GridSpec = GridSpec.uniform(0.0, 10.0, 101),
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    delta: float = DEFAULT_DELTA,
    with_ell: bool = True,
) -> SolveReport:
    """Solve on ``xgrid`` and fill residuals and the L1 a-priori bound."""
    if not 0 < beta <= 1:
        raise DomainError("beta must lie in (0, 1]")
    xs = xgrid.points()
    if float(xs.max()) > X_SOLUTION:
        raise DomainError(f"solution grid must stay within [0, {X_SOLUTION}]")
    spectrum = resolvent_symbol(phi, ELL_YGRID, cfg, delta)
    ell = recover_ell(spectrum, ELL_XGRID, cfg) if with_ell else None
    if xi.is_zero() or h.is_zero():
        zero = SampledFunction.from_arrays(xgrid, np.zeros(xs.shape))
        return SolveReport(zero, spectrum, ell, 0.0, 0.0, 0.0, 0.0,
                           float(np.min(np.abs(1.0 + _fc(phi, ELL_YGRID, cfg)))))
    sol = SpectralSolution(xi, phi, h, beta, cfg, delta)
    values = sol(xs, check=True)
    dense = sol(np.linspace(0.0, X_SOLUTION, 801))
    fexpr = sol.as_function(2.0 * float(np.max(np.abs(dense))))
    r_inf, r_l1 = residual_check(fexpr, phi, xi, h, beta, cfg, xgrid)
    lhs = norm(fexpr, NormSpec(1.0), cfg)
    ell_l1 = norm(ell_function(ell if ell is not None else recover_ell(spectrum, ELL_XGRID, cfg)),
                  NormSpec(1.0), cfg)
    rhs = SQRT_2_PI * norm(xi, NormSpec(1.0), cfg) * ell_l1 * norm(
        h, NormSpec(1.0, TwoParam(0.0, beta)), cfg
    )
    return SolveReport(
        SampledFunction.from_arrays(xgrid, values), spectrum, ell, r_inf, r_l1, lhs, rhs,
        min(sol.min_modulus, float(np.min(np.abs(1.0 + _fc(phi, ELL_YGRID, cfg))))),
    )


def _fc(phi, grid, cfg):
    v, _ = fourier_values(phi, grid.points(), "cosine", cfg)
    return v


def solve_composed(
    xi: FunctionExpr,
    ell: SampledFunction,
    h: FunctionExpr,
    x,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """``((xi *1 ell) *2 h)(x)`` with ``ell`` given in physical space."""
    inner = sneddon_table(xi, ell_function(ell), COMPOSED_GRID, cfg)
    return np.asarray(yb_conv(inner, h, np.asarray(x, dtype=float), cfg))


def remark3_bounds(
    xi: FunctionExpr,
    ell: FunctionExpr,
    h: FunctionExpr,
    exps: ExponentTuple,
    beta: float = 0.5,
    weights=None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    solution: FunctionExpr | None = None,
) -> InequalityReport:
    """A-priori ``L_s`` bound on the solution ``f = P(xi, ell, h)``.

    Mode A (``weights=None``) checks ``|f|_s <= C1 |xi|_p |ell|_q |h|_{L_r^{0,beta}}``
    under ``1/p+1/q+1/r = 2+1/s`` (``s = inf`` gives the sup bound). Mode B
    takes ``weights=(rho2, rho3)``; ``ell`` and ``h`` are then read as the
    factors ``ell1``, ``h1`` of ``ell = ell1 rho2`` and ``h = h1 rho3``, and
    ``|f|_p <= C3 |xi|_p |ell1|_{L_p(rho2)} |h1|_{L_p(rho3)}`` is checked
    with ``p = exps.p``.
    """
    from .inequalities import poly_function

    if weights is not None:
        rho2, rho3 = weights
        ell1, h1 = ell, h
        ell, h = Product(ell1, rho2), Product(h1, rho3)
    if solution is None:
        P, dense = poly_function(xi, ell, h, beta, cfg)
    else:
        P = solution
        dense = np.asarray(solution(np.geomspace(1e-3, X_SOLUTION, 400)), dtype=float)
    if weights is None:
        exps.check("young_norm")
        lhs = float(np.max(np.abs(dense))) if exps.s == INF else norm(P, NormSpec(exps.s), cfg)
        c = constant_c1(exps.r)
        parts = (norm(xi, NormSpec(exps.p), cfg), norm(ell, NormSpec(exps.q), cfg),
                 norm(h, NormSpec(exps.r, TwoParam(0.0, beta)), cfg))
        name = "apriori[A]"
    else:
        p = exps.p
        if not p > 1:
            raise DomainError("weighted mode needs p > 1")
        lhs = norm(P, NormSpec(p), cfg)
        ws = max(h.support()[0], 1e-3)
        e = 1.0 - 1.0 / p
        c = SQRT_2_PI * float(k0(ws, cfg)) * (
            norm(rho2, NormSpec(1.0), cfg) * norm(rho3, NormSpec(1.0), cfg)
        ) ** e
        parts = (norm(xi, NormSpec(p), cfg), norm(ell1, NormSpec(p, Custom(rho2)), cfg),
                 norm(h1, NormSpec(p, Custom(rho3)), cfg))
        name = "apriori[B]"
    rhs = c * parts[0] * parts[1] * parts[2]
    return InequalityReport(
        name, lhs, rhs, c, 10.0 * cfg.tolerance(rhs),
        detail="norms=" + ", ".join(f"{v:.12g}" for v in parts),
    )
