"""Watson-type operator ``T f = (1 - d^2/dx^2) poly(f, g0, h0)``.

In spectral form ``T`` is the multiplier ``Theta(y) = (1+y^2) F_c g0 K[h0]``
sandwiched between two sine transforms. A multiplier may also be given
directly (``MultiplierTheta.constant`` and ``MultiplierTheta.from_function``),
which is how operators satisfying the unitarity condition are exercised: no
concrete pair ``(g0, h0)`` meeting it is known.

A multiplier tending to a constant ``Theta_inf`` at infinity is applied as

    T f = Theta_inf * f + F_s[(Theta - Theta_inf) F_s f],

so that only a decaying symbol is ever integrated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .convolutions import PolyconvInput, polyconv_direct
from .errors import ConditionNotSatisfied, DomainError, NonConvergence
from .funcmodel import (
    FunctionExpr,
    GridSpec,
    Indicator,
    NormSpec,
    Product,
    SampledFunction,
    Tabulated,
    TwoParam,
    norm,
)
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    composite_rule,
    find_cutoff,
    oscillation_width,
    panel_edges,
)
from .reports import InequalityReport
from .transforms import DEFAULT_YGRID, SQRT_2_PI, fourier_values, kl_values

DIVISION_FLOOR = 1e-12


@dataclass(frozen=True)
class WatsonPair:
    g0: FunctionExpr
    h0: FunctionExpr
    beta: float = 0.5

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise DomainError("WatsonPair needs beta in (0, 1)")


@dataclass(frozen=True)
class MultiplierTheta:
    """``Theta`` sampled on ``ygrid`` plus an evaluator for arbitrary ``y``.

    ``asymptote`` is the limit of ``Theta`` at infinity and ``y_max`` a point
    beyond which ``Theta - asymptote`` is negligible.
    """

    ygrid: GridSpec
    values: tuple
    asymptote: float = 0.0
    y_max: float = 0.0
    fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    label: str = "pair"

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.fn is None:
            raise DomainError("multiplier has no evaluator")
        return np.asarray(self.fn(y), dtype=float) * np.ones(y.shape)

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(np.asarray(self.values))

    @classmethod
    def constant(cls, c: float = 1.0, ygrid: GridSpec = DEFAULT_YGRID) -> "MultiplierTheta":
        n = ygrid.n
        return cls(ygrid, (float(c),) * n, float(c), 0.0, lambda y: np.full(np.shape(y), c),
                   f"constant {c}")

    @classmethod
    def from_function(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        asymptote: float,
        y_max: float,
        ygrid: GridSpec = DEFAULT_YGRID,
        label: str = "synthetic",
    ) -> "MultiplierTheta":
        vals = tuple(np.asarray(fn(ygrid.points()), dtype=float).tolist())
        return cls(ygrid, vals, float(asymptote), float(y_max), fn, label)


def _pair_symbol(pair: WatsonPair, cfg: QuadratureConfig):
    def fn(y):
        y = np.asarray(y, dtype=float)
        fc, _ = fourier_values(pair.g0, y, "cosine", cfg)
        kh, _ = kl_values(pair.h0, y, cfg)
        return (1.0 + y * y) * fc * kh

    return fn


def _pair_y_max(pair: WatsonPair, cfg: QuadratureConfig, scale: float = 1.0) -> float:
    """Y beyond which ``int |Theta| * scale dy`` is below the tolerance."""
    b = pair.beta
    r = math.acos(b)
    c = SQRT_2_PI * norm(pair.g0, NormSpec(1.0), cfg)
    c *= norm(pair.h0, NormSpec(1.0, TwoParam(0.0, b)), cfg) * scale
    if c == 0:
        return 0.0

    def tail(Y):
        return c * math.exp(-r * Y) * (1 / r + Y * Y / r + 2 * Y / r**2 + 2 / r**3)

    return find_cutoff(tail, 1e-2 * cfg.abs_tol, start=1.0, step=0.25)


def theta_multiplier(
    pair: WatsonPair, ygrid: GridSpec = DEFAULT_YGRID, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> MultiplierTheta:
    fn = _pair_symbol(pair, cfg)
    vals = tuple(fn(ygrid.points()).tolist())
    return MultiplierTheta(ygrid, vals, 0.0, _pair_y_max(pair, cfg), fn, "pair")


def _resolve(src, cfg: QuadratureConfig, ygrid: GridSpec = DEFAULT_YGRID) -> MultiplierTheta:
    if isinstance(src, MultiplierTheta):
        return src
    if isinstance(src, WatsonPair):
        return theta_multiplier(src, ygrid, cfg)
    raise DomainError("expected a WatsonPair or a MultiplierTheta")


def check_condition_unitary(
    src, ygrid: GridSpec = DEFAULT_YGRID, tol: float = 1e-6, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> InequalityReport:
    """Largest deviation of ``|F_c g0 K[h0]|`` from ``1/(1+y^2)`` on the grid."""
    theta = _resolve(src, cfg, ygrid)
    y = theta.ygrid.points()
    prod = theta.modulus / (1.0 + y * y)
    dev = float(np.max(np.abs(prod - 1.0 / (1.0 + y * y))))
    j = int(np.argmax(np.abs(prod - 1.0 / (1.0 + y * y))))
    return InequalityReport(
        "unitarity", dev, tol, detail=f"max deviation at y = {y[j]:.6g} ({theta.label})"
    )


# --------------------------------------------------------------------------
# spectral application


def _spectral_part(
    symbol: Callable[[np.ndarray], np.ndarray],
    y_max: float,
    xs: np.ndarray,
    cfg: QuadratureConfig,
) -> np.ndarray:
    """``sqrt(2/pi) int_0^y_max symbol(y) sin(x y) dy``, checked at two panel widths."""
    if y_max <= 0 or xs.size == 0:
        return np.zeros(xs.shape)
    width = min(0.5, oscillation_width(max(float(xs.max()), 1.0), cfg, 16))
    res = []
    for w in (width, 0.5 * width):
        y, wy = composite_rule(panel_edges(0.0, y_max, max_width=w), 16)
        res.append(SQRT_2_PI * (np.sin(np.outer(xs, y)) @ (wy * symbol(y))))
    gap = np.abs(res[0] - res[1])
    if np.any(gap > 10 * cfg.tolerance(res[1])):
        raise NonConvergence(f"Watson spectral integral moved by {gap.max():.2e}", axis="y")
    return res[1]


def _spectrum_of(f, cfg):
    if isinstance(f, SampledFunction):
        f = Tabulated(f)

    def spec(y):
        v, _ = fourier_values(f, y, "sine", cfg)
        return v

    return f, spec


def _apply(theta_fn, asym, y_max, f, xs, cfg):
    f, spec = _spectrum_of(f, cfg)
    out = np.zeros(xs.shape)
    if asym != 0.0:
        out += asym * np.asarray(f(xs), dtype=float)

    def symbol(y):
        return (theta_fn(y) - asym) * spec(y)

    return out + _spectral_part(symbol, y_max, xs, cfg)


def watson_apply_spectral(
    f, src, xgrid: GridSpec, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> SampledFunction:
    """``phi = F_s[Theta F_s f]`` on ``xgrid``."""
    xs = xgrid.points()
    theta = _resolve(src, cfg)
    if isinstance(f, FunctionExpr) and f.is_zero():
        return SampledFunction.from_arrays(xgrid, np.zeros(xs.shape))
    vals = _apply(theta.fn, theta.asymptote, theta.y_max, f, xs, cfg)
    return SampledFunction.from_arrays(xgrid, vals)


def watson_inverse(
    phi: SampledFunction,
    src,
    xgrid: GridSpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    tol: float = 1e-6,
    require_unitary: bool = True,
) -> SampledFunction:
    """Inverse operator in division form ``F_s[F_s phi / Theta]``.

    Under the unitarity condition ``Theta = 1/Theta`` and this is the
    symmetric form. With ``require_unitary=False`` any multiplier with a
    non-zero asymptote and ``|Theta| >= 1e-12`` is accepted.
    """
    theta = _resolve(src, cfg)
    report = check_condition_unitary(theta, theta.ygrid, tol, cfg)
    if require_unitary and not report.passed:
        raise ConditionNotSatisfied(
            f"unitarity condition fails by {report.lhs:.3e} > {tol:.1e}"
        )
    if theta.asymptote == 0.0:
        raise ConditionNotSatisfied("multiplier vanishes at infinity; no bounded inverse")
    if np.min(theta.modulus) < DIVISION_FLOOR:
        raise ConditionNotSatisfied("multiplier drops below the division floor")

    def inv(y):
        t = theta(y)
        return 1.0 / np.where(np.abs(t) < DIVISION_FLOOR, np.copysign(DIVISION_FLOOR, t), t)

    xs = xgrid.points()
    if not any(phi.values):
        return SampledFunction.from_arrays(xgrid, np.zeros(xs.shape))
    vals = _apply(inv, 1.0 / theta.asymptote, theta.y_max, phi, xs, cfg)
    return SampledFunction.from_arrays(xgrid, vals)


# --------------------------------------------------------------------------
# direct application


def watson_apply_direct(
    f: FunctionExpr,
    pair: WatsonPair,
    xgrid: GridSpec,
    fd_step: float = 1e-2,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    return_flags: bool = False,
):
    """``P - P''`` with ``P`` from the direct triple integral.

    Second differences use ``fd_step`` (one-sided below ``fd_step``). A
    Richardson check at ``fd_step/2`` and ``fd_step/4`` flags points whose
    difference error does not shrink about fourfold.
    """
    if not fd_step > 0:
        raise DomainError("fd_step must be positive")
    xs = xgrid.points()
    if f.is_zero() or pair.g0.is_zero() or pair.h0.is_zero():
        out = SampledFunction.from_arrays(xgrid, np.zeros(xs.shape))
        return (out, ()) if return_flags else out
    inp = PolyconvInput(f, pair.g0, pair.h0, pair.beta)
    steps = (fd_step, fd_step / 2, fd_step / 4)
    offsets = [0.0]
    for d in steps:
        offsets += [d, 2 * d, 3 * d, -d]
    stencil = np.unique(np.concatenate([np.maximum(xs + o, 0.0) for o in offsets]))
    values = polyconv_direct(inp, stencil, cfg)
    table = dict(zip(stencil.tolist(), values.tolist()))

    def P(x):
        return np.array([table[v] for v in np.asarray(x, dtype=float).tolist()])

    # one-sided branch is chosen by the largest step so all levels agree in form
    diffs = []
    for d in steps:
        cen = (P(xs + d) - 2 * P(xs) + P(np.maximum(xs - d, 0.0))) / d**2
        one = (2 * P(xs) - 5 * P(xs + d) + 4 * P(xs + 2 * d) - P(xs + 3 * d)) / d**2
        diffs.append(np.where(xs < fd_step, one, cen))
    e1 = diffs[0] - diffs[1]
    e2 = diffs[1] - diffs[2]
    noise = 1e-7
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = e1 / e2
    ok = (np.abs(e1) < noise) | (np.abs(ratio - 4.0) <= 1.0)
    flags = tuple(float(x) for x in xs[~ok])
    out = SampledFunction.from_arrays(xgrid, P(xs) - diffs[0])
    return (out, flags) if return_flags else out


# --------------------------------------------------------------------------
# Plancherel sequences and L1 -> Linf


def _l2_rule(X: float) -> tuple[np.ndarray, np.ndarray]:
    return composite_rule(panel_edges(0.0, X, max_width=0.5), 16)


def plancherel_sequence(
    f: FunctionExpr,
    src,
    N_list,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    x_extent: float = 60.0,
) -> np.ndarray:
    """``||phi_N - phi||_2`` with ``phi_N = T(f * 1_[0,N])`` for each N.

    The norm is an x-quadrature on ``[0, max(N) + x_extent]``.
    """
    Ns = np.asarray(N_list, dtype=float)
    if np.any(np.diff(Ns) <= 0) or np.any(Ns <= 0):
        raise DomainError("N_list must be positive and increasing")
    theta = _resolve(src, cfg)
    X = float(Ns.max()) + x_extent
    x, wx = _l2_rule(X)
    full = _apply(theta.fn, theta.asymptote, theta.y_max, f, x, cfg)
    out = []
    for N in Ns:
        fN = Product(f, Indicator(0.0, float(N)))
        phiN = _apply(theta.fn, theta.asymptote, theta.y_max, fN, x, cfg)
        out.append(math.sqrt(float(wx @ (phiN - full) ** 2)))
    return np.asarray(out)


def plancherel_spectral_norms(f, src, N_list, cfg=DEFAULT_CONFIG) -> np.ndarray:
    """Parseval counterpart ``||Theta F_s (f^N - f)||_2`` (valid for decaying Theta)."""
    theta = _resolve(src, cfg)
    if theta.asymptote != 0.0:
        raise DomainError("spectral counterpart needs a decaying multiplier")
    y, wy = composite_rule(panel_edges(0.0, theta.y_max, max_width=0.25), 16)
    th = theta(y)
    full, _ = fourier_values(f, y, "sine", cfg)
    out = []
    for N in np.asarray(N_list, dtype=float):
        part, _ = fourier_values(Product(f, Indicator(0.0, float(N))), y, "sine", cfg)
        out.append(math.sqrt(float(wy @ (th * (part - full)) ** 2)))
    return np.asarray(out)


def isometry_norms(f: FunctionExpr, src, cfg=DEFAULT_CONFIG, x_extent: float = 80.0):
    """``(||T f||_2 by x-quadrature, ||Theta F_s f||_2 by y-quadrature)``."""
    theta = _resolve(src, cfg)
    x, wx = _l2_rule(x_extent)
    phi = _apply(theta.fn, theta.asymptote, theta.y_max, f, x, cfg)
    if theta.asymptote != 0.0:
        raise DomainError("isometry surrogate is defined for decaying multipliers")
    y, wy = composite_rule(panel_edges(0.0, theta.y_max, max_width=0.25), 16)
    fs, _ = fourier_values(f, y, "sine", cfg)
    return math.sqrt(float(wx @ phi**2)), math.sqrt(float(wy @ (theta(y) * fs) ** 2))


def l1_linfty_bound_audit(
    f: FunctionExpr, src, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> InequalityReport:
    """``sup |T f| <= M ||f||_1`` with ``M = (2/pi) int |Theta| dy``."""
    theta = _resolve(src, cfg)
    l1 = norm(f, NormSpec(1.0), cfg)
    if theta.asymptote != 0.0:
        return InequalityReport(
            "l1_linfty", 0.0 if f.is_zero() else math.inf, math.nan,
            detail="multiplier does not decay; T is not bounded from L1 to Linf",
        )
    y, wy = composite_rule(panel_edges(0.0, theta.y_max, max_width=0.25), 16)
    M = (2.0 / math.pi) * float(wy @ np.abs(theta(y)))
    if f.is_zero():
        lhs = 0.0
    else:
        xs = np.unique(np.concatenate([np.linspace(0.0, 40.0, 801), np.geomspace(1e-3, 40.0, 400)]))
        lhs = float(np.max(np.abs(_apply(theta.fn, 0.0, theta.y_max, f, xs, cfg))))
    return InequalityReport(
        "l1_linfty", lhs, M * l1, constant_used=M, tol=10 * cfg.abs_tol,
        detail=f"M = (2/pi) int |Theta| = {M:.12g}; ||f||_1 = {l1:.12g}",
    )
