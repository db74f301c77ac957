"""Fourier sine, Fourier cosine and Kontorovich-Lebedev transforms.

The Fourier transforms use the unitary normalization

    (F_s f)(y) = sqrt(2/pi) int_0^inf f(x) sin(x y) dx,

and likewise for ``F_c``. Tabulated inputs are integrated exactly as the
piecewise-linear functions they represent (Filon-type rule), everything else
through the oscillatory Gauss-Legendre batch.

The KL transform ``K[h](y) = int K_iy(x) h(x) dx`` is evaluated with the
order of integration swapped, which leaves a single cosine integral

    K[h](y) = int_0^inf cos(y t) Lambda_h(t) dt,
    Lambda_h(t) = int_c^inf h(w) exp(-w cosh t) dw,

where ``c`` is the lower cut. ``Lambda_h`` has closed forms for every
elementary variant and is integrated numerically (substituting
``z = w cosh t``) for the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp_special

from .errors import NotConverged
from .funcmodel import (
    Computed,
    ExpDecay,
    FunctionExpr,
    Gaussian,
    GridSpec,
    Indicator,
    PowExp,
    SampledFunction,
    Scaled,
    Sum,
    Tabulated,
)
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    adaptive_panels,
    composite_rule,
    filon_linear,
    find_cutoff,
    oscillatory_batch,
    panel_edges,
)
from .special import macdonald_iy

SQRT_2_PI = math.sqrt(2.0 / math.pi)
DEFAULT_YGRID = GridSpec.uniform(0.05, 8.0, 160)
DEFAULT_LOWER_CUT = 1e-12


@dataclass(frozen=True)
class TransformResult:
    spectrum: SampledFunction
    max_error_estimate: float


# --------------------------------------------------------------------------
# Fourier sine / cosine


def _tabulated_nodes(t: Tabulated) -> tuple[np.ndarray, np.ndarray]:
    x, v = t.sampled.x, t.sampled.y
    if x[0] > 0:
        x = np.concatenate([[0.0], x])
        v = np.concatenate([[v[0]], v])
    return x, v


def _fourier_raw(
    f: FunctionExpr, ys: np.ndarray, kind: str, cfg: QuadratureConfig
) -> tuple[np.ndarray, np.ndarray]:
    """``int_0^inf f(x) trig(x y) dx`` without the sqrt(2/pi) factor."""
    if f.is_zero():
        return np.zeros(ys.shape), np.zeros(ys.shape)
    if isinstance(f, Scaled):
        v, e = _fourier_raw(f.inner, ys, kind, cfg)
        return f.c * v, abs(f.c) * e
    if isinstance(f, Sum):
        v1, e1 = _fourier_raw(f.left, ys, kind, cfg)
        v2, e2 = _fourier_raw(f.right, ys, kind, cfg)
        return v1 + v2, e1 + e2
    if isinstance(f, Tabulated):
        x, v = _tabulated_nodes(f)
        return filon_linear(x, v, ys, kind), np.zeros(ys.shape)
    T = f.cutoff(cfg.tail_epsilon)
    vals, errs = oscillatory_batch(
        f, ys, kind, 0.0, T, cfg, breakpoints=f.breakpoints(), axis="x"
    )
    return vals, errs + f.tail_mass(T)


@lru_cache(maxsize=1024)
def _fourier_cached(f: FunctionExpr, ys: tuple, kind: str, cfg: QuadratureConfig):
    v, e = _fourier_raw(f, np.asarray(ys, dtype=float), kind, cfg)
    v.setflags(write=False)
    e.setflags(write=False)
    return v, e


def _cacheable(f: FunctionExpr) -> bool:
    return not isinstance(f, Computed)


def fourier_values(
    f: FunctionExpr, ys, kind: str, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> tuple[np.ndarray, np.ndarray]:
    """Values and error estimates of ``F_s f`` (kind ``sine``) or ``F_c f`` at ``ys``."""
    ys = np.asarray(ys, dtype=float)
    flat = ys.ravel()
    if _cacheable(f):
        v, e = _fourier_cached(f, tuple(flat.tolist()), kind, cfg)
    else:
        v, e = _fourier_raw(f, flat, kind, cfg)
    return SQRT_2_PI * v.reshape(ys.shape), SQRT_2_PI * e.reshape(ys.shape)


def _as_result(grid: GridSpec, vals: np.ndarray, errs: np.ndarray) -> TransformResult:
    return TransformResult(
        SampledFunction.from_arrays(grid, vals), float(np.max(errs)) if errs.size else 0.0
    )


def fourier_sine(
    f: FunctionExpr, ygrid: GridSpec = DEFAULT_YGRID, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> TransformResult:
    vals, errs = fourier_values(f, ygrid.points(), "sine", cfg)
    return _as_result(ygrid, vals, errs)


def fourier_cosine(
    f: FunctionExpr, ygrid: GridSpec = DEFAULT_YGRID, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> TransformResult:
    vals, errs = fourier_values(f, ygrid.points(), "cosine", cfg)
    return _as_result(ygrid, vals, errs)


# --------------------------------------------------------------------------
# Kontorovich-Lebedev


def _upper_gamma_int(k: int, z: np.ndarray) -> np.ndarray:
    """Gamma(k+1, z) for integer k >= 0, as exp(-z) * k! * sum z^j/j!."""
    s = np.zeros_like(z)
    term = np.ones_like(z)
    for j in range(k + 1):
        if j:
            term = term * z / j
        s = s + term
    return math.factorial(k) * np.exp(-z) * s


def _profile_numeric(
    h: FunctionExpr, c: np.ndarray, cut: float, cfg: QuadratureConfig
) -> np.ndarray:
    """``int_cut^inf h(w) exp(-w c) dw`` per c, substituting z = w c."""
    lo, hi = h.support()
    sup = h.sup_beyond(0.0)
    out = np.empty(c.shape)
    bps = h.breakpoints()
    for i, ci in enumerate(c):
        z0 = max(cut, lo) * ci
        zmax = -math.log(cfg.tail_epsilon * 1e-3 / max(sup, 1e-300))
        z1 = min(hi * ci, z0 + max(zmax, 1.0))
        if z1 <= z0:
            out[i] = 0.0
            continue
        edges = panel_edges(z0, z1, [b * ci for b in bps], max_width=2.0)

        def integrand(z, ci=ci):
            return h(z / ci) * np.exp(-z)

        val, _ = adaptive_panels(integrand, edges, cfg, axis="w")
        out[i] = val[0] / ci
    return out


def kl_profile(
    h: FunctionExpr,
    t,
    lower_cut: float = DEFAULT_LOWER_CUT,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """``Lambda_h(t) = int_{lower_cut}^inf h(w) exp(-w cosh t) dw``."""
    t = np.asarray(t, dtype=float)
    c = np.cosh(t)
    cut = lower_cut
    if h.is_zero():
        return np.zeros(t.shape)
    if isinstance(h, Scaled):
        return h.c * kl_profile(h.inner, t, cut, cfg)
    if isinstance(h, Sum):
        return kl_profile(h.left, t, cut, cfg) + kl_profile(h.right, t, cut, cfg)
    if isinstance(h, ExpDecay):
        r = h.a + c
        return np.exp(-r * cut) / r
    if isinstance(h, PowExp):
        r = h.a + c
        return _upper_gamma_int(h.k, r * cut) / r ** (h.k + 1)
    if isinstance(h, Indicator):
        a = max(h.lo, cut)
        if a >= h.hi:
            return np.zeros(t.shape)
        return (np.exp(-a * c) - np.exp(-h.hi * c)) / c
    if isinstance(h, Gaussian):
        ra = math.sqrt(h.a)
        u = (c + 2.0 * h.a * cut) / (2.0 * ra)
        return (
            0.5 * math.sqrt(math.pi) / ra
            * sp_special.erfcx(u)
            * np.exp(-c * cut - h.a * cut * cut)
        )
    return _profile_numeric(h, c, cut, cfg)


def _profile_cutoff(h: FunctionExpr, eps: float) -> float:
    """t beyond which int_t^inf |Lambda_h| is below eps."""
    sup = h.sup_beyond(0.0)
    lo = h.support()[0]

    def tail(T: float) -> float:
        crude = 2.0 * sup * math.exp(-T)
        if lo > 0 and T > 0:
            z = -lo * math.cosh(T)
            fine = sup * math.exp(z) / (lo * math.sinh(T)) if z > -745 else 0.0
            return min(crude, fine)
        return crude

    return find_cutoff(tail, eps, start=0.0, step=1.0 / 16.0)


def _kl_raw(
    h: FunctionExpr, ys: np.ndarray, cfg: QuadratureConfig, lower_cut: float
) -> tuple[np.ndarray, np.ndarray]:
    if h.is_zero():
        return np.zeros(ys.shape), np.zeros(ys.shape)
    T = _profile_cutoff(h, cfg.tail_epsilon)

    def profile(t):
        return kl_profile(h, t, lower_cut, cfg)

    vals, errs = oscillatory_batch(profile, ys, "cosine", 0.0, T, cfg, axis="t")
    return vals, errs + cfg.tail_epsilon


def _halving_gap(h: FunctionExpr, ys: np.ndarray, lower_cut: float, cfg) -> np.ndarray:
    """``int_{c/2}^{c} K_iy(x) h(x) dx``, the change caused by halving the cut."""
    nodes, weights = composite_rule(np.array([0.5 * lower_cut, lower_cut]), 8)
    hv = np.asarray(h(nodes), dtype=float) * weights
    kern = macdonald_iy(ys[:, None], nodes[None, :], cfg)
    return kern @ hv


@lru_cache(maxsize=1024)
def _kl_cached(h: FunctionExpr, ys: tuple, cfg: QuadratureConfig, lower_cut: float):
    v, e = _kl_raw(h, np.asarray(ys, dtype=float), cfg, lower_cut)
    v.setflags(write=False)
    e.setflags(write=False)
    return v, e


def kl_values(
    h: FunctionExpr,
    ys,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    lower_cut: float = DEFAULT_LOWER_CUT,
    check_cut: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Values and error estimates of ``K[h]`` at ``ys``.

    With ``check_cut`` the effect of halving ``lower_cut`` is measured and
    :class:`NotConverged` raised if it exceeds the tolerance.
    """
    shape = np.shape(ys)
    ys = np.asarray(ys, dtype=float).ravel()
    if not lower_cut > 0:
        raise NotConverged("lower_cut must be positive")
    if _cacheable(h):
        v, e = _kl_cached(h, tuple(ys.tolist()), cfg, float(lower_cut))
    else:
        v, e = _kl_raw(h, ys, cfg, lower_cut)
    if check_cut and not h.is_zero() and ys.size:
        gap = np.abs(_halving_gap(h, ys, lower_cut, cfg))
        if np.any(gap > cfg.tolerance(v)):
            j = int(np.argmax(gap - cfg.tolerance(v)))
            raise NotConverged(
                f"halving lower_cut={lower_cut:.1e} moves K[h]({ys[j]:.4g}) by {gap[j]:.2e}"
            )
        e = e + gap
    return v.reshape(shape), e.reshape(shape)


def kl_transform(
    h: FunctionExpr,
    ygrid: GridSpec = DEFAULT_YGRID,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    lower_cut: float = DEFAULT_LOWER_CUT,
) -> TransformResult:
    vals, errs = kl_values(h, ygrid.points(), cfg, lower_cut)
    return _as_result(ygrid, vals, errs)
