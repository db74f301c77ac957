"""Macdonald functions of zero and imaginary order, Gamma, and sech.

``K_0`` and ``K_iy`` come straight from their integral representations

    K_iy(x) = int_0^inf exp(-x cosh t) cos(y t) dt,

integrated on a panel layout adapted to the shape of ``exp(-x cosh t)``: flat
up to the knee ``cosh t = 1/x``, then double-exponentially small. The factor
``exp(-x)`` is pulled out so that large arguments keep full relative accuracy.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import DomainError, NonConvergence
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    composite_rule,
    find_cutoff,
    oscillation_width,
)

_ORDER = 16


def _truncation(x: float, eps: float) -> float:
    """T with exp(-x (cosh T - 1)) / (x sinh T) below eps."""
    ratio = 1.0 + max(0.0, -math.log(eps) + math.log(2.0 / x)) / x
    T = math.acosh(ratio)

    def tail(t: float) -> float:
        if t <= 0:
            return math.inf
        z = -x * (math.cosh(t) - 1.0)
        return math.exp(z) / (x * math.sinh(t)) if z > -745 else 0.0

    if tail(T) >= eps:
        T = find_cutoff(tail, eps, start=T, step=1.0 / 256.0)
    return T


def _edges(x: float, T: float, max_width: float) -> np.ndarray:
    knee = math.acosh(max(1.0, 1.0 / x))
    knee = min(knee, T)
    span = T - knee
    right = np.linspace(knee, T, max(1, int(math.ceil(span / min(0.25, max(span / 8, 1e-3))))) + 1)
    left = [knee]
    d = 0.5
    while knee - d > 0:
        left.append(knee - d)
        d = d + 0.5 if d < 4 else 2 * d
    left.append(0.0)
    edges = np.unique(np.concatenate([np.asarray(left), right]))
    if np.isfinite(max_width):
        out = [edges[:1]]
        for lo, hi in zip(edges[:-1], edges[1:]):
            n = max(1, int(math.ceil((hi - lo) / max_width)))
            out.append(np.linspace(lo, hi, n + 1)[1:])
        edges = np.concatenate(out)
    return edges


def _kernel_integral(x: float, ys: np.ndarray, cfg: QuadratureConfig) -> np.ndarray:
    """exp(x) * int_0^T exp(-x cosh t) cos(y t) dt for all ys at once."""
    T = _truncation(x, cfg.tail_epsilon)
    width = oscillation_width(float(ys.max()) if ys.size else 0.0, cfg, _ORDER)
    prev = None
    for _ in range(cfg.max_refinement + 1):
        nodes, weights = composite_rule(_edges(x, T, width), _ORDER)
        kern = np.exp(-x * (np.cosh(nodes) - 1.0)) * weights
        vals = np.cos(np.outer(ys, nodes)) @ kern
        if prev is not None and np.all(np.abs(vals - prev) <= 1e-2 * cfg.tolerance(vals)):
            return vals
        prev = vals
        width = min(width, 0.25) * 0.5
    raise NonConvergence(f"K_iy quadrature did not settle at x = {x}")


@lru_cache(maxsize=65536)
def _k0_scalar(x: float, cfg: QuadratureConfig) -> float:
    return float(math.exp(-x) * _kernel_integral(x, np.zeros(1), cfg)[0])


def k0(x, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Macdonald function K_0 from its integral representation; scalar or array."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("k0 needs x > 0")
    if arr.ndim == 0:
        return _k0_scalar(float(arr), cfg)
    flat = arr.ravel()
    out = np.fromiter((_k0_scalar(float(v), cfg) for v in flat), float, flat.size)
    return out.reshape(arr.shape)


def macdonald_iy(y, x, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """K_iy(x) for real y >= 0 and x > 0 (broadcasting)."""
    yy, xx = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(x, dtype=float))
    if np.any(~(xx > 0)):
        raise DomainError("macdonald_iy needs x > 0")
    if np.any(yy < 0):
        raise DomainError("macdonald_iy needs y >= 0")
    out = np.empty(xx.shape)
    fx, fy, fo = xx.ravel(), yy.ravel(), out.reshape(-1)
    for xv in np.unique(fx):
        sel = fx == xv
        ys = fy[sel]
        vals = _kernel_integral(float(xv), ys, cfg)
        vals = np.where(ys == 0, _k0_scalar(float(xv), cfg) * math.exp(xv), vals)
        fo[sel] = math.exp(-xv) * vals
    return float(out) if out.ndim == 0 else out


def gamma_fn(x: float) -> float:
    """Euler Gamma on (0, 171]."""
    if not x > 0:
        raise DomainError("gamma_fn needs x > 0")
    if x > 171.0:
        raise DomainError("gamma_fn overflows above 171")
    return math.gamma(x)


def sech(t):
    """1/cosh(t) without overflow."""
    a = np.abs(np.asarray(t, dtype=float))
    e = np.exp(-a)
    out = 2.0 * e / (1.0 + e * e)
    return float(out) if out.ndim == 0 else out


def kl_decay_factor(y, beta: float):
    """exp(-y arccos beta), the exponential majorant of K_iy(x)/K_0(beta x)."""
    return np.exp(-np.asarray(y, dtype=float) * math.acos(beta))
