"""Numerical audits of the norm inequalities satisfied by the polyconvolution.

Every audit returns an :class:`InequalityReport` whose ``lhs`` is computed
from the polyconvolution itself and whose ``rhs`` is the product of the
stated constant and input norms.

Two substitutions make the constants computable. ``sech t`` is bounded
by 1. ``K_0(w)`` is evaluated at ``w*`` = the infimum of the support of
the function in the ``w`` slot, floored at ``1e-3``. Both only enlarge the
right-hand sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convolutions import PolyconvInput, spectral_poly
from .errors import DivisionUnstable, DomainError, WeightVanishes
from .funcmodel import (
    INF,
    Computed,
    Const,
    FunctionExpr,
    GridSpec,
    NormSpec,
    Product,
    ThreeParam,
    TwoParam,
    Custom,
    norm,
)
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate_finite
from .reports import InequalityReport
from .special import gamma_fn, k0

SQRT_2_PI = math.sqrt(2.0 / math.pi)
DENSE_GRID = GridSpec.log_uniform(1e-3, 40.0, 400)
X_MAX = 40.0
W_FLOOR = 1e-3
DIVISION_MIN = 1e-30


def _inv(p: float) -> float:
    return 0.0 if p == INF else 1.0 / p


@dataclass(frozen=True)
class ExponentTuple:
    p: float
    q: float
    r: float
    s: float = 1.0

    def __post_init__(self):
        for name in ("p", "q", "r", "s"):
            v = float(getattr(self, name))
            if not (v >= 1.0):
                raise DomainError(f"exponent {name} = {v} is outside [1, inf]")
            object.__setattr__(self, name, v)

    def linkage(self, kind: str) -> float:
        """Signed defect of the exponent relation required by ``kind``."""
        a = _inv(self.p) + _inv(self.q) + _inv(self.r)
        if kind == "young":
            return a + _inv(self.s) - 3.0
        if kind == "young_norm":
            return a - 2.0 - _inv(self.s)
        if kind in ("linfty", "threeparam"):
            return a - 2.0
        raise DomainError(f"unknown linkage kind {kind!r}")

    def check(self, kind: str) -> "ExponentTuple":
        d = self.linkage(kind)
        if abs(d) > 1e-12:
            raise DomainError(f"exponents {self} violate the {kind} relation by {d:.3g}")
        return self


def constant_c1(r: float, sech_t: float = 1.0) -> float:
    """``sqrt(2/pi) (sech t)**(1 - 1/r)``; the default ``sech t = 1`` gives ``sqrt(2/pi)``."""
    if not r >= 1:
        raise DomainError("constant_c1 needs r >= 1")
    if not 0 < sech_t <= 1:
        raise DomainError("sech t lies in (0, 1]")
    return SQRT_2_PI * sech_t ** (1.0 - _inv(r))


def threeparam_mass(alpha1: float, beta1: float, gamma1: float) -> float:
    """``int_0^inf x**alpha1 exp(-beta1 x**gamma1) dx`` in closed form."""
    if not (alpha1 > -1 and beta1 > 0 and gamma1 > 0):
        raise DomainError("need alpha1 > -1, beta1 > 0, gamma1 > 0")
    s = (alpha1 + 1.0) / gamma1
    return beta1 ** (-s) * gamma_fn(s) / gamma1


def constant_c2(r: float, s: float, alpha1: float, beta1: float, gamma1: float) -> float:
    if not s >= 1:
        raise DomainError("constant_c2 needs s >= 1")
    return constant_c1(r) * threeparam_mass(alpha1, beta1, gamma1) ** _inv(s)


# --------------------------------------------------------------------------
# polyconvolution as a function on [0, X_MAX]


def poly_function(f, g, h, beta: float, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """``(P, dense values)`` with ``P`` the spectral polyconvolution on ``[0, 40]``.

    The two-rule convergence check runs once on the dense grid; norm
    quadratures then call the fine rule alone.
    """
    inp = PolyconvInput(f, g, h, beta)
    xs = DENSE_GRID.points()
    if inp.is_zero():
        return Const(0.0), np.zeros(xs.shape)
    sp = spectral_poly(inp, X_MAX, cfg)
    dense = sp(xs)
    bound = 2.0 * float(np.max(np.abs(dense)))
    fn = Computed(lambda x: sp(x, check=False), X_MAX, bound, label="polyconvolution")
    return fn, dense


def _h_norm(h, r, beta, cfg):
    return norm(h, NormSpec(r, TwoParam(0.0, beta)), cfg)


def _tol(rhs: float, cfg: QuadratureConfig) -> float:
    return 10.0 * cfg.tolerance(rhs) if math.isfinite(rhs) else 0.0


def _cfg_dict(**kw) -> dict:
    return {k: (v if not isinstance(v, FunctionExpr) else str(v)) for k, v in kw.items()}


def young_audit(f, g, h, k, exps: ExponentTuple, beta: float = 0.5, cfg=DEFAULT_CONFIG):
    """``|int P k| <= C1 |f|_p |g|_q |h|_{L_r^{0,beta}} |k|_s`` with ``1/p+1/q+1/r+1/s = 3``."""
    exps.check("young")
    P, _ = poly_function(f, g, h, beta, cfg)
    if P.is_zero() or k.is_zero():
        lhs = 0.0
    else:
        hi = min(X_MAX, k.cutoff(cfg.tail_epsilon))
        bps = [b for b in k.breakpoints() if 0 < b < hi]
        lhs = abs(integrate_finite(lambda x: P(x) * k(x), 0.0, hi, cfg, breakpoints=bps,
                                   graded=True).value)
    c = constant_c1(exps.r)
    nf, ng = norm(f, NormSpec(exps.p), cfg), norm(g, NormSpec(exps.q), cfg)
    nh, nk = _h_norm(h, exps.r, beta, cfg), norm(k, NormSpec(exps.s), cfg)
    rhs = c * nf * ng * nh * nk
    return InequalityReport(
        "young", lhs, rhs, c, _tol(rhs, cfg),
        detail=f"C1={c:.12g}; |f|_p={nf:.12g}; |g|_q={ng:.12g}; |h|_r,beta={nh:.12g}; |k|_s={nk:.12g}",
        config=_cfg_dict(f=f, g=g, h=h, k=k, p=exps.p, q=exps.q, r=exps.r, s=exps.s, beta=beta),
    )


def young_norm_audit(f, g, h, exps: ExponentTuple, beta: float = 0.5, cfg=DEFAULT_CONFIG):
    """``|P|_s <= C1 |f|_p |g|_q |h|_{L_r^{0,beta}}`` with ``1/p+1/q+1/r = 2+1/s``."""
    exps.check("young_norm")
    P, dense = poly_function(f, g, h, beta, cfg)
    if exps.s == INF:
        lhs = float(np.max(np.abs(dense)))
    else:
        lhs = norm(P, NormSpec(exps.s), cfg)
    c = constant_c1(exps.r)
    nf, ng = norm(f, NormSpec(exps.p), cfg), norm(g, NormSpec(exps.q), cfg)
    nh = _h_norm(h, exps.r, beta, cfg)
    rhs = c * nf * ng * nh
    return InequalityReport(
        "young_norm", lhs, rhs, c, _tol(rhs, cfg),
        detail=f"C1={c:.12g}; |f|_p={nf:.12g}; |g|_q={ng:.12g}; |h|_r,beta={nh:.12g}",
        config=_cfg_dict(f=f, g=g, h=h, p=exps.p, q=exps.q, r=exps.r, s=exps.s, beta=beta),
    )


def linfty_audit(f, g, h, p, q, r, beta: float = 0.5, cfg=DEFAULT_CONFIG):
    """``sup |P| <= C1 |f|_p |g|_q |h|_{L_r^{0,beta}}`` with ``1/p+1/q+1/r = 2``."""
    exps = ExponentTuple(p, q, r, INF).check("linfty")
    _, dense = poly_function(f, g, h, beta, cfg)
    j = int(np.argmax(np.abs(dense)))
    lhs = float(abs(dense[j]))
    c = constant_c1(exps.r)
    nf, ng = norm(f, NormSpec(exps.p), cfg), norm(g, NormSpec(exps.q), cfg)
    nh = _h_norm(h, exps.r, beta, cfg)
    rhs = c * nf * ng * nh
    x_star = float(DENSE_GRID.points()[j])
    return InequalityReport(
        "linfty", lhs, rhs, c, _tol(rhs, cfg),
        detail=f"sup at x={x_star:.12g}; C1={c:.12g}; |f|_p={nf:.12g}; |g|_q={ng:.12g}; "
        f"|h|_r,beta={nh:.12g}",
        config=_cfg_dict(f=f, g=g, h=h, p=p, q=q, r=r, beta=beta, x_star=x_star),
    )


def threeparam_audit(
    f, g, h, p, q, r, s, alpha1, beta1, gamma1, beta: float = 0.5, cfg=DEFAULT_CONFIG
):
    """``|P|_{L_s(x^a1 exp(-b1 x^g1))} <= C2 |f|_p |g|_q |h|_{L_r^{0,beta}}``."""
    exps = ExponentTuple(p, q, r, s).check("threeparam")
    P, _ = poly_function(f, g, h, beta, cfg)
    lhs = norm(P, NormSpec(exps.s, ThreeParam(alpha1, beta1, gamma1)), cfg)
    c = constant_c2(exps.r, exps.s, alpha1, beta1, gamma1)
    nf, ng = norm(f, NormSpec(exps.p), cfg), norm(g, NormSpec(exps.q), cfg)
    nh = _h_norm(h, exps.r, beta, cfg)
    rhs = c * nf * ng * nh
    return InequalityReport(
        "threeparam", lhs, rhs, c, _tol(rhs, cfg),
        detail=f"C2={c:.12g}; |f|_p={nf:.12g}; |g|_q={ng:.12g}; |h|_r,beta={nh:.12g}",
        config=_cfg_dict(f=f, g=g, h=h, p=p, q=q, r=r, s=s, alpha1=alpha1, beta1=beta1,
                         gamma1=gamma1, beta=beta),
    )


# --------------------------------------------------------------------------
# weighted (Saitoh-type) bounds


def _is_one(rho: FunctionExpr) -> bool:
    return isinstance(rho, Const) and rho.c == 1.0


def _weighted(F: FunctionExpr, rho: FunctionExpr) -> FunctionExpr:
    return F if _is_one(rho) else Product(F, rho)


def _check_weight(rho: FunctionExpr, name: str) -> None:
    if _is_one(rho):
        return
    v = np.asarray(rho(DENSE_GRID.points()), dtype=float)
    if np.any(~(v > 0)):
        raise WeightVanishes(f"{name} is not strictly positive on the audit grid")


def _w_star(F3: FunctionExpr) -> float:
    return max(F3.support()[0], W_FLOOR)


def saitoh_audit(F1, F2, F3, rho1, rho2, rho3, p: float = 2.0, beta: float = 0.5,
                 cfg=DEFAULT_CONFIG) -> InequalityReport:
    """Weighted ``L_p`` bound for ``P(F1 rho1, F2 rho2, F3 rho3)``.

    A weight equal to ``Const(1)`` selects a degenerate mode. ``rho1 = 1`` or
    ``rho2 = 1`` gives the undivided bound with constant ``C3``, and
    ``rho3 = 1`` the one with ``C4``. Otherwise the general bound with the
    factor ``P(rho1, rho2, rho3)**(1/p - 1)`` is checked.
    """
    if not p > 1:
        raise DomainError("saitoh_audit needs p > 1")
    rhos = (rho1, rho2, rho3)
    for i, rho in enumerate(rhos, 1):
        _check_weight(rho, f"rho{i}")
    Fs = (F1, F2, F3)
    norms = []
    for F, rho in zip(Fs, rhos):
        spec = NormSpec(p) if _is_one(rho) else NormSpec(p, Custom(rho))
        norms.append(norm(F, spec, cfg))
    prod = norms[0] * norms[1] * norms[2]
    ws = _w_star(F3)
    kw = SQRT_2_PI * float(k0(ws, cfg))
    ones = [_is_one(r) for r in rhos]
    P, dense = poly_function(*(_weighted(F, r) for F, r in zip(Fs, rhos)), beta, cfg)
    e = 1.0 - 1.0 / p
    cfg_d = _cfg_dict(F1=F1, F2=F2, F3=F3, rho1=rho1, rho2=rho2, rho3=rho3, p=p, beta=beta,
                      w_star=ws)

    if ones[0] or ones[1]:
        if sum(ones) > 1:
            raise DomainError("at most one weight may be identically 1")
        others = [r for r, o in zip(rhos, ones) if not o]
        l1 = [norm(r, NormSpec(1.0), cfg) for r in others]
        c = kw * (l1[0] * l1[1]) ** e
        mode = "C3"
        lhs = norm(P, NormSpec(p), cfg) if not P.is_zero() else 0.0
    elif ones[2]:
        l1 = [norm(r, NormSpec(1.0), cfg) for r in rhos[:2]]
        c = SQRT_2_PI * kw ** (1.0 / p) * (l1[0] * l1[1]) ** e
        mode = "C4"
        lhs = norm(P, NormSpec(p), cfg) if not P.is_zero() else 0.0
    else:
        c = kw ** (1.0 / p)
        mode = "general"
        lhs = 0.0 if P.is_zero() else _saitoh_general_lhs(P, rhos, p, beta, cfg)
    rhs = c * prod
    return InequalityReport(
        f"saitoh[{mode}]", lhs, rhs, c, _tol(rhs, cfg),
        detail=f"w*={ws:.6g}; sqrt(2/pi)K0(w*)={kw:.12g}; weighted norms="
        + ", ".join(f"{v:.12g}" for v in norms),
        config=cfg_d,
    )


def _saitoh_general_lhs(P, rhos, p, beta, cfg) -> float:
    D, d_dense = poly_function(*rhos, beta, cfg)
    if np.min(np.abs(d_dense)) < DIVISION_MIN:
        raise DivisionUnstable("polyconvolution of the weights falls below 1e-30")
    expo = 1.0 / p - 1.0

    def fn(x):
        d = np.abs(D(x))
        if np.any(d[x > 0] < DIVISION_MIN):
            raise DivisionUnstable("polyconvolution of the weights falls below 1e-30")
        out = np.zeros(np.shape(x))
        nz = d > 0
        # |P| below the spectral route's absolute accuracy is rounding noise, which
        # d**expo would amplify where the weights decay
        pv = np.abs(P(x[nz]))
        out[nz] = np.where(pv > cfg.abs_tol, pv, 0.0) * d[nz] ** expo
        return out

    bound = 2.0 * float(np.max(np.abs(P(DENSE_GRID.points())) *
                               np.abs(d_dense) ** expo))
    return norm(Computed(fn, X_MAX, bound, label="weighted quotient"), NormSpec(p), cfg)


# --------------------------------------------------------------------------
# seeded suites

SUITES = ("young", "young_norm", "linfty", "threeparam", "saitoh")
YOUNG_EXPONENTS = ExponentTuple(4 / 3, 4 / 3, 4 / 3, 4 / 3)
YOUNG_NORM_EXPONENTS = ExponentTuple(9 / 7, 9 / 7, 9 / 7, 3.0)
LINFTY_EXPONENTS = (1.5, 1.5, 1.5)
THREEPARAM_S = 2.0
SAITOH_P = 2.0


def _suite_case(kind: str, seed: int, index: int, beta: float, cfg) -> list[InequalityReport]:
    from .family import random_function, random_triple, random_weight
    from .funcmodel import ExpDecay

    f, g, h = random_triple(seed, index)
    rng = np.random.default_rng([seed, index, 1])
    if kind == "young":
        return [young_audit(f, g, h, random_function(rng), YOUNG_EXPONENTS, beta, cfg)]
    if kind == "young_norm":
        return [young_norm_audit(f, g, h, YOUNG_NORM_EXPONENTS, beta, cfg)]
    if kind == "linfty":
        return [linfty_audit(f, g, h, *LINFTY_EXPONENTS, beta, cfg)]
    if kind == "threeparam":
        a1 = float(np.round(rng.uniform(0.0, 1.0), 6))
        b1, g1 = (float(np.round(v, 6)) for v in rng.uniform(0.5, 2.0, 2))
        return [threeparam_audit(f, g, h, *LINFTY_EXPONENTS, THREEPARAM_S, a1, b1, g1, beta, cfg)]
    if kind == "saitoh":
        w = [random_weight(rng) for _ in range(3)]
        one = Const(1.0)
        mode = index % 3
        if mode == 0:
            rhos = tuple(w)
        elif mode == 1:
            rhos = (one, w[1], w[2])
        else:
            rhos = (w[0], w[1], one)
        out = [saitoh_audit(f, g, h, *rhos, SAITOH_P, beta, cfg)]
        if index == 0:
            illus = (one, ExpDecay(1.0), ExpDecay(2.0))
            out.append(saitoh_audit(f, g, h, *illus, SAITOH_P, beta, cfg))
        return out
    raise DomainError(f"unknown audit suite {kind!r}")


def audit_suite(kind: str, seed: int = 7, count: int = 20, beta: float = 0.5,
                cfg: QuadratureConfig = DEFAULT_CONFIG, workers: int = 1) -> list[InequalityReport]:
    """Run one audit kind over ``count`` seeded triples (deterministic order)."""
    if kind not in SUITES:
        raise DomainError(f"unknown audit suite {kind!r}; expected one of {SUITES}")

    def job(i):
        return _suite_case(kind, seed, i, beta, cfg)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(count)))
    else:
        parts = [job(i) for i in range(count)]
    return [r for part in parts for r in part]
