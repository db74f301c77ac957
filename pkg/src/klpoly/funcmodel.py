"""Functions on the half-line, grids, interpolation and weighted norms.

A :class:`FunctionExpr` is an immutable, hashable description of a real
function on ``[0, inf)``. Besides pointwise evaluation every variant reports
rigorous tail information (``sup_beyond`` and ``tail_mass``), which is what
the quadrature layer needs to pick truncation points.

Norms take a :class:`NormSpec`, a pair of an exponent and a weight::

    >>> norm(ExpDecay(1.0), NormSpec(2.0))        # doctest: +ELLIPSIS
    0.7071067811...
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, special as sp_special

from .errors import DomainError, InputError, NonIntegrable, TailNotResolvable
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    adaptive_panels,
    find_cutoff,
    panel_edges,
)
from .special import k0

INF = math.inf
# first graded panel is [0, 2**-FIRST_PANEL_DEPTH]; its mass is added analytically
FIRST_PANEL_DEPTH = 50
SUP_POINTS = 4096


def _fmt(v: float) -> str:
    r = repr(float(v))
    return r[:-2] if r.endswith(".0") else r


def _mul(a: float, b: float) -> float:
    """Product with 0 * inf = 0, for bounds."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


# --------------------------------------------------------------------------
# grids and samples


@dataclass(frozen=True)
class GridSpec:
    """Grid on the half-line.

    ``kind`` is ``"uniform"``, ``"log-uniform"`` or ``"explicit"``; the last
    one carries its own strictly increasing ``nodes`` (used for CSV input).
    """

    kind: str
    lo: float
    hi: float
    n: int
    nodes: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "log-uniform", "explicit"):
            raise DomainError(f"unknown grid kind {self.kind!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError("grid bounds must be finite")
        if self.lo < 0:
            raise DomainError("grid must lie in [0, inf)")
        if not self.lo < self.hi:
            raise DomainError("grid needs lo < hi")
        if self.n < 2:
            raise DomainError("grid needs n >= 2")
        if self.kind == "log-uniform" and self.lo <= 0:
            raise DomainError("log-uniform grid needs lo > 0")
        if self.kind == "explicit":
            if self.nodes is None or len(self.nodes) != self.n:
                raise DomainError("explicit grid needs n nodes")
            arr = np.asarray(self.nodes, dtype=float)
            if np.any(np.diff(arr) <= 0):
                raise DomainError("grid nodes must be strictly increasing")
            if arr[0] != self.lo or arr[-1] != self.hi:
                raise DomainError("explicit grid bounds must match its nodes")

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int) -> "GridSpec":
        return cls("uniform", float(lo), float(hi), int(n))

    @classmethod
    def log_uniform(cls, lo: float, hi: float, n: int) -> "GridSpec":
        return cls("log-uniform", float(lo), float(hi), int(n))

    @classmethod
    def explicit(cls, nodes: Sequence[float]) -> "GridSpec":
        t = tuple(float(v) for v in nodes)
        if len(t) < 2:
            raise DomainError("grid needs n >= 2")
        return cls("explicit", t[0], t[-1], len(t), t)

    def points(self) -> np.ndarray:
        if self.kind == "uniform":
            return np.linspace(self.lo, self.hi, self.n)
        if self.kind == "log-uniform":
            return np.geomspace(self.lo, self.hi, self.n)
        return np.asarray(self.nodes, dtype=float)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "lo": self.lo, "hi": self.hi, "n": self.n}
        if self.nodes is not None:
            d["nodes"] = list(self.nodes)
        return d


@dataclass(frozen=True)
class SampledFunction:
    grid: GridSpec
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.grid.n:
            raise DomainError(f"{len(vals)} values for a grid of {self.grid.n} points")
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("sampled values must be finite")

    @classmethod
    def from_arrays(cls, grid: GridSpec, values) -> "SampledFunction":
        return cls(grid, tuple(np.asarray(values, dtype=float).tolist()))

    @property
    def x(self) -> np.ndarray:
        return self.grid.points()

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def interpolate(s: SampledFunction, x):
    """Piecewise-linear interpolation; constant below ``grid.lo``, 0 above ``grid.hi``."""
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0):
        raise DomainError("interpolate needs x >= 0")
    nodes = s.x
    vals = s.y
    out = np.interp(xs, nodes, vals, left=vals[0], right=0.0)
    out = np.where(xs > nodes[-1], 0.0, out)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# expressions


class FunctionExpr:
    """Base class of the expression variants.

    Subclasses implement ``_eval`` on a non-negative float array together
    with the tail bounds used for truncation.
    """

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        if np.any(xs < 0):
            raise DomainError("functions live on [0, inf); got x < 0")
        out = self._eval(xs)
        return float(out) if np.ndim(out) == 0 else out

    def _eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def breakpoints(self) -> tuple:
        """Points where the function may fail to be smooth."""
        return ()

    def support(self) -> tuple[float, float]:
        """An interval outside which the function vanishes."""
        return (0.0, INF)

    def sup_beyond(self, T: float) -> float:
        """Upper bound of ``|f(x)|`` on ``x >= T``."""
        raise NotImplementedError

    def tail_mass(self, T: float) -> float:
        """Upper bound of ``int_T^inf |f|``."""
        raise NotImplementedError

    def render(self) -> str:
        raise NotImplementedError

    def is_zero(self) -> bool:
        return False

    def cutoff(self, eps: float) -> float:
        """A point beyond which the L1 tail is below ``eps`` (monotone in eps)."""
        lo, hi = self.support()
        if self.is_zero():
            return 0.0
        if math.isfinite(hi):
            return hi
        return find_cutoff(self.tail_mass, eps, start=0.0, step=1.0 / 16.0)

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class ExpDecay(FunctionExpr):
    """``exp(-a x)``."""

    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("ExpDecay needs a > 0")

    def _eval(self, x):
        return np.exp(-self.a * x)

    def sup_beyond(self, T):
        return math.exp(-self.a * max(T, 0.0))

    def tail_mass(self, T):
        return math.exp(-self.a * max(T, 0.0)) / self.a

    def render(self):
        return f"exp(-{_fmt(self.a)}*x)"


@dataclass(frozen=True)
class PowExp(FunctionExpr):
    """``x**k exp(-a x)`` for an integer ``k >= 0``."""

    k: int
    a: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise DomainError("PowExp needs an integer k >= 0")
        object.__setattr__(self, "k", int(self.k))
        if not self.a > 0:
            raise DomainError("PowExp needs a > 0")

    def _eval(self, x):
        return x**self.k * np.exp(-self.a * x)

    def sup_beyond(self, T):
        t = max(T, self.k / self.a)
        return t**self.k * math.exp(-self.a * t)

    def tail_mass(self, T):
        # upper incomplete gamma with integer order, in closed form
        T = max(T, 0.0)
        k, a = self.k, self.a
        s = sum(T**j / math.factorial(j) / a ** (k - j + 1) for j in range(k + 1))
        return math.factorial(k) * math.exp(-a * T) * s

    def render(self):
        return f"x^{self.k}*exp(-{_fmt(self.a)}*x)"


@dataclass(frozen=True)
class Gaussian(FunctionExpr):
    """``exp(-a x**2)``."""

    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("Gaussian needs a > 0")

    def _eval(self, x):
        return np.exp(-self.a * x * x)

    def sup_beyond(self, T):
        T = max(T, 0.0)
        return math.exp(-self.a * T * T)

    def tail_mass(self, T):
        T = max(T, 0.0)
        r = math.sqrt(self.a)
        return 0.5 * math.sqrt(math.pi) / r * math.erfc(r * T)

    def render(self):
        return f"exp(-{_fmt(self.a)}*x^2)"


@dataclass(frozen=True)
class Indicator(FunctionExpr):
    """Characteristic function of ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo >= 0 and self.hi > self.lo and math.isfinite(self.hi)):
            raise DomainError("Indicator needs 0 <= lo < hi < inf")

    def _eval(self, x):
        return ((x >= self.lo) & (x <= self.hi)).astype(float)

    def breakpoints(self):
        return (self.lo, self.hi) if self.lo > 0 else (self.hi,)

    def support(self):
        return (self.lo, self.hi)

    def sup_beyond(self, T):
        return 1.0 if T <= self.hi else 0.0

    def tail_mass(self, T):
        return max(0.0, self.hi - max(T, self.lo))

    def render(self):
        return f"indicator({_fmt(self.lo)},{_fmt(self.hi)})"


@dataclass(frozen=True)
class Const(FunctionExpr):
    """Constant function; only integrable when zero, used as a unit weight."""

    c: float

    def _eval(self, x):
        return np.full(np.shape(x), float(self.c))

    def is_zero(self):
        return self.c == 0

    def support(self):
        return (0.0, 0.0) if self.c == 0 else (0.0, INF)

    def sup_beyond(self, T):
        return abs(self.c)

    def tail_mass(self, T):
        return 0.0 if self.c == 0 else INF

    def render(self):
        return _fmt(self.c)


@dataclass(frozen=True)
class Scaled(FunctionExpr):
    c: float
    inner: FunctionExpr

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise DomainError("Scaled needs a finite coefficient")

    def _eval(self, x):
        return self.c * self.inner._eval(x)

    def is_zero(self):
        return self.c == 0 or self.inner.is_zero()

    def breakpoints(self):
        return self.inner.breakpoints()

    def support(self):
        return (0.0, 0.0) if self.c == 0 else self.inner.support()

    def sup_beyond(self, T):
        return _mul(abs(self.c), self.inner.sup_beyond(T))

    def tail_mass(self, T):
        return _mul(abs(self.c), self.inner.tail_mass(T))

    def render(self):
        inner = self.inner.render()
        if isinstance(self.inner, (Sum, Product)):
            inner = f"({inner})"
        return f"{_fmt(self.c)}*{inner}"


@dataclass(frozen=True)
class Sum(FunctionExpr):
    left: FunctionExpr
    right: FunctionExpr

    def _eval(self, x):
        return self.left._eval(x) + self.right._eval(x)

    def is_zero(self):
        return self.left.is_zero() and self.right.is_zero()

    def breakpoints(self):
        return tuple(sorted(set(self.left.breakpoints()) | set(self.right.breakpoints())))

    def support(self):
        parts = [s.support() for s in (self.left, self.right) if not s.is_zero()]
        if not parts:
            return (0.0, 0.0)
        return (min(p[0] for p in parts), max(p[1] for p in parts))

    def sup_beyond(self, T):
        return self.left.sup_beyond(T) + self.right.sup_beyond(T)

    def tail_mass(self, T):
        return self.left.tail_mass(T) + self.right.tail_mass(T)

    def render(self):
        right = self.right.render()
        if isinstance(self.right, Sum):
            right = f"({right})"
        return f"{self.left.render()}+{right}"


@dataclass(frozen=True)
class Product(FunctionExpr):
    """Pointwise product; used for truncations ``f * indicator(0, N)`` and weights."""

    left: FunctionExpr
    right: FunctionExpr

    def _eval(self, x):
        return self.left._eval(x) * self.right._eval(x)

    def is_zero(self):
        return self.left.is_zero() or self.right.is_zero()

    def breakpoints(self):
        return tuple(sorted(set(self.left.breakpoints()) | set(self.right.breakpoints())))

    def support(self):
        if self.is_zero():
            return (0.0, 0.0)
        a, b = self.left.support(), self.right.support()
        lo, hi = max(a[0], b[0]), min(a[1], b[1])
        return (lo, hi) if lo < hi else (0.0, 0.0)

    def sup_beyond(self, T):
        return _mul(self.left.sup_beyond(T), self.right.sup_beyond(T))

    def tail_mass(self, T):
        sl, sr = self.left.sup_beyond(T), self.right.sup_beyond(T)
        return min(_mul(sl, self.right.tail_mass(T)), _mul(sr, self.left.tail_mass(T)))

    def render(self):
        def wrap(e, right=False):
            s = e.render()
            kinds = (Sum, Scaled, Const, Product) if right else (Sum, Scaled, Const)
            return f"({s})" if isinstance(e, kinds) else s

        return f"{wrap(self.left)}*{wrap(self.right, True)}"


@dataclass(frozen=True)
class Tabulated(FunctionExpr):
    """Piecewise-linear interpolant of samples; zero above the last node."""

    sampled: SampledFunction
    source: str | None = field(default=None, compare=False)

    def _eval(self, x):
        return np.asarray(interpolate(self.sampled, x))

    def is_zero(self):
        return not any(self.sampled.values)

    def breakpoints(self):
        x, v = self.sampled.x, self.sampled.y
        cross = np.nonzero(v[:-1] * v[1:] < 0)[0]
        roots = x[cross] - v[cross] * (x[cross + 1] - x[cross]) / (v[cross + 1] - v[cross])
        return tuple(np.unique(np.concatenate([x, roots])).tolist())

    def support(self):
        return (0.0, self.sampled.grid.hi)

    def sup_beyond(self, T):
        x, v = self.sampled.x, np.abs(self.sampled.y)
        if T > x[-1]:
            return 0.0
        at = float(np.interp(T, x, v))
        rest = v[x >= T]
        return max(at, float(rest.max())) if rest.size else at

    def tail_mass(self, T):
        x, v = self.sampled.x, np.abs(self.sampled.y)
        if T >= x[-1]:
            return 0.0
        T = max(T, 0.0)
        head = v[0] * max(0.0, x[0] - T)
        keep = x > T
        xs = np.concatenate([[max(T, x[0])], x[keep]])
        vs = np.concatenate([[np.interp(max(T, x[0]), x, v)], v[keep]])
        return head + float(np.trapezoid(vs, xs))

    def render(self):
        if self.source is None:
            raise InputError("a tabulated function without a source path cannot be rendered")
        return f"table:{self.source}"


@dataclass(frozen=True, eq=False)
class Computed(FunctionExpr):
    """A function given by a vectorized callable that vanishes above ``hi``.

    ``bound`` must dominate ``|fn|`` everywhere; it feeds the tail estimates.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    hi: float
    bound: float
    points: tuple = ()
    label: str = "computed"

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        inside = x <= self.hi
        if np.any(inside):
            out[inside] = np.asarray(self.fn(x[inside]), dtype=float)
        return out

    def breakpoints(self):
        return self.points

    def support(self):
        return (0.0, self.hi)

    def sup_beyond(self, T):
        return self.bound if T <= self.hi else 0.0

    def tail_mass(self, T):
        return self.bound * max(0.0, self.hi - max(T, 0.0))

    def render(self):
        raise InputError(f"{self.label} has no textual form")


def zero() -> FunctionExpr:
    return Const(0.0)


def evaluate(f: FunctionExpr, x):
    """Pointwise value of ``f``; raises DomainError for ``x < 0``."""
    return f(x)


eval = evaluate  # noqa: A001  (the operation's conventional name)


def sample(f: FunctionExpr, grid: GridSpec) -> SampledFunction:
    return SampledFunction.from_arrays(grid, f(grid.points()))


def tabulate(f: FunctionExpr, grid: GridSpec) -> Tabulated:
    return Tabulated(sample(f, grid))


# --------------------------------------------------------------------------
# CSV


def save_csv(s: SampledFunction, path: str, header: tuple = ("x", "value"), digits: int = 17):
    text = dumps_csv(s, header, digits)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def dumps_csv(s: SampledFunction, header: tuple = ("x", "value"), digits: int = 17) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    for x, v in zip(s.x, s.y):
        w.writerow([format(float(x), f".{digits}g"), format(float(v), f".{digits}g")])
    return buf.getvalue()


def load_csv(path: str) -> SampledFunction:
    """Two-column ``x,value`` file; an optional non-numeric header row is skipped."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if rows:
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
    xs, vs = [], []
    for i, r in enumerate(rows):
        if len(r) != 2:
            raise InputError(f"{path}: row {i + 1} does not have two columns")
        try:
            xs.append(float(r[0]))
            vs.append(float(r[1]))
        except ValueError as exc:
            raise InputError(f"{path}: row {i + 1} is not numeric") from exc
    if len(xs) < 2:
        raise InputError(f"{path}: need at least two rows")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise InputError(f"{path}: x must be strictly increasing")
    return SampledFunction(GridSpec.explicit(xs), tuple(vs))


# --------------------------------------------------------------------------
# weights and norms


class Weight:
    """A positive weight on (0, inf) with tail bounds and small-x mass."""

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sup_beyond(self, T: float) -> float:
        raise NotImplementedError

    def tail_mass(self, T: float) -> float:
        raise NotImplementedError

    def mass_below(self, eps: float) -> float:
        """``int_0^eps w``."""
        raise NotImplementedError


@dataclass(frozen=True)
class Unit(Weight):
    def __call__(self, x):
        return np.ones(np.shape(x))

    def sup_beyond(self, T):
        return 1.0

    def tail_mass(self, T):
        return INF

    def mass_below(self, eps):
        return eps


def _powexp_sup(m: float, rate: float, T: float) -> float:
    """sup of x**m exp(-rate x) on x >= T > 0."""
    t = max(T, m / rate) if m > 0 else T
    return t**m * math.exp(-rate * t)


def _powexp_tail(m: float, rate: float, T: float) -> float:
    """Upper bound of int_T^inf x**m exp(-rate x) dx for T > 0."""
    if m <= 0:
        return T**m * math.exp(-rate * T) / rate
    return float(sp_special.gammaincc(m + 1, rate * T) * math.gamma(m + 1) / rate ** (m + 1))


@dataclass(frozen=True)
class TwoParam(Weight):
    """``K_0(beta x) x**alpha``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise DomainError("TwoParam needs beta in (0, 1]")
        if not math.isfinite(self.alpha):
            raise DomainError("TwoParam needs a finite alpha")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return k0(self.beta * x) * x**self.alpha

    # K_0(z) <= sqrt(pi/(2z)) exp(-z) for z > 0
    def sup_beyond(self, T):
        if T <= 0:
            return INF
        c = math.sqrt(math.pi / (2 * self.beta))
        return c * _powexp_sup(self.alpha - 0.5, self.beta, T)

    def tail_mass(self, T):
        if T <= 0:
            return INF
        c = math.sqrt(math.pi / (2 * self.beta))
        return c * _powexp_tail(self.alpha - 0.5, self.beta, T)

    def mass_below(self, eps):
        if self.alpha <= -1:
            return INF
        # K_0(z) ~ ln(2/z) - euler_gamma for small z
        a1 = self.alpha + 1
        return eps**a1 / a1 * (math.log(2 / (self.beta * eps)) + 1 / a1)


@dataclass(frozen=True)
class ThreeParam(Weight):
    """``x**alpha1 exp(-beta1 x**gamma1)``."""

    alpha1: float
    beta1: float
    gamma1: float

    def __post_init__(self):
        if not (self.alpha1 > -1 and self.beta1 > 0 and self.gamma1 > 0):
            raise DomainError("ThreeParam needs alpha1 > -1, beta1 > 0, gamma1 > 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return x**self.alpha1 * np.exp(-self.beta1 * x**self.gamma1)

    def _scale(self):
        s = (self.alpha1 + 1) / self.gamma1
        return s, self.beta1 ** (-s) * math.gamma(s) / self.gamma1

    def sup_beyond(self, T):
        if T <= 0 and self.alpha1 < 0:
            return INF
        t = T
        if self.alpha1 > 0:
            t = max(T, (self.alpha1 / (self.beta1 * self.gamma1)) ** (1 / self.gamma1))
        return float(self(np.array(t)))

    def tail_mass(self, T):
        s, total = self._scale()
        return total * float(sp_special.gammaincc(s, self.beta1 * max(T, 0.0) ** self.gamma1))

    def mass_below(self, eps):
        s, total = self._scale()
        return total * float(sp_special.gammainc(s, self.beta1 * eps**self.gamma1))


@dataclass(frozen=True)
class Custom(Weight):
    """Weight given by a strictly positive expression ``rho``."""

    rho: FunctionExpr

    def __call__(self, x):
        return np.asarray(self.rho(x), dtype=float)

    def sup_beyond(self, T):
        return self.rho.sup_beyond(T)

    def tail_mass(self, T):
        return self.rho.tail_mass(T)

    def mass_below(self, eps):
        return eps * max(abs(self.rho(0.0)), abs(self.rho(eps)))


@dataclass(frozen=True)
class NormSpec:
    p: float
    weight: Weight = field(default_factory=Unit)

    def __post_init__(self):
        p = float(self.p)
        object.__setattr__(self, "p", p)
        if not (p >= 1):
            raise DomainError("norm exponent must be >= 1")


def _sign_changes(f: FunctionExpr, hi: float, points: Sequence[float]) -> list[float]:
    grid = np.unique(
        np.concatenate(
            [
                np.linspace(0.0, hi, 1025),
                np.geomspace(min(1e-6, hi / 2), hi, 513),
                np.asarray([p for p in points if 0 <= p <= hi], dtype=float),
            ]
        )
    )
    vals = f(grid)
    idx = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
    roots = []
    scalar = lambda t: float(f(np.array([t]))[0])  # noqa: E731
    for i in idx:
        # rounding can differ between batched and single evaluations near a root
        if scalar(grid[i]) * scalar(grid[i + 1]) < 0:
            roots.append(optimize.brentq(scalar, grid[i], grid[i + 1], xtol=1e-14))
        else:
            roots.append(0.5 * (grid[i] + grid[i + 1]))
    return roots


def _sup_norm(f: FunctionExpr, cfg: QuadratureConfig) -> float:
    lo, hi = f.support()
    if f.is_zero():
        return 0.0
    if not math.isfinite(hi):
        hi = find_cutoff(lambda T: f.sup_beyond(T), 1e-300, start=0.0, step=1.0 / 16.0)
    pts = [0.0, hi]
    for b in f.breakpoints():
        if 0 <= b <= hi:
            pts.extend([b, max(0.0, b - 1e-12), min(hi, b + 1e-12)])
    grid = np.unique(np.concatenate([np.geomspace(min(1e-6, hi), hi, SUP_POINTS), pts]))
    return float(np.max(np.abs(f(grid))))


def norm(f: FunctionExpr, spec: NormSpec, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``(int_0^inf |f|**p w dx)**(1/p)``; for ``p = inf`` a dense-grid supremum.

    The ``p = inf`` value ignores the weight, since a positive weight leaves the
    essential supremum unchanged. Results are memoized per ``(f, spec, cfg)``.
    """
    return _norm_cached(f, spec, cfg)


@lru_cache(maxsize=4096)
def _norm_cached(f: FunctionExpr, spec: NormSpec, cfg: QuadratureConfig) -> float:
    if spec.p == INF:
        return _sup_norm(f, cfg)
    if f.is_zero():
        return 0.0
    p, w = spec.p, spec.weight
    # integrate |f/S|**p so tolerances act on a unit-scale integrand
    S = f.sup_beyond(0.0)
    if not (math.isfinite(S) and S > 0):
        S = 1.0

    def tail(T: float) -> float:
        fs = f.sup_beyond(T) / S
        if fs == 0.0:
            return 0.0
        a = _mul(fs**p, w.tail_mass(T))
        b = _mul(_mul(w.sup_beyond(T), fs ** (p - 1)), f.tail_mass(T) / S)
        return min(a, b)

    lo, hi = f.support()
    start = 2.0**-FIRST_PANEL_DEPTH
    try:
        T = find_cutoff(tail, cfg.tail_epsilon, start=max(start, lo), step=1.0 / 16.0)
    except TailNotResolvable as exc:
        raise NonIntegrable(f"norm tail of {f} does not decay") from exc
    T = min(T, hi) if math.isfinite(hi) else T
    if T <= max(start, lo):
        return 0.0
    bps = list(f.breakpoints())
    bps += _sign_changes(f, T, bps)

    def integrand(x):
        return np.abs(f(x) / S) ** p * w(x)

    first = 0.0
    if lo < start:
        first = abs(float(f(0.0)) / S) ** p * w.mass_below(start)
    a0 = max(start, lo)
    edges = panel_edges(a0, T, bps, graded=True, grading_depth=FIRST_PANEL_DEPTH)
    vals, _ = adaptive_panels(integrand, edges, cfg)
    total = float(vals[0]) + first
    if not math.isfinite(total):
        raise NonIntegrable(f"norm of {f} is not finite")
    return S * max(total, 0.0) ** (1.0 / p)
