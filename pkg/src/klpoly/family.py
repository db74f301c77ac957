"""Seeded test functions and triples shared by the audits, tests and CLI."""

from __future__ import annotations

import math

import numpy as np

from .funcmodel import ExpDecay, FunctionExpr, Gaussian, Indicator, PowExp, Scaled

PARAM_RANGE = (0.5, 3.0)
MIN_WIDTH = 0.25

# Five fixed triples (f, g, h) covering every elementary variant.
REGISTERED_TRIPLES: tuple[tuple[FunctionExpr, FunctionExpr, FunctionExpr], ...] = (
    (ExpDecay(1.0), ExpDecay(1.0), Indicator(1.0, 2.0)),
    (PowExp(1, 1.5), Gaussian(1.0), ExpDecay(2.0)),
    (Gaussian(0.5), ExpDecay(0.5), PowExp(2, 1.0)),
    (Indicator(0.5, 1.5), PowExp(2, 2.0), Gaussian(2.0)),
    (ExpDecay(3.0), Indicator(1.0, 3.0), Indicator(0.5, 2.5)),
)

WORKED_XI = ExpDecay(1.0)
WORKED_PHI = Scaled(math.sqrt(math.pi / 2.0), ExpDecay(1.0))
WORKED_H = Indicator(1.0, 2.0)


def _param(rng: np.random.Generator) -> float:
    return float(np.round(rng.uniform(*PARAM_RANGE), 6))


def random_function(rng: np.random.Generator, kinds=("exp", "powexp", "gauss", "indicator")):
    """One member of the test family with parameters in ``[0.5, 3]``."""
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "exp":
        return ExpDecay(_param(rng))
    if kind == "powexp":
        return PowExp(int(rng.integers(1, 4)), _param(rng))
    if kind == "gauss":
        return Gaussian(_param(rng))
    while True:
        lo, hi = sorted((_param(rng), _param(rng)))
        if hi - lo >= MIN_WIDTH:
            return Indicator(lo, hi)


def random_triple(seed: int, index: int = 0):
    """Deterministic triple number ``index`` of the stream ``seed``."""
    rng = np.random.default_rng([seed, index])
    return tuple(random_function(rng) for _ in range(3))


def random_triples(seed: int, count: int):
    return [random_triple(seed, i) for i in range(count)]


def random_weight(rng: np.random.Generator) -> FunctionExpr:
    """A strictly positive weight.

    Only exponentials qualify: a Gaussian underflows to 0 on the audit grid.
    """
    return random_function(rng, kinds=("exp",))


def random_solver_triple(seed: int, index: int = 0, beta: float = 0.5):
    """``(xi, phi, h)`` with smooth ``xi``, ``phi`` and ``sqrt(2/pi)|phi|_1 <= 0.8``.

    The last bound keeps ``|1 + F_c phi| >= 0.2``, so the resolvent exists.
    """
    from .funcmodel import NormSpec, norm

    rng = np.random.default_rng([seed, index, 7])
    smooth = ("exp", "powexp", "gauss")
    xi = random_function(rng, smooth)
    phi0 = random_function(rng, smooth)
    scale = float(np.round(rng.uniform(0.2, 0.8), 6))
    c = scale / (math.sqrt(2.0 / math.pi) * norm(phi0, NormSpec(1.0)))
    h = random_function(rng)
    return xi, Scaled(float(np.round(c, 9)), phi0), h
