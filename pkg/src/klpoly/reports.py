"""Structured verdicts shared by the audits, the Watson checks and the solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def _num(v: float):
    """JSON-safe float: infinities and NaN become strings."""
    v = float(v)
    if math.isfinite(v):
        return v
    return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")


@dataclass(frozen=True)
class InequalityReport:
    """``lhs <= rhs`` checked with an absolute slack ``tol``.

    ``passed`` holds exactly when ``lhs <= rhs + tol``; ``margin`` is
    ``rhs - lhs``.
    """

    name: str
    lhs: float
    rhs: float
    constant_used: float = 1.0
    tol: float = 0.0
    detail: str = ""
    config: dict = field(default_factory=dict, compare=False)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs + self.tol)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "margin": _num(self.margin),
            "pass": self.passed,
            "constant_used": _num(self.constant_used),
            "tol": _num(self.tol),
            "detail": self.detail,
            "config": dict(self.config),
        }

    def summary(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return f"{self.name}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} [{verdict}]"
