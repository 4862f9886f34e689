"""Verification reports: named identity, residual, tolerance, verdict."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Check:
    identity: str
    residual: float
    tolerance: float
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual < self.tolerance)

    def to_dict(self) -> dict[str, Any]:
        return {
            "identity": self.identity,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "params": self.params,
        }


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, identity: str, residual: float, tolerance: float, **params: Any) -> Check:
        check = Check(identity, float(residual), float(tolerance), dict(params))
        self.checks.append(check)
        return check

    def extend(self, other: VerificationReport, prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.identity, c.residual, c.tolerance, c.params))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, identity: str) -> Check:
        for c in self.checks:
            if c.identity == identity:
                return c
        raise KeyError(identity)

    def names(self) -> list[str]:
        return [c.identity for c in self.checks]

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_list(self) -> list[dict[str, Any]]:
        return [c.to_dict() for c in self.checks]


def residual(a, b) -> float:
    """Max-abs difference between two arrays (or array-likes)."""
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))
