"""CheckReport: one evaluated inequality with its witness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

DEFAULT_TOL = 1e-9


def json_number(x: float) -> float | str:
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a single inequality evaluation.

    ``margin`` is oriented so that the inequality holds iff
    ``margin >= 0``; ``passed`` is ``margin >= -tol``. Identities are
    reported with ``margin = -|residual|``.
    """

    inequality_id: str
    lhs: float
    rhs: float
    margin: float
    tol: float = DEFAULT_TOL
    witness: dict[str, Any] = field(default_factory=dict)
    degenerate_flag: bool = False
    conjectural: bool = False
    details: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("lhs", "rhs", "margin", "tol"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "degenerate_flag", bool(self.degenerate_flag))
        object.__setattr__(self, "conjectural", bool(self.conjectural))
        object.__setattr__(self, "details", {k: float(v) for k, v in self.details.items()})

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tol

    def with_witness(self, **extra) -> "CheckReport":
        w = dict(self.witness)
        w.update(extra)
        return CheckReport(
            self.inequality_id, self.lhs, self.rhs, self.margin, self.tol, w,
            self.degenerate_flag, self.conjectural, dict(self.details),
        )

    def with_tol(self, tol: float) -> "CheckReport":
        return CheckReport(
            self.inequality_id, self.lhs, self.rhs, self.margin, float(tol), dict(self.witness),
            self.degenerate_flag, self.conjectural, dict(self.details),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "inequality_id": self.inequality_id,
            "lhs": json_number(self.lhs),
            "rhs": json_number(self.rhs),
            "margin": json_number(self.margin),
            "pass": self.passed,
            "tol": self.tol,
            "degenerate_flag": self.degenerate_flag,
            "conjectural": self.conjectural,
            "witness": dict(self.witness),
            "details": {k: json_number(v) for k, v in self.details.items()},
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CheckReport":
        return cls(
            inequality_id=data["inequality_id"],
            lhs=float(data["lhs"]),
            rhs=float(data["rhs"]),
            margin=float(data["margin"]),
            tol=float(data.get("tol", DEFAULT_TOL)),
            witness=dict(data.get("witness", {})),
            degenerate_flag=bool(data.get("degenerate_flag", False)),
            conjectural=bool(data.get("conjectural", False)),
            details={k: float(v) for k, v in data.get("details", {}).items()},
        )
