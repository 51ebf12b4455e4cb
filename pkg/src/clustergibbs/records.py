from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class VerificationRecord:
    """Outcome of one numeric inequality check: measured value against its bound."""

    lemma: str
    parameters: dict[str, Any] = field(default_factory=dict)
    measured: float | int = 0
    bound: float | int = 0
    passed: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {
            "lemma": self.lemma,
            "parameters": dict(self.parameters),
            "measured": self.measured,
            "bound": self.bound,
            "pass": bool(self.passed),
        }
