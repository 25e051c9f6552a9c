"""Four-state analysis verdicts with mandatory numeric payloads.

The asymptotic criteria cannot be decided from finite data alone, so every
analysis returns one of four states: Proved / Refuted (a decidable rule
applied, e.g. a degree test on a rule diagram, or an exact finite
computation), Evidence (a monotone numeric trace points one way), or
Inconclusive.  The payload carries the trace or witness that justifies the
state; reports must never show a bare verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction


class Status(str, Enum):
    PROVED = "Proved"
    REFUTED = "Refuted"
    EVIDENCE = "Evidence"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    """Outcome of one criterion: status + what is claimed + how deep we
    looked + the numeric trail."""

    status: Status
    direction: str
    depth: int | None = None
    payload: dict = field(default_factory=dict)

    @property
    def decided(self) -> bool:
        return self.status in (Status.PROVED, Status.REFUTED)

    @staticmethod
    def proved(direction, depth=None, **payload):
        return Verdict(Status.PROVED, direction, depth, payload)

    @staticmethod
    def refuted(direction, depth=None, **payload):
        return Verdict(Status.REFUTED, direction, depth, payload)

    @staticmethod
    def evidence(direction, depth=None, **payload):
        return Verdict(Status.EVIDENCE, direction, depth, payload)

    @staticmethod
    def inconclusive(direction, depth=None, **payload):
        return Verdict(Status.INCONCLUSIVE, direction, depth, payload)

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "direction": self.direction,
            "depth": self.depth,
            "payload": _jsonable(self.payload),
        }


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Verdict):
        return obj.to_json()
    return obj
