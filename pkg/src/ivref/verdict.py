"""Check outcomes and their replayable witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .state import State, Stream
from .time_core import Carrier, Interval


@dataclass
class Counterexample:
    """Everything needed to re-evaluate a failed obligation.

    ``intervals``, ``streams`` and ``states`` are keyed by the role they play
    in the failed clause (``delta``, ``delta0``, ``z``, ``y0``, ``rho`` ...).
    """

    clause: str
    carrier: Carrier
    intervals: dict[str, Interval] = field(default_factory=dict)
    streams: dict[str, Stream] = field(default_factory=dict)
    states: dict[str, State] = field(default_factory=dict)
    points: dict[str, int] = field(default_factory=dict)
    note: str = ""

    def to_json(self) -> dict[str, Any]:
        streams = []
        for label, s in self.streams.items():
            streams.extend(s.to_json(label))
        out: dict[str, Any] = {
            "clause": self.clause,
            "horizon": self.carrier.horizon,
            "open_ended": self.carrier.open_ended,
            "streams": streams,
            "intervals": [d.to_json() for d in self.intervals.values()],
            "interval_roles": list(self.intervals),
            "states": {k: v.to_json() for k, v in self.states.items()},
        }
        if self.points:
            out["points"] = dict(self.points)
        if self.note:
            out["note"] = self.note
        return out

    def describe(self) -> str:
        lines = [f"clause: {self.clause}  ({self.carrier})"]
        for k, d in self.intervals.items():
            lines.append(f"  {k} = {d}")
        for k, t in self.points.items():
            lines.append(f"  {k} = {t}")
        for k, s in self.streams.items():
            lines.append(f"  {k}: {s}")
        for k, st in self.states.items():
            lines.append(f"  {k} = {st}")
        if self.note:
            lines.append(f"  note: {self.note}")
        return "\n".join(lines)


@dataclass
class Verdict:
    passed: bool
    counterexample: Optional[Counterexample] = None
    stats: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.passed and self.counterexample is not None:
            raise ValueError("a passing verdict carries no counterexample")
        if not self.passed and self.counterexample is None:
            raise ValueError("a failing verdict needs a counterexample")

    def __bool__(self) -> bool:
        return self.passed

    @classmethod
    def ok(cls, **stats: Any) -> "Verdict":
        return cls(True, None, dict(stats))

    @classmethod
    def fail(cls, cex: Counterexample, **stats: Any) -> "Verdict":
        return cls(False, cex, dict(stats))

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"verdict": "pass" if self.passed else "fail"}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample.to_json()
        return out
