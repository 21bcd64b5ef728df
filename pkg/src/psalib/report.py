"""Machine-readable check reports.

Every verification suite produces a CheckReport: a flat list of named
checks, each pass/fail/skipped with an optional witness (the indices and
residual expression that broke an identity).  Serialization is
deterministic: checks sort by id, keys are emitted in a fixed order, and
only the wall_ms fields vary between runs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .identities import anchor_for

__all__ = ["Check", "CheckReport", "Recorder"]


@dataclass(frozen=True)
class Check:
    check_id: str
    anchor: str
    status: str  # pass | fail | skipped
    witness: str | None
    wall_ms: float


@dataclass
class CheckReport:
    artifact: str
    checks: list[Check] = field(default_factory=list)

    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    def extend(self, other: "CheckReport") -> None:
        self.checks.extend(other.checks)

    def find(self, check_id: str) -> Check:
        for c in self.checks:
            if c.check_id == check_id:
                return c
        raise KeyError(check_id)

    def to_dict(self) -> dict:
        return {
            "artifact": self.artifact,
            "checks": [
                {
                    "id": c.check_id,
                    "anchor": c.anchor,
                    "status": c.status,
                    "witness": c.witness,
                    "wall_ms": round(c.wall_ms, 3),
                }
                for c in sorted(self.checks, key=lambda c: c.check_id)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=True,
                          separators=(",", ": ")) + "\n"

    def text_lines(self) -> list[str]:
        lines = []
        for c in sorted(self.checks, key=lambda c: c.check_id):
            mark = {"pass": "PASS", "fail": "FAIL", "skipped": "SKIP"}[c.status]
            line = f"[{mark}] {c.check_id}: {c.anchor}"
            if c.witness:
                line += f"  <{c.witness}>"
            lines.append(line)
        return lines


class Recorder:
    """Collects checks for one artifact, timing each one."""

    def __init__(self, artifact: str):
        self.report = CheckReport(artifact)

    def run(self, check_id: str, fn) -> bool:
        """fn() -> (ok, witness_or_None); records pass/fail with timing."""
        t0 = time.perf_counter()
        ok, witness = fn()
        ms = (time.perf_counter() - t0) * 1000.0
        self.add(check_id, "pass" if ok else "fail", witness, ms)
        return ok

    def add(self, check_id: str, status: str, witness: str | None = None,
            wall_ms: float = 0.0) -> None:
        self.report.checks.append(
            Check(check_id, anchor_for(check_id), status, witness, wall_ms))

    def skip(self, check_id: str, reason: str) -> None:
        self.add(check_id, "skipped", reason)
