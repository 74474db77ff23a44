"""Check reports shared by the verifiers and the command line."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

from . import __version__

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive-within-bounds"
SCHEMA = 1


@dataclass
class CheckEntry:
    name: str
    status: str
    residual: Optional[str] = None
    witness: Optional[str] = None
    detail: Optional[str] = None
    seconds: float = 0.0

    def __post_init__(self):
        if self.status not in (PASS, FAIL, INCONCLUSIVE):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == FAIL and not self.residual:
            raise ValueError(f"failing check {self.name!r} needs a residual")

    def as_dict(self) -> dict:
        d = {"name": self.name, "status": self.status}
        for key in ("residual", "witness", "detail"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        return d


@dataclass
class Report:
    command: str
    model_hash: str
    entries: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def add(self, entry: CheckEntry) -> CheckEntry:
        self.entries.append(entry)
        return entry

    def count(self, status: str) -> int:
        return sum(1 for e in self.entries if e.status == status)

    @property
    def failed(self) -> bool:
        return self.count(FAIL) > 0

    def as_dict(self, timing: bool = True) -> dict:
        d = {
            "schema": SCHEMA,
            "tool": "ktcomplex",
            "tool_version": __version__,
            "command": self.command,
            "model_hash": self.model_hash,
            "checks": [e.as_dict() for e in self.entries],
            "summary": {"pass": self.count(PASS), "fail": self.count(FAIL),
                        "inconclusive": self.count(INCONCLUSIVE)},
        }
        if self.values:
            d["values"] = self.values
        if timing:
            d["timing"] = {e.name: round(e.seconds, 6) for e in self.entries}
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.as_dict(timing), indent=2, sort_keys=False) + "\n"

    def to_text(self) -> str:
        lines = []
        for name, val in self.values.items():
            if isinstance(val, list):
                lines.append(f"{name}:" + ("" if val else " none"))
                lines.extend(f"  {item}" for item in val)
            else:
                lines.append(f"{name} = {val}")
        for e in self.entries:
            lines.append(f"[{e.status}] {e.name}" + (f": {e.detail}" if e.detail else ""))
            if e.residual is not None and e.status != PASS:
                lines.append(f"    residual: {e.residual}")
            if e.witness is not None:
                lines.append(f"    witness: {e.witness}")
        if self.entries:
            lines.append(f"summary: {self.count(PASS)} pass, {self.count(FAIL)} fail, "
                         f"{self.count(INCONCLUSIVE)} inconclusive")
        return "\n".join(lines) + "\n"


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
