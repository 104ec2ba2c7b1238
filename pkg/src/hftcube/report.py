"""Structured pass/fail reports shared by every verifier and the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

SCHEMA_VERSION = 1


@dataclass
class Check:
    name: str
    passed: bool
    detail: Any = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"name": self.name, "passed": bool(self.passed)}
        if self.detail is not None:
            out["detail"] = self.detail
        return out


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    info: dict[str, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: Any = None) -> Check:
        c = Check(name, bool(passed), detail)
        self.checks.append(c)
        return c

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "title": self.title,
            "status": "pass" if self.ok else "fail",
            "checks": [c.to_dict() for c in self.checks],
            "info": self.info,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_jsonable) + "\n"

    def __str__(self):
        lines = [f"{self.title}: {'pass' if self.ok else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}")
        return "\n".join(lines)


def _jsonable(obj):
    # numpy scalars, sets and tuples-as-keys end up here
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")
