from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Verdict:
    """Outcome of an exhaustive check.

    ``witness`` locates the first failure (an index tuple, usually) and
    ``detail`` carries the offending value. ``violations`` lists every
    failing location when the check collects them all.
    """

    holds: bool
    witness: Any = None
    detail: Any = None
    violations: tuple = field(default=())

    def __bool__(self):
        return self.holds

    @classmethod
    def ok(cls):
        return cls(True)

    @classmethod
    def fail(cls, witness, detail=None, violations=()):
        return cls(False, witness, detail, tuple(violations))
