"""Run reports: verdict lines, exact tables and artifact paths rendered as plain text."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    passed: bool
    witness: str | None = None

    def __post_init__(self):
        if not self.passed and not self.witness:
            raise ValueError(f"failed check {self.name!r} needs a witness")

    def render(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}" + (f": {self.witness}" if self.witness else "")


@dataclass
class RunReport:
    command: str
    verdicts: list = field(default_factory=list)
    tables: list = field(default_factory=list)  # (title, text)
    artifacts: list = field(default_factory=list)

    def check(self, name, passed, witness=None):
        # a witness only accompanies a failure
        w = None if passed or witness is None else str(witness)
        self.verdicts.append(Check(name, bool(passed), w))
        return bool(passed)

    def table(self, title, text):
        self.tables.append((title, text.rstrip("\n")))

    def artifact(self, path):
        self.artifacts.append(str(path))

    @property
    def ok(self):
        return all(v.passed for v in self.verdicts)

    @property
    def exit_code(self):
        return 0 if self.ok else 1

    def render(self) -> str:
        lines = [f"# flatlab {self.command}", ""]
        for title, text in self.tables:
            lines += [f"## {title}", text, ""]
        lines.append("## verdicts")
        lines += [v.render() for v in self.verdicts] or ["(none)"]
        if self.artifacts:
            lines += ["", "## artifacts"] + self.artifacts
        return "\n".join(lines) + "\n"


def grid(header, rows) -> str:
    """Left-aligned text table; every cell is already a string."""
    rows = [list(map(str, r)) for r in rows]
    cols = [list(map(str, header))] + rows
    widths = [max(len(r[c]) for r in cols) for c in range(len(header))]
    out = []
    for k, r in enumerate(cols):
        out.append(" | ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        if k == 0:
            out.append("-+-".join("-" * w for w in widths))
    return "\n".join(out)
