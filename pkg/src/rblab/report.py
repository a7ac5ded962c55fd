"""Deterministic check reports (JSON or plain text)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import __version__


@dataclass
class Check:
    name: str
    anchor: str
    residual: float
    tolerance: float
    bound: str = "upper"       # "upper": pass iff residual <= tol; "lower": residual >= tol

    @property
    def passed(self) -> bool:
        r = self.residual
        if math.isnan(r):
            return False
        return r <= self.tolerance if self.bound == "upper" else r >= self.tolerance


@dataclass
class Report:
    seed: int
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    verdict: str | None = None
    tool_version: str = __version__

    def add(self, name, anchor, residual, tolerance, bound="upper") -> Check:
        c = Check(name, anchor, float(residual), float(tolerance), bound)
        self.checks.append(c)
        return c

    def extend(self, other: "Report", prefix: str = ""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.anchor, c.residual, c.tolerance, c.bound))
        for k, v in other.info.items():
            self.info[prefix + k] = v

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        d = {
            "tool_version": self.tool_version,
            "seed": int(self.seed),
            "checks": [{"name": c.name, "anchor": c.anchor, "residual": c.residual,
                        "tolerance": c.tolerance, "bound": c.bound, "pass": c.passed}
                       for c in self.checks],
            "pass": self.passed,
        }
        if self.info:
            d["info"] = self.info
        if self.verdict is not None:
            d["verdict"] = self.verdict
        return d

    def to_json(self) -> str:
        return _dump(self.as_dict(), 0) + "\n"

    def to_text(self) -> str:
        out = [f"tool_version {self.tool_version}", f"seed {int(self.seed)}"]
        for c in self.checks:
            op = "<=" if c.bound == "upper" else ">="
            out.append(f"{'PASS' if c.passed else 'FAIL'} {c.name} [{c.anchor}] "
                       f"residual={_num(c.residual)} {op} {_num(c.tolerance)}")
        for k, v in self.info.items():
            out.append(f"info {k} = {_dump(v, None)}")
        if self.verdict is not None:
            out.append(f"verdict {self.verdict}")
        out.append(f"result {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(out) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_text()


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _dump(v, indent):
    """Tiny JSON emitter: sorted nothing, floats at 17 significant digits."""
    nl = "" if indent is None else "\n"
    pad = "" if indent is None else "  " * (indent + 1)
    end = "" if indent is None else "  " * indent
    nxt = None if indent is None else indent + 1
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _num(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f'{pad}{_dump(str(k), None)}: {_dump(x, nxt)}' for k, x in v.items()]
        return "{" + nl + ("," + (nl or " ")).join(items) + nl + end + "}"
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
            return "[" + ", ".join(_dump(x, None) for x in v) + "]"
        items = [pad + _dump(x, nxt) for x in v]
        return "[" + nl + ("," + (nl or " ")).join(items) + nl + end + "]"
    if hasattr(v, "tolist"):
        return _dump(v.tolist(), indent)
    return _dump(str(v), indent)
