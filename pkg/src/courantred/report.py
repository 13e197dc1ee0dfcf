"""Check reports and their text / structured serialisation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

PASS, FAIL, ERROR = "pass", "fail", "error"


@dataclass
class Check:
    name: str
    status: str
    detail: str = ""
    data: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == PASS


@dataclass
class Report:
    """Ordered list of checks plus named outputs.

    ``expect`` is ``"pass"`` for ordinary runs; negative controls set it to
    ``"fail"`` and then :attr:`as_expected` is true when some check failed;
    ``"error"`` expects a precondition error.
    """

    title: str
    checks: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)
    expect: str = PASS

    def add(self, name, ok, detail="", **data):
        status = ok if isinstance(ok, str) else (PASS if ok else FAIL)
        self.checks.append(Check(name, status, detail, data))
        return status == PASS

    def error(self, name, detail):
        self.checks.append(Check(name, ERROR, detail))

    def extend(self, other, prefix=""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.status, c.detail, c.data))
        for k, v in other.outputs.items():
            self.outputs[prefix + k] = v
        return other.ok

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def status_of(self, name):
        return self.check(name).status

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    @property
    def failed(self):
        return [c for c in self.checks if not c.ok]

    @property
    def as_expected(self):
        if self.expect == PASS:
            return self.ok
        if self.expect == ERROR:
            return any(c.status == ERROR for c in self.checks)
        return not self.ok and not any(c.status == ERROR for c in self.checks)

    def __bool__(self):
        return self.ok


def to_jsonable(value):
    """Convert outputs to JSON-ready values; Fractions become ``"p/q"`` strings."""
    from .expr import ScalarExpr
    from .forms import FormField

    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        return value
    if isinstance(value, ScalarExpr):
        return str(value)
    if isinstance(value, FormField):
        return {k: str(v) for k, v in value.items_by_name().items()}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return str(Fraction(int(value.numerator), int(value.denominator)))
    return str(value)


def report_dict(report):
    return {
        "title": report.title,
        "expect": report.expect,
        "status": PASS if report.ok else FAIL,
        "as_expected": report.as_expected,
        "checks": [
            {"name": c.name, "status": c.status, "detail": c.detail, "data": to_jsonable(c.data)}
            for c in report.checks
        ],
        "outputs": to_jsonable(report.outputs),
    }


def emit(reports, fmt="text", header=None):
    """Render one or more reports. Structured output is canonical JSON."""
    if isinstance(reports, Report):
        reports = [reports]
    if fmt == "structured":
        doc = {"header": header or {}, "reports": [report_dict(r) for r in reports]}
        return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = []
    if header:
        lines.append(" ".join(f"{k}={v}" for k, v in header.items()))
    for r in reports:
        mark = "ok" if r.as_expected else "FAILED"
        suffix = " (negative control)" if r.expect != PASS else ""
        lines.append(f"== {r.title}{suffix}: {mark}")
        for c in r.checks:
            tail = f"  -- {c.detail}" if c.detail else ""
            lines.append(f"  [{c.status:5}] {c.name}{tail}")
        for k, v in r.outputs.items():
            lines.append(f"  {k}: {_short(to_jsonable(v))}")
    return "\n".join(lines) + "\n"


def _short(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, ensure_ascii=False)
    return str(v)


def parse_structured(text):
    """Inverse of the structured emitter, converting ``"p/q"`` leaves back to Fractions
    where they look like rationals."""

    def conv(x):
        if isinstance(x, str):
            try:
                if x.strip() and all(ch in "-0123456789/" for ch in x):
                    return Fraction(x)
            except (ValueError, ZeroDivisionError):
                return x
            return x
        if isinstance(x, list):
            return [conv(v) for v in x]
        if isinstance(x, dict):
            return {k: conv(v) for k, v in x.items()}
        return x

    return conv(json.loads(text))
