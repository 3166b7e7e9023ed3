"""Check records, reports and their deterministic JSON form."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

from .. import __version__

RELATIONS = ("<=", ">=", "==")


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}")


def _clean(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int,)) and not isinstance(obj, bool):
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _clean(obj.item())
    return _num(obj)


@dataclass
class Check:
    """``value relation bound``, allowing ``slack`` in the passing direction.

    For ``==`` the check passes when ``|value - bound| <= slack``.
    """

    name: str
    value: float
    relation: str
    bound: float
    slack: float = 0.0
    stderr: float | None = None
    note: str = ""

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")

    @property
    def passed(self) -> bool:
        return rederive(self.value, self.relation, self.bound, self.slack)

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "value": _num(self.value),
            "relation": self.relation,
            "bound": _num(self.bound),
            "slack": _num(self.slack),
            "passed": self.passed,
        }
        if self.stderr is not None:
            d["stderr"] = _num(self.stderr)
        if self.note:
            d["note"] = self.note
        return d


def rederive(value, relation: str, bound, slack) -> bool:
    """Pass/fail from the recorded numbers alone (what a reader of the report would compute)."""
    value, bound, slack = float(value), float(bound), float(slack)
    if math.isnan(value) or math.isnan(bound):
        return False
    if relation == "<=":
        return value <= bound + slack
    if relation == ">=":
        return value >= bound - slack
    return abs(value - bound) <= slack


@dataclass
class Report:
    experiment: str
    config: dict
    checks: list = field(default_factory=list)
    measurements: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    elapsed: float = 0.0
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def check(self, name, value, relation, bound, slack=0.0, stderr=None, note="") -> Check:
        c = Check(name, float(value), relation, float(bound), float(slack), None if stderr is None else float(stderr), note)
        self.checks.append(c)
        self.log(f"check {name}: {c.value:.12g} {relation} {c.bound:.12g} (slack {c.slack:.3g}) -> "
                 f"{'pass' if c.passed else 'FAIL'}")
        return c

    def measure(self, name: str, value) -> None:
        self.measurements[name] = value

    def log(self, message: str) -> None:
        self.events.append((time.perf_counter() - self._t0, message))

    def finish(self) -> "Report":
        self.elapsed = time.perf_counter() - self._t0
        self.log(f"finished in {self.elapsed:.3f}s")
        return self

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        # Wall-clock time lives in the event log so that reports are byte-identical across reruns.
        return {
            "experiment": self.experiment,
            "version": __version__,
            "config": _clean(self.config),
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "measurements": _clean(self.measurements),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, ensure_ascii=False) + "\n"

    def event_log(self) -> str:
        return "".join(f"{t:10.3f}s  {msg}\n" for t, msg in self.events)

    def summary(self) -> str:
        lines = [f"{self.experiment}: {'PASS' if self.passed else 'FAIL'} ({len(self.checks)} checks)"]
        for c in self.checks:
            lines.append(f"  [{'pass' if c.passed else 'FAIL'}] {c.name}: {c.value:.6g} {c.relation} {c.bound:.6g}"
                         + (f" (+/- {c.slack:.3g})" if c.slack else ""))
        return "\n".join(lines)
