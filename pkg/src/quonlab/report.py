"""Check records and report assembly."""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

from .fock import OperatorMatrix
from .linalg import residual

PASS, FAIL, ERROR, EXCLUDED = "pass", "fail", "error", "excluded"


@dataclass
class CheckResult:
    name: str
    params: dict
    residual: float = 0.0
    status: str = PASS
    detail: str = ""
    elapsed: float = 0.0
    count: int = 1

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status in (FAIL, ERROR)

    def sort_key(self):
        return (self.name, json.dumps(self.params, sort_keys=True))

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "name": self.name,
            "params": self.params,
            "residual": self.residual,
            "status": self.status,
            "count": self.count,
        }
        if self.detail:
            out["detail"] = self.detail
        if include_timing:
            out["elapsed"] = round(self.elapsed, 6)
        return out


class Accumulator:
    """Collects many matrix comparisons into one :class:`CheckResult`.

    The record keeps the worst residual and the first failing comparison.
    """

    def __init__(self, name: str, **params):
        self.result = CheckResult(name, params, count=0)
        self._t0 = time.perf_counter()

    def compare(self, lhs: OperatorMatrix, rhs: OperatorMatrix, where: str = ""):
        if (lhs.source, lhs.target) != (rhs.source, rhs.target):
            raise ValueError("compared blocks act between different sectors")
        value, ok = residual(lhs.data, rhs.data)
        self.result.count += 1
        self.result.residual = max(self.result.residual, value)
        if not ok and self.result.status == PASS:
            self.result.status = FAIL
            self.result.detail = f"first failure: {where} sector {lhs.source}->{lhs.target}, residual {value:.3e}"
        return ok

    def done(self) -> CheckResult:
        self.result.elapsed = time.perf_counter() - self._t0
        return self.result


@contextmanager
def timed(result: CheckResult):
    t0 = time.perf_counter()
    yield result
    result.elapsed = time.perf_counter() - t0


@dataclass
class Report:
    config: dict
    records: list[CheckResult] = field(default_factory=list)

    def extend(self, records):
        self.records.extend(records)

    def sorted_records(self) -> list[CheckResult]:
        return sorted(self.records, key=CheckResult.sort_key)

    @property
    def n_failed(self) -> int:
        return sum(r.failed for r in self.records)

    @property
    def exit_code(self) -> int:
        return 1 if self.n_failed else 0

    def summary(self) -> dict:
        counts: dict[str, int] = {}
        for r in self.records:
            counts[r.status] = counts.get(r.status, 0) + 1
        return {"records": len(self.records), **dict(sorted(counts.items()))}

    def to_json(self, include_timing: bool = False) -> str:
        doc = {
            "config": self.config,
            "summary": self.summary(),
            "records": [r.to_dict(include_timing) for r in self.sorted_records()],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def to_text(self) -> str:
        lines = []
        for r in self.sorted_records():
            params = " ".join(f"{k}={v}" for k, v in sorted(r.params.items()))
            line = f"[{r.status.upper():8}] {r.name:28} {params}  residual={r.residual:.2e}  n={r.count}  ({r.elapsed:.2f}s)"
            if r.detail and r.status != PASS:
                line += f"\n           {r.detail}"
            lines.append(line)
        s = self.summary()
        lines.append(", ".join(f"{k}: {v}" for k, v in s.items()))
        return "\n".join(lines) + "\n"
