"""Structured, serializable record of an experiment run.

Reports hold everything needed to re-evaluate their verdicts offline:
parameters, per-scale measurements, auxiliary tables, fitted quantities and
the verdicts themselves.  Exact-arithmetic experiments reproduce reports
bit-identically for equal (seed, parameters).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):  # numpy scalars
        return x.item()
    return x


@dataclass
class Verdict:
    id: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentReport:
    name: str
    parameters: Dict[str, Any]
    measurements: List[Dict[str, Any]] = field(default_factory=list)
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    fitted: Dict[str, Any] = field(default_factory=dict)
    verdicts: List[Verdict] = field(default_factory=list)
    seed: Optional[int] = None
    runtime_ms: float = 0.0

    def add_measurement(self, scale, value) -> None:
        self.measurements.append({"scale": _jsonable(scale), "value": _jsonable(value)})

    def add_verdict(self, vid: str, passed: bool, detail: str = "") -> None:
        self.verdicts.append(Verdict(vid, bool(passed), detail))

    def verdict(self, vid: str) -> Verdict:
        for v in self.verdicts:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def summary_line(self) -> str:
        status = "PASS" if self.passed() else "FAIL"
        bad = [v.id for v in self.verdicts if not v.passed]
        extra = f" failed={','.join(bad)}" if bad else ""
        return (f"{self.name}: {status} ({len(self.verdicts)} verdicts, "
                f"{self.runtime_ms:.0f} ms){extra}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": _jsonable(self.parameters),
            "measurements": self.measurements,
            "tables": _jsonable(self.tables),
            "fitted": _jsonable(self.fitted),
            "verdicts": [
                {"id": v.id, "pass": v.passed, "detail": v.detail}
                for v in self.verdicts
            ],
            "seed": self.seed,
            "runtime_ms": self.runtime_ms,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    def tables_to_csv(self, prefix) -> List[str]:
        """One CSV per named table, `<prefix><table>.csv`; header then rows."""
        written = []
        for name, rows in self.tables.items():
            if not rows:
                continue
            path = f"{prefix}{name}.csv"
            cols = list(rows[0].keys())
            with open(path, "w") as fh:
                fh.write(",".join(cols) + "\n")
                for row in rows:
                    fh.write(",".join(str(_jsonable(row[c])) for c in cols) + "\n")
            written.append(path)
        return written


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.t0) * 1000.0
