"""JSON-lines reports with 17-significant-digit floats."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources

import numpy as np

from .spaces import INF, SpaceSpec, format_exponent


def to_plain(obj):
    """Convert package values into JSON-ready Python primitives."""
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if obj is INF or isinstance(obj, Fraction):
        return format_exponent(obj)
    if isinstance(obj, SpaceSpec):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return "%.17g" % x


def dumps(obj) -> str:
    """Compact, key-sorted JSON with every float printed as %.17g."""
    obj = to_plain(obj)
    parts: list[str] = []

    def emit(o):
        if isinstance(o, dict):
            parts.append("{")
            for i, k in enumerate(sorted(o)):
                if i:
                    parts.append(",")
                parts.append(json.dumps(k))
                parts.append(":")
                emit(o[k])
            parts.append("}")
        elif isinstance(o, list):
            parts.append("[")
            for i, v in enumerate(o):
                if i:
                    parts.append(",")
                emit(v)
            parts.append("]")
        elif isinstance(o, bool) or o is None:
            parts.append(json.dumps(o))
        elif isinstance(o, float):
            parts.append(_float(o))
        elif isinstance(o, int):
            parts.append(str(o))
        else:
            parts.append(json.dumps(o))

    emit(obj)
    return "".join(parts)


@dataclass
class Check:
    name: str
    passed: bool
    margin: float | None = None

    def to_json(self) -> dict:
        return {"name": self.name, "pass": bool(self.passed), "margin": self.margin}


@dataclass
class Report:
    subcommand: str
    config: dict
    results: dict
    provenance: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "config": self.config,
            "results": self.results,
            "provenance": self.provenance,
            "contract": {"pass": self.passed, "checks": [c.to_json() for c in self.checks]},
            "timestamp": self.timestamp,
        }

    def line(self) -> str:
        return dumps(self)


def schema() -> dict:
    return json.loads(resources.files("numrad").joinpath("report_schema.json").read_text())


def schema_text() -> str:
    return resources.files("numrad").joinpath("report_schema.json").read_text()
