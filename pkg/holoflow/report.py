"""
JSON reports: encoding, schema validation and provenance
"""

import enum
import json
import math
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import jsonschema

from .config import AnalysisSettings
from .exceptions import ReportSchemaError
from .models import encode_complex


SCHEMA_VERSION = "1.0"

COMPLEX = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
            "required": ["re", "im"],
            "additionalProperties": False,
        },
        {"const": "infinity"},
        {"type": "null"},
    ]
}

CENSUS = {
    "type": ["object", "null"],
    "properties": {
        "H": {"type": "integer", "minimum": 0},
        "E": {"type": "integer", "minimum": 0},
        "P": {"type": "integer", "minimum": 0},
        "pattern": {"type": "string"},
    },
    "required": ["H", "E", "P", "pattern"],
}

LOCAL_CLASS = {
    "type": "object",
    "properties": {
        "point": COMPLEX,
        "kind": {"enum": ["Regular", "Zero", "Pole", "Essential", "Undetermined"]},
        "multiplicity": {"type": "integer"},
        "residue": COMPLEX,
        "census": CENSUS,
        "probe_radius": {"type": "number"},
    },
    "required": ["point", "kind", "multiplicity", "residue", "census"],
}

TRAJECTORY = {
    "type": "object",
    "properties": {
        "seed": COMPLEX,
        "direction": {"enum": ["+", "-"]},
        "verdict": {"enum": ["Complete", "IncompleteAtPole", "IncompleteEscape", "BudgetExhausted"]},
        "tau_max": {"oneOf": [{"type": "number"}, {"const": "infinity"}]},
        "stop_reason": {"type": "string"},
        "samples": {"type": "array"},
    },
    "required": ["seed", "direction", "verdict", "tau_max", "stop_reason"],
}

SINGULARITY = {
    "type": "object",
    "properties": {
        "value": COMPLEX,
        "label": {"type": "string"},
        "kind": {"enum": ["Algebraic", "Logarithmic", "DirectNonLogarithmic", "Indirect",
                          "Unresolved"]},
        "tract": {"enum": ["Hyperbolic", "Elliptic", None]},
    },
    "required": ["value", "kind"],
}

REPORT_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "holoflow report",
    "type": "object",
    "properties": {
        "command": {"enum": ["classify", "flow", "asymptotics", "family", "portrait",
                             "crosscheck"]},
        "field": {
            "type": ["object", "null"],
            "properties": {
                "expression": {"type": "string"},
                "base_point": COMPLEX,
                "base_value": COMPLEX,
                "chart": {"enum": ["z", "w"]},
            },
        },
        "catalogue": {"type": "array", "items": LOCAL_CLASS},
        "singularities": {"type": "array", "items": SINGULARITY},
        "trajectories": {"type": "array", "items": TRAJECTORY},
        "results": {"type": "object"},
        "inconclusive": {"type": "array", "items": {"type": "string"}},
        "provenance": {
            "type": "object",
            "properties": {
                "tool": {"const": "holoflow"},
                "tool_version": {"type": "string"},
                "schema_version": {"const": SCHEMA_VERSION},
                "settings": {"type": "object"},
                "wall_time": {"type": "number", "minimum": 0},
            },
            "required": ["tool", "tool_version", "schema_version", "settings", "wall_time"],
        },
    },
    "required": ["command", "field", "catalogue", "singularities", "trajectories", "results",
                 "provenance"],
}


def to_jsonable(value: Any) -> Any:
    """
    Plain JSON form of analysis results

    Complex numbers become {"re", "im"} or "infinity", non-finite floats become
    "infinity" / "-infinity" / null, and objects with to_dict() are expanded.
    """
    if value is None or isinstance(value, (bool, str, int)):
        return value
    if isinstance(value, enum.Enum):
        return to_jsonable(value.value)
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "infinity" if value > 0 else "-infinity"
        return value
    if isinstance(value, complex):
        if math.isnan(value.real) or math.isnan(value.imag):
            return None
        return encode_complex(value)
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if isinstance(value, dict):
        return {_key(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [to_jsonable(v) for v in value]
        return sorted(items, key=json.dumps) if isinstance(value, (set, frozenset)) else items
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "item"):
        # numpy scalars
        return to_jsonable(value.item())
    raise TypeError(f"Cannot encode {type(value).__name__} in a report")


def _key(key: Any) -> str:
    if isinstance(key, complex):
        return json.dumps(encode_complex(key), sort_keys=True)
    if isinstance(key, enum.Enum):
        return str(key.value)
    return str(key)


class Report:
    """One command's report, accumulated then serialized"""

    def __init__(self, command: str, settings: AnalysisSettings, version: str):
        self.command = command
        self.settings = settings
        self.version = version
        self.field: Optional[Dict[str, Any]] = None
        self.catalogue: List[Any] = []
        self.singularities: List[Any] = []
        self.trajectories: List[Any] = []
        self.results: Dict[str, Any] = {}
        self.inconclusive: List[str] = []
        self._started = time.monotonic()

    def mark_inconclusive(self, reason: str) -> None:
        """Record a verdict that the CLI reports with exit code 4"""
        if reason not in self.inconclusive:
            self.inconclusive.append(reason)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "command": self.command,
            "field": to_jsonable(self.field),
            "catalogue": to_jsonable(self.catalogue),
            "singularities": to_jsonable(self.singularities),
            "trajectories": to_jsonable(self.trajectories),
            "results": to_jsonable(self.results),
            "inconclusive": list(self.inconclusive),
            "provenance": {
                "tool": "holoflow",
                "tool_version": self.version,
                "schema_version": SCHEMA_VERSION,
                "settings": self.settings.to_dict(),
                "wall_time": round(time.monotonic() - self._started, 6),
            },
        }
        validate_report(data)
        return data

    def to_json(self) -> str:
        return dumps(self.to_dict())


def dumps(data: Dict[str, Any]) -> str:
    """Canonical text: sorted keys, two-space indent, no NaN"""
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def validate_report(data: Dict[str, Any]) -> None:
    """
    Validate a report against REPORT_SCHEMA

    Raises:
        ReportSchemaError: the report does not match the schema
    """
    try:
        jsonschema.validate(instance=data, schema=REPORT_SCHEMA)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path)
        raise ReportSchemaError(f"Report does not match schema at '{path}': {e.message}")


def write_report(text: str, path: Optional[Union[str, Path]]) -> None:
    """Write to path, or stdout when path is None"""
    if path is None:
        print(text, end="")
        return
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def strip_wall_time(data: Dict[str, Any]) -> Dict[str, Any]:
    """Copy of a report without its only nondeterministic field"""
    copy = json.loads(json.dumps(data))
    copy.get("provenance", {}).pop("wall_time", None)
    return copy
