"""Report envelopes and their JSON/CSV serialization.

Complex numbers become {"re", "im"} objects in JSON and paired ``*_re``/``*_im``
columns in CSV.  Non-tabular payload parts travel in ``# key: <json>`` comment
lines at the top of a CSV file, so both formats parse back to the same envelope.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

import numpy as np

SCHEMA_VERSION = "1.0"


def normalize(obj: Any) -> Any:
    """Plain Python data: dict, list, str, int, float, complex, bool, None."""
    if hasattr(obj, "as_dict"):
        return normalize(obj.as_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return normalize(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [normalize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _encode(obj: Any) -> Any:
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_encode(v) for v in obj]
    return obj


def _decode(obj: Any) -> Any:
    if isinstance(obj, dict):
        if set(obj) == {"re", "im"}:
            return complex(obj["re"], obj["im"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


@dataclass
class ReportEnvelope:
    kind: str
    config: dict
    payload: Any
    warnings: list = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION
    timestamp: str = ""

    def __post_init__(self):
        self.config = normalize(self.config)
        self.payload = normalize(self.payload)
        self.warnings = [str(w) for w in self.warnings]
        if not self.timestamp:
            self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def header(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "timestamp": self.timestamp,
            "config": self.config,
            "warnings": self.warnings,
        }


def emit_json(env: ReportEnvelope) -> str:
    doc = dict(env.header(), payload=env.payload)
    return json.dumps(_encode(doc), sort_keys=True, indent=2) + "\n"


def parse_json(text: str) -> ReportEnvelope:
    doc = _decode(json.loads(text))
    return ReportEnvelope(
        kind=doc["kind"],
        config=doc["config"],
        payload=doc["payload"],
        warnings=doc["warnings"],
        schema_version=doc["schema_version"],
        timestamp=doc["timestamp"],
    )


# ------------------------------------------------------------------ CSV


def _column_types(rows: list[dict]) -> dict[str, str]:
    types: dict[str, str] = {}
    has_none: set[str] = set()
    for row in rows:
        for key, val in row.items():
            if val is None:
                kind = None
            elif isinstance(val, bool):
                kind = "bool"
            elif isinstance(val, int):
                kind = "int"
            elif isinstance(val, float):
                kind = "float"
            elif isinstance(val, complex):
                kind = "complex"
            elif isinstance(val, str):
                # the csv module mishandles bare "\r" and NUL, json escapes both
                kind = "json" if "\r" in val or "\x00" in val else "str"
            else:
                kind = "json"
            if kind is None:
                has_none.add(key)
                types.setdefault(key, None)
                continue
            prev = types.get(key)
            if prev is None:
                types[key] = kind
            elif prev != kind:
                types[key] = "json"
    # an empty cell cannot tell None from "" in a text column
    return {k: ("json" if v is None or (v == "str" and k in has_none) else v) for k, v in types.items()}


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _cell(val: Any, kind: str) -> list[str]:
    if kind == "complex":
        return ["", ""] if val is None else [_fmt_float(val.real), _fmt_float(val.imag)]
    if val is None:
        return [""]
    if kind == "bool":
        return ["true" if val else "false"]
    if kind == "float":
        return [_fmt_float(val)]
    if kind in ("int", "str"):
        return [str(val)]
    return [json.dumps(_encode(val), sort_keys=True)]


def _parse_cell(cells: list[str], kind: str) -> Any:
    if kind == "complex":
        return None if cells[0] == "" else complex(float(cells[0]), float(cells[1]))
    text = cells[0]
    if text == "" and kind != "str":
        return None
    if kind == "bool":
        return text == "true"
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "str":
        return text
    return _decode(json.loads(text))


def emit_csv(env: ReportEnvelope) -> str:
    """Header comments plus the payload's ``rows`` table (if any)."""
    payload = env.payload if isinstance(env.payload, dict) else {"value": env.payload}
    rows = payload.get("rows") if isinstance(payload.get("rows"), list) else []
    rows = [r for r in rows if isinstance(r, dict)]
    meta = dict(env.header())
    meta["payload_is_dict"] = isinstance(env.payload, dict)
    meta["payload"] = {k: v for k, v in payload.items() if k != "rows"}
    meta["has_rows"] = "rows" in payload
    types = _column_types(rows)
    order = list(types)
    meta["columns"] = [[k, types[k]] for k in order]
    buf = io.StringIO()
    for key in sorted(meta):
        buf.write(f"# {key}: {json.dumps(_encode(meta[key]), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    header = []
    for k in order:
        header += [f"{k}_re", f"{k}_im"] if types[k] == "complex" else [k]
    writer.writerow(header)
    for row in rows:
        line = []
        for k in order:
            line += _cell(row.get(k), types[k])
        writer.writerow(line)
    return buf.getvalue()


def parse_csv(text: str) -> ReportEnvelope:
    # split on "\n" only: quoted cells may hold "\r" and other line breaks
    meta, lines = {}, text.split("\n")
    while lines and lines[0].startswith("# "):
        key, _, value = lines.pop(0)[2:].partition(": ")
        meta[key] = _decode(json.loads(value))
    payload = dict(meta["payload"])
    columns = meta["columns"]
    reader = csv.reader(io.StringIO("\n".join(lines), newline=""))
    next(reader, None)
    rows = []
    for record in reader:
        row, pos = {}, 0
        for name, kind in columns:
            width = 2 if kind == "complex" else 1
            row[name] = _parse_cell(record[pos : pos + width], kind)
            pos += width
        rows.append(row)
    if meta["has_rows"]:
        payload["rows"] = rows
    if not meta["payload_is_dict"]:
        payload = payload["value"]
    return ReportEnvelope(
        kind=meta["kind"],
        config=meta["config"],
        payload=payload,
        warnings=meta["warnings"],
        schema_version=meta["schema_version"],
        timestamp=meta["timestamp"],
    )


def emit(env: ReportEnvelope, fmt: str) -> str:
    if fmt == "json":
        return emit_json(env)
    if fmt == "csv":
        return emit_csv(env)
    raise ValueError(f"unknown output format '{fmt}'")


def parse(text: str, fmt: str) -> ReportEnvelope:
    return parse_json(text) if fmt == "json" else parse_csv(text)
