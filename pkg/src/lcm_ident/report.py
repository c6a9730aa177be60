"""Deterministic JSON and Markdown rendering of analysis documents."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any

from . import __version__

FLOAT_DIGITS = 12
TOOL = "lcm-ident"


def normalize(obj: Any) -> Any:
    """JSON-ready copy with floats rounded to ``FLOAT_DIGITS`` significant
    digits, so reports do not depend on last-bit floating point noise."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        r = float(f"{obj:.{FLOAT_DIGITS}g}")
        return 0.0 if r == 0 else r
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return normalize(obj.item())
    if hasattr(obj, "to_dict"):
        return normalize(obj.to_dict())
    return str(obj)


def envelope(command: str, config: dict, body: dict) -> dict:
    return {"tool": TOOL, "version": __version__, "command": command, "config": config, **body}


def to_json(doc: dict) -> str:
    return json.dumps(normalize(doc), indent=2) + "\n"


# -- markdown ----------------------------------------------------------------------------

def _cell(v: Any) -> str:
    if isinstance(v, (dict, list)):
        text = json.dumps(v, separators=(", ", ": "))
    else:
        text = str(v)
    return text.replace("|", "\\|").replace("\n", " ")


def _table(headers: list[str], rows: list[list[Any]]) -> list[str]:
    out = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    out += ["| " + " | ".join(_cell(v) for v in r) + " |" for r in rows]
    return out


def _nested(v: Any) -> bool:
    return (isinstance(v, dict) and bool(v)) or (
        isinstance(v, list) and any(isinstance(x, dict) for x in v))


def _section(key: str, value: Any, level: int) -> list[str]:
    head = "#" * min(level, 6) + " " + key
    if isinstance(value, dict):
        if all(not _nested(v) for v in value.values()):
            return [head, ""] + _table(["key", "value"], [[k, v] for k, v in value.items()]) + [""]
        out = [head, ""]
        for k, v in value.items():
            out += _section(str(k), v, level + 1)
        return out
    if isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
        headers: list[str] = []
        for v in value:
            headers += [k for k in v if k not in headers]
        return [head, ""] + _table(headers, [[v.get(h, "") for h in headers] for v in value]) + [""]
    return [head, "", _cell(value), ""]


def to_markdown(doc: dict) -> str:
    doc = normalize(doc)
    lines = [f"# {doc.get('tool', TOOL)} {doc.get('command', '')}".rstrip(), ""]
    lines.append(f"version {doc.get('version', __version__)}")
    lines.append("")
    for key, value in doc.items():
        if key in ("tool", "command", "version"):
            continue
        if key == "table" and isinstance(value, list):
            lines += table_markdown(value)
            continue
        lines += _section(key, value, 2)
    return "\n".join(lines).rstrip() + "\n"


def table_markdown(rows: list[dict]) -> list[str]:
    """One line per (family, n): parameters grouped by verdict label."""
    cells: dict[tuple, dict] = {}
    for r in rows:
        key = (tuple(r["family"]), r["n"])
        cell = cells.setdefault(key, {"groups": {}, "match": True})
        cell["groups"].setdefault(r["label"], []).append(r["parameter"])
        cell["match"] &= bool(r["match"])
    out = ["## classification", ""]
    body = []
    for (fam, n), cell in cells.items():
        groups = "; ".join(f"{label}: {', '.join(ps)}" for label, ps in cell["groups"].items())
        body.append([f"M{n}({fam[0]},{fam[1]})", groups, "yes" if cell["match"] else "NO"])
    out += _table(["model", "verdicts", "matches expected"], body)
    return out + [""]


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(doc)
    if fmt == "md":
        return to_markdown(doc)
    raise ValueError(f"unknown format {fmt!r}")
