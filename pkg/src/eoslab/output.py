"""CSV/JSON emission with embedded, re-runnable configuration headers.

Every file starts with a '#'-prefixed header block of ``key = value`` lines
(the fully resolved run configuration); the same lines parse as a config file,
so re-running from the header reproduces the file byte-for-byte. Numbers are
written with ``%.17g`` (full double precision round-trip). JSON output mirrors
the CSV content as one document: {"config": ..., "columns": ..., "rows": ...}.
"""

from __future__ import annotations

import json
from pathlib import Path


def fmt(v) -> str:
    """Stable scalar formatting: 17 significant digits for floats."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if v != v:  # NaN
            return "nan"
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def header_block(config: dict) -> str:
    lines = [f"# {k} = {fmt(v)}" for k, v in sorted(config.items())]
    return "\n".join(lines) + "\n"


def write_csv(path, columns: list, rows, config: dict) -> None:
    """Write a '#'-headed CSV; rows are iterables matching `columns`."""
    out = [header_block(config)]
    out.append(",".join(columns) + "\n")
    for row in rows:
        out.append(",".join(fmt(v) for v in row) + "\n")
    Path(path).write_text("".join(out), encoding="utf-8")


def _jsonable(v):
    if isinstance(v, float):
        if v != v:
            return None
        return v
    return v


def write_json(path, columns: list, rows, config: dict) -> None:
    """Mirror of the CSV content as a single JSON document."""
    doc = {
        "config": {k: config[k] for k in sorted(config)},
        "columns": list(columns),
        "rows": [[_jsonable(v) for v in row] for row in rows],
    }
    Path(path).write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n",
                          encoding="utf-8")


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' prefixes and blank lines ignored.

    Values stay strings; the CLI coerces them per flag. This is the same
    format as the emitted file headers.
    """
    config = {}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            line = line[1:].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key = value): {raw!r}")
        key, _, val = line.partition("=")
        config[key.strip()] = val.strip()
    return config


#: Shape of the documents produced by `write_json`, in JSON-schema style.
OUTPUT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "eoslab tabular output",
    "type": "object",
    "required": ["config", "columns", "rows"],
    "properties": {
        "config": {"type": "object"},
        "columns": {"type": "array", "items": {"type": "string"}},
        "rows": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": ["number", "string", "boolean", "null"]},
            },
        },
    },
    "additionalProperties": False,
}
