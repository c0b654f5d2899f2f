"""CSV / JSON emission with the run config echoed into every file."""
from __future__ import annotations

import csv
import io
import json
import math

from . import __version__

SCHEMA_VERSION = 1
CONFIG_PREFIX = "# config: "


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _parse_cell(s: str):
    if s == "true":
        return True
    if s == "false":
        return False
    if s == "":
        return None
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def render(rows: list[dict], config: dict, fmt: str = "csv", columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0]) if rows else []
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "generator": f"learnrate {__version__}",
            "config": config,
            "columns": columns,
            "rows": [{k: _json_safe(r.get(k)) for k in columns} for r in rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    buf.write(f"# learnrate {__version__} schema_version={SCHEMA_VERSION}\n")
    buf.write(CONFIG_PREFIX + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in columns])
    return buf.getvalue()


def parse(text: str):
    """Inverse of :func:`render`; returns ``(config, rows)``."""
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        rows = []
        for r in doc["rows"]:
            rows.append({k: (float(v) if v in ("inf", "-inf", "nan") else v) for k, v in r.items()})
        return doc["config"], rows
    config = None
    body = []
    for line in text.splitlines():
        if line.startswith(CONFIG_PREFIX):
            config = json.loads(line[len(CONFIG_PREFIX):])
        elif not line.startswith("#"):
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    rows = [dict(zip(header, map(_parse_cell, rec))) for rec in reader]
    return config, rows


def read_output(path):
    with open(path) as fh:
        return parse(fh.read())
