"""Machine-readable report writers: JSON documents and CSV tables on stdout or a file."""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import click
from pydantic import BaseModel

logger = logging.getLogger(__name__)


def format_number(value: Any) -> str:
    """CSV cell text; floats get 12 significant digits and no locale."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (list, tuple)):
        return " ".join(format_number(v) for v in value)
    return str(value)


def to_json(payload: Any) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json", by_alias=True)
    return json.dumps(payload, indent=2)


def to_csv(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([format_number(cell) for cell in row])
    return buffer.getvalue()


def models_to_csv(models: Sequence[BaseModel]) -> str:
    """One row per model, columns in field declaration order."""
    if not models:
        return ""
    headers: List[str] = list(type(models[0]).model_fields)
    rows = [[getattr(m, h) for h in headers] for m in models]
    return to_csv(headers, rows)


def mapping_to_csv(data: dict) -> str:
    """A flat mapping as a two-row table; nested values are JSON-encoded."""
    headers = list(data)
    row = [
        json.dumps(value) if isinstance(value, (dict, list)) and not _flat_list(value) else value
        for value in data.values()
    ]
    return to_csv(headers, [row])


def _flat_list(value: Any) -> bool:
    return isinstance(value, list) and all(not isinstance(v, (dict, list)) for v in value)


def emit(text: str, out: Optional[str] = None) -> None:
    """Write a report to the --out path, or to stdout."""
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        logger.info(f"Report written to {path}")
    else:
        click.echo(text.rstrip("\n"))


def write_json_file(payload: Any, path: str) -> None:
    """Write a JSON document (trees, reports) to path."""
    emit(to_json(payload), path)
