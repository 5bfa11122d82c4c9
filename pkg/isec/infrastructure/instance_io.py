"""Reading input documents and writing byte-stable JSON."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Type, TypeVar

from pydantic import BaseModel

from isec.core.errors import InstanceError

logger = logging.getLogger(__name__)

DocumentT = TypeVar("DocumentT", bound=BaseModel)


def read_json(path: Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceError(f"cannot read file: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def load_document(path: Path, model: Type[DocumentT]) -> DocumentT:
    """Parse a JSON file against a document schema.

    Schema violations surface as pydantic ``ValidationError``.
    """
    logger.info("loading %s from %s", model.__name__, path)
    return model.model_validate(read_json(path))


def dumps(payload: Any) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: Path, payload: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload), encoding="utf-8")
    logger.info("wrote %s", path)


def render_text(report: Any) -> str:
    """Plain-text rendering: the verdict line, then one sorted ``key: value`` line per field."""
    data = report.model_dump(mode="json")
    verdict = "verified" if data.get("verdict") else "falsified"
    lines = [f"{data.get('subcommand', 'report')}: {verdict}"]
    for key in sorted(data):
        if key in ("subcommand", "verdict"):
            continue
        value = data[key]
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True)
        lines.append(f"  {key}: {value}")
    return "\n".join(lines) + "\n"
