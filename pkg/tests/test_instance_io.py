"""Tests for reading input documents and writing reports."""

import json
from fractions import Fraction
from pathlib import Path

import pytest
from pydantic import ValidationError

from isec.core.errors import InstanceError
from isec.domain.constants import QIConstants
from isec.domain.documents import InstanceDocument
from isec.domain.fibration import Section
from isec.infrastructure.instance_io import dumps, load_document, read_json, render_text, write_json
from isec.services.reporting import check_report


def test_dumps_is_sorted_with_a_trailing_newline() -> None:
    text = dumps({"b": 1, "a": [1, 2]})

    assert text == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'


def test_dumps_rejects_nan() -> None:
    with pytest.raises(ValueError):
        dumps({"value": float("nan")})


def test_write_json_creates_parent_directories(tmp_path: Path) -> None:
    path = tmp_path / "nested" / "dir" / "out.json"

    write_json(path, {"verdict": True})

    assert json.loads(path.read_text()) == {"verdict": True}


def test_read_missing_file(tmp_path: Path) -> None:
    with pytest.raises(InstanceError, match="cannot read file"):
        read_json(tmp_path / "missing.json")


def test_read_invalid_json(tmp_path: Path) -> None:
    path = tmp_path / "broken.json"
    path.write_text('{"metric":\n  oops}')

    with pytest.raises(InstanceError, match="invalid JSON at line 2"):
        read_json(path)


def test_load_document(tmp_path: Path) -> None:
    path = tmp_path / "instance.json"
    write_json(path, {"metric": {"kind": "grid_linf", "rows": 2, "cols": 4}})

    document = load_document(path, InstanceDocument)

    assert document.metric.cols == 4
    assert len(document.build().labels) == 4


def test_load_document_schema_error(tmp_path: Path) -> None:
    path = tmp_path / "instance.json"
    write_json(path, {"metric": {"kind": "grid_linf", "rows": 0, "cols": 4}})

    with pytest.raises(ValidationError):
        load_document(path, InstanceDocument)


def test_render_text(phi_z: Section) -> None:
    report = check_report(phi_z, QIConstants(L=Fraction(2), M=Fraction(0)))

    text = render_text(report)
    lines = text.splitlines()

    assert lines[0] == "check: verified"
    assert "  witness: None" in lines
    assert lines[1:] == sorted(lines[1:])


def test_report_round_trips_through_dumps(phi_z: Section) -> None:
    report = check_report(phi_z, QIConstants(L=Fraction(1), M=Fraction(0)))

    payload = json.loads(dumps(report))

    assert payload["verdict"] is False
    assert payload["subcommand"] == "check"
    assert payload["constants"] == {"L": 1.0, "M": 0.0}
