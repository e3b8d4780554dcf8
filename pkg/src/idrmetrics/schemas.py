"""Shipped JSON Schemas for report files and column specs for CSV outputs."""

from __future__ import annotations

import csv
import io
import json
from functools import lru_cache
from importlib import resources

import jsonschema

JSON_SCHEMAS = ("indicator_report", "performance_report", "overlay", "journal_map", "funding", "manifest")


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    if name not in JSON_SCHEMAS:
        raise KeyError(f"unknown schema {name!r}")
    text = resources.files("idrmetrics").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


@lru_cache(maxsize=None)
def csv_tables() -> dict:
    text = resources.files("idrmetrics").joinpath("schemas", "csv_tables.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_json(obj, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` if ``obj`` does not match schema ``name``."""
    jsonschema.validate(obj, load_schema(name), cls=jsonschema.Draft202012Validator)


def _check_cell(value: str, kind: str) -> bool:
    optional = kind.endswith("?")
    kind = kind.rstrip("?")
    if value == "":
        return optional or kind == "string"
    if kind == "integer":
        try:
            int(value)
        except ValueError:
            return False
        return True
    if kind == "number":
        try:
            float(value)
        except ValueError:
            return False
        return True
    return True


def validate_csv(text: str, table: str) -> list[str]:
    """Problems found in CSV ``text`` against column spec ``table``; empty when valid."""
    spec = csv_tables()[table]
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return ["empty file"]
    problems = []
    if rows[0] != spec["columns"]:
        problems.append(f"header {rows[0]} != {spec['columns']}")
        return problems
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(spec["columns"]):
            problems.append(f"line {lineno}: {len(row)} fields, expected {len(spec['columns'])}")
            continue
        for col, value in zip(spec["columns"], row):
            if not _check_cell(value, spec["types"][col]):
                problems.append(f"line {lineno}: column {col}: bad value {value!r}")
    return problems
