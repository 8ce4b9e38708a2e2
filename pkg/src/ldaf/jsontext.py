"""Canonical JSON text: sorted keys, ``_incoming`` last, exact decimal numbers.

This byte form is the wire contract for resource objects, so the writer is
hand-rolled rather than configured onto ``json.dumps`` (which cannot place a
key last or serialize :class:`decimal.Decimal` losslessly).
"""
from __future__ import annotations

import json
from decimal import Decimal

INCOMING_KEY = "_incoming"


def format_number(value) -> str:
    if isinstance(value, bool):
        raise TypeError("bool is not a number here")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Decimal):
        text = format(value, "f")
        if "." not in text:
            text += ".0"
        return text
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError("non-finite numbers cannot be serialized")
        if value.is_integer():
            return f"{value:.1f}"
        text = repr(value)
        if "e" in text or "E" in text:
            return format_number(Decimal(text))
        return text
    raise TypeError(f"not a JSON number: {type(value).__name__}")


def _key_order(key: str) -> tuple[int, str]:
    return (1, key) if key == INCOMING_KEY else (0, key)


def _write(value, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, (int, float, Decimal)):
        out.append(format_number(value))
    elif isinstance(value, dict):
        out.append("{")
        first = True
        for key in sorted(value, key=_key_order):
            if not isinstance(key, str):
                raise TypeError("JSON object keys must be strings")
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _write(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for index, item in enumerate(value):
            if index:
                out.append(",")
            _write(item, out)
        out.append("]")
    else:
        raise TypeError(f"not a JSON value: {type(value).__name__}")


def dumps(value) -> str:
    out: list[str] = []
    _write(value, out)
    return "".join(out)


def dump_bytes(value) -> bytes:
    return dumps(value).encode("utf-8")


def loads(text: str | bytes):
    """Parse JSON keeping fractional numbers as :class:`decimal.Decimal`."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return json.loads(text, parse_float=Decimal)
