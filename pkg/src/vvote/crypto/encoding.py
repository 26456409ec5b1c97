"""Canonical byte encodings used for hashing and signing."""

from __future__ import annotations

import json
from typing import Any


def field_bytes(value: str | bytes | int) -> bytes:
    if isinstance(value, bytes):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not signable fields")
    if isinstance(value, int):
        return str(value).encode()
    if isinstance(value, str):
        return value.encode("utf-8")
    raise TypeError(f"unsupported field type {type(value).__name__}")


def signing_payload(*fields: str | bytes | int) -> bytes:
    """Concatenate fields, each preceded by its 4-byte big-endian length."""
    out = bytearray()
    for f in fields:
        b = field_bytes(f)
        out += len(b).to_bytes(4, "big")
        out += b
    return bytes(out)


def canonical_json(obj: Any) -> bytes:
    """Deterministic JSON: sorted keys, no whitespace, UTF-8."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode()
