"""Randomness derivation and candidate identifiers."""

from __future__ import annotations

import hashlib
from typing import Sequence

from vvote.crypto import group
from vvote.errors import ConfigError, ParameterError

HASH = "sha256"


def derive_randomness_bytes(parts: Sequence[bytes]) -> bytes:
    if not parts:
        raise ParameterError("derive_randomness needs at least one part")
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.digest()


def derive_randomness(parts: Sequence[bytes]) -> int:
    """SHA-256 of the in-order concatenation, as a big-endian integer mod the group order."""
    return int.from_bytes(derive_randomness_bytes(parts), "big") % group.ORDER


def candidate_id(name: str, race: str) -> bytes:
    if not name:
        raise ParameterError("candidate name must be non-empty")
    return group.hash_to_element("vvote/candidate", race.encode(), name.encode())


NULL_ELEMENT = candidate_id("null", "padding")


def check_distinct(ids: dict[str, bytes]) -> None:
    """Raise ConfigError when two labels map to the same element."""
    seen: dict[bytes, str] = {}
    for label, e in ids.items():
        if e in seen:
            raise ConfigError(f"candidate identifiers collide: {seen[e]!r} and {label!r}")
        seen[e] = label
