"""Seedable random source.

With a seed the output stream is reproducible (SHAKE-256 in counter mode);
without one every draw comes from the operating system.
"""

from __future__ import annotations

import hashlib
import os
from typing import MutableSequence, TypeVar

T = TypeVar("T")


class Drbg:
    def __init__(self, seed: bytes | str | None = None) -> None:
        if isinstance(seed, str):
            seed = seed.encode()
        self._seed = seed
        self._counter = 0

    @property
    def deterministic(self) -> bool:
        return self._seed is not None

    def fork(self, label: str) -> "Drbg":
        """Independent child stream; unseeded parents yield unseeded children."""
        if self._seed is None:
            return Drbg(None)
        return Drbg(hashlib.sha256(b"fork\0" + self._seed + b"\0" + label.encode()).digest())

    def bytes(self, n: int) -> bytes:
        if self._seed is None:
            return os.urandom(n)
        self._counter += 1
        h = hashlib.shake_256(self._seed + self._counter.to_bytes(8, "big"))
        return h.digest(n)

    def randbelow(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        nbytes = (bound.bit_length() + 7) // 8 + 16
        # 128 spare bits make the modulo bias negligible
        return int.from_bytes(self.bytes(nbytes), "big") % bound

    def random(self) -> float:
        return int.from_bytes(self.bytes(7), "big") / float(1 << 56)

    def shuffle(self, items: MutableSequence[T]) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        p = list(range(n))
        self.shuffle(p)
        return p
