"""The prime-order group (ristretto255) used for encryption and commitments.

Elements are carried as their canonical 32-byte encodings and scalars as
Python integers; conversion happens at the kernel boundary.
"""

from __future__ import annotations

import hashlib

from vvote import kernels
from vvote.crypto.drbg import Drbg
from vvote.errors import ParameterError

CURVE = "ristretto255"
ORDER = 2**252 + 27742317777372353535851937790883648493
ELEMENT_LEN = 32
IDENTITY = bytes(32)
GENERATOR = kernels.r255_basemul((1).to_bytes(32, "little"))


def scalar_bytes(k: int) -> bytes:
    return (k % ORDER).to_bytes(32, "little")


def random_scalar(rng: Drbg, nonzero: bool = True) -> int:
    while True:
        k = rng.randbelow(ORDER)
        if k or not nonzero:
            return k


def is_element(b: bytes) -> bool:
    return isinstance(b, bytes) and len(b) == ELEMENT_LEN and kernels.r255_is_valid(b)


def base_mul(k: int) -> bytes:
    return kernels.r255_basemul(scalar_bytes(k))


def mul(p: bytes, k: int) -> bytes:
    return kernels.r255_mul(p, scalar_bytes(k))


def add(p: bytes, q: bytes) -> bytes:
    return kernels.r255_add(p, q)


def sub(p: bytes, q: bytes) -> bytes:
    return kernels.r255_sub(p, q)


def lincomb(points: list[bytes], scalars: list[int]) -> bytes:
    return kernels.r255_lincomb(points, [scalar_bytes(s) for s in scalars])


def hash_to_element(domain: str, *parts: bytes) -> bytes:
    h = hashlib.sha512(domain.encode() + b"\0")
    for p in parts:
        h.update(len(p).to_bytes(4, "big") + p)
    return kernels.r255_from_uniform(h.digest())


def hash_to_scalar(domain: str, *parts: bytes) -> int:
    h = hashlib.sha512(domain.encode() + b"\0")
    for p in parts:
        h.update(len(p).to_bytes(4, "big") + p)
    return int.from_bytes(h.digest(), "little") % ORDER


def check_element(b: bytes, what: str = "element") -> bytes:
    if not is_element(b):
        raise ParameterError(f"{what}: not a valid group element")
    return b
