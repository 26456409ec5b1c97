"""ElGamal over ristretto255: encryption, re-encryption and decryption."""

from __future__ import annotations

from typing import NamedTuple, Sequence

from vvote import kernels
from vvote.crypto import group
from vvote.errors import ParameterError


class Ciphertext(NamedTuple):
    """An ElGamal pair ``(r*G, m + r*pk)``.

    Tuple comparison on the two fixed-length encodings is the canonical
    (byte-lexicographic ``c1 || c2``) order.
    """

    c1: bytes
    c2: bytes

    def to_bytes(self) -> bytes:
        return self.c1 + self.c2

    @classmethod
    def from_bytes(cls, b: bytes) -> "Ciphertext":
        if len(b) != 64:
            raise ParameterError("ciphertext: expected 64 bytes")
        return cls(group.check_element(b[:32], "c1"), group.check_element(b[32:], "c2"))

    def hex(self) -> str:
        return self.to_bytes().hex()

    @classmethod
    def from_hex(cls, s: str) -> "Ciphertext":
        return cls.from_bytes(bytes.fromhex(s))


def _check_r(r: int) -> int:
    r %= group.ORDER
    if r == 0:
        raise ParameterError("encryption randomness must be non-zero")
    return r


def encrypt(pk: bytes, m: bytes, r: int) -> Ciphertext:
    return encrypt_batch(pk, [m], [r])[0]


def encrypt_batch(pk: bytes, msgs: Sequence[bytes], rands: Sequence[int]) -> list[Ciphertext]:
    rs = [group.scalar_bytes(_check_r(r)) for r in rands]
    return [Ciphertext(a, b) for a, b in kernels.elgamal_encrypt_batch(pk, list(msgs), rs)]


def reencrypt(pk: bytes, ct: Ciphertext, r: int) -> Ciphertext:
    return reencrypt_batch(pk, [ct], [r])[0]


def reencrypt_batch(pk: bytes, cts: Sequence[Ciphertext], rands: Sequence[int]) -> list[Ciphertext]:
    rs = [group.scalar_bytes(r) for r in rands]
    pairs = [(c.c1, c.c2) for c in cts]
    return [Ciphertext(a, b) for a, b in kernels.elgamal_reencrypt_batch(pk, pairs, rs)]


def decrypt(sk: int, ct: Ciphertext) -> bytes:
    return group.sub(ct.c2, group.mul(ct.c1, sk))


def canonical_sort(cts: Sequence[Ciphertext]) -> list[int]:
    """Indices that sort ``cts`` canonically; ties raise ParameterError."""
    order = sorted(range(len(cts)), key=lambda i: cts[i])
    for a, b in zip(order, order[1:]):
        if cts[a] == cts[b]:
            raise ParameterError("identical ciphertexts cannot be ordered")
    return order
