"""Shamir sharing and Lagrange interpolation over a prime field."""

from __future__ import annotations

from typing import Iterable

from vvote.crypto.drbg import Drbg
from vvote.errors import ParameterError


def polynomial(secret: int, t: int, modulus: int, rng: Drbg) -> list[int]:
    return [secret % modulus] + [rng.randbelow(modulus) for _ in range(t - 1)]


def evaluate(coeffs: list[int], x: int, modulus: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % modulus
    return acc


def split(secret: int, n: int, t: int, modulus: int, rng: Drbg) -> dict[int, int]:
    if not 1 <= t <= n:
        raise ParameterError(f"need 1 <= t <= n, got t={t}, n={n}")
    coeffs = polynomial(secret, t, modulus, rng)
    return {i: evaluate(coeffs, i, modulus) for i in range(1, n + 1)}


def lagrange_at_zero(indices: Iterable[int], modulus: int) -> dict[int, int]:
    idx = list(indices)
    if len(set(idx)) != len(idx):
        raise ParameterError("duplicate share index")
    out = {}
    for i in idx:
        num, den = 1, 1
        for j in idx:
            if j != i:
                num = num * j % modulus
                den = den * (j - i) % modulus
        out[i] = num * pow(den, -1, modulus) % modulus
    return out
