"""BLS12-381 fallback built on py_ecc (signatures in G1, keys in G2).

Encodings are the standard compressed forms (48-byte G1, 96-byte G2), so
outputs are byte-identical to the native kernel.
"""

from __future__ import annotations

import hashlib

from py_ecc.bls.g2_primitives import G1_to_pubkey, G2_to_signature, pubkey_to_G1, signature_to_G2
from py_ecc.bls.hash_to_curve import hash_to_G1
from py_ecc.optimized_bls12_381 import (
    FQ12,
    G2,
    Z1,
    Z2,
    add,
    curve_order,
    final_exponentiate,
    is_on_curve,
    multiply,
    neg,
)
from py_ecc.optimized_bls12_381 import b as B1
from py_ecc.optimized_bls12_381 import b2 as B2
from py_ecc.optimized_bls12_381.optimized_pairing import pairing
from py_ecc.bls.g2_primitives import subgroup_check


def _scalar(s: bytes) -> int:
    if len(s) != 32:
        raise ValueError("scalar: expected 32 bytes")
    k = int.from_bytes(s, "little")
    if k >= curve_order:
        raise ValueError("scalar: not canonical")
    return k


def _g1(b: bytes):
    if len(b) != 48:
        raise ValueError("G1: expected 48 bytes")
    try:
        p = pubkey_to_G1(b)
    except Exception as exc:  # py_ecc raises ValueError/AssertionError variants
        raise ValueError("G1: invalid encoding") from exc
    if not (is_on_curve(p, B1) and subgroup_check(p)):
        raise ValueError("G1: invalid encoding")
    return p


def _g2(b: bytes):
    if len(b) != 96:
        raise ValueError("G2: expected 96 bytes")
    try:
        p = signature_to_G2(b)
    except Exception as exc:
        raise ValueError("G2: invalid encoding") from exc
    if not (is_on_curve(p, B2) and subgroup_check(p)):
        raise ValueError("G2: invalid encoding")
    return p


def bls_hash_to_g1(msg: bytes, dst: bytes) -> bytes:
    return G1_to_pubkey(hash_to_G1(msg, dst, hashlib.sha256))


def bls_g2_basemul(s: bytes) -> bytes:
    return G2_to_signature(multiply(G2, _scalar(s)))


def bls_sign(s: bytes, msg: bytes, dst: bytes) -> bytes:
    return G1_to_pubkey(multiply(hash_to_G1(msg, dst, hashlib.sha256), _scalar(s)))


def bls_verify(pk: bytes, msg: bytes, sig: bytes, dst: bytes) -> bool:
    try:
        pkp, sigp = _g2(pk), _g1(sig)
    except ValueError:
        return False
    h = hash_to_G1(msg, dst, hashlib.sha256)
    # e(sig, -G2) * e(H(m), pk) == 1
    f = pairing(neg(G2), sigp, False) * pairing(pkp, h, False)
    return final_exponentiate(f) == FQ12.one()


def bls_g1_lincomb(points: list[bytes], scalars: list[bytes]) -> bytes:
    if len(points) != len(scalars):
        raise ValueError("lincomb: length mismatch")
    acc = Z1
    for p, s in zip(points, scalars):
        acc = add(acc, multiply(_g1(p), _scalar(s)))
    return G1_to_pubkey(acc)


def bls_g2_lincomb(points: list[bytes], scalars: list[bytes]) -> bytes:
    if len(points) != len(scalars):
        raise ValueError("lincomb: length mismatch")
    acc = Z2
    for p, s in zip(points, scalars):
        acc = add(acc, multiply(_g2(p), _scalar(s)))
    return G2_to_signature(acc)
