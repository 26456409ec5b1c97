"""AES-256-GCM for randomness tables, plus a sealed-box for delivering table keys."""

from __future__ import annotations

import hashlib

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from vvote.crypto import group
from vvote.crypto.drbg import Drbg
from vvote.errors import IntegrityError, ParameterError

KEY_LEN = 32
NONCE_LEN = 12


def sym_encrypt(key: bytes, message: bytes, nonce: bytes | None = None, aad: bytes = b"") -> bytes:
    """Return ``nonce || ciphertext || tag``."""
    if len(key) != KEY_LEN:
        raise ParameterError("symmetric key must be 256 bits")
    nonce = nonce if nonce is not None else Drbg().bytes(NONCE_LEN)
    return nonce + AESGCM(key).encrypt(nonce, message, aad or None)


def sym_decrypt(key: bytes, blob: bytes, aad: bytes = b"") -> bytes:
    if len(key) != KEY_LEN:
        raise ParameterError("symmetric key must be 256 bits")
    if len(blob) < NONCE_LEN + 16:
        raise IntegrityError("ciphertext truncated")
    try:
        return AESGCM(key).decrypt(blob[:NONCE_LEN], blob[NONCE_LEN:], aad or None)
    except InvalidTag as exc:
        raise IntegrityError("authenticated decryption failed") from exc


def _kdf(shared: bytes, ephemeral: bytes) -> bytes:
    return hashlib.sha256(b"vvote/seal\0" + ephemeral + shared).digest()


def seal(public_key: bytes, data: bytes, rng: Drbg) -> bytes:
    """Encrypt ``data`` to a group public key (ephemeral Diffie-Hellman + AES-GCM)."""
    e = group.random_scalar(rng)
    eph = group.base_mul(e)
    key = _kdf(group.mul(public_key, e), eph)
    return eph + sym_encrypt(key, data, rng.bytes(NONCE_LEN))


def unseal(secret_key: int, blob: bytes) -> bytes:
    eph = group.check_element(blob[:32], "ephemeral key")
    key = _kdf(group.mul(eph, secret_key), eph)
    return sym_decrypt(key, blob[32:])
