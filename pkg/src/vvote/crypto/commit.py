"""Hash commitments ``SHA-256(R || m)`` with a 256-bit witness."""

from __future__ import annotations

import hashlib
import hmac

from vvote.errors import ParameterError

WITNESS_LEN = 32


def commit(message: bytes, witness: bytes) -> bytes:
    if len(witness) != WITNESS_LEN:
        raise ParameterError(f"commitment witness must be {WITNESS_LEN} bytes, got {len(witness)}")
    return hashlib.sha256(witness + message).digest()


def verify_commitment(digest: bytes, message: bytes, witness: bytes) -> bool:
    if len(witness) != WITNESS_LEN:
        raise ParameterError(f"commitment witness must be {WITNESS_LEN} bytes, got {len(witness)}")
    return hmac.compare_digest(digest, hashlib.sha256(witness + message).digest())
