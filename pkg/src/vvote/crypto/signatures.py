"""Signatures.

Per-entity keys (booths, printers, EBMs, cancel authority) use Ed25519,
which is deterministic. The bulletin board signs with threshold BLS on
BLS12-381: keys in G2, signatures in G1, Shamir-shared signing key and
Lagrange combination of signature shares, so the joint signature on a
message is unique whichever peers contribute.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

from vvote import kernels
from vvote.crypto import shamir
from vvote.crypto.drbg import Drbg
from vvote.errors import ParameterError, ThresholdError

BLS_ORDER = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
BLS_DST = b"BLS_SIG_BLS12381G1_XMD:SHA-256_SSWU_RO_NUL_"


# -- Ed25519 -----------------------------------------------------------------


@dataclass(frozen=True)
class SigningKey:
    seed: bytes

    @classmethod
    def generate(cls, rng: Drbg) -> "SigningKey":
        return cls(rng.bytes(32))

    @property
    def _key(self) -> Ed25519PrivateKey:
        return Ed25519PrivateKey.from_private_bytes(self.seed)

    @property
    def verify_key(self) -> bytes:
        return self._key.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)

    def sign(self, payload: bytes) -> bytes:
        return self._key.sign(payload)


def sign(key: SigningKey, payload: bytes) -> bytes:
    return key.sign(payload)


def verify(verify_key: bytes, payload: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(verify_key).verify(signature, payload)
    except (InvalidSignature, ValueError):
        return False
    return True


# -- threshold BLS -----------------------------------------------------------


def _sb(k: int) -> bytes:
    return (k % BLS_ORDER).to_bytes(32, "little")


@dataclass(frozen=True)
class ThresholdSigningKeys:
    joint_key: bytes
    shares: dict[int, int]
    share_keys: dict[int, bytes]
    t: int
    n: int


def bls_keygen_threshold(n: int, t: int, seed: bytes | str | None = None) -> ThresholdSigningKeys:
    if not 1 <= t <= n:
        raise ParameterError(f"need 1 <= t <= n, got t={t}, n={n}")
    rng = Drbg(seed)
    secret = rng.randbelow(BLS_ORDER - 1) + 1
    shares = shamir.split(secret, n, t, BLS_ORDER, rng)
    return ThresholdSigningKeys(
        joint_key=kernels.bls_g2_basemul(_sb(secret)),
        shares=shares,
        share_keys={i: kernels.bls_g2_basemul(_sb(s)) for i, s in shares.items()},
        t=t,
        n=n,
    )


def bls_sign(secret: int, message: bytes) -> bytes:
    return kernels.bls_sign(_sb(secret), message, BLS_DST)


@lru_cache(maxsize=65536)
def bls_verify(public_key: bytes, message: bytes, signature: bytes) -> bool:
    return kernels.bls_verify(public_key, message, signature, BLS_DST)


@dataclass(frozen=True)
class SignatureShare:
    index: int
    message_digest: bytes
    signature: bytes

    def to_json(self) -> dict:
        return {"index": self.index, "digest": self.message_digest.hex(), "sig": self.signature.hex()}

    @classmethod
    def from_json(cls, d: dict) -> "SignatureShare":
        return cls(int(d["index"]), bytes.fromhex(d["digest"]), bytes.fromhex(d["sig"]))


def threshold_sign_share(index: int, share: int, message: bytes) -> SignatureShare:
    return SignatureShare(index, hashlib.sha256(message).digest(), bls_sign(share, message))


def threshold_combine(shares: list[SignatureShare], t: int) -> bytes:
    """Lagrange-combine ``t`` shares into the joint signature.

    Shares must all cover the same message; only the lowest ``t`` distinct
    indices are used, so the output does not depend on which extra shares
    were offered.
    """
    by_index: dict[int, SignatureShare] = {}
    for s in shares:
        by_index.setdefault(s.index, s)
    digests = {s.message_digest for s in by_index.values()}
    if len(digests) > 1:
        raise ThresholdError("signature shares cover different messages")
    if len(by_index) < t:
        raise ThresholdError(f"{len(by_index)} signature shares, need {t}")
    chosen = sorted(by_index)[:t]
    lam = shamir.lagrange_at_zero(chosen, BLS_ORDER)
    return kernels.bls_g1_lincomb([by_index[i].signature for i in chosen], [_sb(lam[i]) for i in chosen])


def verify_share(share_key: bytes, message: bytes, share: SignatureShare) -> bool:
    return bls_verify(share_key, message, share.signature)
