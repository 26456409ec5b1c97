"""Cryptographic building blocks."""

from vvote.crypto.commit import commit, verify_commitment
from vvote.crypto.drbg import Drbg
from vvote.crypto.elgamal import Ciphertext, canonical_sort, decrypt, encrypt, encrypt_batch, reencrypt, reencrypt_batch
from vvote.crypto.encoding import canonical_json, signing_payload
from vvote.crypto.hashing import NULL_ELEMENT, candidate_id, derive_randomness, derive_randomness_bytes
from vvote.crypto.signatures import (
    SignatureShare,
    SigningKey,
    ThresholdSigningKeys,
    bls_keygen_threshold,
    bls_sign,
    bls_verify,
    sign,
    threshold_combine,
    threshold_sign_share,
    verify,
)
from vvote.crypto.symmetric import seal, sym_decrypt, sym_encrypt, unseal
from vvote.crypto.threshold import DecryptionShare, ThresholdKeyMaterial, combine_decrypt, keygen_threshold, partial_decrypt

__all__ = [
    "Ciphertext",
    "DecryptionShare",
    "Drbg",
    "NULL_ELEMENT",
    "SignatureShare",
    "SigningKey",
    "ThresholdKeyMaterial",
    "ThresholdSigningKeys",
    "bls_keygen_threshold",
    "bls_sign",
    "bls_verify",
    "candidate_id",
    "canonical_json",
    "canonical_sort",
    "combine_decrypt",
    "commit",
    "decrypt",
    "derive_randomness",
    "derive_randomness_bytes",
    "encrypt",
    "encrypt_batch",
    "keygen_threshold",
    "partial_decrypt",
    "reencrypt",
    "reencrypt_batch",
    "seal",
    "sign",
    "signing_payload",
    "sym_decrypt",
    "sym_encrypt",
    "threshold_combine",
    "threshold_sign_share",
    "unseal",
    "verify",
    "verify_commitment",
]
