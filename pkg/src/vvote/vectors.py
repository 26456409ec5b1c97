"""Regression test vectors for the primitives whose bytes other
implementations must reproduce. ``data/vectors.json`` is the frozen copy;
``python -m vvote.vectors`` prints a fresh computation to diff against it.
"""

from __future__ import annotations

import json
import sys
from importlib import resources

from vvote.crypto import group
from vvote.crypto.commit import commit
from vvote.crypto.drbg import Drbg
from vvote.crypto.elgamal import Ciphertext, canonical_sort, encrypt
from vvote.crypto.encoding import canonical_json, signing_payload
from vvote.crypto.hashing import HASH, candidate_id, derive_randomness
from vvote.crypto.signatures import SigningKey, bls_keygen_threshold, bls_sign, threshold_combine, threshold_sign_share

CURVES = {"elgamal": "ristretto255", "threshold-signature": "BLS12-381 (signatures in G1)", "entity-signature": "Ed25519"}


def _b(label: str, n: int = 32) -> bytes:
    return Drbg(f"vectors/{label}").bytes(n)


def compute_vectors() -> dict:
    commitments = []
    for k, m in enumerate([b"", b"vote", signing_payload("P1:1", "LA", 3)]):
        r = _b(f"witness/{k}")
        commitments.append({"message": m.hex(), "witness": r.hex(), "digest": commit(m, r).hex()})

    derive = []
    for k, parts in enumerate([[_b("d/0a")], [_b("d/1a"), _b("d/1b")], [_b("d/2a"), _b("d/2b"), _b("d/2c")]]):
        derive.append({"parts": [p.hex() for p in parts], "scalar": format(derive_randomness(parts), "064x")})

    ed = []
    for k, m in enumerate([b"", signing_payload("P1:7", "Bentleigh")]):
        key = SigningKey.generate(Drbg(f"vectors/ed25519/{k}"))
        ed.append({"seed": key.seed.hex(), "verifyKey": key.verify_key.hex(), "message": m.hex(), "signature": key.sign(m).hex()})

    keys = bls_keygen_threshold(7, 5, b"vectors/bls")
    msg = signing_payload("commit", "cid-00001")
    shares = {i: threshold_sign_share(i, keys.shares[i], msg) for i in keys.shares}
    bls = {
        "n": 7,
        "t": 5,
        "seed": b"vectors/bls".hex(),
        "jointKey": keys.joint_key.hex(),
        "message": msg.hex(),
        "shares": {str(i): s.signature.hex() for i, s in sorted(shares.items())},
        "combined_1_to_5": threshold_combine([shares[i] for i in (1, 2, 3, 4, 5)], 5).hex(),
        "combined_3_to_7": threshold_combine([shares[i] for i in (3, 4, 5, 6, 7)], 5).hex(),
        "single": bls_sign(123456789, msg).hex(),
    }

    pk = group.base_mul(group.random_scalar(Drbg("vectors/pk")))
    cts = [encrypt(pk, candidate_id(f"C{k}", "LA"), group.random_scalar(Drbg(f"vectors/ct/{k}"))) for k in range(6)]
    sort = {
        "publicKey": pk.hex(),
        "ciphertexts": [[c.c1.hex(), c.c2.hex()] for c in cts],
        "order": canonical_sort(cts),
    }

    return {
        "curves": CURVES,
        "hash": HASH,
        "signingPayload": {"fields": ["P1:1", "LA", 3], "bytes": signing_payload("P1:1", "LA", 3).hex()},
        "canonicalJson": {"value": {"b": [1, "x"], "a": None}, "bytes": canonical_json({"b": [1, "x"], "a": None}).hex()},
        "candidateId": {"name": "Abbott", "race": "LA", "element": candidate_id("Abbott", "LA").hex()},
        "commitments": commitments,
        "deriveRandomness": derive,
        "ed25519": ed,
        "bls": bls,
        "canonicalSort": sort,
    }


def load_pinned() -> dict:
    return json.loads(resources.files("vvote").joinpath("data/vectors.json").read_text())


def sort_ciphertexts(rows: list[list[str]]) -> list[Ciphertext]:
    return [Ciphertext(bytes.fromhex(a), bytes.fromhex(b)) for a, b in rows]


if __name__ == "__main__":
    json.dump(compute_vectors(), sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")
