"""Threshold ElGamal: key generation, decryption shares with proofs, combination."""

from __future__ import annotations

from dataclasses import dataclass, field

from vvote.crypto import group, shamir
from vvote.crypto.drbg import Drbg
from vvote.crypto.elgamal import Ciphertext
from vvote.errors import ParameterError, ThresholdError


@dataclass(frozen=True)
class ThresholdKeyMaterial:
    """Joint public key, one secret share per peer, and per-share verification keys."""

    public_key: bytes
    shares: dict[int, int]
    verification_keys: dict[int, bytes]
    t: int
    n: int
    # Only present in dealer mode; tests use it as an independent oracle.
    dealer_secret: int | None = field(default=None, repr=False)


def keygen_threshold(n: int, t: int, seed: bytes | str | None = None, mode: str = "dealer") -> ThresholdKeyMaterial:
    """Generate ``n`` shares of a fresh decryption key with threshold ``t``.

    ``mode="dealer"`` has one trusted party split a secret. ``mode="joint"``
    runs a dealerless ceremony: every peer deals its own polynomial with
    Feldman commitments and shares are summed, so no party learns the key.
    """
    if not 1 <= t <= n:
        raise ParameterError(f"need 1 <= t <= n, got t={t}, n={n}")
    rng = Drbg(seed)
    if mode == "dealer":
        secret = group.random_scalar(rng)
        shares = shamir.split(secret, n, t, group.ORDER, rng)
        pk = group.base_mul(secret)
        vks = {i: group.base_mul(s) for i, s in shares.items()}
        return ThresholdKeyMaterial(pk, shares, vks, t, n, dealer_secret=secret)
    if mode == "joint":
        return _joint(n, t, rng)
    raise ParameterError(f"unknown key generation mode {mode!r}")


def _joint(n: int, t: int, rng: Drbg) -> ThresholdKeyMaterial:
    dealt: dict[int, dict[int, int]] = {}
    commitments: dict[int, list[bytes]] = {}
    for dealer in range(1, n + 1):
        coeffs = shamir.polynomial(group.random_scalar(rng.fork(f"dealer{dealer}")), t, group.ORDER, rng.fork(f"poly{dealer}"))
        commitments[dealer] = [group.base_mul(c) for c in coeffs]
        dealt[dealer] = {j: shamir.evaluate(coeffs, j, group.ORDER) for j in range(1, n + 1)}
    shares = {}
    for j in range(1, n + 1):
        total = 0
        for dealer in range(1, n + 1):
            s = dealt[dealer][j]
            if not feldman_check(commitments[dealer], j, s):
                raise ThresholdError(f"dealer {dealer} sent peer {j} an inconsistent share", (dealer,))
            total += s
        shares[j] = total % group.ORDER
    pk = group.IDENTITY
    for dealer in range(1, n + 1):
        pk = group.add(pk, commitments[dealer][0])
    vks = {i: group.base_mul(s) for i, s in shares.items()}
    return ThresholdKeyMaterial(pk, shares, vks, t, n)


def feldman_check(commitments: list[bytes], index: int, share: int) -> bool:
    powers = [pow(index, k, group.ORDER) for k in range(len(commitments))]
    return group.base_mul(share) == group.lincomb(commitments, powers)


@dataclass(frozen=True)
class DecryptionShare:
    """``value = share * c1`` with a Chaum-Pedersen proof of equal discrete logs."""

    index: int
    value: bytes
    challenge: int
    response: int

    def to_json(self) -> dict:
        return {"index": self.index, "value": self.value.hex(), "c": format(self.challenge, "x"), "s": format(self.response, "x")}

    @classmethod
    def from_json(cls, d: dict) -> "DecryptionShare":
        return cls(int(d["index"]), bytes.fromhex(d["value"]), int(d["c"], 16), int(d["s"], 16))


def _challenge(vk: bytes, ct: Ciphertext, value: bytes, a1: bytes, a2: bytes) -> int:
    return group.hash_to_scalar("vvote/cp-decrypt", group.GENERATOR, vk, ct.c1, value, a1, a2)


def partial_decrypt(index: int, share: int, ct: Ciphertext) -> DecryptionShare:
    """Decryption share for peer ``index``; the proof nonce is derived deterministically."""
    value = group.mul(ct.c1, share)
    vk = group.base_mul(share)
    w = group.hash_to_scalar("vvote/cp-nonce", group.scalar_bytes(share), ct.to_bytes()) or 1
    a1, a2 = group.base_mul(w), group.mul(ct.c1, w)
    c = _challenge(vk, ct, value, a1, a2)
    return DecryptionShare(index, value, c, (w + c * share) % group.ORDER)


def verify_share(vk: bytes, ct: Ciphertext, ds: DecryptionShare) -> bool:
    try:
        # a1 = s*G - c*vk, a2 = s*c1 - c*value
        neg_c = (-ds.challenge) % group.ORDER
        a1 = group.lincomb([group.GENERATOR, vk], [ds.response, neg_c])
        a2 = group.lincomb([ct.c1, ds.value], [ds.response, neg_c])
    except ValueError:
        return False
    return _challenge(vk, ct, ds.value, a1, a2) == ds.challenge


def combine_decrypt(ct: Ciphertext, shares: list[DecryptionShare], verification_keys: dict[int, bytes], t: int) -> bytes:
    """Check every proof, then Lagrange-combine ``t`` valid shares into the plaintext.

    Raises ThresholdError (with the offending indices) when fewer than ``t``
    valid shares remain.
    """
    valid: dict[int, DecryptionShare] = {}
    invalid = []
    for ds in shares:
        vk = verification_keys.get(ds.index)
        if vk is None or not verify_share(vk, ct, ds):
            invalid.append(ds.index)
        else:
            valid.setdefault(ds.index, ds)
    if len(valid) < t:
        raise ThresholdError(f"{len(valid)} valid decryption shares, need {t}", tuple(invalid))
    chosen = sorted(valid)[:t]
    lam = shamir.lagrange_at_zero(chosen, group.ORDER)
    d = group.lincomb([valid[i].value for i in chosen], [lam[i] for i in chosen])
    return group.sub(ct.c2, d)
