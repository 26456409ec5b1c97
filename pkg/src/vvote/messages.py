"""Bulletin-board submissions and receipts.

Each submission kind is a JSON object carrying exactly its message-sequence
field names. Signatures are computed over :func:`signing_payload` of the
listed fields, in the listed order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Any

from vvote.crypto.encoding import canonical_json, signing_payload
from vvote.crypto.signatures import SigningKey, bls_verify, verify

STORE_KINDS = ("file", "mixrandomcommit", "ballotgencommit", "ballotauditcommit")
SERIAL_KINDS = ("pod", "startevm", "vote", "audit", "cancel")
KINDS = SERIAL_KINDS + STORE_KINDS

# Field order of each message as sent to the board.
FIELDS: dict[str, tuple[str, ...]] = {
    "file": ("boothID", "boothSig", "type", "digest", "fileSize", "submissionID", "desc"),
    "mixrandomcommit": ("boothID", "boothSig", "type", "digest", "fileSize", "submissionID", "printerID"),
    "ballotgencommit": ("boothID", "boothSig", "type", "digest", "fileSize", "submissionID"),
    "ballotauditcommit": ("boothID", "boothSig", "type", "digest", "fileSize", "submissionID"),
    "pod": ("boothID", "boothSig", "serialNo", "type", "district", "ballotReductions"),
    "audit": ("boothID", "boothSig", "serialNo", "serialSig", "permutation", "commitWitness", "type", "district"),
    "startevm": ("boothID", "boothSig", "serialNo", "serialSig", "type", "district"),
    "vote": ("races", "boothID", "boothSig", "serialNo", "serialSig", "type", "startEVMSig", "district"),
    "cancel": ("boothID", "boothSig", "cancelAuthID", "cancelAuthSig", "serialNo", "serialSig", "type", "district"),
}


def preferences_string(races: dict[str, list[int]]) -> str:
    """Canonical text form of permuted rank lists (0 = unranked)."""
    return canonical_json(races).decode()


def permutation_string(order: dict[str, list[str]]) -> str:
    """Canonical text form of candidate names in printed order per race."""
    return canonical_json(order).decode()


def booth_payload(msg: dict[str, Any]) -> bytes:
    """Bytes covered by ``boothSig`` for a submission."""
    k = msg["type"]
    if k == "mixrandomcommit":
        return signing_payload(msg["submissionID"], msg["printerID"], msg["digest"])
    if k in STORE_KINDS:
        return signing_payload(msg["submissionID"], msg["digest"])
    if k == "pod":
        return signing_payload(msg["serialNo"], msg["district"])
    if k == "audit":
        return signing_payload(msg["serialNo"], "audit", msg["permutation"], msg["commitWitness"])
    if k == "startevm":
        return signing_payload("startevm", msg["serialNo"], msg["district"])
    if k == "vote":
        return signing_payload(msg["serialNo"], msg["district"], preferences_string(msg["races"]))
    if k == "cancel":
        return signing_payload(msg["serialNo"], "cancel")
    raise ValueError(f"unknown submission type {k!r}")


def peer_payload(item: dict[str, Any]) -> bytes:
    """Bytes covered by the peers' (threshold) ``peerSig`` on an accepted item."""
    msg, ct = item["msg"], item["commitTime"]
    k = msg["type"]
    if k == "mixrandomcommit":
        return signing_payload(msg["submissionID"], msg["boothID"], msg["printerID"], msg["digest"], ct)
    if k in STORE_KINDS:
        return signing_payload(msg["submissionID"], msg["digest"], msg["boothID"], ct)
    if k == "pod":
        return serial_sig_payload(msg["serialNo"], msg["district"])
    if k == "audit":
        return signing_payload("audit", msg["serialNo"], item["derived"]["reducedPermutation"], ct)
    if k == "startevm":
        return start_sig_payload(msg["serialNo"], msg["district"])
    if k == "vote":
        return vote_payload(msg["serialNo"], msg["district"], preferences_string(msg["races"]), ct)
    if k == "cancel":
        return signing_payload("cancel", msg["serialNo"])
    raise ValueError(f"unknown submission type {k!r}")


def serial_sig_payload(serial: str, district: str) -> bytes:
    return signing_payload(serial, district)


def start_sig_payload(serial: str, district: str) -> bytes:
    return signing_payload("startevm", serial, district)


def vote_payload(serial: str, district: str, preferences: str, commit_time: str) -> bytes:
    return signing_payload(serial, district, preferences, commit_time)


def cancel_auth_payload(serial: str) -> bytes:
    return signing_payload(serial, "cancel")


def cancel_request_payload(serial: str, district: str) -> bytes:
    return signing_payload("cancelReq", serial, district)


def sign_message(key: SigningKey, msg: dict[str, Any]) -> dict[str, Any]:
    """Fill in ``boothSig`` and return the message with fields in wire order."""
    msg = dict(msg)
    msg["boothSig"] = key.sign(booth_payload(msg)).hex()
    return {f: msg[f] for f in FIELDS[msg["type"]]}


def check_booth_sig(msg: dict[str, Any], verify_key: bytes) -> bool:
    try:
        return verify(verify_key, booth_payload(msg), bytes.fromhex(msg["boothSig"]))
    except (KeyError, ValueError, TypeError):
        return False


def well_formed(msg: Any) -> bool:
    return isinstance(msg, dict) and msg.get("type") in FIELDS and set(msg) == set(FIELDS[msg["type"]])


def item_key(item: dict[str, Any]) -> bytes:
    return hashlib.sha256(canonical_json(item)).digest()


def store_message(kind: str, booth_id: str, key: SigningKey, body: bytes, submission_id: str, **extra: str) -> dict[str, Any]:
    msg = {
        "boothID": booth_id,
        "type": kind,
        "digest": hashlib.sha256(body).hexdigest(),
        "fileSize": len(body),
        "submissionID": submission_id,
        **extra,
    }
    return sign_message(key, msg)


@dataclass(frozen=True)
class Receipt:
    """A threshold-signed acknowledgment of one accepted item."""

    kind: str
    payload: bytes
    signature: bytes
    commit_time: str
    fields: dict[str, Any]

    def verify(self, joint_key: bytes) -> bool:
        return bls_verify(joint_key, self.payload, self.signature)

    def to_json(self) -> dict:
        return {"type": self.kind, **self.fields, "commitTime": self.commit_time, "peerSig": self.signature.hex()}


def vote_receipt_from_json(d: dict[str, Any]) -> Receipt:
    """Rebuild a voter's receipt; the payload is recomputed from its fields."""
    payload = vote_payload(d["serialNo"], d["district"], d["preferences"], d["commitTime"])
    fields = {"serialNo": d["serialNo"], "district": d["district"], "preferences": d["preferences"]}
    return Receipt("vote", payload, bytes.fromhex(d["peerSig"]), d["commitTime"], fields)
