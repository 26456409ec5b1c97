"""Client side of the bulletin board: broadcast a submission, gather signature
shares and combine a threshold receipt.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable

from vvote.crypto.signatures import SignatureShare, bls_verify, threshold_combine
from vvote.errors import NoReceipt, Rejected, ThresholdError
from vvote.network import Transport, Unreachable


@dataclass
class QuorumResult:
    signature: bytes
    commit_time: str
    derived: dict
    accepted: list[int]
    rejections: dict[int, str] = field(default_factory=dict)


def submit(
    net: Transport,
    msg: dict,
    now: float,
    payload: Callable[[str, dict], bytes],
    joint_key: bytes,
    share_keys: dict[int, bytes],
    t: int,
    body: bytes | None = None,
) -> QuorumResult:
    """Send ``msg`` to every peer and combine a receipt from ``t`` matching shares.

    ``payload(commit_time, derived)`` rebuilds the signed bytes. Raises
    ``Rejected`` when a quorum refuses (reason of the most common refusal)
    and ``NoReceipt`` when too few peers answered.
    """
    params = {"msg": msg, "now": now}
    if body is not None:
        params["body"] = body.hex()
    groups: dict[tuple, list[tuple[int, SignatureShare]]] = defaultdict(list)
    derived_of: dict[tuple, dict] = {}
    rejections: dict[int, str] = {}
    ids = net.order(net.peer_ids) if hasattr(net, "order") else net.peer_ids
    for i in ids:
        try:
            r = net.call(i, "submit", params)
        except Unreachable:
            continue
        if not r.get("ok"):
            rejections[i] = r.get("reason", "rejected")
            continue
        key = (r["commitTime"], repr(sorted(r.get("derived", {}).items())))
        derived_of[key] = r.get("derived", {})
        groups[key].append((i, SignatureShare.from_json(r["peerSig"])))
    if groups:
        key = max(groups, key=lambda k: (len(groups[k]), k))
        shares = [s for _, s in groups[key]]
        if len(shares) >= t:
            ct, derived = key[0], derived_of[key]
            data = payload(ct, derived)
            sig = _combine(shares, data, joint_key, share_keys, t)
            if sig is not None:
                return QuorumResult(sig, ct, derived, [i for i, _ in groups[key]], rejections)
    if len(rejections) > len(net.peer_ids) - t:
        reasons = defaultdict(int)
        for r in rejections.values():
            reasons[r] += 1
        top = max(reasons, key=lambda r: (reasons[r], r))
        raise Rejected(top, f"{len(rejections)} of {len(net.peer_ids)} peers refused")
    raise NoReceipt(f"only {max((len(g) for g in groups.values()), default=0)} matching shares, need {t}")


def _combine(shares: list[SignatureShare], data: bytes, joint_key: bytes, share_keys: dict[int, bytes], t: int) -> bytes | None:
    try:
        sig = threshold_combine(shares, t)
    except ThresholdError:
        return None
    if bls_verify(joint_key, data, sig):
        return sig
    good = [s for s in shares if s.index in share_keys and bls_verify(share_keys[s.index], data, s.signature)]
    if len(good) < t:
        return None
    sig = threshold_combine(good, t)
    return sig if bls_verify(joint_key, data, sig) else None
