"""Private bulletin-board peer.

A peer validates submissions, refuses items that clash with what it has
already accepted, returns a BLS signature share on each accepted item and,
once per commit window, agrees with the other peers on the window's data
set and jointly signs the next link of the public hash chain.

Commit agreement is two rounds. Round 1 compares per-peer hashes. If they
differ, every live peer pools its items together with the signature shares
it holds for them, and each runs the same deterministic merge: an item
survives when at least ``2t - n`` distinct peers signed it, and among
clashing items for one serial the best-supported wins. A combined receipt
needs ``t`` signers, at most ``n - t`` of whom can be down, so it always
reaches ``2t - n``; with ``t > 2n/3`` a clashing rival can never match it.
"""

from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Iterable

from vvote import ballotgen
from vvote.ballotgen import CommitmentTable, GenericBallot, Reduction
from vvote.config import RACES, ElectionConfig
from vvote.crypto.commit import verify_commitment
from vvote.crypto.encoding import canonical_json
from vvote.crypto.signatures import SignatureShare, bls_verify, threshold_sign_share, verify
from vvote.messages import (
    SERIAL_KINDS,
    STORE_KINDS,
    cancel_auth_payload,
    check_booth_sig,
    item_key,
    peer_payload,
    permutation_string,
    serial_sig_payload,
    start_sig_payload,
    well_formed,
)

KIND_RANK = {k: i for i, k in enumerate(("pod", "startevm", "vote", "audit", "cancel") + STORE_KINDS)}


class Status(str, Enum):
    GENERATED = "Generated"
    POD_AUTHORISED = "PodAuthorised"
    SESSION_STARTED = "SessionStarted"
    VOTED = "Voted"
    AUDITED = "Audited"
    CANCELLED = "Cancelled"


TERMINAL = {Status.VOTED, Status.AUDITED, Status.CANCELLED}


@dataclass(frozen=True)
class Registry:
    """Public keys every peer (and the verifier) needs."""

    senders: dict[str, tuple[str, bytes]]  # id -> (role, Ed25519 verify key)
    wbb_joint_key: bytes
    wbb_share_keys: dict[int, bytes]
    election_key: bytes
    decryption_keys: dict[int, bytes]

    def role(self, sender: str) -> str | None:
        e = self.senders.get(sender)
        return e[0] if e else None

    def key(self, sender: str) -> bytes | None:
        e = self.senders.get(sender)
        return e[1] if e else None

    def to_json(self) -> dict:
        return {
            "senders": {k: {"role": r, "key": v.hex()} for k, (r, v) in sorted(self.senders.items())},
            "wbbJointKey": self.wbb_joint_key.hex(),
            "wbbShareKeys": {str(i): v.hex() for i, v in sorted(self.wbb_share_keys.items())},
            "electionKey": self.election_key.hex(),
            "decryptionKeys": {str(i): v.hex() for i, v in sorted(self.decryption_keys.items())},
        }

    @classmethod
    def from_json(cls, d: dict) -> "Registry":
        return cls(
            {k: (v["role"], bytes.fromhex(v["key"])) for k, v in d["senders"].items()},
            bytes.fromhex(d["wbbJointKey"]),
            {int(i): bytes.fromhex(v) for i, v in d["wbbShareKeys"].items()},
            bytes.fromhex(d["electionKey"]),
            {int(i): bytes.fromhex(v) for i, v in d["decryptionKeys"].items()},
        )


def cid_for(now: float, window: int) -> str:
    return f"cid-{int(now // window):05d}"


def clash_key(item: dict) -> tuple:
    msg = item["msg"]
    k = msg["type"]
    if k in STORE_KINDS:
        return ("store", msg["boothID"], msg["submissionID"])
    slot = "terminal" if k in ("vote", "audit") else k
    return (msg["serialNo"], slot)


def sort_key(item: dict) -> tuple:
    msg = item["msg"]
    return (msg.get("serialNo", ""), KIND_RANK[msg["type"]], item["commitTime"], item_key(item))


def commit_hash(prior: bytes, data: dict) -> bytes:
    return hashlib.sha256(prior + canonical_json(data)).digest()


def commit_data(cid: str, items: Iterable[dict]) -> dict:
    return {"cid": cid, "items": sorted(items, key=sort_key)}


# Tables are replayed on every rebuild; parse each published body once.
@lru_cache(maxsize=64)
def _parsed_table(digest: str, body: bytes) -> CommitmentTable:
    return CommitmentTable.from_json(json.loads(body))


@lru_cache(maxsize=64)
def _parsed_ballots(digest: str, body: bytes) -> dict[str, GenericBallot]:
    return {b["serial"]: GenericBallot.from_public_json(b) for b in json.loads(body)["ballots"]}


# -- per-serial state ------------------------------------------------------------


@dataclass
class SerialState:
    status: Status = Status.GENERATED
    district: str | None = None
    reductions: list[Reduction] | None = None
    pod_time: float | None = None
    items: dict[str, bytes] = field(default_factory=dict)  # slot -> item key


class BoardState:
    """Public tables and serial statuses rebuilt by replaying accepted items."""

    def __init__(self, config: ElectionConfig, registry: Registry) -> None:
        self.config = config
        self.registry = registry
        self.serials: dict[str, SerialState] = {}
        self.ballots: dict[str, GenericBallot] = {}
        self.crts: dict[str, dict[int, CommitmentTable]] = defaultdict(dict)
        self.gen_audited: set[str] = set()
        self.stores: dict[tuple[str, str], bytes] = {}
        self.files: dict[str, bytes] = {}

    def serial(self, s: str) -> SerialState:
        st = self.serials.get(s)
        if st is None:
            st = self.serials[s] = SerialState()
        return st

    def apply(self, item: dict, body: bytes | None = None, now: float | None = None) -> None:
        msg = item["msg"]
        kind = msg["type"]
        key = item_key(item)
        if kind in STORE_KINDS:
            self.stores[(msg["boothID"], msg["submissionID"])] = key
            if body is not None:
                self.files[msg["digest"]] = body
                self._absorb_body(msg, body)
            return
        st = self.serial(msg["serialNo"])
        if kind == "pod":
            st.status = Status.POD_AUTHORISED
            st.district = msg["district"]
            st.reductions = [Reduction.from_json(r) for r in msg["ballotReductions"]]
            if now is not None and st.pod_time is None:
                st.pod_time = now
            st.items["pod"] = key
        elif kind == "startevm":
            if st.status not in TERMINAL:
                st.status = Status.SESSION_STARTED
            st.items["startevm"] = key
        elif kind == "vote":
            if st.status != Status.CANCELLED:
                st.status = Status.VOTED
            st.items["terminal"] = key
        elif kind == "audit":
            if st.status != Status.CANCELLED:
                st.status = Status.AUDITED
            st.items["terminal"] = key
        elif kind == "cancel":
            st.status = Status.CANCELLED
            st.items["cancel"] = key

    def _absorb_body(self, msg: dict, body: bytes) -> None:
        kind = msg["type"]
        if kind == "mixrandomcommit":
            crt = _parsed_table(msg["digest"], body)
            self.crts[crt.printer_id][crt.rgs] = crt
        elif kind == "ballotgencommit":
            self.ballots.update(_parsed_ballots(msg["digest"], body))
        elif kind == "ballotauditcommit" and (doc := json.loads(body)).get("kind") == "gen-audit":
            for rec in doc["records"]:
                self.gen_audited.add(rec["serial"])
                st = self.serial(rec["serial"])
                if st.status == Status.GENERATED:
                    st.status = Status.AUDITED


# -- the peer ----------------------------------------------------------------------


class Peer:
    def __init__(self, index: int, share: int, config: ElectionConfig, registry: Registry) -> None:
        self.index = index
        self._share = share
        self.config = config
        self.registry = registry
        self.n = config.wbb_peers
        self.t = config.wbb_threshold
        self.now = 0.0
        self.committed: list[dict] = []
        self._committed_index: dict[bytes, dict] = {}
        self.prior = b""
        self.head_cid: str | None = None
        self.pending: dict[bytes, dict] = {}
        self.my_shares: dict[bytes, SignatureShare] = {}
        self.evidence: dict[bytes, dict[int, SignatureShare]] = defaultdict(dict)
        self.gossip_items: dict[bytes, dict] = {}
        self.outbox: list[dict] = []
        self.state = BoardState(config, registry)
        self._bodies: dict[str, bytes] = {}

    # -- dispatch (shared by in-memory and socket transports) --------------------

    def dispatch(self, method: str, params: dict) -> dict:
        fn = getattr(self, f"rpc_{method}", None)
        if fn is None:
            return {"ok": False, "reason": "unknown-method"}
        return fn(**params)

    def rpc_submit(self, msg: dict, now: float, body: str | None = None) -> dict:
        self.now = now
        return self.submit(msg, bytes.fromhex(body) if body is not None else None)

    def rpc_gossip(self, item: dict, share: dict) -> dict:
        self.receive_gossip(item, SignatureShare.from_json(share))
        return {"ok": True}

    def rpc_drain_outbox(self) -> dict:
        out, self.outbox = self.outbox, []
        return {"ok": True, "messages": out}

    def rpc_round1(self, cid: str) -> dict:
        h = self.window_hash(cid)
        return {"ok": True, "hash": h.hex(), "share": self.sign_commit(h).to_json()}

    def rpc_round2_offer(self, cid: str) -> dict:
        return {"ok": True, **self.offer(cid)}

    def rpc_round2_merge(self, cid: str, pool: list[dict]) -> dict:
        h = self.merge(cid, pool)
        return {"ok": True, "hash": h.hex(), "share": self.sign_commit(h).to_json()}

    def rpc_finalize(self, cid: str, hash: str) -> dict:
        try:
            self.finalize(cid, bytes.fromhex(hash))
        except ValueError as exc:
            return {"ok": False, "reason": "out-of-sync", "detail": str(exc)}
        return {"ok": True}

    def rpc_status(self) -> dict:
        return {"ok": True, "prior": self.prior.hex(), "head": self.head_cid}

    def rpc_file(self, digest: str) -> dict:
        b = self._bodies.get(digest)
        return {"ok": b is not None, "body": b.hex() if b is not None else None}

    # -- submissions ---------------------------------------------------------------

    def current_cid(self) -> str:
        return cid_for(self.now, self.config.timing.cid_window_s)

    def _reject(self, reason: str, detail: str = "") -> dict:
        return {"ok": False, "reason": reason, "detail": detail, "peerID": self.index}

    def _accept(self, item: dict, body: bytes | None = None) -> dict:
        key = item_key(item)
        if key not in self.my_shares:
            self.pending[key] = item
            share = threshold_sign_share(self.index, self._share, peer_payload(item))
            self.my_shares[key] = share
            self.evidence[key][self.index] = share
            self.state.apply(item, body, self.now)
            if body is not None:
                self._bodies[item["msg"]["digest"]] = body
            self.outbox.append({"item": item, "share": share.to_json()})
        msg = item["msg"]
        resp = {
            "ok": True,
            "type": msg["type"],
            "peerID": self.index,
            "peerSig": self.my_shares[key].to_json(),
            "commitTime": item["commitTime"],
            "derived": item.get("derived", {}),
        }
        if "serialNo" in msg:
            resp["serialNo"] = msg["serialNo"]
        else:
            resp["submissionID"] = msg["submissionID"]
        return resp

    def _existing(self, slot_key: bytes | None) -> dict | None:
        if slot_key is None:
            return None
        if slot_key in self.pending:
            return self.pending[slot_key]
        return self._committed_index.get(slot_key)

    def submit(self, msg: dict, body: bytes | None = None) -> dict:
        if not well_formed(msg):
            return self._reject("malformed")
        sender = msg["boothID"]
        vk = self.registry.key(sender)
        if vk is None or not check_booth_sig(msg, vk):
            return self._reject("bad-signature", f"sender {sender}")
        kind = msg["type"]
        if kind in STORE_KINDS:
            return self._store(msg, body)
        return getattr(self, f"_on_{kind}")(msg)

    def _store(self, msg: dict, body: bytes | None) -> dict:
        kind, sender = msg["type"], msg["boothID"]
        prev = self.state.stores.get((sender, msg["submissionID"]))
        if prev is not None:
            it = self._existing(prev)
            if it is not None and it["msg"] == msg:
                return self._accept(it)
            return self._reject("duplicate-submission", msg["submissionID"])
        if body is None or hashlib.sha256(body).hexdigest() != msg["digest"] or len(body) != msg["fileSize"]:
            return self._reject("digest-mismatch")
        role = self.registry.role(sender)
        try:
            doc = json.loads(body)
        except ValueError:
            doc = None
        if kind == "mixrandomcommit":
            if role != "rgs" or self.registry.role(msg["printerID"]) != "printer":
                return self._reject("not-authorised")
            if not isinstance(doc, dict) or doc.get("printerID") != msg["printerID"]:
                return self._reject("bad-body")
        elif kind in ("ballotgencommit", "ballotauditcommit"):
            if role != "printer" or not isinstance(doc, dict) or doc.get("printerID") != sender:
                return self._reject("not-authorised")
        item = {"msg": msg, "commitTime": self.current_cid(), "derived": {}}
        return self._accept(item, body)

    # serial-kind handlers -------------------------------------------------------

    def _serial_sig_ok(self, msg: dict) -> bool:
        try:
            sig = bytes.fromhex(msg["serialSig"])
        except ValueError:
            return False
        return bls_verify(self.registry.wbb_joint_key, serial_sig_payload(msg["serialNo"], msg["district"]), sig)

    def _same_or_clash(self, slot: str, msg: dict) -> dict | None:
        """Re-acknowledge an identical resubmission; reject a different item in the same slot."""
        st = self.state.serials.get(msg["serialNo"])
        if st is None or slot not in st.items:
            return None
        it = self._existing(st.items[slot])
        if it is not None and it["msg"] == msg:
            return self._accept(it)
        return self._reject("clash", f"{msg['serialNo']} already has a {slot} item")

    def _on_pod(self, msg: dict) -> dict:
        s = msg["serialNo"]
        if self.registry.role(msg["boothID"]) != "printer" or s.split(":")[0] != msg["boothID"]:
            return self._reject("not-authorised")
        dup = self._same_or_clash("pod", msg)
        if dup is not None:
            return dup
        ballot = self.state.ballots.get(s)
        st = self.state.serial(s)
        if ballot is None:
            return self._reject("unknown-serial", s)
        if st.status != Status.GENERATED or s in self.state.gen_audited:
            return self._reject("clash", f"{s} is {st.status.value}")
        try:
            self.config.district(msg["district"])
            reductions = [Reduction.from_json(r) for r in msg["ballotReductions"]]
        except Exception:
            return self._reject("malformed", "district or reductions")
        why = ballotgen.check_reduction(ballot, reductions, self.config.layout, self.config.race_sizes(msg["district"]), self.registry.election_key)
        if why is not None:
            return self._reject("bad-reduction", why)
        return self._accept({"msg": msg, "commitTime": self.current_cid(), "derived": {}})

    def _on_startevm(self, msg: dict) -> dict:
        s = msg["serialNo"]
        if self.registry.role(msg["boothID"]) != "ebm":
            return self._reject("not-authorised")
        if not self._serial_sig_ok(msg):
            return self._reject("forged-ballot")
        dup = self._same_or_clash("startevm", msg)
        if dup is not None:
            return dup if dup["ok"] else self._reject("session-lock", s)
        st = self.state.serials.get(s)
        if st is None or st.status != Status.POD_AUTHORISED or st.district != msg["district"]:
            return self._reject("clash", f"{s} is {st.status.value if st else 'unknown'}")
        if st.pod_time is None or self.now - st.pod_time > self.config.timing.expiry_s:
            return self._reject("expired", s)
        return self._accept({"msg": msg, "commitTime": self.current_cid(), "derived": {}})

    def _on_vote(self, msg: dict) -> dict:
        s = msg["serialNo"]
        if self.registry.role(msg["boothID"]) != "ebm":
            return self._reject("not-authorised")
        if not self._serial_sig_ok(msg):
            return self._reject("forged-ballot")
        try:
            ok = bls_verify(self.registry.wbb_joint_key, start_sig_payload(s, msg["district"]), bytes.fromhex(msg["startEVMSig"]))
        except ValueError:
            ok = False
        if not ok:
            return self._reject("no-session", "startEVMSig missing or invalid")
        dup = self._same_or_clash("terminal", msg)
        if dup is not None:
            return dup
        st = self.state.serials.get(s)
        if st is None or st.status != Status.SESSION_STARTED or st.district != msg["district"]:
            return self._reject("clash", f"{s} is {st.status.value if st else 'unknown'}")
        why = check_races(msg["races"], self.config.race_sizes(msg["district"]))
        if why is not None:
            return self._reject("invalid-preferences", why)
        return self._accept({"msg": msg, "commitTime": self.current_cid(), "derived": {}})

    def _on_audit(self, msg: dict) -> dict:
        s = msg["serialNo"]
        if self.registry.role(msg["boothID"]) != "printer" or s.split(":")[0] != msg["boothID"]:
            return self._reject("not-authorised")
        if not self._serial_sig_ok(msg):
            return self._reject("forged-ballot")
        dup = self._same_or_clash("terminal", msg)
        if dup is not None:
            return dup
        st = self.state.serials.get(s)
        if st is None or st.status != Status.POD_AUTHORISED or st.district != msg["district"]:
            return self._reject("clash", f"{s} is {st.status.value if st else 'unknown'}")
        derived = confirm_ballot(self.config, self.state, msg)
        return self._accept({"msg": msg, "commitTime": self.current_cid(), "derived": derived})

    def _on_cancel(self, msg: dict) -> dict:
        s = msg["serialNo"]
        if self.registry.role(msg["boothID"]) != "station" or self.registry.role(msg["cancelAuthID"]) != "cancel-authority":
            return self._reject("not-authorised")
        try:
            auth_ok = verify(self.registry.key(msg["cancelAuthID"]), cancel_auth_payload(s), bytes.fromhex(msg["cancelAuthSig"]))
        except ValueError:
            auth_ok = False
        if not auth_ok:
            return self._reject("bad-authority-signature")
        if not self._serial_sig_ok(msg):
            return self._reject("forged-ballot")
        st = self.state.serials.get(s)
        if st is not None and "cancel" in st.items:
            # one public record per serial; the signed payload is the same either way
            it = self._existing(st.items["cancel"])
            if it is not None:
                return self._accept(it)
        return self._accept({"msg": msg, "commitTime": self.current_cid(), "derived": {}})

    # -- gossip --------------------------------------------------------------------

    def receive_gossip(self, item: dict, share: SignatureShare) -> None:
        key = item_key(item)
        self.evidence[key].setdefault(share.index, share)
        if key not in self.pending and key not in self.my_shares:
            self.gossip_items[key] = item
            if len(self.evidence[key]) >= self.t:
                self.adopt(item, list(self.evidence[key].values()))

    def adopt(self, item: dict, shares: list[SignatureShare], body: bytes | None = None) -> bool:
        """Take in an item this peer missed once ``t`` valid shares vouch for it.

        The peer does not sign it; the shares prove a quorum validated it.
        """
        key = item_key(item)
        if key in self.pending or key in self.my_shares or key in self._committed_index:
            return False
        msg = item["msg"]
        if msg["type"] in STORE_KINDS:
            body = body if body is not None else self._bodies.get(msg["digest"])
            if body is None or hashlib.sha256(body).hexdigest() != msg["digest"]:
                return False
        slot = clash_key(item)
        if msg["type"] in SERIAL_KINDS and msg["type"] != "cancel":
            st = self.state.serials.get(msg["serialNo"])
            if st is not None and slot[1] in st.items:
                return False
        payload = peer_payload(item)
        good = {}
        for sh in shares:
            vk = self.registry.wbb_share_keys.get(sh.index)
            if sh.index not in good and vk is not None and bls_verify(vk, payload, sh.signature):
                good[sh.index] = sh
        if len(good) < self.t:
            return False
        self.pending[key] = item
        self.evidence[key].update(good)
        self.gossip_items.pop(key, None)
        if body is not None:
            self._bodies[msg["digest"]] = body
        self.state.apply(item, body, self.now)
        return True

    def rpc_sync(self) -> dict:
        """Everything pending here, with shares, for a peer catching up after a reboot."""
        items = list(self.pending.values())
        shares = {item_key(it).hex(): [s.to_json() for s in self.evidence.get(item_key(it), {}).values()] for it in items}
        bodies = {
            it["msg"]["digest"]: self._bodies[it["msg"]["digest"]].hex()
            for it in items
            if it["msg"]["type"] in STORE_KINDS and it["msg"]["digest"] in self._bodies
        }
        return {"ok": True, "items": items, "shares": shares, "bodies": bodies}

    def catch_up(self, offers: list[dict]) -> int:
        """Adopt quorum-backed items from other peers' sync offers; returns the count adopted."""
        n = 0
        for offer in offers:
            for it in sorted(offer["items"], key=sort_key):
                k = item_key(it).hex()
                shares = [SignatureShare.from_json(s) for s in offer["shares"].get(k, [])]
                body = offer["bodies"].get(it["msg"].get("digest", ""))
                if self.adopt(it, shares, bytes.fromhex(body) if body else None):
                    n += 1
        return n

    def rpc_window(self, cid: str) -> dict:
        """The data set this peer would publish for ``cid`` and the file bodies it needs."""
        merged = getattr(self, "_merged", None)
        if merged is not None and merged[0] == cid:
            items, bodies = merged[1], merged[2]
        else:
            items = self._window_items(cid)
            bodies = {it["msg"]["digest"]: self._bodies[it["msg"]["digest"]] for it in items if it["msg"]["type"] in STORE_KINDS}
        return {"ok": True, "data": commit_data(cid, items), "bodies": {d: b.hex() for d, b in bodies.items()}}

    # -- commit --------------------------------------------------------------------

    def _window_items(self, cid: str) -> list[dict]:
        return [it for it in self.pending.values() if it["commitTime"] <= cid]

    def window_hash(self, cid: str) -> bytes:
        return commit_hash(self.prior, commit_data(cid, self._window_items(cid)))

    def sign_commit(self, h: bytes) -> SignatureShare:
        return threshold_sign_share(self.index, self._share, h)

    def offer(self, cid: str) -> dict:
        """Round-2 contribution: own items for the window plus every share held for them."""
        items = self._window_items(cid)
        keys = {item_key(it) for it in items}
        extra = {k: it for k, it in self.gossip_items.items() if it["commitTime"] <= cid and k not in keys}
        out_items = items + list(extra.values())
        shares = {}
        for it in out_items:
            k = item_key(it)
            shares[k.hex()] = [s.to_json() for s in self.evidence.get(k, {}).values()]
        bodies = {}
        for it in items:
            if it["msg"]["type"] in STORE_KINDS:
                bodies[it["msg"]["digest"]] = self._bodies[it["msg"]["digest"]].hex()
        return {"peer": self.index, "own": [item_key(it).hex() for it in items], "items": out_items, "shares": shares, "bodies": bodies}

    def merge(self, cid: str, pool: list[dict]) -> bytes:
        merged, bodies = merge_pool(pool, self.registry, self.n, self.t, self._committed_slots())
        self._merged = (cid, merged, bodies)
        return commit_hash(self.prior, commit_data(cid, merged))

    def _committed_slots(self) -> set[tuple]:
        return {clash_key(it) for it in self.committed if it["msg"]["type"] != "cancel"}

    def finalize(self, cid: str, h: bytes) -> None:
        """Adopt the published data set for ``cid`` and carry later items forward."""
        merged = getattr(self, "_merged", None)
        if merged is not None and merged[0] == cid and commit_hash(self.prior, commit_data(cid, merged[1])) == h:
            items, bodies = merged[1], merged[2]
        else:
            items, bodies = self._window_items(cid), {}
            if commit_hash(self.prior, commit_data(cid, items)) != h:
                raise ValueError("finalize: hash does not match local data")
        self._merged = None
        for d, b in bodies.items():
            self._bodies.setdefault(d, b)
        self.committed.extend(items)
        self._committed_index.update((item_key(it), it) for it in items)
        self.prior = h
        self.head_cid = cid
        done = {item_key(it) for it in items}
        for k in list(self.pending):
            if k in done or self.pending[k]["commitTime"] <= cid:
                del self.pending[k]
        for k in list(self.gossip_items):
            if k in done or self.gossip_items[k]["commitTime"] <= cid:
                del self.gossip_items[k]
        self._rebuild()

    def _rebuild(self) -> None:
        old = self.state
        self.state = BoardState(self.config, self.registry)
        for it in self.committed:
            m = it["msg"]
            body = self._bodies.get(m["digest"]) if m["type"] in STORE_KINDS else None
            self.state.apply(it, body)
        for s, st in self.state.serials.items():
            prev = old.serials.get(s)
            if prev is not None:
                st.pod_time = prev.pod_time
        for it in sorted(self.pending.values(), key=sort_key):
            m = it["msg"]
            body = self._bodies.get(m["digest"]) if m["type"] in STORE_KINDS else None
            self.state.apply(it, body)

    # -- reboot -----------------------------------------------------------------

    def durable(self) -> dict:
        """What survives a reboot: the signed-item log, shares and file bodies."""
        return {
            "pending": dict(self.pending),
            "my_shares": dict(self.my_shares),
            "evidence": {k: dict(v) for k, v in self.evidence.items()},
            "bodies": dict(self._bodies),
            "committed": list(self.committed),
            "prior": self.prior,
            "head": self.head_cid,
            "pod_times": {s: st.pod_time for s, st in self.state.serials.items() if st.pod_time is not None},
        }

    def restore(
        self,
        durable: dict,
        board_items: list[dict] | None = None,
        board_prior: bytes | None = None,
        board_head: str | None = None,
        board_bodies: dict[str, bytes] | None = None,
    ) -> None:
        """Restart from the durable log, then catch up with commits published while down."""
        self.pending = dict(durable["pending"])
        self.my_shares = dict(durable["my_shares"])
        self.evidence = defaultdict(dict, {k: dict(v) for k, v in durable["evidence"].items()})
        self._bodies = dict(durable["bodies"])
        self._merged = None
        for d, b in (board_bodies or {}).items():
            self._bodies.setdefault(d, b)
        self.committed = list(board_items if board_items is not None else durable["committed"])
        self._committed_index = {item_key(it): it for it in self.committed}
        self.prior = board_prior if board_prior is not None else durable["prior"]
        self.head_cid = board_head if board_head is not None else durable["head"]
        self.outbox = []
        self.gossip_items = {}
        done = {item_key(it) for it in self.committed}
        self.pending = {k: v for k, v in self.pending.items() if k not in done and (self.head_cid is None or v["commitTime"] > self.head_cid)}
        self._rebuild()
        for s, t0 in durable["pod_times"].items():
            if s in self.state.serials:
                self.state.serials[s].pod_time = t0

    def learn_bodies(self, bodies: dict[str, bytes]) -> None:
        for d, b in bodies.items():
            if hashlib.sha256(b).hexdigest() == d:
                self._bodies.setdefault(d, b)


# -- helpers shared with the verifier ------------------------------------------------


def check_races(races: Any, sizes: dict[str, int]) -> str | None:
    """Structural validity of permuted rank lists (formality is the marker's concern)."""
    if not isinstance(races, dict) or "LA" not in races:
        return "LA race missing"
    lc = [r for r in ("LC_ATL", "LC_BTL") if r in races]
    if len(lc) != 1:
        return "exactly one of LC_ATL / LC_BTL must be marked"
    for race, ranks in races.items():
        if race not in RACES:
            return f"unknown race {race!r}"
        if not isinstance(ranks, list) or len(ranks) != sizes[race]:
            return f"{race}: expected {sizes[race]} positions"
        marked = [x for x in ranks if x]
        if any(not isinstance(x, int) or isinstance(x, bool) or x < 0 or x > sizes[race] for x in ranks):
            return f"{race}: ranks out of range"
        if len(set(marked)) != len(marked):
            return f"{race}: repeated rank"
    return None


def confirm_ballot(config: ElectionConfig, state: BoardState, msg: dict) -> dict:
    """Peer-side print confirmation: open the commitments (or ``commit_pi``) and
    return the signed permutation, or a failure record.
    """
    s = msg["serialNo"]
    layout = config.layout
    ballot = state.ballots.get(s)
    printer = s.split(":")[0]
    crts = state.crts.get(printer, {})
    names = {r: config.race_candidates(msg["district"], r) for r in RACES}
    sizes = config.race_sizes(msg["district"])
    try:
        witness = json.loads(msg["commitWitness"])
    except ValueError:
        return {"result": "failure", "reason": "malformed witness", "reducedPermutation": ""}
    if ballot is None or len(crts) != config.rgs_count:
        return {"result": "failure", "reason": "ballot tables unavailable", "reducedPermutation": ""}
    if layout.alg2:
        try:
            pi_doc = witness["pi"]
            pi = [0] * layout.n
            for race, _ in layout.sizes:
                for k, p in zip(layout.section(race), pi_doc[race]):
                    pi[k] = int(p) - 1
            ok = ballot.commit_pi is not None and verify_commitment(
                ballot.commit_pi, ballotgen.encode_pi(layout, pi), bytes.fromhex(witness["piWitness"])
            )
        except (KeyError, ValueError, TypeError):
            ok = False
        if not ok:
            return {"result": "failure", "reason": "permutation commitment does not open", "reducedPermutation": ""}
        result = "deferred"
    else:
        try:
            openings = [[(bytes.fromhex(r), bytes.fromhex(x)) for r, x in row] for row in witness["openings"]]
        except (KeyError, ValueError, TypeError):
            openings = None
        rows = [crts[g].cells[s] for g in sorted(crts)]
        verdict, pi = ballotgen.verify_openings_against(openings, rows, ballot, layout, state.registry.election_key, sorted(crts))
        if not verdict.ok:
            return {"result": "failure", "reason": verdict.describe(), "reducedPermutation": ""}
        result = "opened"
    reduced = ballotgen.reduced_permutation(pi, layout, sizes)
    return {"result": result, "reducedPermutation": permutation_string(ballotgen.printed_order(reduced, names))}


def merge_pool(
    pool: list[dict], registry: Registry, n: int, t: int, committed_slots: set[tuple] = frozenset()
) -> tuple[list[dict], dict[str, bytes]]:
    """Deterministic round-2 merge of every live peer's offer."""
    need = 2 * t - n
    items: dict[bytes, dict] = {}
    support: dict[bytes, set[int]] = defaultdict(set)
    unvouched: dict[bytes, list[SignatureShare]] = defaultdict(list)
    bodies: dict[str, bytes] = {}
    for offer in pool:
        own = {bytes.fromhex(k) for k in offer["own"]}
        for it in offer["items"]:
            k = item_key(it)
            items.setdefault(k, it)
            if k in own:
                support[k].add(int(offer["peer"]))
        for khex, shares in offer["shares"].items():
            for sj in shares:
                unvouched[bytes.fromhex(khex)].append(SignatureShare.from_json(sj))
        for d, b in offer.get("bodies", {}).items():
            bodies.setdefault(d, bytes.fromhex(b))
    for k, it in items.items():
        if len(support[k]) >= need:
            continue
        payload = peer_payload(it)
        for sh in unvouched.get(k, []):
            if sh.index in support[k] or sh.index not in registry.wbb_share_keys:
                continue
            if bls_verify(registry.wbb_share_keys[sh.index], payload, sh.signature):
                support[k].add(sh.index)
    groups: dict[tuple, list[bytes]] = defaultdict(list)
    for k, it in items.items():
        if len(support[k]) >= need and clash_key(it) not in committed_slots:
            if it["msg"]["type"] in STORE_KINDS and it["msg"]["digest"] not in bodies:
                continue
            groups[clash_key(it)].append(k)
    winners = []
    for ks in groups.values():
        best = min(ks, key=lambda k: (-len(support[k]), k))
        winners.append(items[best])
    # a startevm or vote whose prerequisite slot lost its clash is dropped too
    slots = {clash_key(it): it for it in winners}
    kept = []
    for it in winners:
        m = it["msg"]
        if m["type"] in SERIAL_KINDS and m["type"] != "cancel":
            pod = slots.get((m["serialNo"], "pod"))
            if m["type"] != "pod" and pod is not None and pod["msg"]["district"] != m["district"]:
                continue
        kept.append(it)
    used = {it["msg"]["digest"] for it in kept if it["msg"]["type"] in STORE_KINDS}
    return kept, {d: b for d, b in bodies.items() if d in used}
