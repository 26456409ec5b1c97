"""Print-on-demand: issuing reduced ballots, print confirmation, forward-secret
deletion of randomness, and the cancel station.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from vvote import ballotgen
from vvote.ballotgen import GenAuditRecord, GenericBallot, Opening
from vvote.config import RACES, ElectionConfig
from vvote.crypto.encoding import canonical_json
from vvote.crypto.signatures import SigningKey
from vvote.errors import OutOfBallots, Rejected, StationLocked, UnavailableError, VVoteError
from vvote.messages import (
    cancel_auth_payload,
    cancel_request_payload,
    permutation_string,
    serial_sig_payload,
    sign_message,
    signing_payload,
    store_message,
)
from vvote.network import Transport
from vvote.privwbb import Registry
from vvote.wbbclient import QuorumResult, submit


@dataclass
class PrintedBallot:
    """What the voter holds: names in printed order plus the scan data."""

    serial: str
    district: str
    names: dict[str, list[str]]
    permutation: dict[str, list[int]]  # per race: official index -> printed position (0-based)
    serial_sig: bytes
    commit_time: str
    issued_at: float

    def printed_permutation(self) -> str:
        return permutation_string(self.names)


@dataclass
class ConfirmationProof:
    serial: str
    signed_permutation: str
    printed_permutation: str
    commit_time: str
    signature: bytes
    result: str
    openings: list[list[Opening]] | None = None

    @property
    def matches_print(self) -> bool:
        return self.result != "failure" and self.signed_permutation == self.printed_permutation


@dataclass
class WbbContext:
    """Everything a client needs to talk to the board."""

    net: Transport
    registry: Registry
    t: int

    def submit(self, msg: dict, now: float, payload, body: bytes | None = None) -> QuorumResult:
        return submit(self.net, msg, now, payload, self.registry.wbb_joint_key, self.registry.wbb_share_keys, self.t, body)


def store_payload(msg: dict):
    from vvote.messages import peer_payload

    return lambda ct, derived: peer_payload({"msg": msg, "commitTime": ct, "derived": derived})


@dataclass
class PrinterFaults:
    misprint: set[str] = field(default_factory=set)  # serials printed in a wrong order
    bad_commit_pi: set[str] = field(default_factory=set)  # Alg. 2: commit_pi to a wrong permutation


class Printer:
    """A print-on-demand printer with its booth tablet (one sequential actor)."""

    def __init__(self, printer_id: str, key: SigningKey, secret: int, config: ElectionConfig, wbb: WbbContext) -> None:
        self.id = printer_id
        self.key = key
        self.secret = secret
        self.config = config
        self.wbb = wbb
        self.ballots: dict[str, GenericBallot] = {}
        self.openings: dict[str, list[list[Opening]]] = {}
        self.queue: list[str] = []
        self.issued: dict[str, PrintedBallot] = {}
        self.voided: list[str] = []
        self.deleted: set[str] = set()
        self.checked: set[str] = set()
        self.deferred: list[str] = []
        self.failures: list[dict] = []
        self.retired = False
        self.faults = PrinterFaults()
        self._submission = 0

    # -- generation ----------------------------------------------------------

    def generate(self, rts, esks, crts, serials: Sequence[str]) -> None:
        ballots, openings = ballotgen.printer_generate(
            rts, esks, self.secret, crts, self.config.layout, self.wbb.registry.election_key, serials
        )
        for s in self.faults.bad_commit_pi & set(ballots):
            # commit to the reverse of the true order (a kleptographic-style cheat)
            b = ballots[s]
            layout = self.config.layout
            fake = list(b.pi)
            for race, size in layout.sizes:
                sec = layout.section(race)
                for k in sec:
                    fake[k] = size - 1 - b.pi[k]
            wit = ballotgen.pi_witness(openings[s], layout)
            from vvote.crypto.commit import commit

            ballots[s] = GenericBallot(s, b.cts, tuple(fake), commit(ballotgen.encode_pi(layout, fake), wit))
        self.ballots = ballots
        self.openings = openings
        self.queue = list(serials)

    def _next_submission(self, tag: str) -> str:
        self._submission += 1
        return f"{self.id}-{tag}-{self._submission}"

    def post_file(self, kind: str, body: bytes, now: float, tag: str) -> QuorumResult:
        msg = store_message(kind, self.id, self.key, body, self._next_submission(tag))
        return self.wbb.submit(msg, now, store_payload(msg), body)

    def ballot_table(self) -> bytes:
        return canonical_json(
            {"printerID": self.id, "mode": self.config.mode, "ballots": [self.ballots[s].public_json() for s in sorted(self.ballots, key=_serial_order)]}
        )

    def open_gen_audit(self, serials: Sequence[str]) -> list[GenAuditRecord]:
        recs = []
        for s in serials:
            recs.append(GenAuditRecord(s, self.openings.get(s)))
            if s in self.queue:
                self.queue.remove(s)
        return recs

    def gen_audit_body(self, selection_signature: bytes, records: list[GenAuditRecord]) -> bytes:
        return canonical_json(
            {
                "printerID": self.id,
                "kind": "gen-audit",
                "selectionSignature": selection_signature.hex(),
                "records": [r.to_json() for r in records],
            }
        )

    # -- issuance -------------------------------------------------------------

    def request_ballot(self, district: str, now: float) -> PrintedBallot:
        """Issue the next serial reduced to ``district``'s candidates.

        A serial the board refuses is voided (never retried) and the next one
        is tried.
        """
        if self.retired:
            raise OutOfBallots(f"printer {self.id} has been retired")
        sizes = self.config.race_sizes(district)
        while self.queue:
            s = self.queue.pop(0)
            if s in self.deleted or s not in self.openings:
                continue
            b = self.ballots[s]
            reductions = ballotgen.reduction_disclosure(b, self.openings[s], self.config.layout, sizes)
            msg = sign_message(
                self.key,
                {
                    "boothID": self.id,
                    "serialNo": s,
                    "type": "pod",
                    "district": district,
                    "ballotReductions": [r.to_json() for r in reductions],
                },
            )
            try:
                q = self.wbb.submit(msg, now, lambda ct, d, s=s: serial_sig_payload(s, district))
            except Rejected as exc:
                self.voided.append(s)
                self.failures.append(self._signed_failure(s, exc.reason))
                continue
            reduced = ballotgen.reduced_permutation(b.pi, self.config.layout, sizes)
            names = {r: list(self.config.race_candidates(district, r)) for r in RACES}
            printed = ballotgen.printed_order(reduced, names)
            perm = reduced
            if s in self.faults.misprint:
                printed = {r: list(reversed(v)) if len(v) > 1 else v for r, v in printed.items()}
                perm = {r: [len(v) - 1 - p for p in v] for r, v in reduced.items()}
            pb = PrintedBallot(s, district, printed, perm, q.signature, q.commit_time, now)
            self.issued[s] = pb
            return pb
        raise OutOfBallots(f"printer {self.id} has no unissued ballots")

    def _signed_failure(self, serial: str, reason: str) -> dict:
        sig = self.key.sign(signing_payload("pod-failure", serial, reason))
        return {"serialNo": serial, "reason": reason, "signature": sig.hex()}

    # -- confirmation -----------------------------------------------------------

    def _audit_message(self, pb: PrintedBallot, witness: dict) -> dict:
        return sign_message(
            self.key,
            {
                "boothID": self.id,
                "serialNo": pb.serial,
                "serialSig": pb.serial_sig.hex(),
                "permutation": pb.printed_permutation(),
                "commitWitness": canonical_json(witness).decode(),
                "type": "audit",
                "district": pb.district,
            },
        )

    def _send_audit(self, pb: PrintedBallot, witness: dict, now: float) -> ConfirmationProof:
        msg = self._audit_message(pb, witness)
        q = self.wbb.submit(
            msg,
            now,
            lambda ct, d: signing_payload("audit", pb.serial, d.get("reducedPermutation", ""), ct),
        )
        self.checked.add(pb.serial)
        return ConfirmationProof(
            pb.serial,
            q.derived.get("reducedPermutation", ""),
            pb.printed_permutation(),
            q.commit_time,
            q.signature,
            q.derived.get("result", "failure"),
            witness.get("openings"),
        )

    def request_print_confirmation(self, serial: str, now: float) -> ConfirmationProof:
        """Open every commitment of an issued ballot so the board can rebuild it."""
        pb = self.issued.get(serial)
        if pb is None:
            raise VVoteError(f"{serial} was not issued by printer {self.id}")
        if self.config.layout.alg2:
            return self.fast_confirmation(serial, now)
        if serial in self.deleted or serial not in self.openings:
            raise UnavailableError(f"randomness for {serial} has been deleted")
        ops = self.openings[serial]
        return self._send_audit(pb, {"openings": [[[r.hex(), x.hex()] for r, x in row] for row in ops]}, now)

    def fast_confirmation(self, serial: str, now: float) -> ConfirmationProof:
        """Alg. 2 mode: open only the permutation commitment now; queue the rest."""
        pb = self.issued.get(serial)
        if pb is None:
            raise VVoteError(f"{serial} was not issued by printer {self.id}")
        if serial in self.deleted or serial not in self.openings:
            raise UnavailableError(f"randomness for {serial} has been deleted")
        layout = self.config.layout
        b = self.ballots[serial]
        pi = {race: [b.pi[k] + 1 for k in layout.section(race)] for race, _ in layout.sizes}
        witness = {"pi": pi, "piWitness": ballotgen.pi_witness(self.openings[serial], layout).hex()}
        proof = self._send_audit(pb, witness, now)
        proof.openings = self.openings[serial]
        self.deferred.append(serial)
        return proof

    def post_deferred_openings(self, now: float) -> QuorumResult | None:
        if not self.deferred:
            return None
        recs = [GenAuditRecord(s, self.openings.get(s)) for s in self.deferred]
        body = canonical_json({"printerID": self.id, "kind": "confirmation-openings", "records": [r.to_json() for r in recs]})
        q = self.post_file("ballotauditcommit", body, now, "deferred")
        self.deferred = []
        return q

    # -- forward secrecy -----------------------------------------------------------

    def delete_randomness(self, serial: str, cause: str) -> None:
        """Erase the openings for ``serial``; idempotent."""
        if cause not in ("vote-cast-notification", "timeout", "confirmed"):
            raise ValueError(f"unknown deletion cause {cause!r}")
        if serial in self.deferred:
            return  # still owed to the board
        self.openings.pop(serial, None)
        self.deleted.add(serial)

    def expire(self, now: float) -> list[str]:
        gone = []
        for s, pb in self.issued.items():
            if s not in self.deleted and s not in self.deferred and now - pb.issued_at > self.config.timing.confirm_window_s:
                self.delete_randomness(s, "timeout")
                gone.append(s)
        return gone

    def retire(self) -> list[str]:
        """Take the printer out of service; returns its unissued serials."""
        self.retired = True
        left = [s for s in self.queue if s not in self.issued]
        self.queue = []
        for s in left:
            self.openings.pop(s, None)
            self.deleted.add(s)
        return left

    def state_json(self) -> dict:
        """Everything the printer persists (used for the forward-secrecy scan)."""
        return {
            "printerID": self.id,
            "ballots": {s: {**b.public_json(), "pi": list(b.pi or ())} for s, b in self.ballots.items()},
            "openings": {s: [[[r.hex(), x.hex()] for r, x in row] for row in ops] for s, ops in self.openings.items()},
            "issued": sorted(self.issued, key=_serial_order),
            "deleted": sorted(self.deleted, key=_serial_order),
            "voided": self.voided,
            "failures": self.failures,
        }

    def persist(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.state_json(), f, sort_keys=True)


def _serial_order(s: str) -> tuple[str, int]:
    p, i = s.rsplit(":", 1)
    return p, int(i)


# -- cancellation ------------------------------------------------------------------


class CancelAuthority:
    def __init__(self, authority_id: str, key: SigningKey, registry: Registry) -> None:
        self.id = authority_id
        self.key = key
        self.registry = registry
        self.refuse: set[str] = set()

    def authorise(self, request: dict) -> dict | None:
        """Answer a ``cancelReq`` with ``(cancelAuthID, cancelAuthSig)`` or refuse."""
        from vvote.crypto.signatures import verify

        vk = self.registry.key(request["senderID"])
        if vk is None or self.registry.role(request["senderID"]) != "station":
            return None
        if not verify(vk, cancel_request_payload(request["serialNo"], request["district"]), bytes.fromhex(request["senderSignature"])):
            return None
        if request["serialNo"] in self.refuse:
            return None
        return {"cancelAuthID": self.id, "cancelAuthSig": self.key.sign(cancel_auth_payload(request["serialNo"])).hex()}


@dataclass
class CancellationReceipt:
    serial: str
    signature: bytes
    commit_time: str


class CancelStation:
    """Voting-place station that cancels a ballot while the voter is present."""

    def __init__(self, station_id: str, key: SigningKey, authority: CancelAuthority, wbb: WbbContext, limit: int) -> None:
        self.id = station_id
        self.key = key
        self.authority = authority
        self.wbb = wbb
        self.limit = limit
        self.count = 0
        self.locked = False
        self.paper_log: list[dict] = []

    def cancel_vote(self, ballot: PrintedBallot, candidate_list_presented: bool, now: float) -> CancellationReceipt:
        if not candidate_list_presented:
            raise VVoteError("cancellation refused: the voter must present the candidate list")
        if self.locked or self.count >= self.limit:
            self.locked = True
            raise StationLocked(f"station {self.id} reached its limit of {self.limit} cancellations")
        req = {
            "serialNo": ballot.serial,
            "serialSig": ballot.serial_sig.hex(),
            "type": "cancelReq",
            "district": ballot.district,
            "senderID": self.id,
            "senderSignature": self.key.sign(cancel_request_payload(ballot.serial, ballot.district)).hex(),
        }
        resp = self.authority.authorise(req)
        if resp is None:
            raise Rejected("authority-refused", ballot.serial)
        msg = sign_message(
            self.key,
            {
                "boothID": self.id,
                "cancelAuthID": resp["cancelAuthID"],
                "cancelAuthSig": resp["cancelAuthSig"],
                "serialNo": ballot.serial,
                "serialSig": ballot.serial_sig.hex(),
                "type": "cancel",
                "district": ballot.district,
            },
        )
        q = self.wbb.submit(msg, now, lambda ct, d: signing_payload("cancel", ballot.serial))
        self.count += 1
        self.paper_log.append({"serialNo": ballot.serial, "district": ballot.district, "time": now})
        return CancellationReceipt(ballot.serial, q.signature, q.commit_time)
