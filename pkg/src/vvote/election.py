"""Election lifecycle: key ceremony, ballot generation, voting days with daily
commits, and the close (mix, decrypt, publish).

Every actor talks to the bulletin-board peers only through the network
object, so the same code runs over in-memory channels and over sockets.
The simulated clock is owned here; actors receive ``now`` as an argument.

Run directory layout::

    public/   config.json registry.json digests.txt markoff.json
              receipts.json count.json board/
    private/  keys/ printers/ oracle.json plain_ballots.json events.json
"""

from __future__ import annotations

import hashlib
import json
import shutil
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from vvote import ballotgen, mixnet
from vvote.boardview import load_view
from vvote.config import RACES, ElectionConfig
from vvote.crypto import group
from vvote.crypto.drbg import Drbg
from vvote.crypto.elgamal import Ciphertext
from vvote.crypto.encoding import canonical_json, signing_payload
from vvote.crypto.signatures import (
    SignatureShare,
    SigningKey,
    ThresholdSigningKeys,
    bls_keygen_threshold,
    bls_verify,
    threshold_combine,
    threshold_sign_share,
)
from vvote.crypto.threshold import ThresholdKeyMaterial, keygen_threshold
from vvote.ebm import EBM, BallotScan, PlainBallot, fallback_plain, readback
from vvote.errors import (
    CommitmentMismatch,
    ConfigError,
    NoReceipt,
    OutOfBallots,
    Rejected,
    StationLocked,
    ThresholdError,
    UnavailableError,
    VVoteError,
)
from vvote.messages import Receipt, store_message
from vvote.network import MemoryNetwork, Unreachable
from vvote.pod import CancelAuthority, CancelStation, PrintedBallot, Printer, WbbContext, store_payload
from vvote.privwbb import Peer, Registry, cid_for, commit_hash
from vvote.pubwbb import CommitRecord, PublicBoard, genesis_data

OFFICIAL = "EC"
AUTHORITY = "CA"


# -- key ceremony -----------------------------------------------------------------------


@dataclass
class KeyMaterial:
    election: ThresholdKeyMaterial
    wbb: ThresholdSigningKeys
    signers: dict[str, SigningKey]
    roles: dict[str, str]
    printer_secrets: dict[str, int]

    @property
    def registry(self) -> Registry:
        return Registry(
            {i: (self.roles[i], k.verify_key) for i, k in sorted(self.signers.items())},
            self.wbb.joint_key,
            dict(self.wbb.share_keys),
            self.election.public_key,
            dict(self.election.verification_keys),
        )

    def write(self, key_dir: str | Path) -> list[Path]:
        """One file per actor plus the public joint keys."""
        d = Path(key_dir)
        d.mkdir(parents=True, exist_ok=True)
        written = []

        def put(name: str, obj: dict) -> None:
            p = d / name
            p.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")
            written.append(p)

        put("joint.json", {"electionKey": self.election.public_key.hex(), "wbbJointKey": self.wbb.joint_key.hex()})
        for i in sorted(self.election.shares):
            put(
                f"peer{i}.json",
                {
                    "index": i,
                    "decryptionShare": format(self.election.shares[i], "064x"),
                    "wbbShare": format(self.wbb.shares[i], "064x"),
                },
            )
        for sid, k in sorted(self.signers.items()):
            entry = {"id": sid, "role": self.roles[sid], "signingSeed": k.seed.hex()}
            if sid in self.printer_secrets:
                entry["sealSecret"] = format(self.printer_secrets[sid], "064x")
            put(f"{sid}.json", entry)
        return written


def ebm_ids(config: ElectionConfig) -> list[str]:
    return [f"EBM{k}" for k in range(1, 2 * len(config.stations) + 1)]


def keygen_ceremony(config: ElectionConfig, mode: str = "joint", seed: bytes | str | None = None) -> KeyMaterial:
    """Decryption key shares for the peers, board signing shares and per-entity keys."""
    seed = seed if seed is not None else config.seed
    rng = Drbg(seed).fork("keys") if seed is not None else Drbg(None)
    n, t = config.wbb_peers, config.wbb_threshold
    election = keygen_threshold(n, t, rng.fork("election").bytes(32) if rng.deterministic else None, mode)
    wbb = bls_keygen_threshold(n, t, rng.fork("wbb").bytes(32) if rng.deterministic else None)
    roles: dict[str, str] = {}
    for p in config.printers:
        roles[p.id] = "printer"
    for g in range(1, config.rgs_count + 1):
        roles[f"RGS{g}"] = "rgs"
    for s in config.stations:
        roles[s] = "station"
    for e in ebm_ids(config):
        roles[e] = "ebm"
    roles[AUTHORITY] = "cancel-authority"
    roles[OFFICIAL] = "official"
    signers = {sid: SigningKey.generate(rng.fork(f"sign/{sid}")) for sid in sorted(roles)}
    secrets = {p.id: group.random_scalar(rng.fork(f"seal/{p.id}")) for p in config.printers}
    return KeyMaterial(election, wbb, signers, roles, secrets)


# -- records -------------------------------------------------------------------------------


@dataclass
class VoterRecord:
    voter: str
    district: str
    intention: dict[str, list[int]]
    path: list[str] = field(default_factory=list)
    receipt: dict | None = None
    plain: bool = False


@dataclass
class CommitOutcome:
    cid: str
    published: bool
    rounds: int
    detail: str = ""


# -- the election -------------------------------------------------------------------------


class Election:
    def __init__(
        self,
        config: ElectionConfig,
        run_dir: str | Path,
        keys: KeyMaterial | None = None,
        keygen_mode: str = "joint",
        network_factory: Callable[[dict, Drbg], Any] | None = None,
    ) -> None:
        self.config = config
        self.run_dir = Path(run_dir)
        self.public = self.run_dir / "public"
        self.private = self.run_dir / "private"
        for d in (self.public, self.private):
            if d.exists():
                shutil.rmtree(d)
            d.mkdir(parents=True)
        self.rng = Drbg(config.seed).fork("election") if config.seed is not None else Drbg(None)
        self.keys = keys or keygen_ceremony(config, keygen_mode)
        self.registry = self.keys.registry
        self.n, self.t = config.wbb_peers, config.wbb_threshold
        self.peers = {i: Peer(i, self.keys.wbb.shares[i], config, self.registry) for i in range(1, self.n + 1)}
        factory = network_factory or (lambda peers, rng: MemoryNetwork(peers, rng))
        self.net = factory(self.peers, self.rng.fork("network"))
        self.wbb = WbbContext(self.net, self.registry, self.t)
        self.board = PublicBoard(self.public / "board", self.registry.wbb_joint_key)
        self.printers: dict[str, Printer] = {}
        self.active: list[str] = []
        self.authority = CancelAuthority(AUTHORITY, self.keys.signers[AUTHORITY], self.registry)
        self.stations = {
            s: CancelStation(s, self.keys.signers[s], self.authority, self.wbb, config.cancel_limit) for s in config.stations
        }
        self.ebms = {e: EBM(e, self.keys.signers[e], config, self.wbb) for e in ebm_ids(config)}
        self.withdrawn: set[str] = set()  # EBMs taken out of service after a dispute
        self.mix_substitute: dict[str, set[int]] = {}
        self.corrupt_holder: int | None = None
        self.voters: list[VoterRecord] = []
        self.markoff: Counter[str] = Counter()
        self.plain_ballots: list[PlainBallot] = []
        self.events: list[dict] = []
        self.commits: list[CommitOutcome] = []
        self.durable: dict[int, dict] = {}
        self.retired: list[dict] = []
        self._submission = 0
        self._turn = 0

    # -- plumbing ----------------------------------------------------------------------

    def log(self, event: str, **detail: Any) -> None:
        self.events.append({"event": event, **detail})

    def post_file(self, sender: str, desc: str, doc: dict, now: float) -> Receipt:
        body = canonical_json(doc)
        self._submission += 1
        msg = store_message("file", sender, self.keys.signers[sender], body, f"{sender}-{self._submission}", desc=desc)
        q = self.wbb.submit(msg, now, store_payload(msg), body)
        self.gossip()
        return Receipt("file", b"", q.signature, q.commit_time, {"submissionID": msg["submissionID"]})

    def gossip(self) -> None:
        if hasattr(self.net, "deliver_gossip"):
            self.net.deliver_gossip()

    # -- peer availability ---------------------------------------------------------------

    def crash(self, i: int) -> None:
        if i not in self.net.crashed:
            self.durable[i] = self.peers[i].durable()
            self.net.crashed.add(i)
            self.log("peer-crash", peer=i)

    def recover(self, i: int, now: float) -> None:
        """Restart a peer from its durable log and the public board, then catch up."""
        if i not in self.net.crashed:
            return
        durable = self.durable.pop(i, None) or self.peers[i].durable()
        fresh = Peer(i, self.keys.wbb.shares[i], self.config, self.registry)
        items = [it for _, it in self.board.items()]
        bodies = {}
        for it in items:
            m = it["msg"]
            if "digest" in m:
                b = self.board.file(m["digest"])
                if b is not None:
                    bodies[m["digest"]] = b
        head_cid = self.board.commits[-1].cid if self.board.commits else None
        fresh.restore(durable, items, self.board.head, head_cid, bodies)
        fresh.now = now
        self.peers[i] = fresh
        self.net.peers[i] = fresh
        self.net.crashed.discard(i)
        offers = []
        for j in self.net.live():
            if j == i:
                continue
            try:
                offers.append(self.net.call(j, "sync", {}, src=f"peer{i}"))
            except Unreachable:
                pass
        adopted = fresh.catch_up(offers)
        self.log("peer-recover", peer=i, adopted=adopted)

    # -- commits -------------------------------------------------------------------------

    def _call(self, i: int, method: str, params: dict) -> dict | None:
        try:
            return self.net.call(i, method, params, src="committer")
        except Unreachable:
            return None

    def commit(self, now: float) -> CommitOutcome:
        """Close the CID window containing ``now`` and publish it when a quorum agrees."""
        cid = cid_for(now, self.config.timing.cid_window_s)
        self.resync_stale(now)
        self.gossip()
        r1 = {}
        for i in self.net.order(self.net.peer_ids):
            r = self._call(i, "round1", {"cid": cid})
            if r is not None:
                r1[i] = r
        rounds = 1
        chosen = None
        if len(r1) == self.n and len({r["hash"] for r in r1.values()}) == 1:
            chosen = (next(iter(r1.values()))["hash"], [SignatureShare.from_json(r["share"]) for r in r1.values()], list(r1))
        elif len(r1) >= self.t:
            rounds = 2
            offers = [o for i in sorted(r1) if (o := self._call(i, "round2_offer", {"cid": cid})) is not None]
            by_hash: dict[str, list[tuple[int, SignatureShare]]] = {}
            for i in sorted(r1):
                r = self._call(i, "round2_merge", {"cid": cid, "pool": offers})
                if r is not None:
                    by_hash.setdefault(r["hash"], []).append((i, SignatureShare.from_json(r["share"])))
            if by_hash:
                h = max(by_hash, key=lambda k: (len(by_hash[k]), k))
                if len(by_hash[h]) >= self.t:
                    chosen = (h, [s for _, s in by_hash[h]], [i for i, _ in by_hash[h]])
        if chosen is None:
            out = CommitOutcome(cid, False, rounds, f"only {len(r1)} peers answered; commit deferred")
            self.commits.append(out)
            self.log("commit-deferred", cid=cid, live=len(r1))
            return out
        h_hex, shares, signers = chosen
        h = bytes.fromhex(h_hex)
        sig = self._combine(shares, h)
        window = self._call(signers[0], "window", {"cid": cid})
        if sig is None or window is None:
            out = CommitOutcome(cid, False, rounds, "threshold signature on the commit could not be combined")
            self.commits.append(out)
            return out
        data = window["data"]
        if commit_hash(self.board.head, data) != h:
            out = CommitOutcome(cid, False, rounds, "peers' chain head differs from the public board")
            self.commits.append(out)
            return out
        bodies = {d: bytes.fromhex(b) for d, b in window["bodies"].items()}
        self.board.publish(CommitRecord(cid, self.board.head, data, h, sig), bodies)
        for i in self.net.peer_ids:
            r = self._call(i, "finalize", {"cid": cid, "hash": h_hex})
            if r is not None and not r.get("ok"):
                # a peer that missed the agreed data set rejoins from the board
                self.durable[i] = self.peers[i].durable()
                self.net.crashed.add(i)
                self.recover(i, now)
        out = CommitOutcome(cid, True, rounds)
        self.commits.append(out)
        self.log("commit", cid=cid, rounds=rounds, items=len(data["items"]))
        return out

    def resync_stale(self, now: float) -> list[int]:
        """Peers that missed a finalize rebuild their head from the public board."""
        stale = []
        for i in self.net.live():
            r = self._call(i, "status", {})
            if r is not None and r["prior"] != self.board.head.hex():
                self.durable[i] = self.peers[i].durable()
                self.net.crashed.add(i)
                self.recover(i, now)
                stale.append(i)
        return stale

    def _combine(self, shares: list[SignatureShare], data: bytes) -> bytes | None:
        good = [s for s in shares if bls_verify(self.registry.wbb_share_keys[s.index], data, s.signature)]
        if len(good) < self.t:
            return None
        try:
            sig = threshold_combine(good, self.t)
        except ThresholdError:
            return None
        return sig if bls_verify(self.registry.wbb_joint_key, data, sig) else None

    # -- setup ---------------------------------------------------------------------------

    def write_genesis(self) -> None:
        cfg = canonical_json(self.config.to_dict())
        reg = canonical_json(self.registry.to_json())
        (self.public / "config.json").write_bytes(cfg + b"\n")
        (self.public / "registry.json").write_bytes(reg + b"\n")
        data = genesis_data(self.config.name, hashlib.sha256(cfg + b"\n").hexdigest(), hashlib.sha256(reg + b"\n").hexdigest())
        h = commit_hash(b"", data)
        shares = [threshold_sign_share(i, self.keys.wbb.shares[i], h) for i in sorted(self.keys.wbb.shares)[: self.t]]
        self.board.write_genesis(data, threshold_combine(shares, self.t))
        for p in self.peers.values():
            p.prior = self.board.head

    def setup(self, now: float = 0.0, misgenerate: dict[str, set[str]] | None = None) -> None:
        """Keys, tables, ballot generation and the generation audit, then the first commit."""
        self.write_genesis()
        self.keys.write(self.private / "keys")
        misgenerate = misgenerate or {}
        servers = [ballotgen.RandomnessServer(g, self.rng.fork(f"rgs{g}")) for g in range(1, self.config.rgs_count + 1)]
        for pc in self.config.printers:
            pid = pc.id
            serials = ballotgen.serial_numbers(pid, pc.ballots)
            crts = []
            for srv in servers:
                crt = srv.generate(pid, serials, self.config.layout.columns)
                rid = f"RGS{srv.index}"
                body = crt.body()
                self._submission += 1
                msg = store_message("mixrandomcommit", rid, self.keys.signers[rid], body, f"{rid}-{self._submission}", printerID=pid)
                self.wbb.submit(msg, now, store_payload(msg), body)
                crts.append(crt)
            self.gossip()
            # every server's table is on the board, so release is allowed
            acked = [s.index for s in servers]
            pk_seal = group.base_mul(self.keys.printer_secrets[pid])
            released = [srv.release(pid, pk_seal, acked, self.config.rgs_count) for srv in servers]
            printer = Printer(pid, self.keys.signers[pid], self.keys.printer_secrets[pid], self.config, self.wbb)
            if self.config.mode == "alg2":
                printer.faults.bad_commit_pi = set(misgenerate.get(pid, ()))
            try:
                printer.generate([r for r, _ in released], [k for _, k in released], crts, serials)
            except CommitmentMismatch as exc:
                d = ballotgen.Dispute(pid, exc.peer, exc.serial, exc.column)
                d = ballotgen.Dispute(d.printer_id, d.rgs, d.serial, d.column, self.keys.signers[pid].sign(signing_payload(*d.fields())))
                self.post_file(pid, "dispute:rgs", d.to_json(), now)
                raise
            if self.config.mode == "alg1":
                for s in misgenerate.get(pid, ()):
                    b = printer.ballots[s]
                    cts = list(b.cts)
                    cts[0], cts[1] = cts[1], cts[0]
                    printer.ballots[s] = ballotgen.GenericBallot(s, tuple(cts), b.pi, b.commit_pi)
            q = printer.post_file("ballotgencommit", printer.ballot_table(), now, "gen")
            chosen = ballotgen.select_gen_audit(hashlib.sha256(q.signature).digest(), self.config.gen_audit_fraction, serials)
            records = printer.open_gen_audit(chosen)
            printer.post_file("ballotauditcommit", printer.gen_audit_body(q.signature, records), now, "genaudit")
            self.gossip()
            self.printers[pid] = printer
            if not pc.standby:
                self.active.append(pid)
            self.log("generated", printer=pid, ballots=len(serials), audited=len(chosen))
        self.commit(now)

    # -- printer replacement --------------------------------------------------------------

    def replace_printer(self, old: str, new: str, now: float, stolen: bool = False) -> None:
        """Retire ``old`` (its unissued serials are announced) and bring ``new`` online."""
        repl = self.printers.get(new)
        if repl is None or new in self.active or not repl.queue:
            raise ConfigError(f"no replacement stock available on printer {new!r}")
        if old not in self.active:
            raise ConfigError(f"printer {old!r} is not in service")
        gone = self.printers[old].retire()
        self.active[self.active.index(old)] = new
        issued_unvoted = []
        if stolen:
            issued_unvoted = sorted(s for s in self.printers[old].issued if s not in self.printers[old].deleted)
        doc = {"printerID": old, "replacement": new, "retiredSerials": gone, "stolen": stolen, "issuedUndeleted": issued_unvoted}
        self.post_file(OFFICIAL, "printer-retired", doc, now)
        self.retired.append(doc)
        self.log("printer-replaced", old=old, new=new, stolen=stolen)

    # -- voting --------------------------------------------------------------------------

    def _printer_order(self) -> list[str]:
        k = self._turn % len(self.active)
        self._turn += 1
        return self.active[k:] + self.active[:k]

    def issue(self, district: str, now: float) -> tuple[Printer, PrintedBallot]:
        for pid in self._printer_order():
            p = self.printers[pid]
            p.expire(now)
            try:
                return p, p.request_ballot(district, now)
            except OutOfBallots:
                continue
        raise OutOfBallots("no printer has ballots left")

    def dispute(self, kind: str, serial: str, station: str, detail: dict, now: float) -> None:
        self.post_file(station, f"dispute:{kind}", {"kind": kind, "serialNo": serial, **detail}, now)
        self.log("dispute", kind=kind, serial=serial)

    def cancel(self, station: str, ballot: PrintedBallot, now: float) -> bool:
        try:
            self.stations[station].cancel_vote(ballot, True, now)
        except (NoReceipt, Rejected, StationLocked) as exc:
            self.log("cancel-failed", serial=ballot.serial, reason=str(exc))
            return False
        finally:
            self.gossip()
        return True

    def _vote_once(self, ebm: EBM, ballot: PrintedBallot, prefs: dict, now: float, ack: bool) -> tuple[Receipt, BallotScan]:
        scan = BallotScan.of(ballot)
        try:
            session = ebm.start_session(scan, now)
        finally:
            self.gossip()
        try:
            receipt = ebm.cast_vote(session, prefs, now + 60, acknowledge_informal=ack)
        finally:
            self.gossip()
        return receipt, scan

    def vote(self, rec: VoterRecord, now: float, confirm: bool = False, recast: bool = False, ack: bool = False, ebm_id: str | None = None) -> None:
        """One voter's full visit: ballot, optional print check, marking, receipt check."""
        station = self.config.stations[0]
        ebms = [e for e in self.ebms if e not in self.withdrawn] or list(self.ebms)
        ebm = self.ebms[ebm_id or ebms[0]]
        checker = self.ebms[next((e for e in ebms if e != ebm.id), ebms[0])]
        self.markoff[rec.district] += 1
        attempts = 0
        t = now
        while True:
            attempts += 1
            if attempts > 4:
                self._go_plain(rec)
                return
            try:
                printer, ballot = self.issue(rec.district, t)
            except (OutOfBallots, NoReceipt):
                self._go_plain(rec)
                return
            finally:
                self.gossip()
            rec.path.append(f"issued {ballot.serial}")
            if confirm:
                confirm = False
                self._confirm(printer, ballot, station, t + 30)
                t += 60
                continue
            try:
                receipt, scan = self._vote_once(ebm, ballot, rec.intention, t + 60, ack)
            except (NoReceipt, Rejected, VVoteError) as exc:
                rec.path.append(f"vote failed: {exc}")
                if not self.cancel(station, ballot, t + 200):
                    self._go_plain(rec)
                    return
                rec.path.append(f"cancelled {ballot.serial}")
                printer.delete_randomness(ballot.serial, "timeout")
                t += 300
                continue
            printer.delete_randomness(ballot.serial, "vote-cast-notification")
            if readback(receipt, scan) != {r: list(v) for r, v in rec.intention.items()}:
                # the voter's check on another machine disagrees with the marked vote
                self.dispute("ebm-mismark", ballot.serial, station, {"ebm": ebm.id}, t + 150)
                self.withdrawn.add(ebm.id)
                if not self.cancel(station, ballot, t + 160):
                    rec.path.append(f"mismarked {ballot.serial}, cancellation refused")
                    rec.receipt = receipt.to_json()
                    return
                rec.path.append(f"mismarked {ballot.serial}, cancelled")
                ebm, checker = checker, ebm
                t += 300
                continue
            if recast:
                recast = False
                if self.cancel(station, ballot, t + 200):
                    rec.path.append(f"voter cancelled {ballot.serial}")
                    t += 300
                    continue
            rec.receipt = receipt.to_json()
            rec.path.append(f"voted {ballot.serial}")
            return

    def _confirm(self, printer: Printer, ballot: PrintedBallot, station: str, now: float) -> None:
        try:
            proof = printer.request_print_confirmation(ballot.serial, now)
        except (Rejected, NoReceipt, UnavailableError) as exc:
            self.log("confirmation-failed", serial=ballot.serial, reason=str(exc))
            return
        finally:
            self.gossip()
        if not proof.matches_print:
            self.dispute("print-confirmation", ballot.serial, station, {"result": proof.result}, now + 10)
        printer.delete_randomness(ballot.serial, "confirmed")

    def _go_plain(self, rec: VoterRecord) -> None:
        self.markoff[rec.district] -= 1
        rec.plain = True
        self.plain_ballots.append(fallback_plain(rec.intention, rec.district))
        rec.path.append("plain ballot")

    def plain_vote(self, rec: VoterRecord) -> None:
        rec.plain = True
        self.plain_ballots.append(fallback_plain(rec.intention, rec.district))
        rec.path.append("plain ballot (network loss)")

    def end_of_day(self, now: float) -> CommitOutcome:
        for p in self.printers.values():
            if self.config.mode == "alg2":
                try:
                    p.post_deferred_openings(now)
                except (NoReceipt, Rejected) as exc:
                    self.log("deferred-openings-failed", printer=p.id, reason=str(exc))
                self.gossip()
            p.expire(now)
        for s in self.stations.values():
            s.count = 0
        return self.commit(now)

    # -- close ---------------------------------------------------------------------------

    def close(self, now: float) -> dict[str, mixnet.DecryptedBatch]:
        """Mix and decrypt every batch from the published votes, then publish."""
        view = load_view(self.board, self.config, self.registry)
        closing = self.board.commits[-1]
        pad_seed = closing.hash
        batches = mixnet.build_mix_input(
            view.votes(), view.ballots, view.reductions(), self.config, self.registry.election_key, pad_seed
        )
        results = {}
        for key, batch in batches.items():
            servers = [mixnet.MixServer(s, self.rng.fork(f"mix/{s}/{key}")) for s in range(1, self.config.mix_servers + 1)]
            for row in self.mix_substitute.get(key, ()):
                servers[0].substitute.add(row)
            tr = mixnet.run_mix(batch, servers, self.registry.election_key)
            self.post_file(OFFICIAL, f"mix-transcript:{key}", {"closingCID": closing.cid, "padSeed": pad_seed.hex(), "transcript": tr.to_json()}, now)
            holders = {i: self.keys.election.shares[i] for i in self.net.live()}
            db = mixnet.decrypt_outputs(self.config, key, tr.output, holders, self.registry.decryption_keys, self.t, self.corrupt_holder)
            self.post_file(OFFICIAL, f"decryption:{key}", db.to_json(), now)
            results[key] = db
        self.commit(now)
        return results

    # -- outputs -------------------------------------------------------------------------

    def write_outputs(self, results: dict[str, mixnet.DecryptedBatch]) -> None:
        shutil.copyfile(self.board.root / "digests.txt", self.public / "digests.txt")
        dump = lambda p, obj: p.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")  # noqa: E731
        dump(self.public / "markoff.json", {d: self.markoff.get(d, 0) for d in sorted(x.name for x in self.config.districts)})
        dump(self.public / "receipts.json", [v.receipt for v in self.voters if v.receipt is not None])
        count = {o["number"]: o["preferences"] for db in results.values() for o in db.outputs}
        dump(self.public / "count.json", count)
        dump(self.private / "oracle.json", {"voters": [vars(v) for v in self.voters]})
        dump(self.private / "plain_ballots.json", [vars(p) for p in self.plain_ballots])
        dump(self.private / "events.json", self.events)
        pdir = self.private / "printers"
        pdir.mkdir(exist_ok=True)
        for p in self.printers.values():
            p.persist(pdir / f"{p.id}.json")


# -- oracle --------------------------------------------------------------------------------


def intended_rows(config: ElectionConfig, district: str, intention: dict[str, list[int]]) -> dict[str, tuple[str, ...]]:
    """Per batch, the names a voter ranked, most preferred first."""
    out = {}
    for race, ranks in intention.items():
        names = config.race_candidates(district, race)
        ranked = sorted((r, names[k]) for k, r in enumerate(ranks) if r)
        out[config.batch_key(district, race)] = tuple(n for _, n in ranked)
    return out


def oracle_tally(config: ElectionConfig, voters: list[VoterRecord]) -> Counter:
    c: Counter = Counter()
    for v in voters:
        if v.plain or v.receipt is None:
            continue
        for key, row in intended_rows(config, v.district, v.intention).items():
            c[(key, row)] += 1
    return c


def decrypted_tally(results: dict[str, mixnet.DecryptedBatch]) -> Counter:
    c: Counter = Counter()
    for key, db in results.items():
        for o in db.outputs:
            c[(key, tuple(o["preferences"]))] += 1
    return c


__all__ = [
    "Election",
    "KeyMaterial",
    "VoterRecord",
    "decrypted_tally",
    "keygen_ceremony",
    "intended_rows",
    "oracle_tally",
    "RACES",
    "Ciphertext",
]
