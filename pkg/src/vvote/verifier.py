"""Independent verifier: replays every public check from the board directory.

Inputs are the public board, the election configuration and key registry
bound into its genesis record, the out-of-band digest list, markoff counts,
voters' receipts and the external count. Nothing secret is read.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from vvote import ballotgen, mixnet
from vvote.boardview import BoardView, load_view
from vvote.config import RACES, ElectionConfig
from vvote.crypto.commit import verify_commitment
from vvote.crypto.encoding import canonical_json
from vvote.crypto.signatures import bls_verify, verify
from vvote.errors import IntegrityError
from vvote.messages import (
    cancel_auth_payload,
    check_booth_sig,
    peer_payload,
    permutation_string,
    preferences_string,
    serial_sig_payload,
    start_sig_payload,
    vote_receipt_from_json,
    well_formed,
)
from vvote.privwbb import Registry, check_races
from vvote.pubwbb import PublicBoard, genesis_data, verify_chain, verify_inclusion, verify_index

CHECKS = (
    "chain",
    "inclusion-sweep",
    "timeliness",
    "items",
    "gen-audits",
    "reductions",
    "confirmations",
    "receipts",
    "mix",
    "decryption",
    "reconciliation",
    "disputes",
    "replacement",
)

ROLE_FOR = {
    "pod": "printer",
    "audit": "printer",
    "ballotgencommit": "printer",
    "ballotauditcommit": "printer",
    "startevm": "ebm",
    "vote": "ebm",
    "cancel": "station",
    "mixrandomcommit": "rgs",
}


@dataclass
class Check:
    name: str
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checked": self.checked, "failures": self.failures, "notes": self.notes}


@dataclass
class VerificationReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks]}

    def to_text(self) -> str:
        lines = [f"verification: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.name} ({c.checked} checked)")
            lines.extend(f"    failure: {f}" for f in c.failures)
            lines.extend(f"    note: {n}" for n in c.notes)
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> tuple[Path, Path]:
        """JSON report at ``path`` and the text summary next to it (``.txt``)."""
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n")
        txt = p.with_suffix(".txt")
        txt.write_text(self.to_text())
        return p, txt


# -- receipts and the external count -----------------------------------------------------


@dataclass(frozen=True)
class ReceiptVerdict:
    status: str  # "included", "signed-but-missing" or "unsigned-claim"
    cid: str | None = None
    detail: str = ""


def check_receipt(receipt: dict, board: PublicBoard, digests: list[dict] | None = None) -> ReceiptVerdict:
    """Is the vote a voter holds a receipt for on the public board?"""
    try:
        r = vote_receipt_from_json(receipt)
    except (KeyError, ValueError, TypeError) as exc:
        return ReceiptVerdict("unsigned-claim", detail=f"malformed receipt ({exc})")
    if not r.verify(board.joint_key):
        return ReceiptVerdict("unsigned-claim", detail="threshold signature does not verify")

    def same_vote(it: dict) -> bool:
        m = it["msg"]
        return (
            m["type"] == "vote"
            and m["district"] == receipt["district"]
            and it["commitTime"] == receipt["commitTime"]
            and preferences_string(m["races"]) == receipt["preferences"]
        )

    res = verify_inclusion(board, receipt["serialNo"], same_vote, digests)
    if res.status == "included":
        return ReceiptVerdict("included", res.cid)
    return ReceiptVerdict("signed-but-missing", res.cid, res.detail or "no matching vote in any commit")


def reconcile_outputs(outputs: dict[str, list[str]], count: dict[str, list[str]]) -> list[str]:
    """Compare the external count, by output number, with the decrypted rows."""
    problems = []
    for number in sorted(count):
        if number not in outputs:
            problems.append(f"count file entry {number} matches no decrypted output")
        elif list(count[number]) != list(outputs[number]):
            problems.append(f"output {number}: count file says {count[number]}, decryption says {outputs[number]}")
    for number in sorted(set(outputs) - set(count)):
        problems.append(f"output {number} absent from the count file")
    return problems


# -- the checks ----------------------------------------------------------------------------


def _label(cid: str, it: dict) -> str:
    m = it["msg"]
    if "serialNo" in m:
        return f"{cid} {m['type']} {m['serialNo']}"
    return f"{cid} {m['type']} {m.get('boothID')}/{m.get('submissionID')}"


def _check_chain(board: PublicBoard, config: ElectionConfig, registry: Registry, digests: list[dict] | None) -> Check:
    c = Check("chain")
    v = verify_chain(board, digests)
    c.failures.extend(v.failures)
    c.checked = len(board.commits) + 1
    if board.genesis is not None:
        cfg = hashlib.sha256(canonical_json(config.to_dict()) + b"\n").hexdigest()
        reg = hashlib.sha256(canonical_json(registry.to_json()) + b"\n").hexdigest()
        if board.genesis.data != genesis_data(config.name, cfg, reg):
            c.failures.append("genesis record does not bind this configuration and key registry")
    if digests is None:
        c.notes.append("no out-of-band digest list supplied")
    c.failures.extend(verify_index(board))
    prev = ""
    for rec in board.commits:
        if rec.cid <= prev:
            c.failures.append(f"commit {rec.cid} does not follow {prev}")
        prev = rec.cid
    return c


def _check_inclusion(board: PublicBoard, view: BoardView, digests: list[dict] | None) -> Check:
    c = Check("inclusion-sweep")
    for s in sorted(view.serials):
        res = verify_inclusion(board, s, None, digests)
        c.checked += 1
        if res.status != "included":
            c.failures.append(f"{s}: {res.status} ({res.detail})")
    return c


def _check_timeliness(board: PublicBoard) -> Check:
    c = Check("timeliness")
    for cid, it in board.items():
        c.checked += 1
        ct = it.get("commitTime")
        if ct == cid:
            continue
        if ct is not None and ct < cid:
            c.failures.append(f"{_label(cid, it)}: accepted in {ct} but published late in {cid} (a commit was missed)")
        else:
            c.failures.append(f"{_label(cid, it)}: commitTime {ct} is after the commit that published it")
    return c


def _check_items(board: PublicBoard, view: BoardView, config: ElectionConfig, registry: Registry) -> Check:
    c = Check("items")
    joint = registry.wbb_joint_key
    gen_audited = _gen_audited_serials(view)
    retired = _retired_serials(view)
    seen: dict[str, dict] = {}
    for cid, it in board.items():
        c.checked += 1
        msg = it.get("msg", {})
        label = _label(cid, it) if well_formed(msg) else f"{cid} malformed item"
        if not well_formed(msg):
            c.failures.append(label)
            continue
        kind = msg["type"]
        sender = msg["boothID"]
        vk = registry.key(sender)
        if vk is None:
            c.failures.append(f"{label}: sender {sender} is not registered")
            continue
        want = ROLE_FOR.get(kind)
        if want is not None and registry.role(sender) != want:
            c.failures.append(f"{label}: sender {sender} has role {registry.role(sender)}, needs {want}")
        if not check_booth_sig(msg, vk):
            c.failures.append(f"{label}: sender signature does not verify")
        if kind == "file" and (msg["desc"].startswith(("mix-transcript:", "decryption:", "printer-retired"))) and registry.role(sender) != "official":
            c.failures.append(f"{label}: {msg['desc']} may only be posted by an election official")
        if "serialNo" not in msg:
            continue
        s = msg["serialNo"]
        st = seen.setdefault(s, {"pod": None, "start": 0, "terminal": [], "cancel": 0})
        district = msg["district"]
        if kind != "pod":
            if st["pod"] is None:
                c.failures.append(f"{label}: no pod precedes it")
                continue
            if district != st["pod"]:
                c.failures.append(f"{label}: district {district} differs from the pod's {st['pod']}")
            try:
                sig_ok = bls_verify(joint, serial_sig_payload(s, district), bytes.fromhex(msg["serialSig"]))
            except ValueError:
                sig_ok = False
            if not sig_ok:
                c.failures.append(f"{label}: serialSig does not verify")
        if kind == "pod":
            if st["pod"] is not None:
                c.failures.append(f"{label}: second pod for the serial")
                continue
            st["pod"] = district
            if s.split(":")[0] != sender:
                c.failures.append(f"{label}: issued by {sender}, not the serial's printer")
            if s not in view.ballots:
                c.failures.append(f"{label}: serial is not in any published ballot table")
            if s in gen_audited:
                c.failures.append(f"{label}: serial was opened in the generation audit and must not be issued")
            if s in retired and cid >= retired[s]:
                c.failures.append(f"{label}: serial was retired in {retired[s]}")
        elif kind == "startevm":
            st["start"] += 1
            if st["start"] > 1:
                c.failures.append(f"{label}: second session for the serial")
        elif kind in ("vote", "audit"):
            if st["terminal"]:
                both = {kind, *st["terminal"]} == {"vote", "audit"}
                c.failures.append(f"{label}: serial already has a {st['terminal'][0]}" + (" (vote and audit)" if both else ""))
            st["terminal"].append(kind)
            if kind == "vote":
                if not st["start"]:
                    c.failures.append(f"{label}: vote without a session start")
                try:
                    start_ok = bls_verify(joint, start_sig_payload(s, district), bytes.fromhex(msg["startEVMSig"]))
                except ValueError:
                    start_ok = False
                if not start_ok:
                    c.failures.append(f"{label}: startEVMSig does not verify")
                bad = check_races(msg["races"], config.race_sizes(district))
                if bad:
                    c.failures.append(f"{label}: {bad}")
            elif st["start"]:
                c.failures.append(f"{label}: audit after a voting session started")
        elif kind == "cancel":
            st["cancel"] += 1
            if registry.role(msg["cancelAuthID"]) != "cancel-authority":
                c.failures.append(f"{label}: {msg['cancelAuthID']} is not a cancellation authority")
            else:
                try:
                    ok = verify(registry.key(msg["cancelAuthID"]), cancel_auth_payload(s), bytes.fromhex(msg["cancelAuthSig"]))
                except ValueError:
                    ok = False
                if not ok:
                    c.failures.append(f"{label}: cancellation authority signature does not verify")
    c.failures.extend(view.problems)
    return c


def _gen_audit_files(view: BoardView) -> list:
    return [f for f in view.files("ballotauditcommit") if f.doc is not None and f.doc.get("kind") == "gen-audit"]


def _gen_audited_serials(view: BoardView) -> set[str]:
    return {r["serial"] for f in _gen_audit_files(view) for r in f.doc.get("records", [])}


def _retired_serials(view: BoardView) -> dict[str, str]:
    out = {}
    for f in view.files("file", "printer-retired"):
        if f.doc is not None:
            for s in f.doc.get("retiredSerials", []):
                out.setdefault(s, f.cid)
    return out


def _check_gen_audits(view: BoardView, config: ElectionConfig, registry: Registry) -> Check:
    c = Check("gen-audits")
    layout, pk = config.layout, registry.election_key
    tables = {f.sender: f for f in view.files("ballotgencommit")}
    audits: dict[str, list] = {}
    for f in _gen_audit_files(view):
        audits.setdefault(f.sender, []).append(f)
    for p in config.printers:
        gen = tables.get(p.id)
        if gen is None:
            c.failures.append(f"printer {p.id}: no ballot table published")
            continue
        crts = view.crts.get(p.id, {})
        if sorted(crts) != list(range(1, config.rgs_count + 1)):
            c.failures.append(f"printer {p.id}: commitment tables present from servers {sorted(crts)}, need 1..{config.rgs_count}")
            continue
        got = audits.get(p.id, [])
        if len(got) != 1:
            c.failures.append(f"printer {p.id}: expected one generation audit, found {len(got)}")
            continue
        doc = got[0].doc
        try:
            sel_sig = bytes.fromhex(doc["selectionSignature"])
        except (KeyError, ValueError):
            sel_sig = b""
        if not bls_verify(registry.wbb_joint_key, peer_payload(gen.item), sel_sig):
            c.failures.append(f"printer {p.id}: audit selection signature is not the board's receipt for the ballot table")
            continue
        serials = [b["serial"] for b in gen.doc["ballots"]]
        chosen = ballotgen.select_gen_audit(hashlib.sha256(sel_sig).digest(), config.gen_audit_fraction, serials)
        records = {r["serial"]: r for r in doc.get("records", [])}
        if sorted(records) != sorted(chosen):
            c.failures.append(f"printer {p.id}: audited serials differ from the derived selection")
        ordered = [crts[g] for g in sorted(crts)]
        for s in chosen:
            c.checked += 1
            rec = records.get(s)
            if rec is None:
                c.failures.append(f"{s}: selected for audit but not opened")
                continue
            ballot = view.ballots.get(s)
            if ballot is None or any(s not in t.cells for t in ordered):
                c.failures.append(f"{s}: no published ciphertexts or commitments")
                continue
            verdict = ballotgen.verify_gen_audit(ballotgen.GenAuditRecord.from_json(rec), ordered, ballot, layout, pk)
            if not verdict.ok:
                c.failures.append(f"{s}: generation audit failed: {verdict.describe()}")
    return c


def _check_reductions(view: BoardView, config: ElectionConfig, registry: Registry) -> Check:
    c = Check("reductions")
    for s in sorted(view.serials):
        sv = view.serials[s]
        if sv.district is None or sv.first("pod") is None:
            continue
        c.checked += 1
        ballot = view.ballots.get(s)
        if ballot is None:
            c.failures.append(f"{s}: no published ciphertexts")
            continue
        bad = ballotgen.check_reduction(ballot, sv.reductions, config.layout, config.race_sizes(sv.district), registry.election_key)
        if bad:
            c.failures.append(f"{s}: {bad}")
    return c


def _printed(config: ElectionConfig, district: str, pi) -> str:
    reduced = ballotgen.reduced_permutation(pi, config.layout, config.race_sizes(district))
    names = {r: list(config.race_candidates(district, r)) for r in RACES}
    return permutation_string(ballotgen.printed_order(reduced, names))


def _check_confirmations(view: BoardView, config: ElectionConfig, registry: Registry) -> Check:
    c = Check("confirmations")
    layout, pk = config.layout, registry.election_key
    deferred: dict[str, dict] = {}
    for f in view.files("ballotauditcommit"):
        if f.doc is not None and f.doc.get("kind") == "confirmation-openings":
            for r in f.doc.get("records", []):
                deferred.setdefault(r["serial"], r)
    for s in sorted(view.serials):
        sv = view.serials[s]
        hit = sv.first("audit")
        if hit is None:
            continue
        c.checked += 1
        cid, it = hit
        msg, derived = it["msg"], it.get("derived", {})
        district = msg["district"]
        if derived.get("result") == "failure":
            c.failures.append(f"{s}: the board could not confirm the ballot ({derived.get('reason', 'no reason given')})")
            continue
        if msg["permutation"] != derived.get("reducedPermutation"):
            c.failures.append(f"{s}: printed candidate order differs from the committed ballot")
        ballot = view.ballots.get(s)
        crts = view.crts.get(s.split(":")[0], {})
        if ballot is None or sorted(crts) != list(range(1, config.rgs_count + 1)):
            c.failures.append(f"{s}: ballot tables unavailable for the recheck")
            continue
        rows = [crts[g].cells[s] for g in sorted(crts)]
        try:
            witness = json.loads(msg["commitWitness"])
        except ValueError:
            c.failures.append(f"{s}: malformed witness")
            continue
        if layout.alg2:
            try:
                pi = [0] * layout.n
                for race, _ in layout.sizes:
                    for k, p in zip(layout.section(race), witness["pi"][race]):
                        pi[k] = int(p) - 1
                ok = ballot.commit_pi is not None and verify_commitment(
                    ballot.commit_pi, ballotgen.encode_pi(layout, pi), bytes.fromhex(witness["piWitness"])
                )
            except (KeyError, ValueError, TypeError):
                ok = False
            if not ok:
                c.failures.append(f"{s}: permutation commitment does not open")
                continue
            rec = deferred.get(s)
            if rec is None:
                c.failures.append(f"{s}: deferred openings were never published")
            else:
                verdict, full_pi = ballotgen.verify_openings_against(
                    ballotgen.GenAuditRecord.from_json(rec).openings, rows, ballot, layout, pk, sorted(crts)
                )
                if not verdict.ok:
                    c.failures.append(f"{s}: deferred openings fail: {verdict.describe()}")
                elif list(full_pi) != pi:
                    c.failures.append(f"{s}: deferred openings contradict the permutation opened at confirmation")
        else:
            try:
                openings = [[(bytes.fromhex(r), bytes.fromhex(x)) for r, x in row] for row in witness["openings"]]
            except (KeyError, ValueError, TypeError):
                openings = None
            verdict, pi = ballotgen.verify_openings_against(openings, rows, ballot, layout, pk, sorted(crts))
            if not verdict.ok:
                c.failures.append(f"{s}: openings fail: {verdict.describe()}")
                continue
        if _printed(config, district, pi) != derived.get("reducedPermutation"):
            c.failures.append(f"{s}: board's confirmed order does not match the recomputed ballot")
    return c


def _check_receipts(board: PublicBoard, receipts: list[dict] | None, digests: list[dict] | None) -> Check:
    c = Check("receipts")
    if receipts is None:
        c.notes.append("no receipts supplied")
        return c
    for r in receipts:
        c.checked += 1
        v = check_receipt(r, board, digests)
        s = r.get("serialNo", "?")
        if v.status == "signed-but-missing":
            c.failures.append(f"{s}: signed receipt but the vote is not on the board ({v.detail})")
        elif v.status == "unsigned-claim":
            c.notes.append(f"{s}: receipt claim without a valid board signature ({v.detail})")
    return c


@dataclass
class _MixState:
    transcripts: dict[str, mixnet.MixTranscript] = field(default_factory=dict)
    decryptions: dict[str, mixnet.DecryptedBatch] = field(default_factory=dict)
    closing: str | None = None


def _check_mix(board: PublicBoard, view: BoardView, config: ElectionConfig, registry: Registry, state: _MixState) -> Check:
    c = Check("mix")
    docs: dict[str, dict] = {}
    for f in view.files("file", "mix-transcript:"):
        key = f.desc.split(":", 1)[1]
        if key in docs:
            c.failures.append(f"batch {key}: more than one transcript published")
            continue
        docs[key] = f.doc or {}
    if not docs:
        if view.votes():
            c.failures.append("votes are on the board but no mix transcript was published")
        return c
    closings = {d.get("closingCID") for d in docs.values()}
    seeds = {d.get("padSeed") for d in docs.values()}
    if len(closings) != 1 or len(seeds) != 1:
        c.failures.append("transcripts disagree on the closing commit or padding seed")
        return c
    closing = closings.pop()
    rec = board.commit(closing) if closing else None
    if rec is None:
        c.failures.append(f"closing commit {closing} is not on the board")
        return c
    state.closing = closing
    if seeds.pop() != rec.hash.hex():
        c.failures.append("padding seed is not the closing commit's hash")
    for cid, it in board.items():
        if cid > closing and it["msg"]["type"] in ("pod", "startevm", "vote", "cancel"):
            c.failures.append(f"{_label(cid, it)}: published after the closing commit")
    try:
        expected = mixnet.build_mix_input(view.votes(), view.ballots, view.reductions(), config, registry.election_key, rec.hash)
    except IntegrityError as exc:
        c.failures.append(f"mix input cannot be rebuilt: {exc}")
        expected = {}
    if set(expected) != set(docs):
        c.failures.append(f"batches published {sorted(docs)}, votes on the board give {sorted(expected)}")
    for key in sorted(docs):
        c.checked += 1
        try:
            tr = mixnet.MixTranscript.from_json(docs[key]["transcript"])
        except (KeyError, ValueError, TypeError) as exc:
            c.failures.append(f"batch {key}: malformed transcript ({exc})")
            continue
        state.transcripts[key] = tr
        want = expected.get(key)
        if want is not None and (tr.batch.rows != want.rows or tr.batch.sources != want.sources or tr.batch.length != want.length):
            c.failures.append(f"batch {key}: mix input differs from the votes and padding on the board")
        c.failures.extend(f"batch {key}: {f}" for f in mixnet.verify_rpc(tr, registry.election_key))
        c.notes.extend(f"batch {key}: {w}" for w in tr.batch.warnings)
    return c


def _check_decryption(view: BoardView, config: ElectionConfig, registry: Registry, state: _MixState) -> Check:
    c = Check("decryption")
    seen = set()
    for f in view.files("file", "decryption:"):
        key = f.desc.split(":", 1)[1]
        if key in seen:
            c.failures.append(f"batch {key}: more than one decryption published")
            continue
        seen.add(key)
        try:
            db = mixnet.DecryptedBatch.from_json(f.doc)
        except (KeyError, TypeError) as exc:
            c.failures.append(f"batch {key}: malformed decryption ({exc})")
            continue
        tr = state.transcripts.get(key)
        if tr is None:
            c.failures.append(f"batch {key}: decryption without a mix transcript")
            continue
        c.checked += 1
        c.failures.extend(mixnet.verify_decryption(db, tr.output, registry.decryption_keys, config.wbb_threshold, config))
        for o in db.outputs:
            if o.get("flag") == "unknown element":
                c.failures.append(f"output {o['number']}: decrypts to something that is not a candidate")
            elif o.get("flag") == "empty":
                c.notes.append(f"output {o['number']}: no preferences")
        state.decryptions[key] = db
    missing = set(state.transcripts) - seen
    c.failures.extend(f"batch {k}: mixed but never decrypted" for k in sorted(missing))
    return c


def _check_reconciliation(view: BoardView, config: ElectionConfig, markoff: dict | None, count: dict | None, state: _MixState) -> Check:
    c = Check("reconciliation")
    votes = Counter(v.district for v in view.votes())
    if markoff is None:
        c.notes.append("no markoff counts supplied")
    else:
        for d in sorted(x.name for x in config.districts):
            c.checked += 1
            marked = markoff.get(d, 0)
            if isinstance(marked, dict):
                marked = marked.get("vvote", 0)
            if marked != votes.get(d, 0):
                c.failures.append(f"{d}: {marked} voters marked off for electronic voting, {votes.get(d, 0)} votes on the board")
    rows: Counter = Counter()
    for v in view.votes():
        for race in v.races:
            rows[config.batch_key(v.district, race)] += 1
    for key, db in sorted(state.decryptions.items()):
        if len(db.outputs) != rows.get(key, 0):
            c.failures.append(f"batch {key}: {len(db.outputs)} outputs for {rows.get(key, 0)} votes")
    if count is not None:
        outputs = {o["number"]: o["preferences"] for db in state.decryptions.values() for o in db.outputs}
        c.checked += len(count)
        c.failures.extend(reconcile_outputs(outputs, count))
    return c


def _check_disputes(view: BoardView) -> Check:
    c = Check("disputes")
    for f in view.files("file", "dispute:"):
        c.checked += 1
        doc = f.doc or {}
        c.failures.append(f"{f.cid}: {f.desc} raised by {f.sender} for {doc.get('serialNo', '?')}")
    return c


def _check_replacement(view: BoardView, registry: Registry) -> Check:
    c = Check("replacement")
    retired = _retired_serials(view)
    for f in view.files("file", "printer-retired"):
        c.checked += 1
        doc = f.doc or {}
        c.notes.append(f"{f.cid}: printer {doc.get('printerID')} retired, {len(doc.get('retiredSerials', []))} unissued serials withdrawn")
        if doc.get("stolen"):
            exposed = doc.get("issuedUndeleted", [])
            c.notes.append(f"printer {doc.get('printerID')} reported stolen: privacy review for {exposed or 'no'} issued ballots")
    for s in sorted(retired):
        if view.serials.get(s) and view.serials[s].first("vote") is not None:
            c.failures.append(f"{s}: retired serial appears as voted")
    return c


# -- entry points ----------------------------------------------------------------------------


def verify_election(
    board_dir: str | Path,
    config: ElectionConfig,
    registry: Registry,
    markoff: dict | None = None,
    digests: list[dict] | None = None,
    receipts: list[dict] | None = None,
    count: dict | None = None,
) -> VerificationReport:
    board = PublicBoard(board_dir, registry.wbb_joint_key)
    checks = [_check_chain(board, config, registry, digests)]
    if board.genesis is None:
        return VerificationReport(checks + [Check(n, ["board has no genesis record"]) for n in CHECKS[1:]])
    view = load_view(board, config, registry)
    state = _MixState()
    checks += [
        _check_inclusion(board, view, digests),
        _check_timeliness(board),
        _check_items(board, view, config, registry),
        _check_gen_audits(view, config, registry),
        _check_reductions(view, config, registry),
        _check_confirmations(view, config, registry),
        _check_receipts(board, receipts, digests),
        _check_mix(board, view, config, registry, state),
        _check_decryption(view, config, registry, state),
        _check_reconciliation(view, config, markoff, count, state),
        _check_disputes(view),
        _check_replacement(view, registry),
    ]
    return VerificationReport(checks)


def _load_json(p: Path):
    return json.loads(p.read_text()) if p.exists() else None


def verify_run_dir(run_dir: str | Path) -> VerificationReport:
    """Verify using only ``<run_dir>/public``."""
    pub = Path(run_dir) / "public"
    return verify_public(
        pub / "board",
        pub / "config.json",
        pub / "markoff.json",
        pub / "digests.txt",
        pub / "receipts.json",
        pub / "count.json",
        pub / "registry.json",
    )


def verify_public(
    board_dir: str | Path,
    config_path: str | Path,
    markoff_path: str | Path | None = None,
    digests_path: str | Path | None = None,
    receipts_path: str | Path | None = None,
    count_path: str | Path | None = None,
    registry_path: str | Path | None = None,
) -> VerificationReport:
    board_dir = Path(board_dir)
    config = ElectionConfig.load(config_path)
    reg_path = Path(registry_path) if registry_path else Path(config_path).with_name("registry.json")
    registry = Registry.from_json(json.loads(reg_path.read_text()))
    digests = None
    if digests_path is not None and Path(digests_path).exists():
        digests = [json.loads(line) for line in Path(digests_path).read_text().splitlines() if line.strip()]
    return verify_election(
        board_dir,
        config,
        registry,
        _load_json(Path(markoff_path)) if markoff_path else None,
        digests,
        _load_json(Path(receipts_path)) if receipts_path else None,
        _load_json(Path(count_path)) if count_path else None,
    )
