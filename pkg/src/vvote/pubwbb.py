"""The public bulletin board: a directory of hash-chained, threshold-signed commits.

Layout under the board root::

    genesis.json                    election identity, its hash and signature
    commits/<seq>_<cid>/data.json   canonical item list for the commit
    commits/<seq>_<cid>/prior.txt   hex of the previous commit's hash
    commits/<seq>_<cid>/hash.txt    hex of H(prior hash || data)
    commits/<seq>_<cid>/signature.txt
    files/<sha256>                  bodies of file-type submissions
    index.json                      serial -> CIDs that mention it
    digests.txt                     one broadcast-digest line per commit

Everything is plain text; the verifier needs nothing else.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from vvote.crypto.encoding import canonical_json
from vvote.crypto.signatures import bls_verify
from vvote.messages import STORE_KINDS, item_key
from vvote.privwbb import commit_hash


@dataclass(frozen=True)
class CommitRecord:
    cid: str
    prior: bytes
    data: dict
    hash: bytes
    signature: bytes

    def recompute(self) -> bytes:
        return commit_hash(self.prior, self.data)

    def digest_line(self) -> str:
        return canonical_json({"cid": self.cid, "hash": self.hash.hex(), "signature": self.signature.hex()}).decode()


def genesis_data(election: str, config_digest: str, registry_digest: str) -> dict:
    return {"cid": "genesis", "election": election, "config": config_digest, "registry": registry_digest, "items": []}


class BoardError(Exception):
    pass


@dataclass
class InclusionResult:
    status: str  # "included", "absent", "corrupt"
    cid: str | None = None
    detail: str = ""


@dataclass
class ChainVerdict:
    ok: bool
    failures: list[str] = field(default_factory=list)
    first_bad: int | None = None


class PublicBoard:
    """Single writer, many readers. Commits are append-only files."""

    def __init__(self, root: str | Path, joint_key: bytes) -> None:
        self.root = Path(root)
        self.joint_key = joint_key
        self.commits: list[CommitRecord] = []
        self.genesis: CommitRecord | None = None
        self.index: dict[str, list[str]] = {}
        if (self.root / "genesis.json").exists():
            self._load()

    # -- writing -------------------------------------------------------------

    @property
    def head(self) -> bytes:
        if self.commits:
            return self.commits[-1].hash
        if self.genesis is None:
            raise BoardError("board has no genesis record")
        return self.genesis.hash

    def write_genesis(self, data: dict, signature: bytes) -> CommitRecord:
        h = commit_hash(b"", data)
        if not bls_verify(self.joint_key, h, signature):
            raise BoardError("genesis signature does not verify")
        rec = CommitRecord("genesis", b"", data, h, signature)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "commits").mkdir(exist_ok=True)
        (self.root / "files").mkdir(exist_ok=True)
        (self.root / "genesis.json").write_text(
            json.dumps({"data": data, "hash": h.hex(), "signature": signature.hex()}, indent=1, sort_keys=True) + "\n"
        )
        (self.root / "digests.txt").write_text(rec.digest_line() + "\n")
        self._write_index()
        self.genesis = rec
        return rec

    def publish(self, record: CommitRecord, bodies: dict[str, bytes] | None = None) -> bool:
        """Append ``record``; returns False when it is an identical re-publication."""
        for c in self.commits:
            if c.hash == record.hash:
                if c == record:
                    return False
                raise BoardError("conflicting record with an existing hash")
        if record.prior != self.head:
            raise BoardError(f"commit {record.cid}: prior hash does not match the board head")
        if record.recompute() != record.hash:
            raise BoardError(f"commit {record.cid}: hash does not match data")
        if not bls_verify(self.joint_key, record.hash, record.signature):
            raise BoardError(f"commit {record.cid}: threshold signature does not verify")
        bodies = bodies or {}
        for it in record.data["items"]:
            m = it["msg"]
            if m["type"] in STORE_KINDS:
                b = bodies.get(m["digest"])
                if b is None and not (self.root / "files" / m["digest"]).exists():
                    raise BoardError(f"commit {record.cid}: body for {m['digest']} missing")
                if b is not None:
                    if hashlib.sha256(b).hexdigest() != m["digest"]:
                        raise BoardError("file body does not match its digest")
                    (self.root / "files" / m["digest"]).write_bytes(b)
        seq = len(self.commits) + 1
        d = self.root / "commits" / f"{seq:04d}_{record.cid}"
        d.mkdir(parents=True)
        (d / "data.json").write_bytes(canonical_json(record.data) + b"\n")
        (d / "prior.txt").write_text(record.prior.hex() + "\n")
        (d / "hash.txt").write_text(record.hash.hex() + "\n")
        (d / "signature.txt").write_text(record.signature.hex() + "\n")
        with open(self.root / "digests.txt", "a") as f:
            f.write(record.digest_line() + "\n")
        self.commits.append(record)
        for it in record.data["items"]:
            s = it["msg"].get("serialNo")
            if s is not None and record.cid not in self.index.setdefault(s, []):
                self.index[s].append(record.cid)
        self._write_index()
        return True

    def _write_index(self) -> None:
        (self.root / "index.json").write_text(json.dumps(self.index, indent=0, sort_keys=True) + "\n")

    # -- reading -------------------------------------------------------------

    def _load(self) -> None:
        g = json.loads((self.root / "genesis.json").read_text())
        self.genesis = CommitRecord("genesis", b"", g["data"], bytes.fromhex(g["hash"]), bytes.fromhex(g["signature"]))
        self.commits = list(read_commits(self.root))
        idx = self.root / "index.json"
        self.index = json.loads(idx.read_text()) if idx.exists() else {}

    def items(self) -> Iterator[tuple[str, dict]]:
        for c in self.commits:
            for it in c.data["items"]:
                yield c.cid, it

    def file(self, digest: str) -> bytes | None:
        p = self.root / "files" / digest
        return p.read_bytes() if p.exists() else None

    def commit(self, cid: str) -> CommitRecord | None:
        for c in self.commits:
            if c.cid == cid:
                return c
        return None


def read_commits(root: Path) -> Iterator[CommitRecord]:
    cdir = root / "commits"
    if not cdir.exists():
        return
    for d in sorted(p for p in cdir.iterdir() if p.is_dir()):
        cid = d.name.split("_", 1)[1]
        try:
            data = json.loads((d / "data.json").read_text())
            prior = bytes.fromhex((d / "prior.txt").read_text().strip())
            h = bytes.fromhex((d / "hash.txt").read_text().strip())
            sig = bytes.fromhex((d / "signature.txt").read_text().strip())
        except (OSError, ValueError):
            data, prior, h, sig = {"cid": cid, "items": [], "unreadable": True}, b"", b"", b""
        yield CommitRecord(cid, prior, data, h, sig)


def read_digests(root: Path) -> list[dict]:
    p = Path(root) / "digests.txt"
    if not p.exists():
        return []
    return [json.loads(line) for line in p.read_text().splitlines() if line.strip()]


def verify_chain(board: PublicBoard, digests: list[dict] | None = None) -> ChainVerdict:
    """Walk from genesis; report every broken link, hash or signature.

    ``digests`` is the out-of-band list of broadcast digests; when given,
    every commit must appear there with the same hash.
    """
    failures: list[str] = []
    first_bad = None
    g = board.genesis
    if g is None:
        return ChainVerdict(False, ["no genesis record"], 0)
    if commit_hash(b"", g.data) != g.hash or not bls_verify(board.joint_key, g.hash, g.signature):
        failures.append("genesis: hash or signature invalid")
        first_bad = 0
    prior = g.hash
    for seq, c in enumerate(board.commits, start=1):
        problems = []
        if c.data.get("cid") != c.cid:
            problems.append("directory CID differs from data CID")
        if c.prior != prior:
            problems.append("prior hash does not link to the previous commit")
        if c.recompute() != c.hash:
            problems.append("hash does not match data")
        if not bls_verify(board.joint_key, c.hash, c.signature):
            problems.append("threshold signature invalid")
        if problems:
            failures.append(f"commit {seq} ({c.cid}): " + "; ".join(problems))
            if first_bad is None:
                first_bad = seq
        prior = c.hash
    if digests is not None:
        published = {d["cid"]: d["hash"] for d in digests}
        for seq, c in enumerate(board.commits, start=1):
            if published.get(c.cid) != c.hash.hex():
                failures.append(f"commit {seq} ({c.cid}): not matched by the broadcast digest")
                if first_bad is None:
                    first_bad = seq
        if len([d for d in digests if d["cid"] != "genesis"]) != len(board.commits):
            failures.append("broadcast digest lists a different number of commits")
    return ChainVerdict(not failures, failures, first_bad)


def verify_inclusion(board: PublicBoard, serial: str, predicate=None, digests: list[dict] | None = None) -> InclusionResult:
    """Index lookup, then re-hash and signature check of the located commit.

    ``predicate(item) -> bool`` selects the item of interest (default: any
    item for the serial).
    """
    cids = board.index.get(serial, [])
    found_any = False
    for cid in cids:
        c = board.commit(cid)
        if c is None:
            return InclusionResult("corrupt", cid, "index names a commit that does not exist")
        if c.recompute() != c.hash or not bls_verify(board.joint_key, c.hash, c.signature):
            return InclusionResult("corrupt", cid, "commit body does not match its signed hash")
        if digests is not None and {d["cid"]: d["hash"] for d in digests}.get(cid) != c.hash.hex():
            return InclusionResult("corrupt", cid, "commit hash differs from the broadcast digest")
        hits = [it for it in c.data["items"] if it["msg"].get("serialNo") == serial]
        if not hits:
            return InclusionResult("corrupt", cid, "index entry not backed by commit contents")
        found_any = True
        if predicate is None or any(predicate(it) for it in hits):
            return InclusionResult("included", cid)
    # index completeness: an unindexed mention is corruption, not absence
    for c in board.commits:
        if c.cid not in cids and any(it["msg"].get("serialNo") == serial for it in c.data["items"]):
            return InclusionResult("corrupt", c.cid, "commit mentions serial missing from index")
    return InclusionResult("absent", None, "serial present but no matching item" if found_any else "")


def verify_index(board: PublicBoard) -> list[str]:
    """Soundness and completeness of the serial index."""
    truth: dict[str, list[str]] = {}
    for cid, it in board.items():
        s = it["msg"].get("serialNo")
        if s is not None and cid not in truth.setdefault(s, []):
            truth[s].append(cid)
    problems = []
    for s in sorted(set(truth) | set(board.index)):
        if sorted(truth.get(s, [])) != sorted(board.index.get(s, [])):
            problems.append(f"index entry for {s} is {board.index.get(s, [])}, commits say {truth.get(s, [])}")
    return problems


def item_in(board: PublicBoard, item: dict) -> bool:
    k = item_key(item)
    return any(item_key(it) == k for _, it in board.items())
