"""Re-encryption mixnet with randomized partial checking.

A vote in one race becomes a row: the ballot's own candidate ciphertexts
ordered by rank, padded with encryptions of the null element so that every
row in a batch has the same length. Each mix server applies two shuffle
stages and commits to the links on both sides of its middle batch. After
all servers have committed, a joint challenge opens exactly one side of
each middle row.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from vvote import ballotgen
from vvote.ballotgen import GenericBallot, Reduction
from vvote.config import ElectionConfig, Layout, base_id
from vvote.crypto import elgamal, group
from vvote.crypto.commit import commit, verify_commitment
from vvote.crypto.drbg import Drbg
from vvote.crypto.elgamal import Ciphertext
from vvote.crypto.encoding import canonical_json
from vvote.crypto.hashing import NULL_ELEMENT
from vvote.crypto.threshold import DecryptionShare, combine_decrypt, partial_decrypt, verify_share
from vvote.errors import IntegrityError, ParameterError, ThresholdError

Row = list[Ciphertext]


def _rows_json(rows: Sequence[Row]) -> list[list[str]]:
    return [[c.hex() for c in r] for r in rows]


def _rows_from(d: Sequence[Sequence[str]]) -> list[Row]:
    return [[Ciphertext.from_hex(x) for x in r] for r in d]


# -- input ---------------------------------------------------------------------------


@dataclass
class MixBatch:
    key: str
    length: int
    rows: list[Row]
    sources: list[str]  # serial of each input row, in row order
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"key": self.key, "length": self.length, "rows": _rows_json(self.rows), "sources": self.sources, "warnings": self.warnings}

    @classmethod
    def from_json(cls, d: dict) -> "MixBatch":
        return cls(d["key"], int(d["length"]), _rows_from(d["rows"]), list(d["sources"]), list(d.get("warnings", [])))


@dataclass(frozen=True)
class CastVote:
    serial: str
    district: str
    races: dict[str, list[int]]  # permuted ranks, printed order


def pad_randomness(pad_seed: bytes, batch: str, row: int, slot: int) -> int:
    return group.hash_to_scalar("vvote/pad", pad_seed, batch.encode(), str(row).encode(), str(slot).encode()) or 1


def vote_row(ballot: GenericBallot, reductions: Sequence[Reduction], layout: Layout, race: str, ranks: Sequence[int]) -> Row:
    """Ciphertexts of the ranked candidates, most preferred first."""
    used = ballotgen.used_positions(layout, race, reductions)
    if len(used) != len(ranks):
        raise IntegrityError(f"{ballot.serial}: {len(ranks)} ranks for {len(used)} printed candidates")
    off = layout.offset(race)
    ranked = sorted((r, p) for p, r in enumerate(ranks) if r)
    return [ballot.cts[off + used[p]] for _, p in ranked]


def build_mix_input(
    votes: Iterable[CastVote],
    ballots: Mapping[str, GenericBallot],
    reductions: Mapping[str, Sequence[Reduction]],
    config: ElectionConfig,
    pk: bytes,
    pad_seed: bytes,
) -> dict[str, MixBatch]:
    """Partition votes into batches and pad each batch to its longest row.

    Batches are keyed ``race/district`` for LA and ``race/region`` for the
    council races, so ATL and BTL votes of one region mix separately.
    """
    raw: dict[str, list[tuple[str, Row]]] = {}
    layout = config.layout
    for v in sorted(votes, key=lambda v: v.serial):
        ballot = ballots.get(v.serial)
        if ballot is None:
            raise IntegrityError(f"vote for {v.serial} has no published ballot ciphertexts")
        for race, ranks in sorted(v.races.items()):
            row = vote_row(ballot, reductions.get(v.serial, ()), layout, race, ranks)
            raw.setdefault(config.batch_key(v.district, race), []).append((v.serial, row))
    out = {}
    for key in sorted(raw):
        entries = raw[key]
        length = max(len(r) for _, r in entries)
        rows = []
        for i, (_, r) in enumerate(entries):
            pads = [pad_randomness(pad_seed, key, i, j) for j in range(len(r), length)]
            rows.append(list(r) + elgamal.encrypt_batch(pk, [NULL_ELEMENT] * len(pads), pads))
        warnings = ["small anonymity set: single row"] if len(rows) == 1 else []
        if length == 0:
            warnings.append("no preferences in batch")
        out[key] = MixBatch(key, length, rows, [s for s, _ in entries], warnings)
    return out


def check_padding(batch: MixBatch, unpadded: Sequence[Row], pk: bytes, pad_seed: bytes) -> str | None:
    """Recompute the padding of ``batch`` from the unpadded rows; None when it matches."""
    if len(unpadded) != len(batch.rows):
        return "row count differs"
    for i, (r, full) in enumerate(zip(unpadded, batch.rows)):
        pads = [pad_randomness(pad_seed, batch.key, i, j) for j in range(len(r), batch.length)]
        want = list(r) + elgamal.encrypt_batch(pk, [NULL_ELEMENT] * len(pads), pads)
        if want != full:
            return f"row {i} differs from its vote and published padding"
    return None


# -- shuffling -------------------------------------------------------------------------


def shuffle_stage(pk: bytes, rows: Sequence[Row], perm: Sequence[int], rands: Sequence[Sequence[int]]) -> list[Row]:
    """Row ``i`` is re-encrypted with ``rands[i]`` and lands at ``perm[i]``."""
    out: list[Row] = [None] * len(rows)  # type: ignore[list-item]
    flat = [c for r in rows for c in r]
    flat_r = [x for rr in rands for x in rr]
    re = elgamal.reencrypt_batch(pk, flat, flat_r) if flat else []
    w = len(rows[0]) if rows else 0
    for i in range(len(rows)):
        out[perm[i]] = re[i * w : (i + 1) * w]
    return out


def _link_message(index: int) -> bytes:
    return str(index).encode()


@dataclass
class ServerCommitment:
    """What one server publishes before challenges exist."""

    server: int
    mid: list[Row]
    out: list[Row]
    left: list[bytes]  # per middle row: commitment to the input row it came from
    right: list[bytes]  # per middle row: commitment to the output row it went to
    contribution_commit: bytes

    def to_json(self) -> dict:
        return {
            "server": self.server,
            "mid": _rows_json(self.mid),
            "out": _rows_json(self.out),
            "left": [x.hex() for x in self.left],
            "right": [x.hex() for x in self.right],
            "contributionCommit": self.contribution_commit.hex(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "ServerCommitment":
        return cls(
            int(d["server"]),
            _rows_from(d["mid"]),
            _rows_from(d["out"]),
            [bytes.fromhex(x) for x in d["left"]],
            [bytes.fromhex(x) for x in d["right"]],
            bytes.fromhex(d["contributionCommit"]),
        )


@dataclass
class LinkOpening:
    row: int  # middle row
    side: str  # "left" or "right"
    index: int  # input row (left) or output row (right)
    witness: bytes
    randomness: list[int]

    def to_json(self) -> dict:
        return {"row": self.row, "side": self.side, "index": self.index, "witness": self.witness.hex(), "randomness": [format(x, "x") for x in self.randomness]}

    @classmethod
    def from_json(cls, d: dict) -> "LinkOpening":
        return cls(int(d["row"]), d["side"], int(d["index"]), bytes.fromhex(d["witness"]), [int(x, 16) for x in d["randomness"]])


class MixServer:
    """One mix server's secret state for one batch."""

    def __init__(self, index: int, rng: Drbg, identity: bool = False) -> None:
        self.index = index
        self._rng = rng
        self.identity = identity  # test mode: identity permutations, zero randomness
        self.substitute: set[int] = set()  # fault hook: output rows replaced after shuffling
        self._secret: dict | None = None

    def mix(self, pk: bytes, rows: Sequence[Row]) -> ServerCommitment:
        m = len(rows)
        w = len(rows[0]) if rows else 0
        rng = self._rng
        p1 = list(range(m)) if self.identity else rng.permutation(m)
        p2 = list(range(m)) if self.identity else rng.permutation(m)
        r1 = [[0 if self.identity else group.random_scalar(rng) for _ in range(w)] for _ in range(m)]
        r2 = [[0 if self.identity else group.random_scalar(rng) for _ in range(w)] for _ in range(m)]
        mid = shuffle_stage(pk, rows, p1, r1)
        out = shuffle_stage(pk, mid, p2, r2)
        for k in sorted(self.substitute):
            if 0 <= k < m and w:
                out[k] = elgamal.encrypt_batch(pk, [NULL_ELEMENT] * w, [group.random_scalar(rng) for _ in range(w)])
        inv1 = [0] * m
        for i, j in enumerate(p1):
            inv1[j] = i
        wl = [rng.bytes(32) for _ in range(m)]
        wr = [rng.bytes(32) for _ in range(m)]
        left = [commit(_link_message(inv1[j]), wl[j]) for j in range(m)]
        right = [commit(_link_message(p2[j]), wr[j]) for j in range(m)]
        contribution, cw = rng.bytes(32), rng.bytes(32)
        self._secret = {"inv1": inv1, "p2": p2, "r1": r1, "r2": r2, "wl": wl, "wr": wr, "contribution": (contribution, cw)}
        return ServerCommitment(self.index, mid, out, left, right, commit(contribution, cw))

    def reveal_contribution(self) -> tuple[bytes, bytes]:
        assert self._secret is not None
        return self._secret["contribution"]

    def open(self, bits: Sequence[int]) -> list[LinkOpening]:
        s = self._secret
        assert s is not None
        out = []
        for j, b in enumerate(bits):
            if b == 0:
                i = s["inv1"][j]
                out.append(LinkOpening(j, "left", i, s["wl"][j], s["r1"][i]))
            else:
                out.append(LinkOpening(j, "right", s["p2"][j], s["wr"][j], s["r2"][j]))
        return out


# -- challenges ------------------------------------------------------------------------


def transcript_digest(batch: MixBatch, commitments: Sequence[ServerCommitment]) -> bytes:
    return hashlib.sha256(canonical_json({"batch": batch.to_json(), "servers": [c.to_json() for c in commitments]})).digest()


def derive_challenges(digest: bytes, contributions: Sequence[bytes], servers: Sequence[int], rows: int) -> dict[int, list[int]]:
    """One bit per middle row per server from the transcript and every server's contribution."""
    if any(c is None for c in contributions):
        raise ParameterError("a mix server's challenge contribution is missing")
    seed = hashlib.sha256(digest + b"".join(contributions)).digest()
    out = {}
    for s in servers:
        out[s] = [hashlib.sha256(seed + f"/{s}/{j}".encode()).digest()[0] & 1 for j in range(rows)]
    return out


# -- proof -------------------------------------------------------------------------------


@dataclass
class MixTranscript:
    batch: MixBatch
    commitments: list[ServerCommitment]
    contributions: list[tuple[bytes, bytes]]
    openings: dict[int, list[LinkOpening]]

    @property
    def output(self) -> list[Row]:
        return self.commitments[-1].out if self.commitments else self.batch.rows

    def to_json(self) -> dict:
        return {
            "batch": self.batch.to_json(),
            "servers": [c.to_json() for c in self.commitments],
            "contributions": [[c.hex(), w.hex()] for c, w in self.contributions],
            "openings": {str(s): [o.to_json() for o in ops] for s, ops in sorted(self.openings.items())},
        }

    @classmethod
    def from_json(cls, d: dict) -> "MixTranscript":
        return cls(
            MixBatch.from_json(d["batch"]),
            [ServerCommitment.from_json(c) for c in d["servers"]],
            [(bytes.fromhex(c), bytes.fromhex(w)) for c, w in d["contributions"]],
            {int(s): [LinkOpening.from_json(o) for o in ops] for s, ops in d["openings"].items()},
        )


def run_mix(batch: MixBatch, servers: Sequence[MixServer], pk: bytes) -> MixTranscript:
    """Chain every server over ``batch``, then derive challenges and open links."""
    rows = batch.rows
    commitments = []
    for srv in servers:
        c = srv.mix(pk, rows)
        commitments.append(c)
        rows = c.out
    contributions = [srv.reveal_contribution() for srv in servers]
    bits = derive_challenges(
        transcript_digest(batch, commitments), [c for c, _ in contributions], [s.index for s in servers], len(batch.rows)
    )
    openings = {srv.index: srv.open(bits[srv.index]) for srv in servers}
    return MixTranscript(batch, commitments, contributions, openings)


def verify_rpc(tr: MixTranscript, pk: bytes) -> list[str]:
    """Every failure as ``server S stage K row J: reason``; empty when the proof holds."""
    failures = []
    m = len(tr.batch.rows)
    w = tr.batch.length
    if len(tr.contributions) != len(tr.commitments):
        return ["contribution count differs from server count"]
    for c, (contrib, cw) in zip(tr.commitments, tr.contributions):
        if len(cw) != 32 or not verify_commitment(c.contribution_commit, contrib, cw):
            failures.append(f"server {c.server}: challenge contribution does not open its commitment")
    if failures:
        return failures
    bits = derive_challenges(
        transcript_digest(tr.batch, tr.commitments), [c for c, _ in tr.contributions], [c.server for c in tr.commitments], m
    )
    prev = tr.batch.rows
    for c in tr.commitments:
        tag = f"server {c.server}"
        if len(c.mid) != m or len(c.out) != m or any(len(r) != w for r in c.mid + c.out):
            failures.append(f"{tag}: batch shape differs")
            prev = c.out
            continue
        ops = tr.openings.get(c.server, [])
        if sorted(o.row for o in ops) != list(range(m)):
            failures.append(f"{tag}: proof must open exactly one side of every middle row")
            prev = c.out
            continue
        seen = {"left": set(), "right": set()}
        for o in ops:
            want = "left" if bits[c.server][o.row] == 0 else "right"
            if o.side != want:
                failures.append(f"{tag} row {o.row}: opened {o.side}, challenge asked {want}")
                continue
            coms = c.left if o.side == "left" else c.right
            if len(o.witness) != 32 or not verify_commitment(coms[o.row], _link_message(o.index), o.witness):
                failures.append(f"{tag} row {o.row}: {o.side} link does not open its commitment")
                continue
            if not 0 <= o.index < m or o.index in seen[o.side] or len(o.randomness) != w:
                failures.append(f"{tag} row {o.row}: malformed {o.side} opening")
                continue
            seen[o.side].add(o.index)
            if o.side == "left":
                src, dst, stage = prev[o.index], c.mid[o.row], 1
            else:
                src, dst, stage = c.mid[o.row], c.out[o.index], 2
            if w and elgamal.reencrypt_batch(pk, src, o.randomness) != dst:
                failures.append(f"{tag} stage {stage} row {o.row}: re-encryption link fails")
        prev = c.out
    return failures


# -- decryption --------------------------------------------------------------------------


@dataclass
class DecryptedBatch:
    key: str
    elements: list[list[str]]  # plaintext element hex per cell
    shares: list[list[list[dict]]]  # per row, per cell: decryption shares
    rejected: list[dict]  # {"row","cell","index"} for shares whose proofs failed
    outputs: list[dict]  # {"number", "preferences": [names], "flag"?}

    def to_json(self) -> dict:
        return {"key": self.key, "elements": self.elements, "shares": self.shares, "rejected": self.rejected, "outputs": self.outputs}

    @classmethod
    def from_json(cls, d: dict) -> "DecryptedBatch":
        return cls(d["key"], d["elements"], d["shares"], d["rejected"], d["outputs"])


def element_names(config: ElectionConfig, batch_key: str) -> dict[bytes, str]:
    """Map plaintext elements of a batch back to candidate names."""
    race, scope = batch_key.split("/", 1)
    if race == "LA":
        names = config.district(scope).candidates
    elif race == "LC_ATL":
        names = tuple(g.name for g in config.region(scope).groups)
    else:
        names = config.region(scope).btl_candidates
    return {base_id(race, k): name for k, name in enumerate(names, start=1)}


def name_rows(config: ElectionConfig, batch_key: str, elements: Sequence[Sequence[bytes]]) -> list[dict]:
    """Output rows with trailing null padding stripped and output numbers attached."""
    names = element_names(config, batch_key)
    out = []
    for i, row in enumerate(elements, start=1):
        row = list(row)
        while row and row[-1] == NULL_ELEMENT:
            row.pop()
        entry = {"number": f"{batch_key}#{i}", "preferences": [names.get(e, "?" + e.hex()[:16]) for e in row]}
        if not row:
            entry["flag"] = "empty"
        elif any(e not in names for e in row):
            entry["flag"] = "unknown element"
        out.append(entry)
    return out


def decrypt_outputs(
    config: ElectionConfig,
    batch_key: str,
    rows: Sequence[Row],
    holders: Mapping[int, int],
    verification_keys: Mapping[int, bytes],
    t: int,
    corrupt: int | None = None,
) -> DecryptedBatch:
    """Threshold-decrypt every cell with proofs from each available holder.

    ``corrupt`` names a holder whose shares are deliberately wrong (fault
    hook); its shares are caught by the proof check and skipped.
    """
    elements, shares, rejected = [], [], []
    for i, row in enumerate(rows):
        erow, srow = [], []
        for j, ct in enumerate(row):
            cell = []
            for idx in sorted(holders):
                ds = partial_decrypt(idx, holders[idx], ct)
                if idx == corrupt:
                    ds = DecryptionShare(idx, group.add(ds.value, group.GENERATOR), ds.challenge, ds.response)
                if not verify_share(verification_keys[idx], ct, ds):
                    rejected.append({"row": i, "cell": j, "index": idx})
                cell.append(ds)
            try:
                pt = combine_decrypt(ct, cell, dict(verification_keys), t)
            except ThresholdError:
                raise
            erow.append(pt.hex())
            srow.append([d.to_json() for d in cell])
        elements.append(erow)
        shares.append(srow)
    outputs = name_rows(config, batch_key, [[bytes.fromhex(x) for x in r] for r in elements])
    return DecryptedBatch(batch_key, elements, shares, rejected, outputs)


def verify_decryption(db: DecryptedBatch, rows: Sequence[Row], verification_keys: Mapping[int, bytes], t: int, config: ElectionConfig) -> list[str]:
    failures = []
    if len(db.elements) != len(rows):
        return [f"batch {db.key}: decrypted row count differs from mix output"]
    for i, (row, erow, srow) in enumerate(zip(rows, db.elements, db.shares)):
        if len(row) != len(erow) or len(srow) != len(row):
            failures.append(f"batch {db.key} row {i}: cell count differs")
            continue
        for j, (ct, e, cell) in enumerate(zip(row, erow, srow)):
            shares = [DecryptionShare.from_json(d) for d in cell]
            for ds in shares:
                vk = verification_keys.get(ds.index)
                if vk is None or not verify_share(vk, ct, ds):
                    failures.append(f"batch {db.key} row {i} cell {j}: decryption share {ds.index} has an invalid proof")
            try:
                pt = combine_decrypt(ct, shares, dict(verification_keys), t)
            except ThresholdError:
                failures.append(f"batch {db.key} row {i} cell {j}: fewer than {t} valid decryption shares")
                continue
            if pt.hex() != e:
                failures.append(f"batch {db.key} row {i} cell {j}: published plaintext does not match the shares")
    if not failures:
        want = name_rows(config, db.key, [[bytes.fromhex(x) for x in r] for r in db.elements])
        if want != db.outputs:
            failures.append(f"batch {db.key}: output rows do not match the decrypted elements")
    return failures
