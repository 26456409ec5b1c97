"""Distributed ballot generation.

Each randomness generation server (RGS) fills a table of ``(r, R)`` pairs
per (serial, column), publishes hash commitments to every ``r`` and, once
every server's commitments are on the board, releases the encrypted table
to the printer. The printer derives each ciphertext's randomness from the
servers' ``r`` values, so its output is fully determined by committed data
and can be audited by opening those commitments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from vvote.config import Layout
from vvote.crypto import elgamal, group
from vvote.crypto.commit import commit, verify_commitment
from vvote.crypto.drbg import Drbg
from vvote.crypto.elgamal import Ciphertext
from vvote.crypto.encoding import canonical_json
from vvote.crypto.hashing import derive_randomness, derive_randomness_bytes
from vvote.crypto.symmetric import seal, sym_decrypt, sym_encrypt, unseal
from vvote.errors import CommitmentMismatch, IntegrityError, ParameterError, SequencingError

Opening = tuple[bytes, bytes]  # (r, R), 32 bytes each


def serial_numbers(printer_id: str, count: int) -> list[str]:
    return [f"{printer_id}:{i}" for i in range(1, count + 1)]


def _cell_aad(serial: str, column: int) -> bytes:
    return f"{serial}#{column}".encode()


@dataclass
class RandomnessTable:
    """Encrypted ``r || R`` blobs per serial, one per column (private to the printer)."""

    rgs: int
    printer_id: str
    cells: dict[str, list[bytes]]


@dataclass
class CommitmentTable:
    """Commitments to every ``r`` of one server's table; public."""

    rgs: int
    printer_id: str
    cells: dict[str, list[bytes]]

    def to_json(self) -> dict:
        return {
            "rgs": self.rgs,
            "printerID": self.printer_id,
            "cells": {s: [d.hex() for d in row] for s, row in self.cells.items()},
        }

    @classmethod
    def from_json(cls, d: dict) -> "CommitmentTable":
        return cls(int(d["rgs"]), d["printerID"], {s: [bytes.fromhex(x) for x in row] for s, row in d["cells"].items()})

    def body(self) -> bytes:
        return canonical_json(self.to_json())


class RandomnessServer:
    """One RGS. Tables stay private until :meth:`release` is allowed."""

    def __init__(self, index: int, rng: Drbg) -> None:
        self.index = index
        self._rng = rng
        self._tables: dict[str, tuple[RandomnessTable, bytes]] = {}

    def generate(self, printer_id: str, serials: Sequence[str], columns: int) -> CommitmentTable:
        if not serials or columns < 1:
            raise ParameterError("need at least one serial and one column")
        rng = self._rng.fork(f"table/{printer_id}")
        key = rng.bytes(32)
        rt: dict[str, list[bytes]] = {}
        crt: dict[str, list[bytes]] = {}
        for s in serials:
            enc_row, com_row = [], []
            for col in range(1, columns + 1):
                r, big_r = rng.bytes(32), rng.bytes(32)
                enc_row.append(sym_encrypt(key, r + big_r, rng.bytes(12), _cell_aad(s, col)))
                com_row.append(commit(r, big_r))
            rt[s], crt[s] = enc_row, com_row
        self._tables[printer_id] = (RandomnessTable(self.index, printer_id, rt), key)
        return CommitmentTable(self.index, printer_id, crt)

    def release(
        self, printer_id: str, printer_public_key: bytes, acknowledged: Iterable[int], rgs_count: int
    ) -> tuple[RandomnessTable, bytes]:
        """Hand the printer its table and the sealed table key.

        ``acknowledged`` lists the servers whose commitment tables for this
        printer hold a verified bulletin-board receipt. Release before all
        ``rgs_count`` are acknowledged would let the last server choose its
        values after seeing everyone else's, so it is refused.
        """
        missing = set(range(1, rgs_count + 1)) - set(acknowledged)
        if missing:
            raise SequencingError(f"commitment tables not yet posted for servers {sorted(missing)}")
        rt, key = self._tables[printer_id]
        return rt, seal(printer_public_key, key, self._rng.fork(f"seal/{printer_id}"))


def rgs_generate(b: int, n: int, mode: str = "alg1", seed: bytes | str | None = None, printer_id: str = "P"):
    """Standalone table generation: returns ``(RT, CRT, sk)`` for ``b`` ballots of ``n`` candidates."""
    if b < 1 or n < 1:
        raise ParameterError("b and n must be at least 1")
    if mode not in ("alg1", "alg2"):
        raise ParameterError(f"unknown mode {mode!r}")
    srv = RandomnessServer(1, Drbg(seed))
    crt = srv.generate(printer_id, serial_numbers(printer_id, b), n + (mode == "alg2"))
    rt, key = srv._tables[printer_id]
    return rt, crt, key


def decrypt_table(rt: RandomnessTable, key: bytes) -> dict[str, list[Opening]]:
    out = {}
    for s, row in rt.cells.items():
        cells = []
        for col, blob in enumerate(row, start=1):
            pt = sym_decrypt(key, blob, _cell_aad(s, col))
            cells.append((pt[:32], pt[32:]))
        out[s] = cells
    return out


# -- ballots -----------------------------------------------------------------


@dataclass(frozen=True)
class GenericBallot:
    """Sorted candidate ciphertexts for one serial.

    ``pi[k]`` is the 0-based printed position, within its race section, of
    official column ``k``. ``pi`` is secret to the printer; the public form
    omits it.
    """

    serial: str
    cts: tuple[Ciphertext, ...]
    pi: tuple[int, ...] | None = None
    commit_pi: bytes | None = None

    def public_json(self) -> dict:
        d = {"serial": self.serial, "cts": [c.hex() for c in self.cts]}
        if self.commit_pi is not None:
            d["commitPi"] = self.commit_pi.hex()
        return d

    @classmethod
    def from_public_json(cls, d: dict) -> "GenericBallot":
        cp = d.get("commitPi")
        return cls(d["serial"], tuple(Ciphertext.from_hex(x) for x in d["cts"]), None, bytes.fromhex(cp) if cp else None)


def encode_pi(layout: Layout, pi: Sequence[int]) -> bytes:
    """Byte form of a full permutation as committed in Alg. 2 mode (1-based positions per race)."""
    return canonical_json({race: [pi[k] + 1 for k in layout.section(race)] for race, _ in layout.sizes})


def ballot_randomness(openings: Sequence[Sequence[Opening]], layout: Layout) -> list[int]:
    """Per-column encryption randomness from all servers' ``r`` values, in server order."""
    return [derive_randomness([openings[g][k][0] for g in range(len(openings))]) for k in range(layout.n)]


def pi_witness(openings: Sequence[Sequence[Opening]], layout: Layout) -> bytes:
    k = layout.n
    return derive_randomness_bytes([openings[g][k][0] for g in range(len(openings))])


def reconstruct(
    openings: Sequence[Sequence[Opening]], layout: Layout, pk: bytes
) -> tuple[tuple[Ciphertext, ...], tuple[int, ...]]:
    """Recompute a ballot's sorted ciphertexts and its permutation from openings."""
    rands = ballot_randomness(openings, layout)
    base = elgamal.encrypt_batch(pk, list(layout.base_ids), rands)
    cts: list[Ciphertext] = [None] * layout.n  # type: ignore[list-item]
    pi = [0] * layout.n
    for race, _ in layout.sizes:
        sec = layout.section(race)
        order = elgamal.canonical_sort([base[k] for k in sec])
        for pos, local in enumerate(order):
            k = sec.start + local
            cts[sec.start + pos] = base[k]
            pi[k] = pos
    return tuple(cts), tuple(pi)


def check_openings(
    openings: Sequence[Sequence[Opening]], crt_rows: Sequence[Sequence[bytes]]
) -> tuple[int, int] | None:
    """First (server, column), both 1-based, whose opening fails, else None."""
    for g, (row, coms) in enumerate(zip(openings, crt_rows), start=1):
        if len(row) != len(coms):
            return g, min(len(row), len(coms)) + 1
        for col, ((r, big_r), c) in enumerate(zip(row, coms), start=1):
            if len(big_r) != 32 or not verify_commitment(c, r, big_r):
                return g, col
    return None


def printer_generate(
    rts: Sequence[RandomnessTable],
    esks: Sequence[bytes],
    printer_secret: int,
    crts: Sequence[CommitmentTable],
    layout: Layout,
    pk: bytes,
    serials: Sequence[str] | None = None,
) -> tuple[dict[str, GenericBallot], dict[str, list[list[Opening]]]]:
    """Deterministic ballot generation by the printer.

    Every decrypted cell is checked against its commitment before use; the
    first failure aborts with ``CommitmentMismatch(server, serial, column)``.
    Table keys are dropped as soon as the tables are decrypted.
    """
    tables: list[dict[str, list[Opening]]] = []
    for rt, esk in zip(rts, esks):
        key = unseal(printer_secret, esk)
        try:
            tables.append(decrypt_table(rt, key))
        except IntegrityError as exc:
            raise IntegrityError(f"randomness table from server {rt.rgs} is corrupted") from exc
        del key
    serials = list(serials if serials is not None else tables[0].keys())
    ballots: dict[str, GenericBallot] = {}
    openings: dict[str, list[list[Opening]]] = {}
    for s in serials:
        op = [t[s] for t in tables]
        bad = check_openings(op, [c.cells[s] for c in crts])
        if bad is not None:
            raise CommitmentMismatch(crts[bad[0] - 1].rgs, s, bad[1])
        cts, pi = reconstruct(op, layout, pk)
        cp = commit(encode_pi(layout, pi), pi_witness(op, layout)) if layout.alg2 else None
        ballots[s] = GenericBallot(s, cts, pi, cp)
        openings[s] = op
    return ballots, openings


# -- generation audit ----------------------------------------------------------


def select_gen_audit(seed: bytes, fraction: float, serials: Sequence[str]) -> list[str]:
    """Deterministic selection of ``ceil(fraction * b)`` serials seeded by ``seed``."""
    if not 0 < fraction < 1:
        raise ParameterError("audit fraction must lie in (0, 1)")
    count = math.ceil(round(fraction * len(serials), 9))
    order = list(serials)
    Drbg(b"gen-audit\0" + seed).shuffle(order)
    chosen = set(order[:count])
    return [s for s in serials if s in chosen]


@dataclass
class GenAuditRecord:
    serial: str
    openings: list[list[Opening]] | None

    def to_json(self) -> dict:
        return {
            "serial": self.serial,
            "openings": None
            if self.openings is None
            else [[[r.hex(), big_r.hex()] for r, big_r in row] for row in self.openings],
        }

    @classmethod
    def from_json(cls, d: dict) -> "GenAuditRecord":
        ops = d.get("openings")
        return cls(
            d["serial"],
            None if ops is None else [[(bytes.fromhex(r), bytes.fromhex(x)) for r, x in row] for row in ops],
        )


@dataclass(frozen=True)
class AuditVerdict:
    ok: bool
    failure: str | None = None  # "missing", "commitment", "mismatch", "pi"
    rgs: int | None = None
    column: int | None = None
    detail: str = ""

    def describe(self) -> str:
        if self.ok:
            return "pass"
        where = []
        if self.rgs is not None:
            where.append(f"server {self.rgs}")
        if self.column is not None:
            where.append(f"column {self.column}")
        return f"{self.failure}" + (f" ({', '.join(where)})" if where else "") + (f": {self.detail}" if self.detail else "")


def verify_openings_against(
    openings: Sequence[Sequence[Opening]] | None,
    crt_rows: Sequence[Sequence[bytes]],
    ballot: GenericBallot,
    layout: Layout,
    pk: bytes,
    rgs_ids: Sequence[int] | None = None,
) -> tuple[AuditVerdict, tuple[int, ...] | None]:
    """Check openings against commitments and the published ciphertexts.

    Returns the verdict and, when reconstruction succeeded, the permutation.
    """
    if openings is None or len(openings) != len(crt_rows) or any(len(row) != layout.columns for row in openings):
        return AuditVerdict(False, "missing", detail="openings absent or incomplete"), None
    bad = check_openings(openings, crt_rows)
    if bad is not None:
        rgs = rgs_ids[bad[0] - 1] if rgs_ids else bad[0]
        return AuditVerdict(False, "commitment", rgs, bad[1]), None
    cts, pi = reconstruct(openings, layout, pk)
    for col, (mine, theirs) in enumerate(zip(cts, ballot.cts), start=1):
        if mine != theirs:
            return AuditVerdict(False, "mismatch", column=col, detail="recomputed ciphertext differs"), pi
    if len(ballot.cts) != len(cts):
        return AuditVerdict(False, "mismatch", detail="ciphertext count differs"), pi
    if layout.alg2:
        if ballot.commit_pi is None or not verify_commitment(
            ballot.commit_pi, encode_pi(layout, pi), pi_witness(openings, layout)
        ):
            return AuditVerdict(False, "pi", column=layout.columns, detail="permutation commitment does not open"), pi
    return AuditVerdict(True), pi


def verify_gen_audit(
    record: GenAuditRecord, crts: Sequence[CommitmentTable], ballot: GenericBallot, layout: Layout, pk: bytes
) -> AuditVerdict:
    rows = [c.cells[record.serial] for c in crts]
    verdict, _ = verify_openings_against(record.openings, rows, ballot, layout, pk, [c.rgs for c in crts])
    return verdict


# -- reduction -----------------------------------------------------------------


@dataclass(frozen=True)
class Reduction:
    race: str
    candidate: int  # 1-based official index of the unused candidate
    position: int  # 1-based position in the sorted section
    randomness: int

    def to_json(self) -> dict:
        return {"race": self.race, "candidate": self.candidate, "position": self.position, "randomness": format(self.randomness, "064x")}

    @classmethod
    def from_json(cls, d: dict) -> "Reduction":
        return cls(d["race"], int(d["candidate"]), int(d["position"]), int(d["randomness"], 16))


def reduction_disclosure(
    ballot: GenericBallot, openings: Sequence[Sequence[Opening]], layout: Layout, sizes: Mapping[str, int]
) -> list[Reduction]:
    """Randomness and positions for every pool candidate beyond the district's count."""
    assert ballot.pi is not None
    rands = ballot_randomness(openings, layout)
    out = []
    for race, pool in layout.sizes:
        off = layout.offset(race)
        for k in range(sizes[race] + 1, pool + 1):
            col = off + k - 1
            out.append(Reduction(race, k, ballot.pi[col] + 1, rands[col]))
    return out


def check_reduction(
    ballot: GenericBallot, reductions: Sequence[Reduction], layout: Layout, sizes: Mapping[str, int], pk: bytes
) -> str | None:
    """None when the disclosure covers exactly the unused candidates and each re-encrypts; else a reason."""
    expected = {(race, k) for race, pool in layout.sizes for k in range(sizes[race] + 1, pool + 1)}
    got = [(r.race, r.candidate) for r in reductions]
    if sorted(got) != sorted(expected) or len(set(got)) != len(got):
        return "reduction does not cover exactly the unused candidates"
    positions = [(r.race, r.position) for r in reductions]
    if len(set(positions)) != len(positions):
        return "reduction discloses one position twice"
    for r in reductions:
        if not 1 <= r.position <= layout.size(r.race) or r.randomness % group.ORDER == 0:
            return f"{r.race} candidate {r.candidate}: malformed disclosure"
        col = layout.offset(r.race) + r.position - 1
        if elgamal.encrypt(pk, layout.base_ids[layout.offset(r.race) + r.candidate - 1], r.randomness) != ballot.cts[col]:
            return f"{r.race} candidate {r.candidate}: disclosed randomness does not match position {r.position}"
    return None


def used_positions(layout: Layout, race: str, reductions: Sequence[Reduction]) -> list[int]:
    """0-based sorted-section positions still in use after reduction, ascending."""
    gone = {r.position - 1 for r in reductions if r.race == race}
    return [p for p in range(layout.size(race)) if p not in gone]


def reduced_permutation(pi: Sequence[int], layout: Layout, sizes: Mapping[str, int]) -> dict[str, list[int]]:
    """Per race: 0-based printed position on the reduced ballot of each used official candidate."""
    out = {}
    for race, _ in layout.sizes:
        off = layout.offset(race)
        full = [pi[off + k] for k in range(sizes[race])]
        rank = {p: i for i, p in enumerate(sorted(full))}
        out[race] = [rank[p] for p in full]
    return out


def printed_order(reduced: Mapping[str, Sequence[int]], names: Mapping[str, Sequence[str]]) -> dict[str, list[str]]:
    """Candidate names per race in printed order."""
    out = {}
    for race, perm in reduced.items():
        row = [""] * len(perm)
        for k, p in enumerate(perm):
            row[p] = names[race][k]
        out[race] = row
    return out


@dataclass
class Dispute:
    """Signed statement that a server's table cell failed its commitment."""

    printer_id: str
    rgs: int
    serial: str
    column: int
    signature: bytes = field(default=b"", repr=False)

    def fields(self) -> tuple:
        return ("dispute", self.printer_id, self.rgs, self.serial, self.column)

    def to_json(self) -> dict:
        return {
            "printerID": self.printer_id,
            "rgs": self.rgs,
            "serialNo": self.serial,
            "column": self.column,
            "signature": self.signature.hex(),
        }
