"""Replay of the public bulletin board into per-serial and per-printer views.

Built only from the board directory, the configuration and the registry, so
the verifier and the tally both read the election the same way anyone can.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from vvote.ballotgen import CommitmentTable, GenericBallot, Reduction
from vvote.config import ElectionConfig
from vvote.messages import STORE_KINDS
from vvote.mixnet import CastVote
from vvote.privwbb import Registry
from vvote.pubwbb import PublicBoard


@dataclass
class SerialView:
    district: str | None = None
    reductions: list[Reduction] = field(default_factory=list)
    items: list[tuple[str, dict]] = field(default_factory=list)  # (cid, item) in board order

    def kinds(self) -> list[str]:
        return [it["msg"]["type"] for _, it in self.items]

    def first(self, kind: str) -> tuple[str, dict] | None:
        for cid, it in self.items:
            if it["msg"]["type"] == kind:
                return cid, it
        return None

    @property
    def cancelled(self) -> bool:
        return "cancel" in self.kinds()


@dataclass
class StoredFile:
    cid: str
    item: dict
    doc: dict | None  # parsed body, None when missing or not JSON

    @property
    def kind(self) -> str:
        return self.item["msg"]["type"]

    @property
    def desc(self) -> str:
        return self.item["msg"].get("desc", "")

    @property
    def sender(self) -> str:
        return self.item["msg"]["boothID"]


@dataclass
class BoardView:
    config: ElectionConfig
    registry: Registry
    ballots: dict[str, GenericBallot] = field(default_factory=dict)
    crts: dict[str, dict[int, CommitmentTable]] = field(default_factory=dict)
    serials: dict[str, SerialView] = field(default_factory=dict)
    stores: list[StoredFile] = field(default_factory=list)
    problems: list[str] = field(default_factory=list)

    def files(self, kind: str, desc_prefix: str = "") -> list[StoredFile]:
        return [f for f in self.stores if f.kind == kind and f.desc.startswith(desc_prefix)]

    def votes(self) -> list[CastVote]:
        out = []
        for s in sorted(self.serials):
            sv = self.serials[s]
            v = sv.first("vote")
            if v is None or sv.cancelled:
                continue
            m = v[1]["msg"]
            out.append(CastVote(s, m["district"], {r: list(x) for r, x in m["races"].items()}))
        return out

    def reductions(self) -> dict[str, list[Reduction]]:
        return {s: sv.reductions for s, sv in self.serials.items()}

    def last_cid_with(self, kinds: tuple[str, ...]) -> str | None:
        last = None
        for sv in self.serials.values():
            for cid, it in sv.items:
                if it["msg"]["type"] in kinds and (last is None or cid > last):
                    last = cid
        return last


def load_view(board: PublicBoard, config: ElectionConfig, registry: Registry) -> BoardView:
    view = BoardView(config, registry)
    for cid, it in board.items():
        msg = it.get("msg", {})
        kind = msg.get("type")
        if kind in STORE_KINDS:
            body = board.file(msg.get("digest", ""))
            doc = None
            if body is None:
                view.problems.append(f"{cid}: body {msg.get('digest')} missing from files/")
            else:
                try:
                    doc = json.loads(body)
                except ValueError:
                    doc = None
            sf = StoredFile(cid, it, doc)
            view.stores.append(sf)
            if doc is None:
                continue
            try:
                if kind == "mixrandomcommit":
                    crt = CommitmentTable.from_json(doc)
                    view.crts.setdefault(crt.printer_id, {})[crt.rgs] = crt
                elif kind == "ballotgencommit":
                    for b in doc["ballots"]:
                        gb = GenericBallot.from_public_json(b)
                        view.ballots[gb.serial] = gb
            except (KeyError, ValueError, TypeError) as exc:
                view.problems.append(f"{cid}: malformed {kind} body ({exc})")
            continue
        s = msg.get("serialNo")
        if s is None:
            view.problems.append(f"{cid}: item without serial or store kind")
            continue
        sv = view.serials.setdefault(s, SerialView())
        sv.items.append((cid, it))
        if kind == "pod":
            sv.district = msg.get("district")
            try:
                sv.reductions = [Reduction.from_json(r) for r in msg["ballotReductions"]]
            except (KeyError, ValueError, TypeError):
                view.problems.append(f"{cid}: malformed reductions for {s}")
    return view
