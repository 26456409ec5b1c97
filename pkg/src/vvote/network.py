"""Message transport between actors and bulletin-board peers.

The in-memory network round-trips every request and response through the
same JSON bytes the socket transport sends, so simulation and live runs
exercise identical encodings. Crashes, drops and delivery reordering are
injected here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Protocol

from vvote.crypto.drbg import Drbg


class Unreachable(Exception):
    """The destination did not answer (crashed, partitioned or message lost)."""


def encode(obj: dict) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def decode(b: bytes) -> dict:
    return json.loads(b)


class Transport(Protocol):
    peer_ids: list[int]

    def call(self, dst: int, method: str, params: dict) -> dict: ...


DropRule = Callable[[str, int, str, dict], bool]


@dataclass
class MemoryNetwork:
    peers: dict  # index -> Peer
    rng: Drbg
    crashed: set[int] = field(default_factory=set)
    drop_rules: list[DropRule] = field(default_factory=list)
    reorder: bool = True
    log: list[tuple[str, int, str]] = field(default_factory=list)
    dropped: int = 0

    @property
    def peer_ids(self) -> list[int]:
        return sorted(self.peers)

    def live(self) -> list[int]:
        return [i for i in self.peer_ids if i not in self.crashed]

    def _dropped(self, src: str, dst: int, method: str, params: dict) -> bool:
        return any(rule(src, dst, method, params) for rule in self.drop_rules)

    def call(self, dst: int, method: str, params: dict, src: str = "client") -> dict:
        if dst in self.crashed:
            raise Unreachable(f"peer {dst} is down")
        if self._dropped(src, dst, method, params):
            self.dropped += 1
            raise Unreachable(f"message to peer {dst} lost")
        self.log.append((src, dst, method))
        req = decode(encode({"method": method, "params": params}))
        resp = self.peers[dst].dispatch(req["method"], req["params"])
        return decode(encode(resp))

    def order(self, ids: list[int]) -> list[int]:
        ids = list(ids)
        if self.reorder:
            self.rng.shuffle(ids)
        return ids

    def deliver_gossip(self) -> None:
        """Forward every live peer's queued share announcements to the others."""
        batch = []
        for i in self.live():
            for m in self.peers[i].rpc_drain_outbox()["messages"]:
                for j in self.peer_ids:
                    if j != i:
                        batch.append((i, j, m))
        if self.reorder:
            self.rng.shuffle(batch)
        for i, j, m in batch:
            try:
                self.call(j, "gossip", m, src=f"peer{i}")
            except Unreachable:
                pass
