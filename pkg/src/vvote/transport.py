"""Live mode: every bulletin-board peer behind its own TCP listener.

Each request opens one connection carrying one request frame and one
response frame. A frame is a 4-byte big-endian length followed by the same
JSON bytes the in-memory network produces. Crash and drop injection stay on
the client side, so a scenario behaves identically in both modes.
"""

from __future__ import annotations

import socket
import socketserver
import struct
import threading
from dataclasses import dataclass, field

from vvote.network import MemoryNetwork, Unreachable, decode, encode

_LEN = struct.Struct(">I")
MAX_FRAME = 64 << 20


def send_frame(sock: socket.socket, payload: bytes) -> None:
    sock.sendall(_LEN.pack(len(payload)) + payload)


def recv_frame(sock: socket.socket) -> bytes:
    head = _recv_exact(sock, _LEN.size)
    (n,) = _LEN.unpack(head)
    if n > MAX_FRAME:
        raise ConnectionError(f"frame of {n} bytes exceeds limit")
    return _recv_exact(sock, n)


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("connection closed mid-frame")
        buf += chunk
    return bytes(buf)


class _Handler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        net: LiveNetwork = self.server.net  # type: ignore[attr-defined]
        idx: int = self.server.peer_index  # type: ignore[attr-defined]
        try:
            req = decode(recv_frame(self.request))
        except (ConnectionError, OSError):
            return
        with net.lock:
            resp = net.peers[idx].dispatch(req["method"], req["params"])
        send_frame(self.request, encode(resp))


class _Server(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


@dataclass
class LiveNetwork(MemoryNetwork):
    """Drop-in replacement for :class:`MemoryNetwork` that talks over loopback sockets."""

    host: str = "127.0.0.1"
    timeout: float = 30.0
    lock: threading.RLock = field(default_factory=threading.RLock)
    servers: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for i in self.peer_ids:
            srv = _Server((self.host, 0), _Handler)
            srv.net = self
            srv.peer_index = i
            threading.Thread(target=srv.serve_forever, name=f"wbb-peer-{i}", daemon=True).start()
            self.servers[i] = srv

    def address(self, i: int) -> tuple[str, int]:
        return self.servers[i].server_address[:2]

    def call(self, dst: int, method: str, params: dict, src: str = "client") -> dict:
        if dst in self.crashed:
            raise Unreachable(f"peer {dst} is down")
        if self._dropped(src, dst, method, params):
            self.dropped += 1
            raise Unreachable(f"message to peer {dst} lost")
        self.log.append((src, dst, method))
        try:
            with socket.create_connection(self.address(dst), timeout=self.timeout) as s:
                send_frame(s, encode({"method": method, "params": params}))
                return decode(recv_frame(s))
        except OSError as exc:
            raise Unreachable(f"peer {dst}: {exc}") from exc

    def close(self) -> None:
        for srv in self.servers.values():
            srv.shutdown()
            srv.server_close()


def live_factory(peers: dict, rng) -> LiveNetwork:
    return LiveNetwork(peers, rng)
