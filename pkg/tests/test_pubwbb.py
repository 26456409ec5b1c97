import hashlib
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vvote.crypto.signatures import bls_keygen_threshold, bls_sign
from vvote.privwbb import commit_data, commit_hash
from vvote.pubwbb import BoardError, CommitRecord, PublicBoard, genesis_data, read_digests, verify_chain, verify_inclusion, verify_index

KEYS = bls_keygen_threshold(1, 1, b"pubwbb-tests")
SECRET = KEYS.shares[1]


def vote_item(serial: str, cid: str) -> dict:
    return {"msg": {"type": "vote", "serialNo": serial, "boothID": "EBM1", "races": {"LA": [1]}}, "commitTime": cid, "derived": {}}


def file_item(body: bytes, cid: str) -> dict:
    msg = {"type": "file", "boothID": "VPS1", "submissionID": "s1", "digest": hashlib.sha256(body).hexdigest(), "fileSize": len(body)}
    return {"msg": msg, "commitTime": cid, "derived": {}}


def record(board: PublicBoard, cid: str, items: list[dict]) -> CommitRecord:
    data = commit_data(cid, items)
    h = commit_hash(board.head, data)
    return CommitRecord(cid, board.head, data, h, bls_sign(SECRET, h))


def new_board(root) -> PublicBoard:
    b = PublicBoard(root, KEYS.joint_key)
    g = genesis_data("test", "c" * 64, "r" * 64)
    b.write_genesis(g, bls_sign(SECRET, commit_hash(b"", g)))
    return b


@pytest.fixture
def board(tmp_path):
    b = new_board(tmp_path / "board")
    b.publish(record(b, "cid-00001", [vote_item("P1:1", "cid-00001"), vote_item("P1:2", "cid-00001")]))
    body = b"dispute text"
    b.publish(record(b, "cid-00002", [file_item(body, "cid-00002"), vote_item("P1:3", "cid-00002")]), {file_item(body, "")["msg"]["digest"]: body})
    b.publish(record(b, "cid-00003", [vote_item("P1:1", "cid-00003")]))
    return b


def test_genesis_signature_checked(tmp_path):
    b = PublicBoard(tmp_path, KEYS.joint_key)
    with pytest.raises(BoardError):
        b.write_genesis(genesis_data("x", "", ""), b"\x00" * 48)
    with pytest.raises(BoardError):
        b.head


def test_chain_verifies_and_reloads(board):
    assert verify_chain(board, read_digests(board.root)).ok
    again = PublicBoard(board.root, KEYS.joint_key)
    assert again.commits == board.commits and again.head == board.head
    assert again.index == {"P1:1": ["cid-00001", "cid-00003"], "P1:2": ["cid-00001"], "P1:3": ["cid-00002"]}


def test_publish_rejections(board):
    last = board.commits[-1]
    assert board.publish(last) is False
    stale = CommitRecord("cid-00009", board.commits[0].hash, last.data, last.hash, last.signature)
    with pytest.raises(BoardError):
        board.publish(stale)
    good = record(board, "cid-00004", [vote_item("P1:4", "cid-00004")])
    with pytest.raises(BoardError):
        board.publish(CommitRecord(good.cid, good.prior, good.data, good.hash, bls_sign(SECRET + 1, good.hash)))
    with pytest.raises(BoardError):
        board.publish(CommitRecord(good.cid, good.prior, commit_data("cid-00004", []), good.hash, good.signature))
    with pytest.raises(BoardError):
        board.publish(record(board, "cid-00004", [file_item(b"never sent", "cid-00004")]))
    assert board.publish(good)


def test_tampered_commit_file_is_located(board):
    path = next((board.root / "commits").glob("0002_*")) / "data.json"
    data = json.loads(path.read_text())
    data["items"][1]["msg"]["races"] = {"LA": [2]}
    path.write_text(json.dumps(data))
    v = verify_chain(PublicBoard(board.root, KEYS.joint_key))
    assert not v.ok and v.first_bad == 2
    assert "hash does not match data" in v.failures[0]


def test_digest_mismatch_and_count(board):
    digests = read_digests(board.root)
    forged = [dict(d) for d in digests]
    forged[2]["hash"] = "00" * 32
    v = verify_chain(board, forged)
    assert not v.ok and v.first_bad == 2
    assert not verify_chain(board, digests[:-1]).ok


def test_inclusion(board):
    assert verify_inclusion(board, "P1:1").status == "included"
    r = verify_inclusion(board, "P1:1", lambda it: it["commitTime"] == "cid-00003")
    assert (r.status, r.cid) == ("included", "cid-00003")
    assert verify_inclusion(board, "P1:9").status == "absent"
    assert verify_inclusion(board, "P1:2", lambda it: False).detail.startswith("serial present")
    board.index["P1:3"] = []
    assert verify_inclusion(board, "P1:3").status == "corrupt"
    assert verify_index(board)
    board.index["P1:3"] = ["cid-00001"]
    assert verify_inclusion(board, "P1:3").status == "corrupt"


@settings(max_examples=30)
@given(which=st.integers(0, 2), offset=st.integers(0, 10**6), bit=st.integers(0, 7))
def test_any_bit_flip_in_committed_data_is_detected(tmp_path_factory, which, offset, bit):
    b = new_board(tmp_path_factory.mktemp("flip") / "board")
    for k in range(3):
        cid = f"cid-{k + 1:05d}"
        b.publish(record(b, cid, [vote_item(f"P1:{k + 1}", cid)]))
    path = sorted((b.root / "commits").iterdir())[which] / "data.json"
    raw = bytearray(path.read_bytes())
    raw[offset % len(raw)] ^= 1 << bit
    path.write_bytes(bytes(raw))
    assert not verify_chain(PublicBoard(b.root, KEYS.joint_key), read_digests(b.root)).ok
