import tempfile

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vvote.crypto.drbg import Drbg
from vvote.crypto.signatures import SignatureShare
from vvote.ebm import BallotScan, Session
from vvote.errors import NoReceipt
from vvote.messages import sign_message
from vvote.privwbb import Status, check_races, cid_for
from vvote.crypto.encoding import canonical_json
from vvote.election import Election
from wbb_harness import _audit, _cancel, _startevm, _vote, harness_config, shared_keys

DAY = 86400
NOW = DAY + 3600
SIZES = {"LA": 2, "LC_ATL": 1, "LC_BTL": 1}


def submit(peer, msg, now=NOW + 30):
    return peer.dispatch("submit", {"msg": msg, "now": now})


def session(e):
    pb = e.printers["P1"].request_ballot("D1", NOW)
    s = e.ebms["EBM1"].start_session(BallotScan.of(pb), NOW + 10)
    e.gossip()
    return pb, s.start_sig


def test_cid_windows():
    assert cid_for(0, 86400) == "cid-00000"
    assert cid_for(2 * DAY - 1, 86400) == "cid-00001"
    assert cid_for(2 * DAY, 86400) == "cid-00002"


@pytest.mark.parametrize(
    "races,why",
    [
        ({"LA": [1, 2], "LC_ATL": [1]}, None),
        ({"LA": [0, 0], "LC_BTL": [0]}, None),
        ({"LC_ATL": [1]}, "LA"),
        ({"LA": [1, 2]}, "exactly one"),
        ({"LA": [1, 2], "LC_ATL": [1], "LC_BTL": [1]}, "exactly one"),
        ({"LA": [1], "LC_ATL": [1]}, "positions"),
        ({"LA": [1, 3], "LC_ATL": [1]}, "range"),
        ({"LA": [True, 2], "LC_ATL": [1]}, "range"),
        ({"LA": [2, 2], "LC_ATL": [1]}, "repeated"),
    ],
)
def test_check_races(races, why):
    got = check_races(races, SIZES)
    assert (got is None) if why is None else (why in got)


def test_rejects_malformed_and_unsigned(small_election):
    peer = small_election.peers[1]
    assert submit(peer, {"type": "vote"})["reason"] == "malformed"
    pb, sig = session(small_election)
    msg = _vote(small_election, "EBM1", pb, sig, Drbg("x"))
    msg["district"] = "D2"
    assert submit(peer, msg)["reason"] == "bad-signature"


def test_sender_roles_are_enforced(small_election):
    e = small_election
    pb, sig = session(e)
    # an EBM key signing a printer's audit
    audit = {k: v for k, v in _audit(e, pb).items() if k != "senderSignature"}
    forged = sign_message(e.keys.signers["EBM1"], audit | {"boothID": "EBM1"})
    assert submit(e.peers[1], forged)["reason"] == "not-authorised"


def test_identical_resubmission_is_reacknowledged(small_election):
    e = small_election
    pb, sig = session(e)
    msg = _vote(e, "EBM1", pb, sig, Drbg("v"))
    a = submit(e.peers[2], msg, NOW + 30)
    b = submit(e.peers[2], msg, NOW + 5 * DAY)
    assert a["ok"] and b["ok"]
    assert a["commitTime"] == b["commitTime"] and a["peerSig"] == b["peerSig"]


def test_vote_needs_a_session(small_election):
    e = small_election
    pb = e.printers["P1"].request_ballot("D1", NOW)
    msg = _vote(e, "EBM1", pb, b"\x00" * 48, Drbg("v"))
    assert submit(e.peers[1], msg)["reason"] == "no-session"


def test_vote_then_audit_clash(small_election):
    e = small_election
    pb, sig = session(e)
    assert submit(e.peers[1], _vote(e, "EBM1", pb, sig, Drbg("v")))["ok"]
    assert submit(e.peers[1], _audit(e, pb))["reason"] == "clash"
    assert submit(e.peers[1], _vote(e, "EBM2", pb, sig, Drbg("w")))["reason"] == "clash"
    assert e.peers[1].state.serials[pb.serial].status == Status.VOTED


def test_audit_then_session_refused(small_election):
    e = small_election
    pb = e.printers["P1"].request_ballot("D1", NOW)
    assert submit(e.peers[1], _audit(e, pb))["derived"]["result"] == "opened"
    assert submit(e.peers[1], _startevm(e, "EBM1", pb))["reason"] == "clash"


def test_cancel_is_idempotent_per_serial(small_election):
    e = small_election
    pb = e.printers["P1"].request_ballot("D1", NOW)
    a, b = submit(e.peers[1], _cancel(e, pb)), submit(e.peers[1], _cancel(e, pb))
    assert a["ok"] and b["ok"] and a["peerSig"] == b["peerSig"]


def test_gossip_adoption_needs_t_shares(small_election):
    e = small_election
    pb = e.printers["P1"].request_ballot("D1", NOW)
    e.gossip()
    msg = _startevm(e, "EBM1", pb)
    resp = {}
    for i in (1, 2, 3, 4):
        resp[i] = submit(e.peers[i], msg, NOW + 10)
    item = {"msg": msg, "commitTime": resp[1]["commitTime"], "derived": {}}
    shares = [SignatureShare.from_json(r["peerSig"]) for r in resp.values()]
    assert not e.peers[7].adopt(item, shares)
    assert not e.peers[7].adopt(item, shares + [shares[0]])  # a repeated share does not count twice
    shares.append(SignatureShare.from_json(submit(e.peers[5], msg, NOW + 10)["peerSig"]))
    assert e.peers[7].adopt(item, shares)
    assert e.peers[7].state.serials[pb.serial].status == Status.SESSION_STARTED


def test_two_crashed_peers_still_give_receipts_and_commits(small_election):
    e = small_election
    e.crash(2)
    e.crash(6)
    pb, sig = session(e)
    r = e.ebms["EBM1"].cast_vote(Session(BallotScan.of(pb), sig), {"LA": [1, 2], "LC_ATL": [1]}, NOW + 20)
    assert r.verify(e.registry.wbb_joint_key)
    assert e.commit(2 * DAY - 1).published
    e.recover(2, 2 * DAY)
    e.recover(6, 2 * DAY)
    assert e.peers[2].prior == e.board.head == e.peers[6].prior


def test_three_crashed_peers_block_receipts_and_commits(small_election):
    e = small_election
    for i in (1, 4, 7):
        e.crash(i)
    with pytest.raises(NoReceipt):
        e.printers["P1"].request_ballot("D1", NOW)
    before = len(e.board.commits)
    assert not e.commit(2 * DAY - 1).published
    assert len(e.board.commits) == before


@settings(max_examples=15)
@given(order=st.permutations(range(4)), seed=st.integers(0, 10**6))
def test_single_peer_accepts_at_most_one_terminal_item(order, seed):
    with tempfile.TemporaryDirectory() as root:
        e = Election(harness_config("wbb-harness"), root, keys=shared_keys())
        e.setup(0.0)
        pb = e.printers["P1"].request_ballot("D1", NOW)
        sig = e.ebms["EBM1"].start_session(BallotScan.of(pb), NOW + 10).start_sig if seed % 2 else b"\x00" * 48
        e.gossip()
        rng = Drbg(f"order/{seed}")
        msgs = [_vote(e, "EBM1", pb, sig, rng), _vote(e, "EBM2", pb, sig, rng), _audit(e, pb), _cancel(e, pb)]
        peer = e.peers[1 + seed % 7]
        accepted = {canonical_json(msgs[k]) for k in order if submit(peer, msgs[k])["ok"] and msgs[k]["type"] != "cancel"}
        assert len(accepted) <= 1
