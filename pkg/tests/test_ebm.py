import pytest
from hypothesis import given
from hypothesis import strategies as st

from vvote.crypto.signatures import bls_verify
from vvote.ebm import BallotScan, check_shape, fallback_plain, permute_preferences, readback, unpermute_preferences
from vvote.errors import ExpiryError, ForgedBallotError, InformalVote, SessionLockError, ShapeError, VVoteError

DAY = 86400
NOW = DAY + 3600
VOTE = {"LA": [2, 1], "LC_ATL": [1]}


def test_permute_worked_example():
    # official 1 -> printed 2, 2 -> 3, 3 -> 1
    assert permute_preferences([1, 2, 3], [1, 2, 0]) == [3, 1, 2]


@given(st.permutations(range(7)).flatmap(lambda pi: st.tuples(st.just(pi), st.permutations(range(1, 8)))))
def test_permute_round_trip(case):
    pi, prefs = case
    assert unpermute_preferences(permute_preferences(prefs, pi), pi) == list(prefs)


def test_permute_rejects_bad_shapes():
    with pytest.raises(ShapeError):
        permute_preferences([1, 2], [0, 1, 2])
    with pytest.raises(ShapeError):
        permute_preferences([1, 2], [0, 0])


def test_check_shape():
    sizes = {"LA": 2, "LC_ATL": 1, "LC_BTL": 1}
    check_shape(VOTE, sizes)
    for bad in ({"LA": [1, 2]}, {"LA": [1, 2], "LC_ATL": [1], "LC_BTL": [1]}, {"LA": [1], "LC_ATL": [1]}, {"LA": [1, 1], "LC_ATL": [1]}, {"LA": [1, 3], "LC_ATL": [1]}):
        with pytest.raises(ShapeError):
            check_shape(bad, sizes)


def test_vote_receipt_verifies_and_reads_back(small_election):
    e = small_election
    pb = e.printers["P1"].request_ballot("D1", NOW)
    ebm = e.ebms["EBM1"]
    session = ebm.start_session(BallotScan.of(pb), NOW + 10)
    receipt = ebm.cast_vote(session, VOTE, NOW + 20)
    assert receipt.verify(e.registry.wbb_joint_key)
    assert bls_verify(e.registry.wbb_joint_key, receipt.payload, receipt.signature)
    assert readback(receipt, BallotScan.of(pb)) == VOTE
    with pytest.raises(VVoteError):
        ebm.cast_vote(session, VOTE, NOW + 30)
    # a second session on the voted serial is refused
    e.gossip()
    with pytest.raises(SessionLockError):
        e.ebms["EBM2"].start_session(BallotScan.of(pb), NOW + 40)


def test_forged_and_expired_ballots(small_election):
    e = small_election
    pb = e.printers["P1"].request_ballot("D1", NOW)
    scan = BallotScan.of(pb)
    forged = BallotScan(scan.serial, "D2", scan.serial_sig, scan.commit_time, scan.permutation, scan.issued_at)
    with pytest.raises(ForgedBallotError):
        e.ebms["EBM1"].start_session(forged, NOW + 10)
    with pytest.raises(ExpiryError):
        e.ebms["EBM1"].start_session(scan, NOW + e.config.timing.expiry_s + 1)


def test_informal_vote_needs_acknowledgement(small_election):
    e = small_election
    pb = e.printers["P1"].request_ballot("D1", NOW)
    session = e.ebms["EBM1"].start_session(BallotScan.of(pb), NOW + 10)
    informal = {"LA": [1, 0], "LC_BTL": [0]}
    with pytest.raises(InformalVote) as ei:
        e.ebms["EBM1"].cast_vote(session, informal, NOW + 20)
    assert any("LC_BTL" in w for w in ei.value.warnings)
    r = e.ebms["EBM1"].cast_vote(session, informal, NOW + 20, acknowledge_informal=True)
    assert readback(r, BallotScan.of(pb)) == informal


def test_mismarking_machine_is_caught_by_readback(small_election):
    e = small_election
    pb = e.printers["P1"].request_ballot("D1", NOW)
    ebm = e.ebms["EBM1"]
    ebm.mismark = True
    r = ebm.cast_vote(ebm.start_session(BallotScan.of(pb), NOW + 10), VOTE, NOW + 20)
    assert readback(r, BallotScan.of(pb)) != VOTE


def test_fallback_plain_copies_preferences():
    prefs = {"LA": [1, 2], "LC_ATL": [1]}
    pb = fallback_plain(prefs, "D1")
    prefs["LA"][0] = 9
    assert pb.preferences == {"LA": [1, 2], "LC_ATL": [1]} and pb.district == "D1"
