import json

import pytest

from vvote import ballotgen
from vvote.crypto.signatures import bls_verify
from vvote.ebm import BallotScan
from vvote.errors import OutOfBallots, Rejected, SessionLockError, StationLocked, UnavailableError, VVoteError
from vvote.messages import serial_sig_payload

DAY = 86400
NOW = DAY + 3600


def test_issued_ballot_is_signed_and_reduced(small_election):
    e = small_election
    p = e.printers["P1"]
    pb = p.request_ballot("D2", NOW)
    assert bls_verify(e.registry.wbb_joint_key, serial_sig_payload(pb.serial, "D2"), pb.serial_sig)
    assert not bls_verify(e.registry.wbb_joint_key, serial_sig_payload(pb.serial, "D1"), pb.serial_sig)
    assert pb.names["LA"] == ["C"] and pb.permutation["LA"] == [0]
    b = p.ballots[pb.serial]
    assert pb.permutation == ballotgen.reduced_permutation(b.pi, e.config.layout, e.config.race_sizes("D2"))
    # serials are issued once, in order
    assert p.request_ballot("D1", NOW).serial != pb.serial


def test_print_confirmation_matches_and_locks_out_voting(small_election):
    e = small_election
    p = e.printers["P1"]
    pb = p.request_ballot("D1", NOW)
    proof = p.request_print_confirmation(pb.serial, NOW + 10)
    assert proof.matches_print and proof.result == "opened"
    e.gossip()
    with pytest.raises(SessionLockError):
        e.ebms["EBM1"].start_session(BallotScan.of(pb), NOW + 20)


def test_misprint_is_exposed_by_confirmation(small_election):
    e = small_election
    p = e.printers["P1"]
    p.faults.misprint.add(p.queue[0])
    pb = p.request_ballot("D1", NOW)
    proof = p.request_print_confirmation(pb.serial, NOW + 10)
    assert not proof.matches_print


def test_deleting_randomness_is_forward_secret(small_election, tmp_path):
    p = small_election.printers["P1"]
    pb = p.request_ballot("D1", NOW)
    with pytest.raises(ValueError):
        p.delete_randomness(pb.serial, "whenever")
    p.delete_randomness(pb.serial, "vote-cast-notification")
    p.delete_randomness(pb.serial, "vote-cast-notification")
    with pytest.raises(UnavailableError):
        p.request_print_confirmation(pb.serial, NOW + 10)
    p.persist(tmp_path / "printer.json")
    state = json.loads((tmp_path / "printer.json").read_text())
    assert pb.serial not in state["openings"] and pb.serial in state["deleted"]


def test_unconfirmed_ballots_expire(small_election):
    p = small_election.printers["P1"]
    pb = p.request_ballot("D1", NOW)
    assert p.expire(NOW + 10) == []
    assert p.expire(NOW + small_election.config.timing.confirm_window_s + 1) == [pb.serial]


def test_retired_printer_issues_nothing(small_election):
    p = small_election.printers["P1"]
    left = p.retire()
    assert left and all(s in p.deleted for s in left)
    with pytest.raises(OutOfBallots):
        p.request_ballot("D1", NOW)


def test_running_out_of_ballots(small_election):
    p = small_election.printers["P1"]
    with pytest.raises(OutOfBallots):
        for _ in range(100):
            p.request_ballot("D1", NOW)
    with pytest.raises(VVoteError):
        p.request_print_confirmation("P1:999", NOW)


def test_cancellation_rules(small_election):
    e = small_election
    station = e.stations[e.config.stations[0]]
    pbs = [e.printers["P1"].request_ballot("D1", NOW) for _ in range(e.config.cancel_limit + 1)]
    with pytest.raises(VVoteError):
        station.cancel_vote(pbs[0], False, NOW)
    e.authority.refuse.add(pbs[0].serial)
    with pytest.raises(Rejected):
        station.cancel_vote(pbs[0], True, NOW)
    e.authority.refuse.clear()
    for pb in pbs[:-1]:
        r = station.cancel_vote(pb, True, NOW + 10)
        assert r.serial == pb.serial
    with pytest.raises(StationLocked):
        station.cancel_vote(pbs[-1], True, NOW + 20)
    assert len(station.paper_log) == e.config.cancel_limit


def test_authority_refuses_unknown_sender(small_election):
    e = small_election
    req = {"serialNo": "P1:1", "district": "D1", "senderID": "EBM1", "senderSignature": "00" * 64}
    assert e.authority.authorise(req) is None


def test_alg2_fast_confirmation_defers_openings(small_election_alg2):
    e = small_election_alg2
    p = e.printers["P1"]
    pb = p.request_ballot("D1", NOW)
    proof = p.fast_confirmation(pb.serial, NOW + 10)
    assert proof.matches_print and p.deferred == [pb.serial]
    p.delete_randomness(pb.serial, "confirmed")
    assert pb.serial in p.openings  # still owed to the board
    assert p.post_deferred_openings(NOW + 20) is not None
    assert p.deferred == [] and p.post_deferred_openings(NOW + 30) is None
    p.delete_randomness(pb.serial, "confirmed")
    assert pb.serial not in p.openings
