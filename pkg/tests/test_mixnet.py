from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vvote import ballotgen, mixnet
from vvote.config import base_id
from vvote.crypto import elgamal, group
from vvote.crypto.drbg import Drbg
from vvote.crypto.elgamal import Ciphertext
from vvote.crypto.hashing import NULL_ELEMENT
from vvote.crypto.threshold import keygen_threshold
from vvote.errors import ParameterError
from vvote.mixnet import CastVote, MixBatch, MixServer, MixTranscript, run_mix, shuffle_stage, verify_rpc

KEYS = keygen_threshold(3, 2, b"mixnet-tests", "dealer")
PK, SK = KEYS.public_key, KEYS.dealer_secret


def batch(rows: int, width: int, seed: str = "b") -> MixBatch:
    rng = Drbg(seed)
    msgs = [[base_id("LA", 1 + rng.randbelow(5)) for _ in range(width)] for _ in range(rows)]
    cts = [elgamal.encrypt_batch(PK, m, [group.random_scalar(rng) for _ in m]) for m in msgs]
    return MixBatch("LA/D1", width, cts, [f"P1:{i}" for i in range(rows)])


def plain(rows) -> Counter:
    return Counter(tuple(elgamal.decrypt(SK, c) for c in r) for r in rows)


def servers(k: int, seed: str = "mix") -> list[MixServer]:
    return [MixServer(i, Drbg(f"{seed}/{i}")) for i in range(1, k + 1)]


def test_shuffle_stage_against_direct_reencryption():
    b = batch(3, 2)
    perm, rands = [2, 0, 1], [[5, 6], [7, 8], [9, 10]]
    out = shuffle_stage(PK, b.rows, perm, rands)
    for i, row in enumerate(b.rows):
        for c, r, o in zip(row, rands[i], out[perm[i]]):
            want = Ciphertext(group.add(c.c1, group.base_mul(r)), group.add(c.c2, group.mul(PK, r)))
            assert o == want


def test_honest_mix_verifies_and_preserves_votes():
    b = batch(6, 3)
    tr = run_mix(b, servers(2), PK)
    assert verify_rpc(tr, PK) == []
    assert plain(tr.output) == plain(b.rows)
    assert tr.output != b.rows
    again = MixTranscript.from_json(tr.to_json())
    assert verify_rpc(again, PK) == []


def test_identity_servers_leave_rows_in_place():
    b = batch(4, 2)
    tr = run_mix(b, [MixServer(1, Drbg("i"), identity=True)], PK)
    assert tr.output == b.rows and verify_rpc(tr, PK) == []


@settings(max_examples=10)
@given(rows=st.integers(1, 6), width=st.integers(1, 3), seed=st.text(min_size=1, max_size=5))
def test_mix_is_a_multiset_permutation(rows, width, seed):
    b = batch(rows, width, seed)
    tr = run_mix(b, servers(2, seed), PK)
    assert plain(tr.output) == plain(b.rows)
    assert verify_rpc(tr, PK) == []


def test_challenges_are_deterministic_and_need_every_contribution():
    a = mixnet.derive_challenges(b"d", [b"x", b"y"], [1, 2], 16)
    assert a == mixnet.derive_challenges(b"d", [b"x", b"y"], [1, 2], 16)
    assert a != mixnet.derive_challenges(b"d", [b"x", b"z"], [1, 2], 16)
    with pytest.raises(ParameterError):
        mixnet.derive_challenges(b"d", [b"x", None], [1, 2], 4)


def test_substituted_row_is_named_when_challenged():
    caught = 0
    for k in range(40):
        srv = servers(2, f"sub{k}")
        srv[0].substitute = {0}
        failures = verify_rpc(run_mix(batch(4, 2), srv, PK), PK)
        if failures:
            caught += 1
            assert all(f.startswith("server 1 stage 2") for f in failures)
    assert 0 < caught < 40


def test_tampered_transcript_parts_are_named():
    tr = run_mix(batch(4, 2), servers(2), PK)
    bad = MixTranscript.from_json(tr.to_json())
    bad.contributions[1] = (b"\x00" * 32, bad.contributions[1][1])
    assert verify_rpc(bad, PK) == ["server 2: challenge contribution does not open its commitment"]

    bad = MixTranscript.from_json(tr.to_json())
    bad.openings[1] = bad.openings[1][:-1]
    assert any("exactly one side" in f for f in verify_rpc(bad, PK))

    bad = MixTranscript.from_json(tr.to_json())
    op = bad.openings[2][0]
    op.randomness[0] = (op.randomness[0] + 1) % group.ORDER
    assert any(f.startswith("server 2") and "re-encryption link fails" in f for f in verify_rpc(bad, PK))


def test_padding_and_decryption(small_election):
    e = small_election
    cfg = e.config
    pk = e.registry.election_key
    p = e.printers["P1"]
    votes, reductions = [], {}
    for k, s in enumerate(list(p.queue)[:3]):
        b = p.ballots[s]
        reductions[s] = ballotgen.reduction_disclosure(b, p.openings[s], cfg.layout, cfg.race_sizes("D1"))
        la = [1, 2] if k % 2 else [0, 1]
        votes.append(CastVote(s, "D1", {"LA": la, "LC_ATL": [1]}))
    batches = mixnet.build_mix_input(votes, p.ballots, reductions, cfg, pk, b"pad")
    la = batches["LA/D1"]
    assert la.length == 2 and all(len(r) == 2 for r in la.rows)
    unpadded = [mixnet.vote_row(p.ballots[v.serial], reductions[v.serial], cfg.layout, "LA", v.races["LA"]) for v in votes]
    assert mixnet.check_padding(la, unpadded, pk, b"pad") is None
    assert mixnet.check_padding(la, unpadded, pk, b"other") is not None

    holders = {i: e.keys.election.shares[i] for i in (1, 2, 3, 4, 5, 6)}
    vks = e.keys.election.verification_keys
    db = mixnet.decrypt_outputs(cfg, "LA/D1", la.rows, holders, vks, cfg.wbb_threshold, corrupt=3)
    assert {r["index"] for r in db.rejected} == {3}
    assert mixnet.verify_decryption(db, la.rows, vks, cfg.wbb_threshold, cfg) != []  # the bad shares are published
    db = mixnet.decrypt_outputs(cfg, "LA/D1", la.rows, holders, vks, cfg.wbb_threshold)
    assert mixnet.verify_decryption(db, la.rows, vks, cfg.wbb_threshold, cfg) == []
    prefs = Counter(tuple(o["preferences"]) for o in db.outputs)
    assert sum(prefs.values()) == 3 and all(len(k) in (1, 2) for k in prefs)
    db.elements[0][0] = NULL_ELEMENT.hex()
    assert any("does not match the shares" in f for f in mixnet.verify_decryption(db, la.rows, vks, cfg.wbb_threshold, cfg))


def test_name_rows_strips_padding_and_flags(small_election):
    cfg = small_election.config
    rows = mixnet.name_rows(cfg, "LA/D1", [[base_id("LA", 2), NULL_ELEMENT], [NULL_ELEMENT, NULL_ELEMENT], [b"\x01" * 32, NULL_ELEMENT]])
    assert rows[0] == {"number": "LA/D1#1", "preferences": ["B"]}
    assert rows[1]["flag"] == "empty" and rows[2]["flag"] == "unknown element"
