import hashlib

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vvote import ballotgen
from vvote.ballotgen import (
    GenAuditRecord,
    GenericBallot,
    RandomnessServer,
    check_reduction,
    decrypt_table,
    printer_generate,
    reduced_permutation,
    reduction_disclosure,
    rgs_generate,
    select_gen_audit,
    verify_gen_audit,
)
from vvote.config import Layout, base_id
from vvote.crypto import Drbg, group
from vvote.crypto.commit import verify_commitment
from vvote.crypto.elgamal import Ciphertext
from vvote.crypto.symmetric import sym_encrypt
from vvote.errors import CommitmentMismatch, ParameterError, SequencingError

L = group.ORDER
SK_E = 0xC0FFEE
PK_E = group.base_mul(SK_E)
PRINTER_SK = 0xBEEF


def make_tables(layout: Layout, b: int, G: int = 2, seed: str = "bg"):
    serials = ballotgen.serial_numbers("P1", b)
    servers = [RandomnessServer(g, Drbg(f"{seed}/rgs{g}")) for g in range(1, G + 1)]
    crts = [srv.generate("P1", serials, layout.columns) for srv in servers]
    released = [srv.release("P1", group.base_mul(PRINTER_SK), range(1, G + 1), G) for srv in servers]
    return servers, crts, [r[0] for r in released], [r[1] for r in released], serials


def generate(layout, b=1, G=2, seed="bg"):
    servers, crts, rts, esks, serials = make_tables(layout, b, G, seed)
    ballots, openings = printer_generate(rts, esks, PRINTER_SK, crts, layout, PK_E, serials)
    return servers, crts, rts, ballots, openings


def alg1_oracle(openings, layout, pk):
    """Straight-line Alg. 1: sha256 of the servers' r values, textbook ElGamal, byte sort."""
    cts, pi = [None] * layout.n, [0] * layout.n
    for race, size in layout.sizes:
        off = sum(s for r, s in layout.sizes[: [x for x, _ in layout.sizes].index(race)])
        base = []
        for k in range(size):
            col = off + k
            rand = int.from_bytes(hashlib.sha256(b"".join(op[col][0] for op in openings)).digest(), "big") % L
            c1 = group.base_mul(rand)
            c2 = group.add(base_id(race, k + 1), group.mul(pk, rand))
            base.append((c1 + c2, k))
        for pos, (blob, k) in enumerate(sorted(base)):
            cts[off + pos] = Ciphertext(blob[:32], blob[32:])
            pi[off + k] = pos
    return tuple(cts), tuple(pi)


LA3 = Layout((("LA", 3),), False)


def test_rgs_table_shapes_and_openings():
    rt, crt, key = rgs_generate(2, 3, "alg1", seed=b"s")
    assert sum(len(r) for r in rt.cells.values()) == 6 and sum(len(r) for r in crt.cells.values()) == 6
    for s, row in decrypt_table(rt, key).items():
        for (r, big_r), c in zip(row, crt.cells[s]):
            assert verify_commitment(c, r, big_r)
    rt2, crt2, _ = rgs_generate(2, 3, "alg2", seed=b"s")
    assert sum(len(r) for r in rt2.cells.values()) == 8
    with pytest.raises(ParameterError):
        rgs_generate(0, 3)


def test_release_is_gated_on_every_commitment_table():
    srv = RandomnessServer(1, Drbg("gate"))
    srv.generate("P1", ["P1:1"], 3)
    with pytest.raises(SequencingError):
        srv.release("P1", group.base_mul(PRINTER_SK), [1, 2], 3)
    srv.release("P1", group.base_mul(PRINTER_SK), [1, 2, 3], 3)


def test_printer_generation_matches_oracle():
    _, _, _, ballots, openings = generate(LA3)
    b = ballots["P1:1"]
    assert (b.cts, b.pi) == alg1_oracle(openings["P1:1"], LA3, PK_E)
    # sorting defines pi: the ciphertext of official candidate k sits at position pi[k]
    assert list(b.cts) == sorted(b.cts)


def test_printer_generation_is_deterministic():
    a = generate(LA3, b=3, seed="det")[3]
    b = generate(LA3, b=3, seed="det")[3]
    assert a == b


def test_single_candidate_ballot_has_identity_pi():
    _, _, _, ballots, openings = generate(Layout((("LA", 1),), False))
    assert ballots["P1:1"].pi == (0,)
    assert len(ballots["P1:1"].cts) == 1


def test_bad_table_cell_aborts_naming_server_serial_column():
    layout = LA3
    servers, crts, rts, esks, serials = make_tables(layout, 2)
    _, key = servers[1]._tables["P1"]
    rts[1].cells["P1:2"][2] = sym_encrypt(key, bytes(64), bytes(12), b"P1:2#3")
    with pytest.raises(CommitmentMismatch) as ei:
        printer_generate(rts, esks, PRINTER_SK, crts, layout, PK_E, serials)
    assert (ei.value.peer, ei.value.serial, ei.value.column) == (2, "P1:2", 3)


def test_gen_audit_selection_size_and_determinism():
    serials = ballotgen.serial_numbers("P1", 100)
    a = select_gen_audit(b"digest", 0.10, serials)
    assert len(a) == 10 and a == select_gen_audit(b"digest", 0.10, serials)
    assert len(select_gen_audit(b"d", 0.105, serials)) == 11
    with pytest.raises(ParameterError):
        select_gen_audit(b"d", 1.0, serials)
    differ = sum(select_gen_audit(bytes([i]), 0.1, serials) != select_gen_audit(bytes([i, 1]), 0.1, serials) for i in range(100))
    assert differ == 100


def test_gen_audit_verdicts():
    _, crts, _, ballots, openings = generate(LA3, b=2)
    b = ballots["P1:1"]
    rec = GenAuditRecord("P1:1", openings["P1:1"])
    assert verify_gen_audit(rec, crts, b, LA3, PK_E).ok
    # round trip through the published form
    rec2 = GenAuditRecord.from_json(rec.to_json())
    pub = GenericBallot.from_public_json(b.public_json())
    assert verify_gen_audit(rec2, crts, pub, LA3, PK_E).ok

    swapped = GenericBallot(b.serial, (b.cts[0], ballots["P1:2"].cts[1], b.cts[2]))
    v = verify_gen_audit(rec, crts, swapped, LA3, PK_E)
    assert (v.ok, v.failure, v.column) == (False, "mismatch", 2)

    v = verify_gen_audit(GenAuditRecord("P1:1", None), crts, b, LA3, PK_E)
    assert v.failure == "missing"


def test_self_chosen_randomness_is_caught():
    _, crts, _, ballots, openings = generate(LA3)
    own = tuple(sorted(ballotgen.elgamal.encrypt(PK_E, base_id("LA", k + 1), 1000 + k) for k in range(3)))
    v = verify_gen_audit(GenAuditRecord("P1:1", openings["P1:1"]), crts, GenericBallot("P1:1", own), LA3, PK_E)
    assert not v.ok and v.failure == "mismatch"


def test_alg2_commitment_to_pi():
    layout = Layout((("LA", 3),), True)
    _, crts, _, ballots, openings = generate(layout)
    b = ballots["P1:1"]
    assert b.commit_pi is not None
    assert verify_gen_audit(GenAuditRecord("P1:1", openings["P1:1"]), crts, b, layout, PK_E).ok
    forged = GenericBallot(b.serial, b.cts, b.pi, hashlib.sha256(b"other").digest())
    v = verify_gen_audit(GenAuditRecord("P1:1", openings["P1:1"]), crts, forged, layout, PK_E)
    assert v.failure == "pi"


def test_reduction_covers_unused_candidates_at_their_positions():
    layout = Layout((("LA", 5),), False)
    _, _, _, ballots, openings = generate(layout, seed="reduce")
    b = ballots["P1:1"]
    red = reduction_disclosure(b, openings["P1:1"], layout, {"LA": 3})
    assert [(r.candidate, r.position) for r in red] == [(4, b.pi[3] + 1), (5, b.pi[4] + 1)]
    assert check_reduction(b, red, layout, {"LA": 3}, PK_E) is None
    assert reduction_disclosure(b, openings["P1:1"], layout, {"LA": 5}) == []
    wrong = [ballotgen.Reduction("LA", 4, red[1].position, red[0].randomness), ballotgen.Reduction("LA", 5, red[0].position, red[1].randomness)]
    assert check_reduction(b, wrong, layout, {"LA": 3}, PK_E) is not None
    assert check_reduction(b, red[:1], layout, {"LA": 3}, PK_E) is not None


@given(pi=st.permutations(range(6)), m=st.integers(min_value=1, max_value=6))
def test_reduced_permutation_is_a_bijection_preserving_order(pi, m):
    layout = Layout((("LA", 6),), False)
    red = reduced_permutation(pi, layout, {"LA": m})["LA"]
    assert sorted(red) == list(range(m))
    for a in range(m):
        for b in range(m):
            assert (red[a] < red[b]) == (pi[a] < pi[b])
