import hashlib
import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vvote.crypto import (
    Ciphertext,
    Drbg,
    bls_keygen_threshold,
    bls_verify,
    candidate_id,
    canonical_sort,
    combine_decrypt,
    commit,
    decrypt,
    derive_randomness,
    encrypt,
    keygen_threshold,
    partial_decrypt,
    reencrypt,
    seal,
    signing_payload,
    sym_decrypt,
    sym_encrypt,
    threshold_combine,
    threshold_sign_share,
    unseal,
    verify_commitment,
)
from vvote.crypto import group
from vvote.crypto.hashing import check_distinct
from vvote.crypto.signatures import SigningKey, verify
from vvote.crypto.threshold import DecryptionShare
from vvote.errors import ConfigError, IntegrityError, ParameterError, ThresholdError

# ristretto255 group order, written out independently of vvote.crypto.group
L = 2**252 + 27742317777372353535851937790883648493

scalars = st.integers(min_value=1, max_value=L - 1)


@pytest.fixture(scope="module")
def dealer_keys():
    return keygen_threshold(7, 5, b"crypto-tests", "dealer")


def _msg(k: int) -> bytes:
    return group.base_mul(k + 11)


# -- group / ElGamal ---------------------------------------------------------------


def test_generator_has_group_order():
    assert group.mul(group.GENERATOR, L) == group.IDENTITY
    assert group.ORDER == L


@given(m=scalars, r=scalars, sk=scalars)
def test_decrypt_inverts_encrypt(m, r, sk):
    pk = group.base_mul(sk)
    pt = group.base_mul(m)
    assert decrypt(sk, encrypt(pk, pt, r)) == pt


@given(r=scalars, r2=st.integers(min_value=0, max_value=L - 1), sk=scalars)
def test_reencrypt_preserves_plaintext(r, r2, sk):
    pk = group.base_mul(sk)
    ct = encrypt(pk, _msg(3), r)
    assert decrypt(sk, reencrypt(pk, ct, r2)) == _msg(3)


def test_encrypt_rejects_zero_randomness():
    with pytest.raises(ParameterError):
        encrypt(group.base_mul(5), _msg(1), 0)


def test_encrypt_is_deterministic_and_injective_in_r():
    pk = group.base_mul(99)
    assert encrypt(pk, _msg(1), 7) == encrypt(pk, _msg(1), 7)
    assert encrypt(pk, _msg(1), 7) != encrypt(pk, _msg(1), 8)


def test_reencrypt_zero_is_identity_and_composes():
    pk = group.base_mul(1234)
    ct = encrypt(pk, _msg(2), 55)
    assert reencrypt(pk, ct, 0) == ct
    assert reencrypt(pk, reencrypt(pk, ct, 10), 20) == reencrypt(pk, ct, 30)


def test_encrypt_matches_textbook_formula():
    sk, r = 4242, 777
    pk = group.base_mul(sk)
    m = _msg(5)
    ct = encrypt(pk, m, r)
    assert ct.c1 == group.base_mul(r)
    assert ct.c2 == group.add(m, group.mul(pk, r))


def test_canonical_sort_is_byte_lexicographic():
    pk = group.base_mul(31337)
    cts = [encrypt(pk, _msg(k), 100 + k) for k in range(8)]
    order = canonical_sort(cts)
    keys = [cts[i].c1 + cts[i].c2 for i in order]
    assert keys == sorted(c.c1 + c.c2 for c in cts)


def test_canonical_sort_refuses_ties():
    ct = encrypt(group.base_mul(3), _msg(1), 9)
    with pytest.raises(ParameterError):
        canonical_sort([ct, ct])


def test_ciphertext_from_bytes_rejects_garbage():
    with pytest.raises(ParameterError):
        Ciphertext.from_bytes(b"\xff" * 64)
    with pytest.raises(ParameterError):
        Ciphertext.from_bytes(b"\x00" * 10)


# -- threshold decryption -----------------------------------------------------------


def test_keygen_shape_and_parameter_errors():
    km = keygen_threshold(7, 5, b"k", "dealer")
    assert sorted(km.shares) == list(range(1, 8))
    with pytest.raises(ParameterError):
        keygen_threshold(3, 4, b"k")
    with pytest.raises(ParameterError):
        keygen_threshold(3, 2, b"k", "nonsense")


def test_keygen_deterministic_under_seed():
    a = keygen_threshold(5, 3, b"same", "joint")
    b = keygen_threshold(5, 3, b"same", "joint")
    assert a.public_key == b.public_key and a.shares == b.shares


def test_any_t_subset_matches_dealer_decryption(dealer_keys):
    km = dealer_keys
    m = _msg(42)
    ct = encrypt(km.public_key, m, 987654321)
    assert decrypt(km.dealer_secret, ct) == m
    shares = {i: partial_decrypt(i, s, ct) for i, s in km.shares.items()}
    for subset in itertools.combinations(range(1, 8), 5):
        assert combine_decrypt(ct, [shares[i] for i in subset], km.verification_keys, 5) == m


def test_joint_ceremony_decrypts_like_dealer_mode():
    m = _msg(8)
    for mode in ("dealer", "joint"):
        km = keygen_threshold(3, 2, f"cross-{mode}".encode(), mode)
        ct = encrypt(km.public_key, m, 4321)
        a = combine_decrypt(ct, [partial_decrypt(i, km.shares[i], ct) for i in (1, 3)], km.verification_keys, 2)
        b = combine_decrypt(ct, [partial_decrypt(i, km.shares[i], ct) for i in (2, 3)], km.verification_keys, 2)
        assert a == b == m


def test_single_peer_threshold():
    km = keygen_threshold(1, 1, b"solo", "dealer")
    ct = encrypt(km.public_key, _msg(1), 5)
    assert combine_decrypt(ct, [partial_decrypt(1, km.shares[1], ct)], km.verification_keys, 1) == _msg(1)


def test_bad_proof_is_named_and_t_minus_one_fails(dealer_keys):
    km = dealer_keys
    ct = encrypt(km.public_key, _msg(1), 31)
    shares = [partial_decrypt(i, km.shares[i], ct) for i in range(1, 6)]
    bad = shares[2]
    shares[2] = DecryptionShare(bad.index, bad.value, bad.challenge ^ 1, bad.response)
    with pytest.raises(ThresholdError) as ei:
        combine_decrypt(ct, shares, km.verification_keys, 5)
    assert ei.value.invalid == (3,)
    with pytest.raises(ThresholdError):
        combine_decrypt(ct, shares[:2] + shares[3:], km.verification_keys, 5)


# -- commitments ------------------------------------------------------------------------


@given(m=st.binary(max_size=64), r=st.binary(min_size=32, max_size=32))
def test_commitment_opens_and_matches_plain_sha256(m, r):
    c = commit(m, r)
    assert c == hashlib.sha256(r + m).digest()
    assert verify_commitment(c, m, r)
    assert not verify_commitment(c, m + b"x", r)


def test_commitment_rejects_short_witness():
    with pytest.raises(ParameterError):
        commit(b"m", b"short")


def test_commitment_single_bit_flips_fail():
    m, r = b"ballot", bytes(range(32))
    c = commit(m, r)
    for i in range(len(m) * 8):
        mm = bytearray(m)
        mm[i // 8] ^= 1 << (i % 8)
        assert not verify_commitment(c, bytes(mm), r)
    for i in range(256):
        rr = bytearray(r)
        rr[i // 8] ^= 1 << (i % 8)
        assert not verify_commitment(c, m, bytes(rr))


def test_commitment_binding_random_pairs():
    rng = Drbg("binding")
    stored = commit(b"fixed message", rng.bytes(32))
    for _ in range(10_000):
        assert not verify_commitment(stored, rng.bytes(16), rng.bytes(32))


# -- symmetric --------------------------------------------------------------------------


@given(m=st.binary(max_size=200))
def test_sym_round_trip(m):
    key = bytes(range(32))
    assert sym_decrypt(key, sym_encrypt(key, m)) == m


def test_sym_wrong_key_and_tamper_raise_integrity_error():
    key = bytes(32)
    blob = sym_encrypt(key, b"table cell")
    with pytest.raises(IntegrityError):
        sym_decrypt(bytes([1]) + bytes(31), blob)
    with pytest.raises(IntegrityError):
        sym_decrypt(key, blob[:-1] + bytes([blob[-1] ^ 1]))
    with pytest.raises(ParameterError):
        sym_encrypt(b"short", b"x")
    assert sym_decrypt(key, sym_encrypt(key, b"")) == b""


def test_seal_round_trip():
    sk = 9_876_543
    blob = seal(group.base_mul(sk), b"table key", Drbg("seal"))
    assert unseal(sk, blob) == b"table key"
    with pytest.raises(IntegrityError):
        unseal(sk + 1, blob)


# -- signatures -------------------------------------------------------------------------


def test_ed25519_deterministic_and_binding():
    k = SigningKey.generate(Drbg("ed"))
    assert k.sign(b"m") == k.sign(b"m")
    assert verify(k.verify_key, b"m", k.sign(b"m"))
    assert not verify(k.verify_key, b"m2", k.sign(b"m"))


@pytest.fixture(scope="module")
def bls_keys():
    return bls_keygen_threshold(7, 5, b"bls-tests")


def test_threshold_signature_is_share_set_independent(bls_keys):
    msg = signing_payload("vote", "P1:1")
    shares = {i: threshold_sign_share(i, bls_keys.shares[i], msg) for i in bls_keys.shares}
    a = threshold_combine([shares[i] for i in (1, 2, 3, 4, 5)], 5)
    b = threshold_combine([shares[i] for i in (3, 4, 5, 6, 7)], 5)
    assert a == b
    assert bls_verify(bls_keys.joint_key, msg, a)
    assert not bls_verify(bls_keys.joint_key, msg + b"!", a)


def test_threshold_combine_errors(bls_keys):
    msg = b"commit"
    shares = [threshold_sign_share(i, bls_keys.shares[i], msg) for i in range(1, 5)]
    with pytest.raises(ThresholdError):
        threshold_combine(shares, 5)
    other = threshold_sign_share(5, bls_keys.shares[5], b"other")
    with pytest.raises(ThresholdError):
        threshold_combine(shares + [other], 5)


# -- derive_randomness / candidate ids ----------------------------------------------------


def _derive_oracle(parts):
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return int(h.hexdigest(), 16) % L


def test_derive_randomness_matches_straight_line_oracle():
    rng = Drbg("derive-oracle")
    for k in range(100):
        parts = [rng.bytes(32) for _ in range(1 + k % 4)]
        assert derive_randomness(parts) == _derive_oracle(parts)


def test_derive_randomness_order_sensitive_and_nonempty():
    a, b = b"\x01" * 32, b"\x02" * 32
    assert derive_randomness([a, b]) != derive_randomness([b, a])
    assert derive_randomness([a]) == int.from_bytes(hashlib.sha256(a).digest(), "big") % L
    with pytest.raises(ParameterError):
        derive_randomness([])


def test_candidate_ids_deterministic_and_distinct():
    assert candidate_id("Abbott", "LA") == candidate_id("Abbott", "LA")
    names = [f"cand{i}" for i in range(40)]
    ids = {n: candidate_id(n, "LC_BTL") for n in names}
    check_distinct(ids)
    assert len(set(ids.values())) == 40
    with pytest.raises(ConfigError):
        check_distinct({"a": ids["cand1"], "b": ids["cand1"]})
    with pytest.raises(ParameterError):
        candidate_id("", "LA")
