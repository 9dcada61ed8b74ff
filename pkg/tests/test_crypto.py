from __future__ import annotations

import hashlib
import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from careid import crypto
from careid.crypto import (
    AuthenticationFailure,
    EmptyTree,
    InvalidSeed,
    KeyPair,
    b58decode,
    b58encode,
    commit_attribute,
    commitment_digest,
    generate_keypair,
    merkle_prove,
    merkle_root,
    merkle_verify,
    open_envelope,
    seal,
    sign,
    verify,
)


# ---------------------------------------------------------------------------
# Key pairs
# ---------------------------------------------------------------------------

def test_keypair_deterministic_for_seed():
    a = generate_keypair(bytes(32))
    b = generate_keypair(bytes(32))
    assert a.public_key == b.public_key
    assert len(a.public_key) == 32


def test_random_seeds_give_distinct_keys():
    # collision scan over 1,000 fresh seeds
    keys = {generate_keypair(os.urandom(32)).public_key for _ in range(1000)}
    assert len(keys) == 1000


def test_short_seed_rejected():
    with pytest.raises(InvalidSeed):
        generate_keypair(b"\x01" * 16)


def test_did_is_base58_of_first_16_key_bytes():
    kp = generate_keypair(bytes(32))
    assert kp.did == b58encode(kp.public_key[:16])
    assert kp.verkey == b58encode(kp.public_key)
    assert b58decode(kp.verkey) == kp.public_key


def test_base58_round_trip_with_leading_zeros():
    for raw in [b"", b"\x00", b"\x00\x00hello", os.urandom(20)]:
        assert b58decode(b58encode(raw)) == raw


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------

def test_sign_verify_round_trip():
    kp = generate_keypair()
    msg = b"prescription for patient 42"
    assert verify(kp.public_key, msg, sign(kp, msg))


def test_flipped_message_bit_fails():
    kp = generate_keypair()
    msg = bytearray(b"prescription for patient 42")
    sig = sign(kp, bytes(msg))
    msg[0] ^= 0x01
    assert not verify(kp.public_key, bytes(msg), sig)


def test_unrelated_keys_never_verify():
    kp = generate_keypair()
    msg = b"hello"
    sig = sign(kp, msg)
    for _ in range(100):
        other = generate_keypair()
        assert not verify(other.public_key, msg, sig)


def test_verify_never_raises_on_garbage():
    kp = generate_keypair()
    assert not verify(kp.public_key, b"m", b"not a signature")
    assert not verify(b"\xff" * 32, b"m", b"\x00" * 64)


# ---------------------------------------------------------------------------
# Key conversion (exchange keys come from the same identity key)
# ---------------------------------------------------------------------------

def test_ed25519_to_x25519_matches_scalar_derivation():
    # Montgomery u of the Ed25519 public key must equal the X25519 public key
    # of the converted secret scalar, otherwise sealed envelopes cannot work.
    from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey

    for _ in range(25):
        seed = os.urandom(32)
        kp = generate_keypair(seed)
        scalar = hashlib.sha512(seed).digest()[:32]
        expected = X25519PrivateKey.from_private_bytes(scalar).public_key().public_bytes_raw()
        assert crypto.ed25519_pk_to_x25519(kp.public_key) == expected


# ---------------------------------------------------------------------------
# Commitments
# ---------------------------------------------------------------------------

def test_commitment_recomputable():
    c = commit_attribute("fullName", "Ada Lovelace")
    assert c.digest == commitment_digest("fullName", "Ada Lovelace", c.salt)
    assert len(c.salt) == 16


def test_commitment_hiding_smoke():
    # same value, different salts: 1,000 pairs, all digests distinct
    digests = set()
    for _ in range(1000):
        digests.add(commit_attribute("attr", "A").digest)
    assert len(digests) == 1000


def test_commitment_binding_search():
    target = commit_attribute("attr", "genuine")
    for _ in range(10**5):
        value = os.urandom(8).hex()
        salt = os.urandom(16)
        if value == "genuine" and salt == target.salt:
            continue
        assert commitment_digest("attr", value, salt) != target.digest


def test_commitment_field_boundaries_unambiguous():
    # ("ab", "c") and ("a", "bc") must not collide
    salt = bytes(16)
    assert commitment_digest("ab", "c", salt) != commitment_digest("a", "bc", salt)


# ---------------------------------------------------------------------------
# Merkle trees
# ---------------------------------------------------------------------------

def leaf(i: int) -> bytes:
    return hashlib.sha256(f"leaf-{i}".encode()).digest()


def test_single_leaf_root_is_hash_with_pad():
    root = merkle_root([leaf(0)])
    assert root == crypto.sha256d(crypto.DOMAIN_MERKLE_NODE, leaf(0), crypto.PAD_LEAF)


def test_all_indices_verify_in_64_leaf_tree():
    leaves = [leaf(i) for i in range(64)]
    root = merkle_root(leaves)
    for i in range(64):
        assert merkle_verify(root, leaves[i], merkle_prove(leaves, i))


def test_proof_fails_against_mutated_tree():
    leaves = [leaf(i) for i in range(8)]
    proof = merkle_prove(leaves, 3)
    mutated = list(leaves)
    mutated[5] = hashlib.sha256(b"tampered").digest()
    assert not merkle_verify(merkle_root(mutated), leaves[3], proof)


def test_round_trip_all_leaf_counts_to_128():
    for n in range(1, 129):
        leaves = [leaf(i) for i in range(n)]
        root = merkle_root(leaves)
        for i in range(n):
            assert merkle_verify(root, leaves[i], merkle_prove(leaves, i))


def test_path_length_matches_padded_depth():
    # padded to the next power of two, minimum 2
    import math

    for n in (1, 2, 3, 5, 8, 64, 100):
        depth = max(1, math.ceil(math.log2(n)))
        assert len(merkle_prove([leaf(i) for i in range(n)], 0).path) == depth


def test_merkle_errors():
    with pytest.raises(EmptyTree):
        merkle_root([])
    with pytest.raises(IndexError):
        merkle_prove([leaf(0)], 1)


@given(st.integers(min_value=1, max_value=40), st.randoms())
@settings(max_examples=30, deadline=None)
def test_merkle_round_trip_property(n, rng):
    leaves = [hashlib.sha256(rng.randbytes(8)).digest() for _ in range(n)]
    root = merkle_root(leaves)
    i = rng.randrange(n)
    assert merkle_verify(root, leaves[i], merkle_prove(leaves, i))


# ---------------------------------------------------------------------------
# Sealed envelopes
# ---------------------------------------------------------------------------

@pytest.fixture
def pair() -> tuple[KeyPair, KeyPair]:
    return generate_keypair(), generate_keypair()


def test_empty_message_round_trip(pair):
    alice, bob = pair
    env = seal(alice, bob.public_key, b"")
    assert open_envelope(bob, env) == b""


def test_round_trip_various_sizes(pair):
    alice, bob = pair
    for size in (1, 17, 1024, 64 * 1024):
        msg = os.urandom(size)
        assert open_envelope(bob, seal(alice, bob.public_key, msg)) == msg


def test_third_party_cannot_open(pair):
    alice, bob = pair
    eve = generate_keypair()
    env = seal(alice, bob.public_key, b"secret")
    with pytest.raises(AuthenticationFailure):
        open_envelope(eve, env)


def test_every_ciphertext_byte_is_authenticated(pair):
    alice, bob = pair
    env = seal(alice, bob.public_key, b"short msg")
    for i in range(len(env.ciphertext)):
        broken = bytearray(env.ciphertext)
        broken[i] ^= 0x01
        tampered = crypto.SealedEnvelope(
            sender_key=env.sender_key,
            recipient_key=env.recipient_key,
            nonce=env.nonce,
            timestamp_ms=env.timestamp_ms,
            ciphertext=bytes(broken),
        )
        with pytest.raises(AuthenticationFailure):
            open_envelope(bob, tampered)


def test_timestamp_is_authenticated(pair):
    alice, bob = pair
    env = seal(alice, bob.public_key, b"hello", timestamp_ms=1000)
    shifted = crypto.SealedEnvelope(
        sender_key=env.sender_key,
        recipient_key=env.recipient_key,
        nonce=env.nonce,
        timestamp_ms=2000,
        ciphertext=env.ciphertext,
    )
    with pytest.raises(AuthenticationFailure):
        open_envelope(bob, shifted)


def test_envelope_serialization_round_trip(pair):
    alice, bob = pair
    env = seal(alice, bob.public_key, b"payload")
    again = crypto.SealedEnvelope.from_bytes(env.to_bytes())
    assert open_envelope(bob, again) == b"payload"


def test_nonces_unique_per_seal(pair):
    alice, bob = pair
    nonces = {seal(alice, bob.public_key, b"m").nonce for _ in range(100)}
    assert len(nonces) == 100


@given(st.binary(min_size=0, max_size=2048))
@settings(max_examples=50, deadline=None)
def test_envelope_round_trip_property(payload):
    alice = generate_keypair(b"\x01" * 32)
    bob = generate_keypair(b"\x02" * 32)
    assert open_envelope(bob, seal(alice, bob.public_key, payload)) == payload


# ---------------------------------------------------------------------------
# Passphrase blobs
# ---------------------------------------------------------------------------

def test_passphrase_round_trip():
    blob = crypto.passphrase_seal("hunter2", b"wallet contents")
    assert crypto.passphrase_open("hunter2", blob) == b"wallet contents"


def test_wrong_passphrase_yields_nothing():
    blob = crypto.passphrase_seal("hunter2", b"wallet contents")
    with pytest.raises(AuthenticationFailure):
        crypto.passphrase_open("hunter3", blob)


def test_blob_hides_plaintext():
    blob = crypto.passphrase_seal("pw", b"SENTINEL-VALUE")
    assert b"SENTINEL-VALUE" not in blob


# ---------------------------------------------------------------------------
# Client puzzles
# ---------------------------------------------------------------------------

def test_puzzle_solve_and_check():
    challenge = os.urandom(16)
    solution = crypto.puzzle_solve(challenge, 12)
    assert crypto.puzzle_check(challenge, solution, 12)
    wrong = next(
        c.to_bytes(8, "big")
        for c in range(10)
        if not crypto.puzzle_check(challenge, c.to_bytes(8, "big"), 12)
    )
    assert not crypto.puzzle_check(challenge, wrong, 12)


def test_puzzle_difficulty_cap():
    with pytest.raises(crypto.CryptoError):
        crypto.puzzle_solve(os.urandom(16), 25)


def test_merkle_proof_position_matches_index():
    leaves = [crypto.sha256d(crypto.DOMAIN_COMMITMENT, bytes([i])) for i in range(16)]
    for i in range(16):
        proof = crypto.merkle_prove(leaves, i)
        assert proof.position() == i
        assert proof.leaf_index == i
