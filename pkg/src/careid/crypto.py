"""Deterministic signatures, domain-separated hashing, salted commitments,
Merkle trees, and authenticated pairwise encryption.

One 256-bit hash (SHA-256) is used everywhere, with a single prefix byte
per use so digests from different protocols can never collide:

    0x01  attribute commitments
    0x02  Merkle interior nodes
    0x03  transaction chaining
    0x04  revocation status leaves
    0x05  holder-binding leaves
    0x06  revocation-binding leaves
    0x07  presentation challenges
    0x08  client puzzles

Identity keys are Ed25519 (32-byte public keys). The same 32-byte seed also
yields an X25519 key for pairwise encryption; the recipient's X25519 public
key is derived from their Ed25519 verification key via the birational map
between the two curves, so one public key per identity suffices.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from base64 import urlsafe_b64decode, urlsafe_b64encode
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.hashes import SHA256
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

SIGNATURE_SCHEME_ID = "ed25519-sha256-v1"

SEED_LEN = 32
SALT_LEN = 16
NONCE_LEN = 24

DOMAIN_COMMITMENT = b"\x01"
DOMAIN_MERKLE_NODE = b"\x02"
DOMAIN_TXN_CHAIN = b"\x03"
DOMAIN_STATUS_LEAF = b"\x04"
DOMAIN_HOLDER_BINDING = b"\x05"
DOMAIN_REV_BINDING = b"\x06"
DOMAIN_PRESENTATION = b"\x07"
DOMAIN_PUZZLE = b"\x08"

# Fixed padding digest for Merkle trees; plain hash, no domain prefix, so the
# constant is reproducible from the string alone.
PAD_LEAF = hashlib.sha256(b"EMPTY-LEAF").digest()

_B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_CURVE25519_P = 2**255 - 19


class CryptoError(Exception):
    """Base class for failures in this module."""


class InvalidSeed(CryptoError):
    pass


class EmptyTree(CryptoError):
    pass


class AuthenticationFailure(CryptoError):
    pass


def sha256d(domain: bytes, *parts: bytes) -> bytes:
    """Domain-separated SHA-256 over the concatenation of ``parts``."""
    h = hashlib.sha256(domain)
    for part in parts:
        h.update(part)
    return h.digest()


def _lp(data: bytes) -> bytes:
    # 4-byte big-endian length prefix; keeps variable-length fields unambiguous
    return len(data).to_bytes(4, "big") + data


def b64e(data: bytes) -> str:
    return urlsafe_b64encode(data).decode("ascii").rstrip("=")


def b64d(text: str) -> bytes:
    pad = -len(text) % 4
    return urlsafe_b64decode(text + "=" * pad)


def canonical_json(obj) -> bytes:
    """Canonical serialization: sorted keys, no whitespace, UTF-8."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def b58encode(data: bytes) -> str:
    n = int.from_bytes(data, "big")
    out = ""
    while n:
        n, rem = divmod(n, 58)
        out = _B58_ALPHABET[rem] + out
    pad = 0
    for byte in data:
        if byte == 0:
            pad += 1
        else:
            break
    return "1" * pad + out


def b58decode(text: str) -> bytes:
    n = 0
    for ch in text:
        n = n * 58 + _B58_ALPHABET.index(ch)
    raw = n.to_bytes((n.bit_length() + 7) // 8, "big")
    pad = len(text) - len(text.lstrip("1"))
    return b"\x00" * pad + raw


# ---------------------------------------------------------------------------
# Key pairs, DIDs, signatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KeyPair:
    seed: bytes
    public_key: bytes

    @property
    def verkey(self) -> str:
        return b58encode(self.public_key)

    @property
    def did(self) -> str:
        return did_from_public_key(self.public_key)

    def _signing_key(self) -> Ed25519PrivateKey:
        return Ed25519PrivateKey.from_private_bytes(self.seed)

    def _exchange_key(self) -> X25519PrivateKey:
        # Same scalar an Ed25519 signer uses, reinterpreted on the Montgomery
        # curve (libsodium's sk-to-curve25519 conversion).
        scalar = hashlib.sha512(self.seed).digest()[:32]
        return X25519PrivateKey.from_private_bytes(scalar)


def generate_keypair(seed: bytes | None = None) -> KeyPair:
    """Derive an identity key pair; deterministic for a given 32-byte seed."""
    if seed is None:
        seed = os.urandom(SEED_LEN)
    if len(seed) != SEED_LEN:
        raise InvalidSeed(f"seed must be {SEED_LEN} bytes, got {len(seed)}")
    public = Ed25519PrivateKey.from_private_bytes(seed).public_key().public_bytes_raw()
    return KeyPair(seed=seed, public_key=public)


def did_from_public_key(public_key: bytes) -> str:
    """DID = base58 of the first 16 key bytes; verkey = base58 of all 32."""
    return b58encode(public_key[:16])


def sign(keypair: KeyPair, message: bytes) -> bytes:
    return keypair._signing_key().sign(message)


def verify(public_key: bytes, message: bytes, signature: bytes) -> bool:
    """True iff ``signature`` is valid; never raises on bad input."""
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False


# ---------------------------------------------------------------------------
# Salted attribute commitments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SaltedCommitment:
    attr_name: str
    value: str
    salt: bytes
    digest: bytes


def commit_attribute(attr_name: str, value: str, salt: bytes | None = None) -> SaltedCommitment:
    if salt is None:
        salt = os.urandom(SALT_LEN)
    digest = commitment_digest(attr_name, value, salt)
    return SaltedCommitment(attr_name=attr_name, value=value, salt=salt, digest=digest)


def commitment_digest(attr_name: str, value: str, salt: bytes) -> bytes:
    return sha256d(DOMAIN_COMMITMENT, _lp(attr_name.encode()), _lp(value.encode()), salt)


# ---------------------------------------------------------------------------
# Merkle trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MerkleProof:
    leaf_index: int
    path: tuple[tuple[bytes, str], ...]  # (sibling digest, "left" | "right")

    def to_dict(self) -> dict:
        return {
            "leafIndex": self.leaf_index,
            "path": [{"digest": b64e(d), "side": s} for d, s in self.path],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "MerkleProof":
        return cls(
            leaf_index=obj["leafIndex"],
            path=tuple((b64d(p["digest"]), p["side"]) for p in obj["path"]),
        )

    def position(self) -> int:
        """Leaf position implied by the path sides; a truthful proof has
        position() == leaf_index."""
        pos = 0
        for level, (_, side) in enumerate(self.path):
            if side == "left":
                pos |= 1 << level
        return pos


def _padded(leaves: list[bytes]) -> list[bytes]:
    if not leaves:
        raise EmptyTree("merkle tree needs at least one leaf")
    size = 2
    while size < len(leaves):
        size *= 2
    return list(leaves) + [PAD_LEAF] * (size - len(leaves))


def merkle_root(leaves: list[bytes]) -> bytes:
    level = _padded(leaves)
    while len(level) > 1:
        level = [
            sha256d(DOMAIN_MERKLE_NODE, level[i], level[i + 1])
            for i in range(0, len(level), 2)
        ]
    return level[0]


def merkle_prove(leaves: list[bytes], index: int) -> MerkleProof:
    if not 0 <= index < len(leaves):
        raise IndexError(f"leaf index {index} out of range for {len(leaves)} leaves")
    level = _padded(leaves)
    path = []
    pos = index
    while len(level) > 1:
        sibling = pos ^ 1
        side = "left" if sibling < pos else "right"
        path.append((level[sibling], side))
        level = [
            sha256d(DOMAIN_MERKLE_NODE, level[i], level[i + 1])
            for i in range(0, len(level), 2)
        ]
        pos //= 2
    return MerkleProof(leaf_index=index, path=tuple(path))


def merkle_verify(root: bytes, leaf: bytes, proof: MerkleProof) -> bool:
    node = leaf
    for sibling, side in proof.path:
        if side == "left":
            node = sha256d(DOMAIN_MERKLE_NODE, sibling, node)
        else:
            node = sha256d(DOMAIN_MERKLE_NODE, node, sibling)
    return node == root


# ---------------------------------------------------------------------------
# Sealed envelopes (pairwise authenticated encryption)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SealedEnvelope:
    sender_key: bytes
    recipient_key: bytes
    nonce: bytes
    timestamp_ms: int
    ciphertext: bytes

    def to_dict(self) -> dict:
        return {
            "senderKey": b64e(self.sender_key),
            "recipientKey": b64e(self.recipient_key),
            "nonce": b64e(self.nonce),
            "timestamp": self.timestamp_ms,
            "ciphertext": b64e(self.ciphertext),
        }

    def to_bytes(self) -> bytes:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "SealedEnvelope":
        return cls(
            sender_key=b64d(obj["senderKey"]),
            recipient_key=b64d(obj["recipientKey"]),
            nonce=b64d(obj["nonce"]),
            timestamp_ms=obj["timestamp"],
            ciphertext=b64d(obj["ciphertext"]),
        )

    @classmethod
    def from_bytes(cls, raw: bytes) -> "SealedEnvelope":
        return cls.from_dict(json.loads(raw.decode("utf-8")))


def ed25519_pk_to_x25519(public_key: bytes) -> bytes:
    """Map an Ed25519 verification key onto the equivalent X25519 public key.

    u = (1 + y) / (1 - y) mod p, where y is the decoded Edwards y-coordinate.
    """
    y = int.from_bytes(public_key, "little") & ((1 << 255) - 1)
    if (1 - y) % _CURVE25519_P == 0:
        raise CryptoError("degenerate public key")
    u = (1 + y) * pow(1 - y, _CURVE25519_P - 2, _CURVE25519_P) % _CURVE25519_P
    return u.to_bytes(32, "little")


def _envelope_key(shared: bytes, sender_key: bytes, recipient_key: bytes, nonce: bytes) -> bytes:
    # Per-message subkey: the 24-byte envelope nonce salts the derivation, so
    # the AEAD itself can run with a fixed zero nonce.
    return HKDF(
        algorithm=SHA256(),
        length=32,
        salt=nonce,
        info=b"careid-envelope-v1" + sender_key + recipient_key,
    ).derive(shared)


def seal(
    sender: KeyPair,
    recipient_public_key: bytes,
    message: bytes,
    timestamp_ms: int | None = None,
) -> SealedEnvelope:
    """Encrypt ``message`` so only the recipient can open it.

    Authentication binds sender key, recipient key, nonce, and timestamp:
    the keys and nonce via the subkey derivation, the timestamp as AEAD
    associated data.
    """
    if timestamp_ms is None:
        timestamp_ms = int(time.time() * 1000)
    nonce = os.urandom(NONCE_LEN)
    shared = sender._exchange_key().exchange(
        X25519PublicKey.from_public_bytes(ed25519_pk_to_x25519(recipient_public_key))
    )
    key = _envelope_key(shared, sender.public_key, recipient_public_key, nonce)
    aad = timestamp_ms.to_bytes(8, "big")
    ciphertext = ChaCha20Poly1305(key).encrypt(b"\x00" * 12, message, aad)
    return SealedEnvelope(
        sender_key=sender.public_key,
        recipient_key=recipient_public_key,
        nonce=nonce,
        timestamp_ms=timestamp_ms,
        ciphertext=ciphertext,
    )


def open_envelope(recipient: KeyPair, envelope: SealedEnvelope) -> bytes:
    if envelope.recipient_key != recipient.public_key:
        raise AuthenticationFailure("envelope addressed to a different key")
    shared = recipient._exchange_key().exchange(
        X25519PublicKey.from_public_bytes(ed25519_pk_to_x25519(envelope.sender_key))
    )
    key = _envelope_key(shared, envelope.sender_key, envelope.recipient_key, envelope.nonce)
    aad = envelope.timestamp_ms.to_bytes(8, "big")
    try:
        return ChaCha20Poly1305(key).decrypt(b"\x00" * 12, envelope.ciphertext, aad)
    except InvalidTag as exc:
        raise AuthenticationFailure("envelope failed authentication") from exc


# ---------------------------------------------------------------------------
# Passphrase-keyed blobs (wallet at rest)
# ---------------------------------------------------------------------------

_SCRYPT_N = 2**14
_SCRYPT_R = 8
_SCRYPT_P = 1


def passphrase_seal(passphrase: str, plaintext: bytes) -> bytes:
    """Encrypt ``plaintext`` under a scrypt-derived key; returns a JSON blob."""
    salt = os.urandom(SALT_LEN)
    nonce = os.urandom(12)
    key = hashlib.scrypt(
        passphrase.encode(), salt=salt, n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P, dklen=32
    )
    ciphertext = ChaCha20Poly1305(key).encrypt(nonce, plaintext, b"careid-wallet-v1")
    return canonical_json(
        {
            "format": "careid-wallet-v1",
            "kdf": {"name": "scrypt", "n": _SCRYPT_N, "r": _SCRYPT_R, "p": _SCRYPT_P},
            "salt": b64e(salt),
            "nonce": b64e(nonce),
            "ciphertext": b64e(ciphertext),
        }
    )


def passphrase_open(passphrase: str, blob: bytes) -> bytes:
    try:
        obj = json.loads(blob.decode("utf-8"))
        salt = b64d(obj["salt"])
        nonce = b64d(obj["nonce"])
        ciphertext = b64d(obj["ciphertext"])
        kdf = obj["kdf"]
        key = hashlib.scrypt(
            passphrase.encode(), salt=salt, n=kdf["n"], r=kdf["r"], p=kdf["p"], dklen=32
        )
        return ChaCha20Poly1305(key).decrypt(nonce, ciphertext, b"careid-wallet-v1")
    except InvalidTag as exc:
        raise AuthenticationFailure("wrong passphrase or corrupted blob") from exc
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise AuthenticationFailure("malformed wallet blob") from exc


# ---------------------------------------------------------------------------
# Client puzzles (hashcash-style)
# ---------------------------------------------------------------------------

MAX_PUZZLE_DIFFICULTY = 24


def puzzle_check(challenge: bytes, solution: bytes, difficulty: int) -> bool:
    digest = sha256d(DOMAIN_PUZZLE, challenge, solution)
    return int.from_bytes(digest, "big") >> (256 - difficulty) == 0


def puzzle_solve(challenge: bytes, difficulty: int) -> bytes:
    if difficulty > MAX_PUZZLE_DIFFICULTY:
        raise CryptoError(f"difficulty {difficulty} exceeds {MAX_PUZZLE_DIFFICULTY}")
    counter = 0
    while True:
        solution = counter.to_bytes(8, "big")
        if puzzle_check(challenge, solution, difficulty):
            return solution
        counter += 1
