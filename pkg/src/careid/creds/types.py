"""Credential data types: schemas, definitions, credentials, presentations.

A credential pins every attribute behind a salted commitment; the commitment
digests, a holder-binding leaf, and a revocation-binding leaf form a Merkle
tree whose root the issuer signs. Presentations reveal chosen attributes with
their salts and membership proofs, so unrevealed values stay hidden while the
issuer signature still covers them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from careid import crypto


class CredsError(Exception):
    """Base error for credential operations."""


class InvalidSchema(CredsError):
    pass


class SchemaMismatch(CredsError):
    pass


class RegistryFull(CredsError):
    pass


class NotIssued(CredsError):
    pass


class AlreadyRevoked(CredsError):
    pass


class CredentialRevoked(CredsError):
    pass


class NotHolder(CredsError):
    pass


def make_schema_id(issuer_did: str, name: str, version: str) -> str:
    return f"{issuer_did}:2:{name}:{version}"


def make_cred_def_id(issuer_did: str, schema_seq_no: int, tag: str) -> str:
    return f"{issuer_did}:3:CL:{schema_seq_no}:{tag}"


def make_rev_reg_id(issuer_did: str, cred_def_id: str, tag: str) -> str:
    return f"{issuer_did}:4:{cred_def_id}:CL_ACCUM:{tag}"


@dataclass(frozen=True)
class Schema:
    name: str
    version: str
    attr_names: tuple[str, ...]

    def schema_id(self, issuer_did: str) -> str:
        return make_schema_id(issuer_did, self.name, self.version)

    def to_payload(self, issuer_did: str) -> dict:
        return {
            "schemaId": self.schema_id(issuer_did),
            "name": self.name,
            "version": self.version,
            "attrNames": list(self.attr_names),
            "issuerDid": issuer_did,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "Schema":
        return cls(
            name=payload["name"],
            version=payload["version"],
            attr_names=tuple(payload["attrNames"]),
        )


@dataclass(frozen=True)
class CredentialDefinition:
    """Public half of an issuer's signing setup for one schema."""

    cred_def_id: str
    schema_id: str
    issuer_did: str
    verkey: str  # base58; credential roots must verify under this key
    tag: str

    def to_payload(self) -> dict:
        return {
            "credDefId": self.cred_def_id,
            "schemaId": self.schema_id,
            "issuerDid": self.issuer_did,
            "verkey": self.verkey,
            "tag": self.tag,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "CredentialDefinition":
        return cls(
            cred_def_id=payload["credDefId"],
            schema_id=payload["schemaId"],
            issuer_did=payload["issuerDid"],
            verkey=payload["verkey"],
            tag=payload["tag"],
        )


def holder_binding_leaf(holder_binding_key: str) -> bytes:
    return crypto.sha256d(crypto.DOMAIN_HOLDER_BINDING, crypto.b58decode(holder_binding_key))


def rev_binding_leaf(rev_reg_id: str, rev_index: int) -> bytes:
    return crypto.sha256d(
        crypto.DOMAIN_REV_BINDING,
        rev_reg_id.encode("utf-8"),
        rev_index.to_bytes(4, "big"),
    )


def credential_leaves(
    holder_binding_key: str,
    rev_reg_id: str,
    rev_index: int,
    digests: list[bytes],
) -> list[bytes]:
    """Fixed layout: binding leaves first, then commitment digests in byte order."""
    return [
        holder_binding_leaf(holder_binding_key),
        rev_binding_leaf(rev_reg_id, rev_index),
        *sorted(digests),
    ]


@dataclass
class Credential:
    cred_def_id: str
    schema_id: str
    rev_reg_id: str
    rev_index: int
    attributes: dict[str, str]
    salts: dict[str, bytes]
    holder_binding_key: str
    credential_root: bytes
    issuer_signature: bytes
    witness: crypto.MerkleProof
    accumulator: bytes
    acc_seq_no: int

    def leaves(self) -> list[bytes]:
        digests = [
            crypto.commitment_digest(name, self.attributes[name], self.salts[name])
            for name in self.attributes
        ]
        return credential_leaves(self.holder_binding_key, self.rev_reg_id, self.rev_index, digests)

    def to_dict(self) -> dict:
        return {
            "credDefId": self.cred_def_id,
            "schemaId": self.schema_id,
            "revRegId": self.rev_reg_id,
            "revIndex": self.rev_index,
            "attributes": dict(self.attributes),
            "salts": {k: crypto.b64e(v) for k, v in self.salts.items()},
            "holderBindingKey": self.holder_binding_key,
            "credentialRoot": crypto.b64e(self.credential_root),
            "issuerSignature": crypto.b64e(self.issuer_signature),
            "witness": self.witness.to_dict(),
            "accumulator": crypto.b64e(self.accumulator),
            "accSeqNo": self.acc_seq_no,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Credential":
        return cls(
            cred_def_id=data["credDefId"],
            schema_id=data["schemaId"],
            rev_reg_id=data["revRegId"],
            rev_index=data["revIndex"],
            attributes=dict(data["attributes"]),
            salts={k: crypto.b64d(v) for k, v in data["salts"].items()},
            holder_binding_key=data["holderBindingKey"],
            credential_root=crypto.b64d(data["credentialRoot"]),
            issuer_signature=crypto.b64d(data["issuerSignature"]),
            witness=crypto.MerkleProof.from_dict(data["witness"]),
            accumulator=crypto.b64d(data["accumulator"]),
            acc_seq_no=data["accSeqNo"],
        )


@dataclass(frozen=True)
class PresentationRequest:
    nonce: bytes
    requested: tuple[str, ...]
    cred_def_id: str | None = None
    non_revoked: bool = True

    def to_dict(self) -> dict:
        return {
            "nonce": crypto.b64e(self.nonce),
            "requested": list(self.requested),
            "credDefId": self.cred_def_id,
            "nonRevoked": self.non_revoked,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PresentationRequest":
        return cls(
            nonce=crypto.b64d(data["nonce"]),
            requested=tuple(data["requested"]),
            cred_def_id=data.get("credDefId"),
            non_revoked=data.get("nonRevoked", True),
        )


@dataclass
class Presentation:
    cred_def_id: str
    schema_id: str
    credential_root: bytes
    issuer_signature: bytes
    revealed: dict[str, dict]  # name -> {"value", "salt" b64, "proof" dict}
    holder_binding_key: str
    holder_binding_proof: crypto.MerkleProof
    rev_reg_id: str
    rev_index: int
    rev_binding_proof: crypto.MerkleProof
    status_proof: crypto.MerkleProof
    accumulator: bytes
    acc_seq_no: int
    nonce: bytes
    holder_signature: bytes = b""

    def unsigned_dict(self) -> dict:
        return {
            "credDefId": self.cred_def_id,
            "schemaId": self.schema_id,
            "credentialRoot": crypto.b64e(self.credential_root),
            "issuerSignature": crypto.b64e(self.issuer_signature),
            "revealed": self.revealed,
            "holderBindingKey": self.holder_binding_key,
            "holderBindingProof": self.holder_binding_proof.to_dict(),
            "revRegId": self.rev_reg_id,
            "revIndex": self.rev_index,
            "revBindingProof": self.rev_binding_proof.to_dict(),
            "statusProof": self.status_proof.to_dict(),
            "accumulator": crypto.b64e(self.accumulator),
            "accSeqNo": self.acc_seq_no,
            "nonce": crypto.b64e(self.nonce),
        }

    def signing_bytes(self) -> bytes:
        return crypto.sha256d(
            crypto.DOMAIN_PRESENTATION, crypto.canonical_json(self.unsigned_dict())
        )

    def to_dict(self) -> dict:
        out = self.unsigned_dict()
        out["holderSignature"] = crypto.b64e(self.holder_signature)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Presentation":
        return cls(
            cred_def_id=data["credDefId"],
            schema_id=data["schemaId"],
            credential_root=crypto.b64d(data["credentialRoot"]),
            issuer_signature=crypto.b64d(data["issuerSignature"]),
            revealed={k: dict(v) for k, v in data["revealed"].items()},
            holder_binding_key=data["holderBindingKey"],
            holder_binding_proof=crypto.MerkleProof.from_dict(data["holderBindingProof"]),
            rev_reg_id=data["revRegId"],
            rev_index=data["revIndex"],
            rev_binding_proof=crypto.MerkleProof.from_dict(data["revBindingProof"]),
            status_proof=crypto.MerkleProof.from_dict(data["statusProof"]),
            accumulator=crypto.b64d(data["accumulator"]),
            acc_seq_no=data["accSeqNo"],
            nonce=crypto.b64d(data["nonce"]),
            holder_signature=crypto.b64d(data["holderSignature"]),
        )


@dataclass(frozen=True)
class VerificationResult:
    verified: bool
    reasons: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"verified": self.verified, "reasons": list(self.reasons)}
