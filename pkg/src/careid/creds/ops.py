"""Credential lifecycle: schema and definition setup, issue, present, verify.

Revocation uses a Merkle accumulator over per-slot status leaves. All slots
exist from registry creation (active or revoked), so the accumulator and any
slot's witness are recomputable from public ledger data alone; holders refresh
witnesses without contacting the issuer.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Protocol

from careid import crypto
from careid.creds.types import (
    AlreadyRevoked,
    Credential,
    CredentialDefinition,
    CredentialRevoked,
    CredsError,
    InvalidSchema,
    NotHolder,
    NotIssued,
    Presentation,
    PresentationRequest,
    RegistryFull,
    Schema,
    SchemaMismatch,
    VerificationResult,
    credential_leaves,
    holder_binding_leaf,
    make_cred_def_id,
    make_rev_reg_id,
    rev_binding_leaf,
)

STATUS_ACTIVE = b"\x00"
STATUS_REVOKED = b"\x01"

# verification reason codes
UNKNOWN_CRED_DEF = "UNKNOWN_CRED_DEF"
INVALID_ISSUER_SIGNATURE = "INVALID_ISSUER_SIGNATURE"
MISSING_ATTRIBUTE = "MISSING_ATTRIBUTE"
COMMITMENT_MISMATCH = "COMMITMENT_MISMATCH"
HOLDER_BINDING_MISMATCH = "HOLDER_BINDING_MISMATCH"
INVALID_HOLDER_SIGNATURE = "INVALID_HOLDER_SIGNATURE"
STALE_PRESENTATION = "STALE_PRESENTATION"
REV_BINDING_MISMATCH = "REV_BINDING_MISMATCH"
STALE_ACCUMULATOR = "STALE_ACCUMULATOR"
REVOKED = "REVOKED"
NON_REVOCATION_PROOF_INVALID = "NON_REVOCATION_PROOF_INVALID"


def status_leaf(salt: bytes, index: int, revoked: bool) -> bytes:
    status = STATUS_REVOKED if revoked else STATUS_ACTIVE
    return crypto.sha256d(crypto.DOMAIN_STATUS_LEAF, salt, index.to_bytes(4, "big"), status)


def accumulator_value(salt: bytes, max_cred_num: int, revoked: set[int] | frozenset[int]) -> bytes:
    leaves = [status_leaf(salt, i, i in revoked) for i in range(max_cred_num)]
    return crypto.merkle_root(leaves)


def status_witness(
    salt: bytes, max_cred_num: int, revoked: set[int] | frozenset[int], index: int
) -> crypto.MerkleProof:
    leaves = [status_leaf(salt, i, i in revoked) for i in range(max_cred_num)]
    return crypto.merkle_prove(leaves, index)


class RevRegResolver(Protocol):
    """Read view the verifier and holder need; a ledger pool satisfies it."""

    def get_cred_def(self, cred_def_id: str) -> dict: ...

    def get_rev_reg(self, rev_reg_id: str, at_time_ms: int | None = None): ...


@dataclass
class RevocationRegistry:
    """Issuer-side registry state; slot statuses feed the public accumulator."""

    rev_reg_id: str
    cred_def_id: str
    tag: str
    max_cred_num: int
    salt: bytes
    next_index: int = 0
    revoked: set[int] = field(default_factory=set)

    @property
    def accumulator(self) -> bytes:
        return accumulator_value(self.salt, self.max_cred_num, self.revoked)

    def allocate(self) -> int:
        if self.next_index >= self.max_cred_num:
            raise RegistryFull(f"all {self.max_cred_num} slots issued")
        index = self.next_index
        self.next_index += 1
        return index

    def witness(self, index: int) -> crypto.MerkleProof:
        return status_witness(self.salt, self.max_cred_num, self.revoked, index)

    def revoke(self, index: int) -> dict:
        """Mark a slot revoked; returns the ledger entry payload to publish."""
        if index < 0 or index >= self.next_index:
            raise NotIssued(f"slot {index} was never issued")
        if index in self.revoked:
            raise AlreadyRevoked(f"slot {index} already revoked")
        self.revoked.add(index)
        return self.entry_payload()

    def def_payload(self) -> dict:
        return {
            "revRegId": self.rev_reg_id,
            "credDefId": self.cred_def_id,
            "tag": self.tag,
            "maxCredNum": self.max_cred_num,
            "accumulator": crypto.b64e(self.accumulator),
            "salt": crypto.b64e(self.salt),
        }

    def entry_payload(self) -> dict:
        return {
            "revRegId": self.rev_reg_id,
            "accumulator": crypto.b64e(self.accumulator),
            "revoked": sorted(self.revoked),
        }

    def to_dict(self) -> dict:
        return {
            "revRegId": self.rev_reg_id,
            "credDefId": self.cred_def_id,
            "tag": self.tag,
            "maxCredNum": self.max_cred_num,
            "salt": crypto.b64e(self.salt),
            "nextIndex": self.next_index,
            "revoked": sorted(self.revoked),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RevocationRegistry":
        return cls(
            rev_reg_id=data["revRegId"],
            cred_def_id=data["credDefId"],
            tag=data["tag"],
            max_cred_num=data["maxCredNum"],
            salt=crypto.b64d(data["salt"]),
            next_index=data["nextIndex"],
            revoked=set(data["revoked"]),
        )


def create_schema(name: str, version: str, attr_names: list[str] | tuple[str, ...]) -> Schema:
    if not name or not version:
        raise InvalidSchema("schema needs a name and a version")
    attrs = tuple(attr_names)
    if not attrs:
        raise InvalidSchema("schema needs at least one attribute")
    if len(set(attrs)) != len(attrs):
        raise InvalidSchema("duplicate attribute names")
    if any(not isinstance(a, str) or not a for a in attrs):
        raise InvalidSchema("attribute names must be non-empty strings")
    return Schema(name=name, version=version, attr_names=attrs)


def create_cred_def(
    issuer_did: str, issuer_verkey: str, schema_id: str, schema_seq_no: int, tag: str = "default"
) -> CredentialDefinition:
    return CredentialDefinition(
        cred_def_id=make_cred_def_id(issuer_did, schema_seq_no, tag),
        schema_id=schema_id,
        issuer_did=issuer_did,
        verkey=issuer_verkey,
        tag=tag,
    )


def create_rev_registry(
    cred_def: CredentialDefinition, max_cred_num: int, tag: str = "default"
) -> RevocationRegistry:
    if max_cred_num < 2 or max_cred_num & (max_cred_num - 1):
        raise CredsError("maxCredNum must be a power of two >= 2")
    return RevocationRegistry(
        rev_reg_id=make_rev_reg_id(cred_def.issuer_did, cred_def.cred_def_id, tag),
        cred_def_id=cred_def.cred_def_id,
        tag=tag,
        max_cred_num=max_cred_num,
        salt=os.urandom(crypto.SALT_LEN),
    )


def issue(
    cred_def: CredentialDefinition,
    issuer_keypair: crypto.KeyPair,
    rev_reg: RevocationRegistry,
    schema: Schema,
    attributes: dict[str, str],
    holder_binding_key: str,
    acc_seq_no: int,
) -> Credential:
    """Sign a credential over salted commitments and allocate a revocation slot."""
    if issuer_keypair.verkey != cred_def.verkey:
        raise CredsError("issuer key does not match the credential definition")
    if rev_reg.cred_def_id != cred_def.cred_def_id:
        raise CredsError("revocation registry belongs to a different credential definition")
    if set(attributes) != set(schema.attr_names):
        raise SchemaMismatch(
            f"attributes {sorted(attributes)} do not match schema {sorted(schema.attr_names)}"
        )
    if any(not isinstance(v, str) for v in attributes.values()):
        raise SchemaMismatch("attribute values must be strings")

    index = rev_reg.allocate()
    salts = {name: os.urandom(crypto.SALT_LEN) for name in attributes}
    digests = [
        crypto.commitment_digest(name, attributes[name], salts[name]) for name in attributes
    ]
    leaves = credential_leaves(holder_binding_key, rev_reg.rev_reg_id, index, digests)
    root = crypto.merkle_root(leaves)
    return Credential(
        cred_def_id=cred_def.cred_def_id,
        schema_id=cred_def.schema_id,
        rev_reg_id=rev_reg.rev_reg_id,
        rev_index=index,
        attributes=dict(attributes),
        salts=salts,
        holder_binding_key=holder_binding_key,
        credential_root=root,
        issuer_signature=crypto.sign(issuer_keypair, root),
        witness=rev_reg.witness(index),
        accumulator=rev_reg.accumulator,
        acc_seq_no=acc_seq_no,
    )


def refresh_witness(snapshot, rev_index: int) -> tuple[crypto.MerkleProof, bytes, int]:
    """Rebuild a non-revocation witness from the public registry snapshot."""
    if rev_index in snapshot.revoked:
        raise CredentialRevoked(f"slot {rev_index} is revoked")
    witness = status_witness(snapshot.salt, snapshot.max_cred_num, snapshot.revoked, rev_index)
    return witness, snapshot.accumulator, snapshot.acc_seq_no


def present(
    credential: Credential,
    holder_keypair: crypto.KeyPair,
    request: PresentationRequest,
    witness: crypto.MerkleProof | None = None,
    accumulator: bytes | None = None,
    acc_seq_no: int | None = None,
) -> Presentation:
    """Reveal the requested attributes only, signed under the binding key."""
    if holder_keypair.verkey != credential.holder_binding_key:
        raise NotHolder("presentation key does not match the credential's binding key")
    if request.cred_def_id and request.cred_def_id != credential.cred_def_id:
        raise SchemaMismatch(
            f"request wants {request.cred_def_id}, credential is {credential.cred_def_id}"
        )
    missing = [a for a in request.requested if a not in credential.attributes]
    if missing:
        raise SchemaMismatch(f"credential lacks requested attributes {missing}")

    leaves = credential.leaves()
    revealed = {}
    for name in request.requested:
        digest = crypto.commitment_digest(
            name, credential.attributes[name], credential.salts[name]
        )
        proof = crypto.merkle_prove(leaves, leaves.index(digest))
        revealed[name] = {
            "value": credential.attributes[name],
            "salt": crypto.b64e(credential.salts[name]),
            "proof": proof.to_dict(),
        }

    presentation = Presentation(
        cred_def_id=credential.cred_def_id,
        schema_id=credential.schema_id,
        credential_root=credential.credential_root,
        issuer_signature=credential.issuer_signature,
        revealed=revealed,
        holder_binding_key=credential.holder_binding_key,
        holder_binding_proof=crypto.merkle_prove(leaves, 0),
        rev_reg_id=credential.rev_reg_id,
        rev_index=credential.rev_index,
        rev_binding_proof=crypto.merkle_prove(leaves, 1),
        status_proof=witness if witness is not None else credential.witness,
        accumulator=accumulator if accumulator is not None else credential.accumulator,
        acc_seq_no=acc_seq_no if acc_seq_no is not None else credential.acc_seq_no,
        nonce=request.nonce,
    )
    presentation.holder_signature = crypto.sign(holder_keypair, presentation.signing_bytes())
    return presentation


def verify(
    request: PresentationRequest,
    presentation: Presentation,
    resolver: RevRegResolver,
) -> VerificationResult:
    """Check every proof in the presentation; collect all failure reasons."""
    reasons: list[str] = []

    if presentation.nonce != request.nonce:
        reasons.append(STALE_PRESENTATION)

    try:
        cred_def = CredentialDefinition.from_payload(
            resolver.get_cred_def(presentation.cred_def_id)
        )
    except Exception:
        reasons.append(UNKNOWN_CRED_DEF)
        return VerificationResult(verified=False, reasons=tuple(reasons))

    root = presentation.credential_root
    if not crypto.verify(
        crypto.b58decode(cred_def.verkey), root, presentation.issuer_signature
    ):
        reasons.append(INVALID_ISSUER_SIGNATURE)

    if any(name not in presentation.revealed for name in request.requested):
        reasons.append(MISSING_ATTRIBUTE)

    for name, entry in presentation.revealed.items():
        try:
            digest = crypto.commitment_digest(name, entry["value"], crypto.b64d(entry["salt"]))
            proof = crypto.MerkleProof.from_dict(entry["proof"])
            ok = _proof_at(proof, minimum=2) and crypto.merkle_verify(root, digest, proof)
        except Exception:
            ok = False
        if not ok:
            reasons.append(COMMITMENT_MISMATCH)
            break

    binding_ok = (
        _proof_at(presentation.holder_binding_proof, exact=0)
        and crypto.merkle_verify(
            root, holder_binding_leaf(presentation.holder_binding_key),
            presentation.holder_binding_proof,
        )
    )
    if not binding_ok:
        reasons.append(HOLDER_BINDING_MISMATCH)

    if not crypto.verify(
        crypto.b58decode(presentation.holder_binding_key),
        presentation.signing_bytes(),
        presentation.holder_signature,
    ):
        reasons.append(INVALID_HOLDER_SIGNATURE)

    if request.non_revoked:
        reasons.extend(_check_non_revocation(presentation, resolver, root))

    return VerificationResult(verified=not reasons, reasons=tuple(reasons))


def _proof_at(proof: crypto.MerkleProof, exact: int | None = None, minimum: int | None = None) -> bool:
    """A proof must claim the position its path actually walks."""
    if proof.leaf_index != proof.position():
        return False
    if exact is not None and proof.leaf_index != exact:
        return False
    if minimum is not None and proof.leaf_index < minimum:
        return False
    return True


def _check_non_revocation(
    presentation: Presentation, resolver: RevRegResolver, root: bytes
) -> list[str]:
    reasons = []
    rev_leaf = rev_binding_leaf(presentation.rev_reg_id, presentation.rev_index)
    if not (
        _proof_at(presentation.rev_binding_proof, exact=1)
        and crypto.merkle_verify(root, rev_leaf, presentation.rev_binding_proof)
    ):
        reasons.append(REV_BINDING_MISMATCH)
        return reasons

    try:
        snapshot = resolver.get_rev_reg(presentation.rev_reg_id)
    except Exception:
        reasons.append(NON_REVOCATION_PROOF_INVALID)
        return reasons

    if presentation.accumulator != snapshot.accumulator:
        reasons.append(STALE_ACCUMULATOR)
    if presentation.rev_index in snapshot.revoked:
        reasons.append(REVOKED)
    if not reasons:
        leaf = status_leaf(snapshot.salt, presentation.rev_index, revoked=False)
        if not (
            _proof_at(presentation.status_proof, exact=presentation.rev_index)
            and crypto.merkle_verify(presentation.accumulator, leaf, presentation.status_proof)
        ):
            reasons.append(NON_REVOCATION_PROOF_INVALID)
    return reasons
