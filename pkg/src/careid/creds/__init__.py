"""Verifiable credentials with selective disclosure and revocation."""

from careid.creds.ops import (
    COMMITMENT_MISMATCH,
    HOLDER_BINDING_MISMATCH,
    INVALID_HOLDER_SIGNATURE,
    INVALID_ISSUER_SIGNATURE,
    MISSING_ATTRIBUTE,
    NON_REVOCATION_PROOF_INVALID,
    REV_BINDING_MISMATCH,
    REVOKED,
    STALE_ACCUMULATOR,
    STALE_PRESENTATION,
    STATUS_ACTIVE,
    STATUS_REVOKED,
    UNKNOWN_CRED_DEF,
    RevocationRegistry,
    RevRegResolver,
    accumulator_value,
    create_cred_def,
    create_rev_registry,
    create_schema,
    issue,
    present,
    refresh_witness,
    status_leaf,
    status_witness,
    verify,
)
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
    make_schema_id,
    rev_binding_leaf,
)

__all__ = [
    "COMMITMENT_MISMATCH",
    "HOLDER_BINDING_MISMATCH",
    "INVALID_HOLDER_SIGNATURE",
    "INVALID_ISSUER_SIGNATURE",
    "MISSING_ATTRIBUTE",
    "NON_REVOCATION_PROOF_INVALID",
    "REV_BINDING_MISMATCH",
    "REVOKED",
    "STALE_ACCUMULATOR",
    "STALE_PRESENTATION",
    "STATUS_ACTIVE",
    "STATUS_REVOKED",
    "UNKNOWN_CRED_DEF",
    "AlreadyRevoked",
    "Credential",
    "CredentialDefinition",
    "CredentialRevoked",
    "CredsError",
    "InvalidSchema",
    "NotHolder",
    "NotIssued",
    "Presentation",
    "PresentationRequest",
    "RegistryFull",
    "RevRegResolver",
    "RevocationRegistry",
    "Schema",
    "SchemaMismatch",
    "VerificationResult",
    "accumulator_value",
    "create_cred_def",
    "create_rev_registry",
    "create_schema",
    "credential_leaves",
    "holder_binding_leaf",
    "issue",
    "make_cred_def_id",
    "make_rev_reg_id",
    "make_schema_id",
    "present",
    "refresh_witness",
    "rev_binding_leaf",
    "status_leaf",
    "status_witness",
    "verify",
]
