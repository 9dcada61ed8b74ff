"""Per-verifier authorization: presentation-gated tokens and RBAC."""

from careid.authz.provider import (
    DEFAULT_TOKEN_LIFETIME_S,
    NONCE_LEN,
    AuthorizationProvider,
    AuthzError,
    Expired,
    InvalidToken,
    NoRole,
    NotFound,
    NotVerified,
    ProtectedResource,
    ReplayRejected,
    RoleMappingRule,
    TokenClaims,
    disclosed_attributes,
    load_rules_config,
    substitute_placeholders,
)

__all__ = [
    "DEFAULT_TOKEN_LIFETIME_S",
    "NONCE_LEN",
    "AuthorizationProvider",
    "AuthzError",
    "Expired",
    "InvalidToken",
    "NoRole",
    "NotFound",
    "NotVerified",
    "ProtectedResource",
    "ReplayRejected",
    "RoleMappingRule",
    "TokenClaims",
    "disclosed_attributes",
    "load_rules_config",
    "substitute_placeholders",
]
