"""OIDC-style authorization: verified presentations become signed access tokens.

Each verifier runs its own provider with its own signing key.  A provider
converts a VERIFIED_TRUE presentation exchange into a short-lived, single-use
JWT (``base64url(header).base64url(claims).base64url(signature)``, EdDSA) whose
roles are granted by configurable mapping rules over the disclosed attributes.
Resource access is a plain role-intersection check.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field

from careid import crypto
from careid.clock import Clock

DEFAULT_TOKEN_LIFETIME_S = 300
NONCE_LEN = 16


class AuthzError(Exception):
    """Base class for authorization failures."""


class NotVerified(AuthzError):
    """The presentation exchange did not end in VERIFIED_TRUE."""


class NoRole(AuthzError):
    """No mapping rule matched the disclosed attributes."""


class Expired(AuthzError):
    """The token's expiry has passed."""


class InvalidToken(AuthzError):
    """The token is malformed or its signature does not check out."""


class ReplayRejected(AuthzError):
    """The token's nonce has been seen before."""


class NotFound(AuthzError):
    """No protected resource registered under that id."""


@dataclass(frozen=True)
class TokenClaims:
    """The payload section of an access token."""

    sub: str
    roles: tuple[str, ...]
    iat: int
    exp: int
    nonce: bytes
    disclosed: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "sub": self.sub,
            "roles": list(self.roles),
            "iat": self.iat,
            "exp": self.exp,
            "nonce": crypto.b64e(self.nonce),
            "disclosed": dict(self.disclosed),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TokenClaims":
        return cls(
            sub=data["sub"],
            roles=tuple(data["roles"]),
            iat=int(data["iat"]),
            exp=int(data["exp"]),
            nonce=crypto.b64d(data["nonce"]),
            disclosed=dict(data["disclosed"]),
        )


@dataclass(frozen=True)
class RoleMappingRule:
    """Grants roles when a presentation under ``cred_def_id`` reveals the
    required attributes (optionally with exact expected values)."""

    cred_def_id: str
    grants: tuple[str, ...]
    required_attrs: tuple[str, ...] = ()
    attr_equals: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.grants:
            raise ValueError("a role mapping rule must grant at least one role")

    def matches(self, cred_def_id: str, disclosed: dict[str, str]) -> bool:
        if cred_def_id != self.cred_def_id:
            return False
        needed = set(self.required_attrs) | set(self.attr_equals)
        if not needed <= set(disclosed):
            return False
        return all(disclosed[k] == v for k, v in self.attr_equals.items())

    def to_dict(self) -> dict:
        return {
            "credDefId": self.cred_def_id,
            "requiredAttrs": list(self.required_attrs),
            "attrEquals": dict(self.attr_equals),
            "grants": list(self.grants),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RoleMappingRule":
        return cls(
            cred_def_id=data["credDefId"],
            grants=tuple(data["grants"]),
            required_attrs=tuple(data.get("requiredAttrs", ())),
            attr_equals=dict(data.get("attrEquals", {})),
        )


@dataclass(frozen=True)
class ProtectedResource:
    resource_id: str
    allowed_roles: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.allowed_roles:
            raise ValueError("a protected resource must allow at least one role")

    def to_dict(self) -> dict:
        return {"resourceId": self.resource_id, "allowedRoles": list(self.allowed_roles)}

    @classmethod
    def from_dict(cls, data: dict) -> "ProtectedResource":
        return cls(resource_id=data["resourceId"], allowed_roles=tuple(data["allowedRoles"]))


def disclosed_attributes(presentation: dict) -> dict[str, str]:
    """Plain name→value map of the attributes a presentation reveals."""
    return {name: entry["value"] for name, entry in presentation["revealed"].items()}


def substitute_placeholders(text: str, substitutions: dict[str, str]) -> str:
    for key, value in substitutions.items():
        text = text.replace(f"${key}", value)
    return text


def load_rules_config(
    raw: str | dict, substitutions: dict[str, str] | None = None
) -> tuple[list[RoleMappingRule], list[ProtectedResource]]:
    """Parse a rules config (``{"rules": [...], "resources": [...]}``).

    ``$NAME`` placeholders anywhere in the document are replaced from
    ``substitutions`` before parsing, so fixture files can reference cred-def
    ids that only exist once a ledger is running.
    """
    if isinstance(raw, dict):
        raw = json.dumps(raw)
    if substitutions:
        raw = substitute_placeholders(raw, substitutions)
    data = json.loads(raw)
    rules = [RoleMappingRule.from_dict(r) for r in data.get("rules", [])]
    resources = [ProtectedResource.from_dict(r) for r in data.get("resources", [])]
    return rules, resources


class AuthorizationProvider:
    """Per-verifier token issuer, validator, and RBAC gate."""

    def __init__(
        self,
        signing_key: crypto.KeyPair | None = None,
        rules: list[RoleMappingRule] | None = None,
        resources: list[ProtectedResource] | None = None,
        clock: Clock | None = None,
        token_lifetime_s: int = DEFAULT_TOKEN_LIFETIME_S,
    ) -> None:
        self.keypair = signing_key or crypto.generate_keypair()
        self.rules = list(rules or [])
        self.resources = {r.resource_id: r for r in resources or []}
        self.clock = clock or Clock()
        self.token_lifetime_s = token_lifetime_s
        self._seen_nonces: dict[bytes, int] = {}
        self._lock = threading.Lock()

    @property
    def verkey(self) -> str:
        return self.keypair.verkey

    # -- issuance ----------------------------------------------------------

    def authorize(self, exchange: dict, rules: list[RoleMappingRule] | None = None) -> str:
        """Turn a VERIFIED_TRUE presentation-exchange record into a token."""
        if exchange.get("state") != "VERIFIED_TRUE" or exchange.get("verified") is not True:
            raise NotVerified(
                f"cannot authorize exchange in state {exchange.get('state')!r}"
            )
        presentation = exchange["presentation"]
        disclosed = disclosed_attributes(presentation)
        cred_def_id = presentation["credDefId"]
        active_rules = self.rules if rules is None else rules
        matched = [r for r in active_rules if r.matches(cred_def_id, disclosed)]
        if not matched:
            raise NoRole("no role mapping rule matches the disclosed attributes")
        roles = sorted({role for rule in matched for role in rule.grants})
        subject = crypto.did_from_public_key(
            crypto.b58decode(presentation["holderBindingKey"])
        )
        now_s = self.clock.now_ms() // 1000
        claims = TokenClaims(
            sub=subject,
            roles=tuple(roles),
            iat=now_s,
            exp=now_s + self.token_lifetime_s,
            nonce=os.urandom(NONCE_LEN),
            disclosed=disclosed,
        )
        return self._sign(claims)

    def _sign(self, claims: TokenClaims) -> str:
        header = {"alg": "EdDSA", "typ": "JWT"}
        signing_input = (
            crypto.b64e(crypto.canonical_json(header))
            + "."
            + crypto.b64e(crypto.canonical_json(claims.to_dict()))
        )
        signature = crypto.sign(self.keypair, signing_input.encode("ascii"))
        return signing_input + "." + crypto.b64e(signature)

    # -- validation ---------------------------------------------------------

    def validate_token(self, token: str) -> TokenClaims:
        """Accept iff the signature holds, the token is unexpired, and its
        nonce is fresh; marks the nonce as seen (tokens are single-use)."""
        parts = token.split(".")
        if len(parts) != 3:
            raise InvalidToken("token must have exactly three sections")
        header_b64, claims_b64, signature_b64 = parts
        signing_input = f"{header_b64}.{claims_b64}".encode("ascii")
        try:
            header = json.loads(crypto.b64d(header_b64))
            claims = TokenClaims.from_dict(json.loads(crypto.b64d(claims_b64)))
            signature = crypto.b64d(signature_b64)
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidToken(f"malformed token: {exc}") from None
        if header.get("alg") != "EdDSA":
            raise InvalidToken(f"unsupported algorithm {header.get('alg')!r}")
        if not crypto.verify(self.keypair.public_key, signing_input, signature):
            raise InvalidToken("signature verification failed")
        now_s = self.clock.now_ms() // 1000
        if now_s >= claims.exp:
            raise Expired(f"token expired at {claims.exp}")
        with self._lock:
            self._evict_locked(now_s)
            if claims.nonce in self._seen_nonces:
                raise ReplayRejected("token nonce already used")
            self._seen_nonces[claims.nonce] = claims.exp
        return claims

    def _evict_locked(self, now_s: int) -> None:
        dead = [nonce for nonce, exp in self._seen_nonces.items() if exp <= now_s]
        for nonce in dead:
            del self._seen_nonces[nonce]

    # -- access control -----------------------------------------------------

    def check_access(self, claims: TokenClaims, resource_id: str) -> bool:
        resource = self.resources.get(resource_id)
        if resource is None:
            raise NotFound(f"no resource registered as {resource_id!r}")
        return bool(set(claims.roles) & set(resource.allowed_roles))
