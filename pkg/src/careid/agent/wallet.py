"""Agent wallet: every key the agent owns, plus stored credentials.

The wallet is the unit of portability. ``export_encrypted`` seals the whole
thing under a passphrase-derived key; importing it elsewhere restores the
agent's identity, pairwise connection keys, credentials, and issuer registry
state.
"""

from __future__ import annotations

import json

from careid import crypto
from careid.creds import Credential, CredentialDefinition, RevocationRegistry


class WalletError(Exception):
    pass


class Wallet:
    def __init__(self, label: str, seed: bytes | None = None):
        self.label = label
        self.identity = crypto.generate_keypair(seed)
        self.pairwise: dict[str, crypto.KeyPair] = {}  # connection id -> keypair
        self.binding: dict[str, crypto.KeyPair] = {}  # credential referent -> keypair
        self.credentials: dict[str, Credential] = {}  # referent -> credential
        self.revoked_referents: set[str] = set()
        self.cred_defs: dict[str, CredentialDefinition] = {}  # issuer side
        self.registries: dict[str, RevocationRegistry] = {}  # issuer side

    # -- keys -----------------------------------------------------------------

    def new_pairwise_key(self, conn_id: str) -> crypto.KeyPair:
        kp = crypto.generate_keypair()
        self.pairwise[conn_id] = kp
        return kp

    def new_binding_key(self, referent: str) -> crypto.KeyPair:
        kp = crypto.generate_keypair()
        self.binding[referent] = kp
        return kp

    def keypair_for_verkey(self, verkey_raw: bytes) -> crypto.KeyPair | None:
        if self.identity.public_key == verkey_raw:
            return self.identity
        for kp in self.pairwise.values():
            if kp.public_key == verkey_raw:
                return kp
        return None

    # -- credentials -----------------------------------------------------------

    def store_credential(self, referent: str, credential: Credential) -> None:
        self.credentials[referent] = credential

    def credential_summary(self, referent: str) -> dict:
        credential = self.credentials[referent]
        return {
            "referent": referent,
            "credDefId": credential.cred_def_id,
            "schemaId": credential.schema_id,
            "revRegId": credential.rev_reg_id,
            "revIndex": credential.rev_index,
            "attributes": dict(credential.attributes),
            "revoked": referent in self.revoked_referents,
        }

    def list_credentials(self) -> list[dict]:
        return [self.credential_summary(ref) for ref in self.credentials]

    def find_credential(
        self, requested: tuple[str, ...], cred_def_id: str | None
    ) -> str | None:
        """Referent of a stored credential able to answer the request."""
        for referent, credential in self.credentials.items():
            if cred_def_id and credential.cred_def_id != cred_def_id:
                continue
            if all(name in credential.attributes for name in requested):
                return referent
        return None

    # -- portability -------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "identitySeed": crypto.b64e(self.identity.seed),
            "pairwise": {k: crypto.b64e(v.seed) for k, v in self.pairwise.items()},
            "binding": {k: crypto.b64e(v.seed) for k, v in self.binding.items()},
            "credentials": {k: v.to_dict() for k, v in self.credentials.items()},
            "revokedReferents": sorted(self.revoked_referents),
            "credDefs": {k: v.to_payload() for k, v in self.cred_defs.items()},
            "registries": {k: v.to_dict() for k, v in self.registries.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Wallet":
        wallet = cls(label=data["label"], seed=crypto.b64d(data["identitySeed"]))
        wallet.pairwise = {
            k: crypto.generate_keypair(crypto.b64d(v)) for k, v in data["pairwise"].items()
        }
        wallet.binding = {
            k: crypto.generate_keypair(crypto.b64d(v)) for k, v in data["binding"].items()
        }
        wallet.credentials = {
            k: Credential.from_dict(v) for k, v in data["credentials"].items()
        }
        wallet.revoked_referents = set(data["revokedReferents"])
        wallet.cred_defs = {
            k: CredentialDefinition.from_payload(v) for k, v in data["credDefs"].items()
        }
        wallet.registries = {
            k: RevocationRegistry.from_dict(v) for k, v in data["registries"].items()
        }
        return wallet

    def export_encrypted(self, passphrase: str) -> bytes:
        return crypto.passphrase_seal(passphrase, crypto.canonical_json(self.to_dict()))

    @classmethod
    def import_encrypted(cls, blob: bytes, passphrase: str) -> "Wallet":
        raw = crypto.passphrase_open(passphrase, blob)
        return cls.from_dict(json.loads(raw.decode("utf-8")))
