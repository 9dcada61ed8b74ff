"""Transaction, role, and state types for the permissioned registry.

The audit ledger is the single ordered log; pool, config, and domain views
are pure folds of it. Entries are hash-chained: each transaction stores the
chain hash of its predecessor, and the chain hash of the newest entry doubles
as the pool's root hash.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

from careid.crypto import (
    SIGNATURE_SCHEME_ID,
    DOMAIN_TXN_CHAIN,
    b64d,
    b64e,
    canonical_json,
    sha256d,
)

GENESIS_PREV_HASH = bytes(32)
GENESIS_AUTHOR = "genesis"


class LedgerError(Exception):
    pass


class InsufficientNodes(LedgerError):
    pass


class InvalidGenesis(LedgerError):
    pass


class Unauthorized(LedgerError):
    pass


class InvalidSignature(LedgerError):
    pass


class InvalidTransaction(LedgerError):
    pass


class NoConsensus(LedgerError):
    pass


class NotFound(LedgerError):
    pass


class CorruptLog(LedgerError):
    def __init__(self, seq_no: int):
        super().__init__(f"audit chain broken at seqNo {seq_no}")
        self.seq_no = seq_no


class Role(enum.Enum):
    TRUSTEE = "TRUSTEE"
    STEWARD = "STEWARD"
    ENDORSER = "ENDORSER"
    NONE = "NONE"

    @property
    def rank(self) -> int:
        return {"TRUSTEE": 3, "STEWARD": 2, "ENDORSER": 1, "NONE": 0}[self.value]

    def __ge__(self, other: "Role") -> bool:
        return self.rank >= other.rank


class TxnKind(enum.Enum):
    NYM = "NYM"
    SCHEMA = "SCHEMA"
    CRED_DEF = "CRED_DEF"
    REV_REG_DEF = "REV_REG_DEF"
    REV_REG_ENTRY = "REV_REG_ENTRY"
    NODE = "NODE"
    CONFIG = "CONFIG"


# Sub-ledger each kind folds into.
SUB_LEDGER = {
    TxnKind.NODE: "pool",
    TxnKind.CONFIG: "config",
    TxnKind.NYM: "domain",
    TxnKind.SCHEMA: "domain",
    TxnKind.CRED_DEF: "domain",
    TxnKind.REV_REG_DEF: "domain",
    TxnKind.REV_REG_ENTRY: "domain",
}


def role_gate(author_role: Role, kind: TxnKind, payload: dict) -> bool:
    """ACL matrix: which roles may submit which transaction kinds."""
    if kind == TxnKind.NYM:
        grants_role = payload.get("role", Role.NONE.value) != Role.NONE.value
        if grants_role:
            return author_role in (Role.TRUSTEE, Role.STEWARD)
        return author_role >= Role.ENDORSER
    if kind in (TxnKind.SCHEMA, TxnKind.CRED_DEF, TxnKind.REV_REG_DEF, TxnKind.REV_REG_ENTRY):
        return author_role >= Role.ENDORSER
    if kind in (TxnKind.NODE, TxnKind.CONFIG):
        return author_role in (Role.TRUSTEE, Role.STEWARD)
    return False


@dataclass(frozen=True)
class Transaction:
    seq_no: int
    txn_time_ms: int
    kind: TxnKind
    payload: dict
    author_did: str
    signature: bytes
    prev_hash: bytes

    def to_dict(self) -> dict:
        return {
            "seqNo": self.seq_no,
            "txnTime": self.txn_time_ms,
            "kind": self.kind.value,
            "payload": self.payload,
            "authorDid": self.author_did,
            "signature": b64e(self.signature),
            "prevHash": b64e(self.prev_hash),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Transaction":
        return cls(
            seq_no=obj["seqNo"],
            txn_time_ms=obj["txnTime"],
            kind=TxnKind(obj["kind"]),
            payload=obj["payload"],
            author_did=obj["authorDid"],
            signature=b64d(obj["signature"]),
            prev_hash=b64d(obj["prevHash"]),
        )

    def chain_hash(self) -> bytes:
        return sha256d(DOMAIN_TXN_CHAIN, canonical_json(self.to_dict()))


def request_signing_bytes(kind: TxnKind, payload: dict, author_did: str) -> bytes:
    return canonical_json({"kind": kind.value, "payload": payload, "authorDid": author_did})


@dataclass(frozen=True)
class TxnRequest:
    """Client-side signed write request; the leader turns it into a Transaction."""

    kind: TxnKind
    payload: dict
    author_did: str
    signature: bytes


@dataclass(frozen=True)
class NymRecord:
    did: str
    verkey: str  # base58
    role: Role
    added_by: str

    def to_dict(self) -> dict:
        return {"did": self.did, "verkey": self.verkey, "role": self.role.value, "addedBy": self.added_by}


@dataclass
class LedgerState:
    pool: dict = field(default_factory=dict)  # alias -> node record
    config: dict = field(default_factory=dict)
    nyms: dict = field(default_factory=dict)  # did -> NymRecord
    schemas: dict = field(default_factory=dict)  # schemaId -> payload
    cred_defs: dict = field(default_factory=dict)
    rev_reg_defs: dict = field(default_factory=dict)
    rev_reg_entries: dict = field(default_factory=dict)  # revRegId -> [entry dicts]
    audit: list = field(default_factory=list)  # Transactions in seqNo order

    @property
    def root_hash(self) -> bytes:
        return self.audit[-1].chain_hash() if self.audit else GENESIS_PREV_HASH

    def apply(self, txn: Transaction) -> None:
        """Fold one committed transaction into the sub-ledger views."""
        self.audit.append(txn)
        kind, p = txn.kind, txn.payload
        if kind == TxnKind.NODE:
            self.pool[p["alias"]] = dict(p)
        elif kind == TxnKind.CONFIG:
            self.config.update(p)
        elif kind == TxnKind.NYM:
            self.nyms[p["did"]] = NymRecord(
                did=p["did"],
                verkey=p["verkey"],
                role=Role(p.get("role", Role.NONE.value)),
                added_by=txn.author_did,
            )
        elif kind == TxnKind.SCHEMA:
            self.schemas[p["schemaId"]] = {**p, "seqNo": txn.seq_no}
        elif kind == TxnKind.CRED_DEF:
            self.cred_defs[p["credDefId"]] = {**p, "seqNo": txn.seq_no}
        elif kind == TxnKind.REV_REG_DEF:
            self.rev_reg_defs[p["revRegId"]] = {**p, "seqNo": txn.seq_no}
            self.rev_reg_entries.setdefault(p["revRegId"], [])
        elif kind == TxnKind.REV_REG_ENTRY:
            self.rev_reg_entries.setdefault(p["revRegId"], []).append(
                {**p, "seqNo": txn.seq_no, "txnTime": txn.txn_time_ms}
            )

    def txn_hash_map(self) -> dict[int, str]:
        return {t.seq_no: b64e(t.chain_hash()) for t in self.audit}

    def serialize(self) -> bytes:
        """Canonical byte representation used for replay equality checks."""
        return canonical_json(
            {
                "pool": self.pool,
                "config": self.config,
                "domain": {
                    "nyms": {did: rec.to_dict() for did, rec in self.nyms.items()},
                    "schemas": self.schemas,
                    "credDefs": self.cred_defs,
                    "revRegDefs": self.rev_reg_defs,
                    "revRegEntries": self.rev_reg_entries,
                },
                "audit": [t.to_dict() for t in self.audit],
                "rootHash": b64e(self.root_hash),
            }
        )


@dataclass(frozen=True)
class GenesisNode:
    alias: str
    node_verkey: str  # base58
    endpoint: str

    def to_dict(self) -> dict:
        return {
            "alias": self.alias,
            "nodeVerkey": self.node_verkey,
            "endpoint": self.endpoint,
            "services": ["VALIDATOR"],
        }


@dataclass(frozen=True)
class GenesisConfig:
    nodes: tuple[GenesisNode, ...]
    signature_scheme_id: str = SIGNATURE_SCHEME_ID

    def validate(self) -> None:
        if len(self.nodes) < 4:
            raise InsufficientNodes(f"need at least 4 nodes, got {len(self.nodes)}")
        if (len(self.nodes) - 1) % 3 != 0:
            raise InvalidGenesis(f"node count {len(self.nodes)} is not 3f+1")
        aliases = [n.alias for n in self.nodes]
        if len(set(aliases)) != len(aliases):
            raise InvalidGenesis("duplicate node alias")
        if self.signature_scheme_id != SIGNATURE_SCHEME_ID:
            raise InvalidGenesis(f"unsupported signature scheme {self.signature_scheme_id!r}")

    @property
    def f(self) -> int:
        return (len(self.nodes) - 1) // 3


def dumps_genesis(config: GenesisConfig) -> str:
    lines = [json.dumps({"signatureSchemeId": config.signature_scheme_id})]
    lines += [json.dumps(n.to_dict(), sort_keys=True) for n in config.nodes]
    return "\n".join(lines) + "\n"


def write_genesis(path: str | Path, config: GenesisConfig) -> None:
    Path(path).write_text(dumps_genesis(config), encoding="utf-8")


def loads_genesis(raw: str) -> GenesisConfig:
    scheme = SIGNATURE_SCHEME_ID
    nodes = []
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InvalidGenesis(f"bad genesis line: {line[:60]!r}") from exc
        if "signatureSchemeId" in obj and "alias" not in obj:
            scheme = obj["signatureSchemeId"]
            continue
        try:
            nodes.append(
                GenesisNode(alias=obj["alias"], node_verkey=obj["nodeVerkey"], endpoint=obj["endpoint"])
            )
        except KeyError as exc:
            raise InvalidGenesis(f"genesis node record missing {exc}") from exc
    config = GenesisConfig(nodes=tuple(nodes), signature_scheme_id=scheme)
    config.validate()
    return config


def load_genesis(path: str | Path) -> GenesisConfig:
    return loads_genesis(Path(path).read_text(encoding="utf-8"))
