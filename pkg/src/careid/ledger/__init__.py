"""Permissioned verifiable-data-registry ledger.

Four sub-ledgers (pool, config, domain, audit) maintained by an in-process
validator pool. Writes are role-gated and quorum-committed; reads are open.
"""

from careid.ledger.pool import (
    DEFAULT_REPLAY_WINDOW_MS,
    LedgerPool,
    MessageBus,
    Receipt,
    RevRegSnapshot,
    ValidatorNode,
    build_request,
    generate_genesis,
    node_seed_for_alias,
    replay,
)
from careid.ledger.types import (
    GENESIS_AUTHOR,
    GENESIS_PREV_HASH,
    CorruptLog,
    GenesisConfig,
    GenesisNode,
    InsufficientNodes,
    InvalidGenesis,
    InvalidSignature,
    InvalidTransaction,
    LedgerError,
    LedgerState,
    NoConsensus,
    NotFound,
    NymRecord,
    Role,
    Transaction,
    TxnKind,
    TxnRequest,
    Unauthorized,
    dumps_genesis,
    load_genesis,
    loads_genesis,
    request_signing_bytes,
    role_gate,
    write_genesis,
)

__all__ = [
    "DEFAULT_REPLAY_WINDOW_MS",
    "GENESIS_AUTHOR",
    "GENESIS_PREV_HASH",
    "CorruptLog",
    "GenesisConfig",
    "GenesisNode",
    "InsufficientNodes",
    "InvalidGenesis",
    "InvalidSignature",
    "InvalidTransaction",
    "LedgerError",
    "LedgerPool",
    "LedgerState",
    "MessageBus",
    "NoConsensus",
    "NotFound",
    "NymRecord",
    "Receipt",
    "RevRegSnapshot",
    "Role",
    "Transaction",
    "TxnKind",
    "TxnRequest",
    "Unauthorized",
    "ValidatorNode",
    "build_request",
    "dumps_genesis",
    "generate_genesis",
    "load_genesis",
    "loads_genesis",
    "node_seed_for_alias",
    "replay",
    "request_signing_bytes",
    "role_gate",
    "write_genesis",
]
