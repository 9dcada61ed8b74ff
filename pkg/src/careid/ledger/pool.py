"""In-process validator pool with quorum commit and role-gated writes.

All validators run in one process on a message bus with injectable faults.
Node 0 is the fixed leader: it sequences transactions and commits one once
2f+1 live nodes return signed acknowledgments. Leader election is out of
scope; stopping the leader makes writes fail, not recover.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from careid import crypto
from careid.clock import Clock
from careid.ledger.types import (
    GENESIS_AUTHOR,
    GENESIS_PREV_HASH,
    CorruptLog,
    GenesisConfig,
    GenesisNode,
    InvalidGenesis,
    InvalidSignature,
    InvalidTransaction,
    LedgerState,
    NoConsensus,
    NotFound,
    NymRecord,
    Role,
    Transaction,
    TxnKind,
    TxnRequest,
    Unauthorized,
    request_signing_bytes,
    role_gate,
)

DEFAULT_REPLAY_WINDOW_MS = 120_000


def node_seed_for_alias(alias: str) -> bytes:
    # Simulation-only: validator seeds are derived from aliases so a genesis
    # file and the in-process nodes that serve it stay in sync.
    return hashlib.sha256(b"careid-validator-seed:" + alias.encode()).digest()


def generate_genesis(aliases: Iterable[str], base_port: int = 9700) -> GenesisConfig:
    nodes = []
    for i, alias in enumerate(aliases):
        kp = crypto.generate_keypair(node_seed_for_alias(alias))
        nodes.append(
            GenesisNode(alias=alias, node_verkey=kp.verkey, endpoint=f"127.0.0.1:{base_port + i}")
        )
    return GenesisConfig(nodes=tuple(nodes))


def build_request(keypair: crypto.KeyPair, kind: TxnKind, payload: dict) -> TxnRequest:
    did = keypair.did
    signature = crypto.sign(keypair, request_signing_bytes(kind, payload, did))
    return TxnRequest(kind=kind, payload=payload, author_did=did, signature=signature)


@dataclass(frozen=True)
class Receipt:
    seq_no: int
    txn_time_ms: int
    root_hash: bytes


@dataclass(frozen=True)
class RevRegSnapshot:
    rev_reg_id: str
    cred_def_id: str
    accumulator: bytes
    revoked: frozenset[int]
    acc_seq_no: int
    salt: bytes
    max_cred_num: int


class ValidatorNode:
    """Single-threaded state machine; consumes ordered proposals and commits."""

    def __init__(self, alias: str, keypair: crypto.KeyPair):
        self.alias = alias
        self.keypair = keypair
        self.live = True
        self.state = LedgerState()

    def vote(self, txn: Transaction) -> bytes | None:
        """Signed acknowledgment iff the proposal extends this node's chain."""
        if not self.live:
            return None
        if txn.seq_no != len(self.state.audit) + 1:
            return None
        if txn.prev_hash != self.state.root_hash:
            return None
        ack_bytes = crypto.canonical_json(
            {"alias": self.alias, "seqNo": txn.seq_no, "txnHash": crypto.b64e(txn.chain_hash())}
        )
        return crypto.sign(self.keypair, ack_bytes)

    def commit(self, txn: Transaction) -> None:
        if not self.live:
            return
        self.state.apply(txn)

    def catch_up(self, audit: list[Transaction]) -> None:
        for txn in audit[len(self.state.audit):]:
            self.state.apply(txn)


class MessageBus:
    """Routes vote/commit traffic between nodes; faults are injectable."""

    def __init__(self):
        self.nodes: dict[str, ValidatorNode] = {}
        # fault hook: (kind, dst_alias) -> True to drop the message
        self.drop: Callable[[str, str], bool] | None = None

    def register(self, node: ValidatorNode) -> None:
        self.nodes[node.alias] = node

    def _deliverable(self, kind: str, dst: str) -> bool:
        if self.drop is not None and self.drop(kind, dst):
            return False
        return True

    def collect_votes(self, txn: Transaction) -> dict[str, bytes]:
        votes = {}
        for alias, node in self.nodes.items():
            if not self._deliverable("vote", alias):
                continue
            ack = node.vote(txn)
            if ack is not None:
                votes[alias] = ack
        return votes

    def broadcast_commit(self, txn: Transaction) -> None:
        for alias, node in self.nodes.items():
            if self._deliverable("commit", alias):
                node.commit(txn)


class LedgerPool:
    """Client handle over the validator pool; submit is linearized at the leader."""

    def __init__(self, genesis: GenesisConfig, bus: MessageBus, clock: Clock):
        self.genesis = genesis
        self.bus = bus
        self.clock = clock
        self._last_txn_time = 0
        self._node_verkeys = {n.alias: n.node_verkey for n in genesis.nodes}
        # One handle may be shared across client threads: writes are
        # linearized here, and reads never observe a half-applied commit.
        self._lock = threading.RLock()

    # -- construction -------------------------------------------------------

    @classmethod
    def bootstrap(
        cls,
        genesis: GenesisConfig,
        clock: Clock | None = None,
        node_seeds: dict[str, bytes] | None = None,
        initial_config: dict | None = None,
    ) -> "LedgerPool":
        genesis.validate()
        bus = MessageBus()
        for record in genesis.nodes:
            seed = (node_seeds or {}).get(record.alias, node_seed_for_alias(record.alias))
            kp = crypto.generate_keypair(seed)
            if kp.verkey != record.node_verkey:
                raise InvalidGenesis(f"verkey mismatch for node {record.alias!r}")
            bus.register(ValidatorNode(record.alias, kp))
        pool = cls(genesis, bus, clock or Clock())
        for record in genesis.nodes:
            pool._commit_genesis(TxnKind.NODE, record.to_dict())
        config = {"replayWindowMs": DEFAULT_REPLAY_WINDOW_MS}
        config.update(initial_config or {})
        pool._commit_genesis(TxnKind.CONFIG, config)
        return pool

    def _commit_genesis(self, kind: TxnKind, payload: dict) -> None:
        txn = self._sequence(kind, payload, GENESIS_AUTHOR, b"")
        self.bus.broadcast_commit(txn)

    # -- node management ----------------------------------------------------

    @property
    def nodes(self) -> dict[str, ValidatorNode]:
        return self.bus.nodes

    @property
    def leader(self) -> ValidatorNode:
        return next(iter(self.bus.nodes.values()))

    def live_nodes(self) -> list[ValidatorNode]:
        return [n for n in self.bus.nodes.values() if n.live]

    def stop_node(self, alias: str) -> None:
        self.bus.nodes[alias].live = False

    def start_node(self, alias: str) -> None:
        node = self.bus.nodes[alias]
        node.live = True
        node.catch_up(self.leader.state.audit)

    @property
    def f(self) -> int:
        return self.genesis.f

    @property
    def quorum(self) -> int:
        return 2 * self.f + 1

    # -- writes --------------------------------------------------------------

    def submit(self, request: TxnRequest) -> Receipt:
        with self._lock:
            leader = self.leader
            if not leader.live:
                raise NoConsensus("leader is stopped")
            state = leader.state
            self._authorize(state, request)
            self._validate_payload(state, request.kind, request.payload)
            txn = self._sequence(
                request.kind, request.payload, request.author_did, request.signature
            )
            votes = self.bus.collect_votes(txn)
            valid = sum(1 for alias, ack in votes.items() if self._ack_valid(alias, txn, ack))
            if valid < self.quorum:
                # roll the assigned timestamp back so a retry reuses the slot
                self._last_txn_time = txn.txn_time_ms - 1
                raise NoConsensus(f"{valid} of {self.quorum} required acknowledgments")
            self.bus.broadcast_commit(txn)
            return Receipt(
                seq_no=txn.seq_no, txn_time_ms=txn.txn_time_ms, root_hash=txn.chain_hash()
            )

    def _sequence(self, kind: TxnKind, payload: dict, author: str, signature: bytes) -> Transaction:
        state = self.leader.state
        self._last_txn_time = max(self._last_txn_time + 1, self.clock.now_ms())
        return Transaction(
            seq_no=len(state.audit) + 1,
            txn_time_ms=self._last_txn_time,
            kind=kind,
            payload=payload,
            author_did=author,
            signature=signature,
            prev_hash=state.root_hash,
        )

    def _ack_valid(self, alias: str, txn: Transaction, ack: bytes) -> bool:
        ack_bytes = crypto.canonical_json(
            {"alias": alias, "seqNo": txn.seq_no, "txnHash": crypto.b64e(txn.chain_hash())}
        )
        return crypto.verify(crypto.b58decode(self._node_verkeys[alias]), ack_bytes, ack)

    def _authorize(self, state: LedgerState, request: TxnRequest) -> None:
        record = state.nyms.get(request.author_did)
        if record is None:
            if self._genesis_steward_write(state, request):
                return
            raise Unauthorized(f"author {request.author_did} has no NYM record")
        signing = request_signing_bytes(request.kind, request.payload, request.author_did)
        if not crypto.verify(crypto.b58decode(record.verkey), signing, request.signature):
            raise InvalidSignature(f"signature does not verify under {request.author_did}'s verkey")
        if not role_gate(record.role, request.kind, request.payload):
            raise Unauthorized(
                f"role {record.role.value} may not submit {request.kind.value}"
            )

    def _genesis_steward_write(self, state: LedgerState, request: TxnRequest) -> bool:
        """First NYM on an empty domain may self-register a steward or trustee."""
        if state.nyms or request.kind != TxnKind.NYM:
            return False
        p = request.payload
        if p.get("did") != request.author_did:
            return False
        if p.get("role") not in (Role.STEWARD.value, Role.TRUSTEE.value):
            return False
        signing = request_signing_bytes(request.kind, p, request.author_did)
        if not crypto.verify(crypto.b58decode(p["verkey"]), signing, request.signature):
            raise InvalidSignature("genesis steward NYM not signed by its own verkey")
        return True

    def _validate_payload(self, state: LedgerState, kind: TxnKind, p: dict) -> None:
        if kind == TxnKind.NYM:
            for key in ("did", "verkey"):
                if not p.get(key):
                    raise InvalidTransaction(f"NYM payload missing {key}")
            if p.get("role", "NONE") not in Role.__members__:
                raise InvalidTransaction(f"unknown role {p.get('role')!r}")
        elif kind == TxnKind.SCHEMA:
            if p.get("schemaId") in state.schemas:
                raise InvalidTransaction(f"schema {p['schemaId']} already registered")
            if not p.get("attrNames"):
                raise InvalidTransaction("schema without attributes")
        elif kind == TxnKind.CRED_DEF:
            if p.get("credDefId") in state.cred_defs:
                raise InvalidTransaction(f"cred def {p['credDefId']} already registered")
            if p.get("schemaId") not in state.schemas:
                raise InvalidTransaction(f"cred def references unknown schema {p.get('schemaId')!r}")
        elif kind == TxnKind.REV_REG_DEF:
            if p.get("revRegId") in state.rev_reg_defs:
                raise InvalidTransaction(f"rev reg {p['revRegId']} already registered")
            if p.get("credDefId") not in state.cred_defs:
                raise InvalidTransaction("rev reg references unknown cred def")
            n = p.get("maxCredNum", 0)
            if n < 2 or n & (n - 1):
                raise InvalidTransaction("maxCredNum must be a power of two >= 2")
        elif kind == TxnKind.REV_REG_ENTRY:
            if p.get("revRegId") not in state.rev_reg_defs:
                raise InvalidTransaction("entry for unknown rev reg")
            prev = state.rev_reg_entries.get(p["revRegId"]) or []
            prev_revoked = set(prev[-1]["revoked"]) if prev else set()
            if not prev_revoked <= set(p.get("revoked", [])):
                raise InvalidTransaction("revoked set must never shrink")
        elif kind == TxnKind.NODE:
            if not p.get("alias"):
                raise InvalidTransaction("NODE payload missing alias")
        elif kind == TxnKind.CONFIG:
            if not isinstance(p, dict) or not p:
                raise InvalidTransaction("CONFIG payload must be a non-empty object")

    # -- reads (permissionless) ----------------------------------------------

    def _read_state(self) -> LedgerState:
        # Taken under the pool lock so reads never see a half-applied commit.
        with self._lock:
            for node in self.bus.nodes.values():
                if node.live:
                    return node.state
            raise NoConsensus("no live node to read from")

    def get_nym(self, did: str) -> NymRecord:
        record = self._read_state().nyms.get(did)
        if record is None:
            raise NotFound(f"no NYM for {did}")
        return record

    def get_schema(self, schema_id: str) -> dict:
        schema = self._read_state().schemas.get(schema_id)
        if schema is None:
            raise NotFound(f"no schema {schema_id}")
        return schema

    def get_cred_def(self, cred_def_id: str) -> dict:
        cd = self._read_state().cred_defs.get(cred_def_id)
        if cd is None:
            raise NotFound(f"no cred def {cred_def_id}")
        return cd

    def get_config(self, key: str, default=None):
        return self._read_state().config.get(key, default)

    def get_rev_reg(self, rev_reg_id: str, at_time_ms: int | None = None) -> RevRegSnapshot:
        with self._lock:
            state = self._read_state()
            definition = state.rev_reg_defs.get(rev_reg_id)
            if definition is None:
                raise NotFound(f"no revocation registry {rev_reg_id}")
            entries = list(state.rev_reg_entries.get(rev_reg_id, []))
        if at_time_ms is not None:
            entries = [e for e in entries if e["txnTime"] <= at_time_ms]
        if entries:
            latest = entries[-1]
            accumulator = crypto.b64d(latest["accumulator"])
            revoked = frozenset(latest["revoked"])
            acc_seq_no = latest["seqNo"]
        else:
            accumulator = crypto.b64d(definition["accumulator"])
            revoked = frozenset()
            acc_seq_no = definition["seqNo"]
        return RevRegSnapshot(
            rev_reg_id=rev_reg_id,
            cred_def_id=definition["credDefId"],
            accumulator=accumulator,
            revoked=revoked,
            acc_seq_no=acc_seq_no,
            salt=crypto.b64d(definition["salt"]),
            max_cred_num=definition["maxCredNum"],
        )

    # -- audit export --------------------------------------------------------

    def export_audit_jsonl(self) -> str:
        with self._lock:
            audit = list(self._read_state().audit)
        return "\n".join(
            crypto.canonical_json(t.to_dict()).decode("utf-8") for t in audit
        ) + "\n"

    def write_audit_log(self, path: str | Path) -> None:
        Path(path).write_text(self.export_audit_jsonl(), encoding="utf-8")


def replay(
    entries: Iterable[Transaction] | str,
    expected_root: bytes | None = None,
) -> LedgerState:
    """Rebuild state from an audit log, verifying the hash chain.

    ``entries`` is either parsed transactions or JSONL text. A chain break is
    reported at the first entry whose prevHash (or seqNo) does not match;
    with ``expected_root`` given, a doctored final entry is caught as well.
    """
    if isinstance(entries, str):
        txns = [Transaction.from_dict(json.loads(line)) for line in entries.splitlines() if line.strip()]
    else:
        txns = list(entries)
    state = LedgerState()
    prev_hash = GENESIS_PREV_HASH
    for i, txn in enumerate(txns):
        if txn.seq_no != i + 1:
            raise CorruptLog(txn.seq_no)
        if txn.prev_hash != prev_hash:
            raise CorruptLog(txn.seq_no)
        state.apply(txn)
        prev_hash = txn.chain_hash()
    if expected_root is not None and prev_hash != expected_root:
        raise CorruptLog(txns[-1].seq_no if txns else 0)
    return state
