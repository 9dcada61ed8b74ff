"""Identity agent: pairwise connections, credential exchange, proofs.

One Agent owns a wallet, talks to peers through sealed envelopes over a
pluggable transport, and reads/writes the ledger through a pool client.
Inbound traffic enters at handle_inbound; every protocol steps an explicit
record through its state machine and emits an event.
"""

from __future__ import annotations

import json
import os
import queue
import threading
from urllib.parse import parse_qs, urlparse

import httpx

from careid import creds, crypto
from careid.agent.records import (
    AgentError,
    ConnectionRecord,
    ConnectionState,
    CredExRecord,
    CredExState,
    EventLog,
    InvalidTransition,
    NotConnected,
    PresExRecord,
    PresExState,
    PuzzleRejected,
    UnknownRecord,
    new_id,
)
from careid.agent.transport import ReplayGuard, Transport
from careid.agent.wallet import Wallet
from careid.clock import Clock
from careid.ledger import DEFAULT_REPLAY_WINDOW_MS, TxnKind, build_request

DEFAULT_PUZZLE_DIFFICULTY = 12


def invitation_to_url(invitation: dict) -> str:
    encoded = crypto.b64e(crypto.canonical_json(invitation))
    endpoint = invitation["endpoint"]
    base = endpoint if "://" in endpoint else f"http://{endpoint}"
    return f"{base}/invite?c_i={encoded}"


def invitation_from_url(url: str) -> dict:
    query = parse_qs(urlparse(url).query)
    if "c_i" not in query:
        raise AgentError("invitation url lacks the c_i parameter")
    return json.loads(crypto.b64d(query["c_i"][0]))


class Agent:
    def __init__(
        self,
        label: str,
        endpoint: str,
        pool,
        transport: Transport,
        clock: Clock | None = None,
        seed: bytes | None = None,
        wallet: Wallet | None = None,
        webhook_url: str | None = None,
        auto_accept: bool = False,
        puzzle_difficulty: int = DEFAULT_PUZZLE_DIFFICULTY,
    ):
        self.label = label
        self.endpoint = endpoint
        self.pool = pool
        self.transport = transport
        self.clock = clock or Clock()
        self.wallet = wallet or Wallet(label, seed=seed)
        self.webhook_url = webhook_url
        self.auto_accept = auto_accept
        self.puzzle_difficulty = puzzle_difficulty

        self.connections: dict[str, ConnectionRecord] = {}
        self.cred_exchanges: dict[str, CredExRecord] = {}
        self.pres_exchanges: dict[str, PresExRecord] = {}
        self.events = EventLog()
        self._listeners: list[queue.Queue] = []
        self._lock = threading.RLock()
        # How many inbound envelopes are being handled right now / at peak.
        self.inflight = 0
        self.max_inflight = 0
        self._gauge_lock = threading.Lock()
        try:
            window = pool.get_config("replayWindowMs", DEFAULT_REPLAY_WINDOW_MS)
        except Exception:
            # An unreachable ledger shouldn't stop the agent from starting;
            # ledger-dependent operations will surface the failure themselves.
            window = DEFAULT_REPLAY_WINDOW_MS
        self.replay_guard = ReplayGuard(self.clock, window)
        self._handlers = {
            "connection-request": self._on_connection_request,
            "connection-ack": self._on_connection_ack,
            "verinym-request": self._on_verinym_request,
            "credential-offer": self._on_credential_offer,
            "credential-request": self._on_credential_request,
            "credential-ack": self._on_credential_ack,
            "credential-decline": self._on_credential_decline,
            "presentation-request": self._on_presentation_request,
            "presentation": self._on_presentation,
            "presentation-result": self._on_presentation_result,
            "presentation-decline": self._on_presentation_decline,
            "revocation-notify": self._on_revocation_notify,
        }

    # -- identity ----------------------------------------------------------------

    @property
    def did(self) -> str:
        return self.wallet.identity.did

    @property
    def verkey(self) -> str:
        return self.wallet.identity.verkey

    def status(self) -> dict:
        return {
            "label": self.label,
            "did": self.did,
            "verkey": self.verkey,
            "endpoint": self.endpoint,
        }

    # -- events --------------------------------------------------------------------

    def add_listener(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._listeners.append(q)
        return q

    def remove_listener(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._listeners:
                self._listeners.remove(q)

    def _emit(self, topic: str, payload: dict) -> None:
        with self._lock:
            event = self.events.emit(topic, payload, self.clock.now_ms())
            listeners = list(self._listeners)
        for q in listeners:
            q.put(event)
        if self.webhook_url:
            try:
                httpx.post(
                    f"{self.webhook_url.rstrip('/')}/topic/{topic}",
                    json=event.to_dict(),
                    timeout=2.0,
                )
            except httpx.HTTPError:
                pass  # webhooks are best-effort

    # -- ledger ----------------------------------------------------------------------

    def ledger_write(self, kind: TxnKind, payload: dict):
        return self.pool.submit(build_request(self.wallet.identity, kind, payload))

    def register_nym(self, did: str, verkey: str, role: str = "NONE"):
        return self.ledger_write(TxnKind.NYM, {"did": did, "verkey": verkey, "role": role})

    def register_schema(self, name: str, version: str, attr_names: list[str]) -> dict:
        schema = creds.create_schema(name, version, attr_names)
        receipt = self.ledger_write(TxnKind.SCHEMA, schema.to_payload(self.did))
        return {"schemaId": schema.schema_id(self.did), "seqNo": receipt.seq_no}

    def register_cred_def(self, schema_id: str, max_cred_num: int = 8, tag: str = "default") -> dict:
        stored = self.pool.get_schema(schema_id)
        cred_def = creds.create_cred_def(self.did, self.verkey, schema_id, stored["seqNo"], tag)
        self.ledger_write(TxnKind.CRED_DEF, cred_def.to_payload())
        registry = creds.create_rev_registry(cred_def, max_cred_num, tag)
        self.ledger_write(TxnKind.REV_REG_DEF, registry.def_payload())
        with self._lock:
            self.wallet.cred_defs[cred_def.cred_def_id] = cred_def
            self.wallet.registries[registry.rev_reg_id] = registry
        return {"credDefId": cred_def.cred_def_id, "revRegId": registry.rev_reg_id}

    # -- connections --------------------------------------------------------------------

    def create_invitation(self) -> dict:
        conn_id = new_id()
        now = self.clock.now_ms()
        with self._lock:
            keypair = self.wallet.new_pairwise_key(conn_id)
            record = ConnectionRecord(
                conn_id=conn_id,
                role="inviter",
                state=ConnectionState.INVITED,
                my_label=self.label,
                my_keypair=keypair,
                created_ms=now,
                updated_ms=now,
                challenge=os.urandom(16),
                puzzle_difficulty=self.puzzle_difficulty,
            )
            self.connections[conn_id] = record
        self._emit("connections", record.to_dict())
        invitation = {
            "label": self.label,
            "recipientKey": keypair.verkey,
            "endpoint": self.endpoint,
            "challenge": crypto.b64e(record.challenge),
            "difficulty": record.puzzle_difficulty,
        }
        return {
            "connectionId": conn_id,
            "invitation": invitation,
            "invitationUrl": invitation_to_url(invitation),
        }

    def receive_invitation(self, invitation: dict | str, accept: bool = True) -> dict:
        if isinstance(invitation, str):
            invitation = invitation_from_url(invitation)
        conn_id = new_id()
        now = self.clock.now_ms()
        with self._lock:
            keypair = self.wallet.new_pairwise_key(conn_id)
            record = ConnectionRecord(
                conn_id=conn_id,
                role="invitee",
                state=ConnectionState.INVITED,
                my_label=self.label,
                my_keypair=keypair,
                created_ms=now,
                updated_ms=now,
                their_label=invitation["label"],
                their_key=invitation["recipientKey"],
                their_endpoint=invitation["endpoint"],
                challenge=crypto.b64d(invitation["challenge"]),
                puzzle_difficulty=invitation["difficulty"],
            )
            self.connections[conn_id] = record
        self._emit("connections", record.to_dict())
        if accept:
            self.accept_invitation(conn_id)
        return self.connections[conn_id].to_dict()

    def accept_invitation(self, conn_id: str) -> dict:
        record = self._connection(conn_id)
        solution = crypto.puzzle_solve(record.challenge, record.puzzle_difficulty)
        request = {
            "type": "connection-request",
            "label": self.label,
            "key": record.my_keypair.verkey,
            "endpoint": self.endpoint,
            "solution": crypto.b64e(solution),
        }
        with self._lock:
            record.advance(ConnectionState.REQUESTED, self.clock.now_ms())
        self._emit("connections", record.to_dict())
        reply = self._send(record, request, expect_reply=True)
        if reply.get("type") != "connection-response":
            self._abandon(record, "handshake failed")
            raise NotConnected(f"no connection response: {reply.get('error', reply)}")
        with self._lock:
            record.their_label = reply["label"]
            record.their_key = reply["key"]
            record.their_endpoint = reply["endpoint"]
            record.advance(ConnectionState.RESPONDED, self.clock.now_ms())
        self._emit("connections", record.to_dict())
        self._send(record, {"type": "connection-ack"})
        with self._lock:
            record.advance(ConnectionState.ACTIVE, self.clock.now_ms())
        self._emit("connections", record.to_dict())
        return record.to_dict()

    def _on_connection_request(self, record: ConnectionRecord, message: dict) -> dict:
        if record.role != "inviter" or record.state != ConnectionState.INVITED:
            raise InvalidTransition("connection request arrived in the wrong state")
        solution = crypto.b64d(message["solution"])
        if not crypto.puzzle_check(record.challenge, solution, record.puzzle_difficulty):
            raise PuzzleRejected("client puzzle solution does not meet the difficulty")
        with self._lock:
            record.their_label = message["label"]
            record.their_key = message["key"]
            record.their_endpoint = message["endpoint"]
            record.advance(ConnectionState.REQUESTED, self.clock.now_ms())
        self._emit("connections", record.to_dict())
        with self._lock:
            record.advance(ConnectionState.RESPONDED, self.clock.now_ms())
        self._emit("connections", record.to_dict())
        return {
            "type": "connection-response",
            "label": self.label,
            "key": record.my_keypair.verkey,
            "endpoint": self.endpoint,
        }

    def _on_connection_ack(self, record: ConnectionRecord, message: dict) -> None:
        with self._lock:
            record.advance(ConnectionState.ACTIVE, self.clock.now_ms())
        self._emit("connections", record.to_dict())
        return None

    def _abandon(self, record: ConnectionRecord, reason: str) -> None:
        with self._lock:
            if record.state not in (ConnectionState.ACTIVE, ConnectionState.ABANDONED):
                record.advance(ConnectionState.ABANDONED, self.clock.now_ms())
        self._emit("connections", {**record.to_dict(), "reason": reason})

    def get_connection(self, conn_id: str) -> dict:
        return self._connection(conn_id).to_dict()

    def list_connections(self) -> list[dict]:
        with self._lock:
            return [r.to_dict() for r in self.connections.values()]

    # -- verinym enrollment -----------------------------------------------------------

    def request_verinym(self, conn_id: str, role: str = "ENDORSER") -> dict:
        record = self._connection(conn_id)
        reply = self._send(
            record,
            {
                "type": "verinym-request",
                "did": self.did,
                "verkey": self.verkey,
                "role": role,
            },
            expect_reply=True,
        )
        if reply.get("type") != "verinym-response":
            raise AgentError(f"verinym request failed: {reply.get('error', reply)}")
        return {"did": self.did, "role": role, "seqNo": reply["seqNo"]}

    def _on_verinym_request(self, record: ConnectionRecord, message: dict) -> dict:
        receipt = self.register_nym(message["did"], message["verkey"], message["role"])
        self._emit(
            "verinym",
            {"did": message["did"], "role": message["role"], "seqNo": receipt.seq_no},
        )
        return {"type": "verinym-response", "seqNo": receipt.seq_no}

    # -- credential issuance ------------------------------------------------------------

    def send_credential_offer(self, conn_id: str, cred_def_id: str, attributes: dict) -> dict:
        record = self._connection(conn_id)
        with self._lock:
            cred_def = self.wallet.cred_defs.get(cred_def_id)
            if cred_def is None:
                raise UnknownRecord(f"this agent did not register {cred_def_id}")
            cred_ex = CredExRecord(
                cred_ex_id=new_id(),
                conn_id=conn_id,
                role="issuer",
                state=CredExState.OFFER_SENT,
                cred_def_id=cred_def_id,
                schema_id=cred_def.schema_id,
                attributes=dict(attributes),
                created_ms=self.clock.now_ms(),
                updated_ms=self.clock.now_ms(),
            )
            self.cred_exchanges[cred_ex.cred_ex_id] = cred_ex
        self._emit("issue-credential", cred_ex.to_dict())
        self._send(
            record,
            {
                "type": "credential-offer",
                "credExId": cred_ex.cred_ex_id,
                "credDefId": cred_def_id,
                "schemaId": cred_def.schema_id,
                "attributes": dict(attributes),
            },
        )
        return cred_ex.to_dict()

    def _on_credential_offer(self, record: ConnectionRecord, message: dict) -> None:
        with self._lock:
            cred_ex = CredExRecord(
                cred_ex_id=message["credExId"],
                conn_id=record.conn_id,
                role="holder",
                state=CredExState.OFFER_RECEIVED,
                cred_def_id=message["credDefId"],
                schema_id=message["schemaId"],
                attributes=dict(message["attributes"]),
                created_ms=self.clock.now_ms(),
                updated_ms=self.clock.now_ms(),
            )
            self.cred_exchanges[cred_ex.cred_ex_id] = cred_ex
        self._emit("issue-credential", cred_ex.to_dict())
        if self.auto_accept:
            self.respond_credential_offer(cred_ex.cred_ex_id, accept=True)
        return None

    def respond_credential_offer(self, cred_ex_id: str, accept: bool = True) -> dict:
        cred_ex = self._cred_ex(cred_ex_id, role="holder")
        record = self._connection(cred_ex.conn_id)
        if not accept:
            with self._lock:
                cred_ex.advance(CredExState.DECLINED, self.clock.now_ms())
            self._emit("issue-credential", cred_ex.to_dict())
            self._send(record, {"type": "credential-decline", "credExId": cred_ex_id})
            return cred_ex.to_dict()

        with self._lock:
            binding = self.wallet.new_binding_key(cred_ex_id)
            cred_ex.holder_binding_key = binding.verkey
            cred_ex.advance(CredExState.REQUEST_SENT, self.clock.now_ms())
        self._emit("issue-credential", cred_ex.to_dict())
        reply = self._send(
            record,
            {
                "type": "credential-request",
                "credExId": cred_ex_id,
                "bindingKey": binding.verkey,
            },
            expect_reply=True,
        )
        if reply.get("type") != "credential-issue":
            raise AgentError(f"issuer refused: {reply.get('error', reply)}")
        credential = creds.Credential.from_dict(reply["credential"])
        self._validate_incoming_credential(credential, binding.verkey)
        with self._lock:
            self.wallet.store_credential(cred_ex_id, credential)
            cred_ex.referent = cred_ex_id
            cred_ex.advance(CredExState.STORED, self.clock.now_ms())
        self._emit("issue-credential", cred_ex.to_dict())
        self._send(record, {"type": "credential-ack", "credExId": cred_ex_id})
        return cred_ex.to_dict()

    def _validate_incoming_credential(self, credential: creds.Credential, binding_key: str) -> None:
        if credential.holder_binding_key != binding_key:
            raise AgentError("credential is bound to a different key")
        if crypto.merkle_root(credential.leaves()) != credential.credential_root:
            raise AgentError("credential root does not match its contents")
        cred_def = self.pool.get_cred_def(credential.cred_def_id)
        if not crypto.verify(
            crypto.b58decode(cred_def["verkey"]),
            credential.credential_root,
            credential.issuer_signature,
        ):
            raise AgentError("issuer signature does not verify")

    def _on_credential_request(self, record: ConnectionRecord, message: dict) -> dict:
        cred_ex = self._cred_ex(message["credExId"], role="issuer")
        with self._lock:
            cred_ex.holder_binding_key = message["bindingKey"]
            cred_ex.advance(CredExState.REQUEST_RECEIVED, self.clock.now_ms())
        self._emit("issue-credential", cred_ex.to_dict())
        with self._lock:
            cred_def = self.wallet.cred_defs[cred_ex.cred_def_id]
            registry = next(
                r for r in self.wallet.registries.values()
                if r.cred_def_id == cred_ex.cred_def_id
            )
            schema = creds.Schema.from_payload(self.pool.get_schema(cred_def.schema_id))
            acc_seq_no = self.pool.get_rev_reg(registry.rev_reg_id).acc_seq_no
            credential = creds.issue(
                cred_def,
                self.wallet.identity,
                registry,
                schema,
                cred_ex.attributes,
                message["bindingKey"],
                acc_seq_no,
            )
            cred_ex.referent = cred_ex.cred_ex_id
            cred_ex.rev_reg_id = credential.rev_reg_id
            cred_ex.rev_index = credential.rev_index
            cred_ex.advance(CredExState.CREDENTIAL_ISSUED, self.clock.now_ms())
        self._emit("issue-credential", cred_ex.to_dict())
        return {
            "type": "credential-issue",
            "credExId": cred_ex.cred_ex_id,
            "credential": credential.to_dict(),
        }

    def _on_credential_ack(self, record: ConnectionRecord, message: dict) -> None:
        cred_ex = self._cred_ex(message["credExId"], role="issuer")
        with self._lock:
            cred_ex.advance(CredExState.ACKED, self.clock.now_ms())
        self._emit("issue-credential", cred_ex.to_dict())
        return None

    def _on_credential_decline(self, record: ConnectionRecord, message: dict) -> None:
        cred_ex = self._cred_ex(message["credExId"], role="issuer")
        with self._lock:
            cred_ex.advance(CredExState.DECLINED, self.clock.now_ms())
        self._emit("issue-credential", cred_ex.to_dict())
        return None

    def list_credentials(self) -> list[dict]:
        with self._lock:
            return self.wallet.list_credentials()

    def list_cred_exchanges(self) -> list[dict]:
        with self._lock:
            return [r.to_dict() for r in self.cred_exchanges.values()]

    # -- proof presentations ---------------------------------------------------------------

    def send_proof_request(
        self,
        conn_id: str,
        requested: list[str],
        cred_def_id: str | None = None,
        non_revoked: bool = True,
    ) -> dict:
        record = self._connection(conn_id)
        request = creds.PresentationRequest(
            nonce=os.urandom(16),
            requested=tuple(requested),
            cred_def_id=cred_def_id,
            non_revoked=non_revoked,
        )
        with self._lock:
            pres_ex = PresExRecord(
                pres_ex_id=new_id(),
                conn_id=conn_id,
                role="verifier",
                state=PresExState.REQUEST_SENT,
                request=request.to_dict(),
                created_ms=self.clock.now_ms(),
                updated_ms=self.clock.now_ms(),
            )
            self.pres_exchanges[pres_ex.pres_ex_id] = pres_ex
        self._emit("present-proof", pres_ex.to_dict())
        self._send(
            record,
            {
                "type": "presentation-request",
                "presExId": pres_ex.pres_ex_id,
                "request": request.to_dict(),
            },
        )
        return pres_ex.to_dict()

    def _on_presentation_request(self, record: ConnectionRecord, message: dict) -> None:
        with self._lock:
            pres_ex = PresExRecord(
                pres_ex_id=message["presExId"],
                conn_id=record.conn_id,
                role="prover",
                state=PresExState.REQUEST_RECEIVED,
                request=dict(message["request"]),
                created_ms=self.clock.now_ms(),
                updated_ms=self.clock.now_ms(),
            )
            self.pres_exchanges[pres_ex.pres_ex_id] = pres_ex
        self._emit("present-proof", pres_ex.to_dict())
        if self.auto_accept:
            self.respond_proof_request(pres_ex.pres_ex_id, accept=True)
        return None

    def respond_proof_request(self, pres_ex_id: str, accept: bool = True) -> dict:
        pres_ex = self._pres_ex(pres_ex_id, role="prover")
        record = self._connection(pres_ex.conn_id)
        request = creds.PresentationRequest.from_dict(pres_ex.request)
        referent = self.wallet.find_credential(request.requested, request.cred_def_id)
        if not accept or referent is None:
            with self._lock:
                pres_ex.advance(PresExState.DECLINED, self.clock.now_ms())
            self._emit("present-proof", pres_ex.to_dict())
            self._send(record, {"type": "presentation-decline", "presExId": pres_ex_id})
            return pres_ex.to_dict()

        with self._lock:
            credential = self.wallet.credentials[referent]
            binding = self.wallet.binding[referent]
        witness, accumulator, acc_seq_no = self._freshest_witness(credential)
        presentation = creds.present(
            credential,
            binding,
            request,
            witness=witness,
            accumulator=accumulator,
            acc_seq_no=acc_seq_no,
        )
        with self._lock:
            pres_ex.presentation = presentation.to_dict()
            pres_ex.advance(PresExState.PRESENTATION_SENT, self.clock.now_ms())
        self._emit("present-proof", pres_ex.to_dict())
        reply = self._send(
            record,
            {
                "type": "presentation",
                "presExId": pres_ex_id,
                "presentation": presentation.to_dict(),
            },
            expect_reply=True,
        )
        if reply.get("type") == "presentation-result":
            self._apply_presentation_result(pres_ex, reply)
        return pres_ex.to_dict()

    def _freshest_witness(self, credential: creds.Credential):
        """Refresh from the ledger; a revoked holder falls back to the stale
        witness and lets the verifier state the reason."""
        try:
            snapshot = self.pool.get_rev_reg(credential.rev_reg_id)
            return creds.refresh_witness(snapshot, credential.rev_index)
        except creds.CredentialRevoked:
            return credential.witness, credential.accumulator, credential.acc_seq_no

    def _on_presentation(self, record: ConnectionRecord, message: dict) -> dict:
        pres_ex = self._pres_ex(message["presExId"], role="verifier")
        with self._lock:
            pres_ex.presentation = dict(message["presentation"])
            pres_ex.advance(PresExState.PRESENTATION_RECEIVED, self.clock.now_ms())
        self._emit("present-proof", pres_ex.to_dict())
        request = creds.PresentationRequest.from_dict(pres_ex.request)
        presentation = creds.Presentation.from_dict(message["presentation"])
        result = creds.verify(request, presentation, self.pool)
        with self._lock:
            pres_ex.verified = result.verified
            pres_ex.reasons = result.reasons
            pres_ex.advance(
                PresExState.VERIFIED_TRUE if result.verified else PresExState.VERIFIED_FALSE,
                self.clock.now_ms(),
            )
        self._emit("present-proof", pres_ex.to_dict())
        return {
            "type": "presentation-result",
            "presExId": pres_ex.pres_ex_id,
            "verified": result.verified,
            "reasons": list(result.reasons),
        }

    def _apply_presentation_result(self, pres_ex: PresExRecord, message: dict) -> None:
        with self._lock:
            pres_ex.verified = message["verified"]
            pres_ex.reasons = tuple(message["reasons"])
            pres_ex.advance(
                PresExState.VERIFIED_TRUE if message["verified"] else PresExState.VERIFIED_FALSE,
                self.clock.now_ms(),
            )
        self._emit("present-proof", pres_ex.to_dict())

    def _on_presentation_result(self, record: ConnectionRecord, message: dict) -> None:
        pres_ex = self._pres_ex(message["presExId"], role="prover")
        self._apply_presentation_result(pres_ex, message)
        return None

    def _on_presentation_decline(self, record: ConnectionRecord, message: dict) -> None:
        pres_ex = self._pres_ex(message["presExId"], role="verifier")
        with self._lock:
            pres_ex.advance(PresExState.DECLINED, self.clock.now_ms())
        self._emit("present-proof", pres_ex.to_dict())
        return None

    def get_presentation_exchange(self, pres_ex_id: str) -> dict:
        return self._pres_ex_any(pres_ex_id).to_dict()

    def list_pres_exchanges(self) -> list[dict]:
        with self._lock:
            return [r.to_dict() for r in self.pres_exchanges.values()]

    # -- revocation ------------------------------------------------------------------------

    def revoke_credential(self, cred_ex_id: str, notify: bool = True) -> dict:
        cred_ex = self._cred_ex(cred_ex_id, role="issuer")
        if cred_ex.state not in (CredExState.CREDENTIAL_ISSUED, CredExState.ACKED):
            raise AgentError(f"nothing issued on exchange {cred_ex_id}")
        with self._lock:
            registry = self.wallet.registries[cred_ex.rev_reg_id]
            entry = registry.revoke(cred_ex.rev_index)
        receipt = self.ledger_write(TxnKind.REV_REG_ENTRY, entry)
        payload = {
            "credExId": cred_ex_id,
            "revRegId": cred_ex.rev_reg_id,
            "revIndex": cred_ex.rev_index,
            "seqNo": receipt.seq_no,
        }
        self._emit("revocation", payload)
        if notify:
            record = self._connection(cred_ex.conn_id)
            self._send(record, {"type": "revocation-notify", "credExId": cred_ex_id})
        return payload

    def _on_revocation_notify(self, record: ConnectionRecord, message: dict) -> None:
        cred_ex_id = message["credExId"]
        with self._lock:
            known = cred_ex_id in self.wallet.credentials
            if known:
                self.wallet.revoked_referents.add(cred_ex_id)
        if known:
            self._emit(
                "revocation", {"credExId": cred_ex_id, "referent": cred_ex_id, "revoked": True}
            )
        return None

    # -- wallet portability -------------------------------------------------------------------

    def export_wallet(self, passphrase: str) -> bytes:
        with self._lock:
            return self.wallet.export_encrypted(passphrase)

    # -- transport ------------------------------------------------------------------------------

    def _send(self, record: ConnectionRecord, message: dict, expect_reply: bool = False) -> dict:
        if not record.their_key:
            raise NotConnected(f"connection {record.conn_id} has no peer key yet")
        envelope = crypto.seal(
            record.my_keypair,
            crypto.b58decode(record.their_key),
            crypto.canonical_json(message),
            timestamp_ms=self.clock.now_ms(),
        )
        response = self.transport.send(record.their_endpoint, envelope.to_bytes())
        if not response.get("ok"):
            if expect_reply:
                return {"error": response.get("error", "send failed")}
            return response
        if not expect_reply:
            return response
        reply_env = response.get("reply")
        if reply_env is None:
            return {"error": "peer sent no reply"}
        opened = crypto.open_envelope(
            record.my_keypair, crypto.SealedEnvelope.from_dict(reply_env)
        )
        return json.loads(opened.decode("utf-8"))

    def handle_inbound(self, raw: bytes) -> dict:
        with self._gauge_lock:
            self.inflight += 1
            self.max_inflight = max(self.max_inflight, self.inflight)
        try:
            return self._handle_inbound(raw)
        finally:
            with self._gauge_lock:
                self.inflight -= 1

    def _handle_inbound(self, raw: bytes) -> dict:
        try:
            envelope = crypto.SealedEnvelope.from_bytes(raw)
        except Exception:
            return {"ok": False, "error": "not a sealed envelope"}
        try:
            self.replay_guard.check(
                envelope.sender_key, envelope.nonce, envelope.timestamp_ms
            )
            keypair, record = self._route(envelope)
            message = json.loads(crypto.open_envelope(keypair, envelope).decode("utf-8"))
            handler = self._handlers.get(message.get("type"))
            if handler is None:
                raise AgentError(f"unknown message type {message.get('type')!r}")
            reply = handler(record, message)
        except AgentError as exc:
            return {"ok": False, "error": str(exc)}
        except crypto.CryptoError as exc:
            return {"ok": False, "error": f"unreadable envelope: {exc}"}
        if reply is None:
            return {"ok": True, "reply": None}
        reply_env = crypto.seal(
            record.my_keypair,
            envelope.sender_key,
            crypto.canonical_json(reply),
            timestamp_ms=self.clock.now_ms(),
        )
        return {"ok": True, "reply": reply_env.to_dict()}

    def _route(self, envelope: crypto.SealedEnvelope):
        """Match the envelope's recipient key to one of our pairwise keys."""
        with self._lock:
            for conn_id, keypair in self.wallet.pairwise.items():
                if keypair.public_key == envelope.recipient_key:
                    return keypair, self.connections[conn_id]
        raise AgentError("envelope addressed to an unknown key")

    # -- record lookups ----------------------------------------------------------------------------

    def _connection(self, conn_id: str) -> ConnectionRecord:
        with self._lock:
            record = self.connections.get(conn_id)
        if record is None:
            raise UnknownRecord(f"no connection {conn_id}")
        return record

    def _cred_ex(self, cred_ex_id: str, role: str) -> CredExRecord:
        with self._lock:
            record = self.cred_exchanges.get(cred_ex_id)
        if record is None or record.role != role:
            raise UnknownRecord(f"no {role}-side credential exchange {cred_ex_id}")
        return record

    def _pres_ex(self, pres_ex_id: str, role: str) -> PresExRecord:
        with self._lock:
            record = self.pres_exchanges.get(pres_ex_id)
        if record is None or record.role != role:
            raise UnknownRecord(f"no {role}-side presentation exchange {pres_ex_id}")
        return record

    def _pres_ex_any(self, pres_ex_id: str) -> PresExRecord:
        with self._lock:
            record = self.pres_exchanges.get(pres_ex_id)
        if record is None:
            raise UnknownRecord(f"no presentation exchange {pres_ex_id}")
        return record
