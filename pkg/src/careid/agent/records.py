"""Protocol records and their state machines.

Each exchange (connection, credential issue, proof presentation) advances an
explicit record through a fixed transition table; anything off the table is a
protocol violation and raises instead of corrupting state.
"""

from __future__ import annotations

import enum
import uuid
from dataclasses import dataclass, field

from careid import crypto


class AgentError(Exception):
    """Base error for agent operations."""


class InvalidTransition(AgentError):
    pass


class UnknownRecord(AgentError):
    pass


class NotConnected(AgentError):
    pass


class PuzzleRejected(AgentError):
    pass


class ReplayRejected(AgentError):
    pass


def new_id() -> str:
    return uuid.uuid4().hex


class ConnectionState(str, enum.Enum):
    INVITED = "INVITED"
    REQUESTED = "REQUESTED"
    RESPONDED = "RESPONDED"
    ACTIVE = "ACTIVE"
    ABANDONED = "ABANDONED"


CONNECTION_TRANSITIONS = {
    ConnectionState.INVITED: {ConnectionState.REQUESTED, ConnectionState.ABANDONED},
    ConnectionState.REQUESTED: {ConnectionState.RESPONDED, ConnectionState.ABANDONED},
    ConnectionState.RESPONDED: {ConnectionState.ACTIVE, ConnectionState.ABANDONED},
    ConnectionState.ACTIVE: set(),
    ConnectionState.ABANDONED: set(),
}


class CredExState(str, enum.Enum):
    OFFER_SENT = "OFFER_SENT"
    OFFER_RECEIVED = "OFFER_RECEIVED"
    REQUEST_SENT = "REQUEST_SENT"
    REQUEST_RECEIVED = "REQUEST_RECEIVED"
    CREDENTIAL_ISSUED = "CREDENTIAL_ISSUED"
    STORED = "STORED"
    ACKED = "ACKED"
    DECLINED = "DECLINED"


CRED_EX_TRANSITIONS = {
    CredExState.OFFER_SENT: {CredExState.REQUEST_RECEIVED, CredExState.DECLINED},
    CredExState.OFFER_RECEIVED: {CredExState.REQUEST_SENT, CredExState.DECLINED},
    CredExState.REQUEST_SENT: {CredExState.STORED, CredExState.DECLINED},
    CredExState.REQUEST_RECEIVED: {CredExState.CREDENTIAL_ISSUED, CredExState.DECLINED},
    CredExState.CREDENTIAL_ISSUED: {CredExState.ACKED},
    CredExState.STORED: set(),
    CredExState.ACKED: set(),
    CredExState.DECLINED: set(),
}


class PresExState(str, enum.Enum):
    REQUEST_SENT = "REQUEST_SENT"
    REQUEST_RECEIVED = "REQUEST_RECEIVED"
    PRESENTATION_SENT = "PRESENTATION_SENT"
    PRESENTATION_RECEIVED = "PRESENTATION_RECEIVED"
    VERIFIED_TRUE = "VERIFIED_TRUE"
    VERIFIED_FALSE = "VERIFIED_FALSE"
    DECLINED = "DECLINED"


PRES_EX_TRANSITIONS = {
    PresExState.REQUEST_SENT: {PresExState.PRESENTATION_RECEIVED, PresExState.DECLINED},
    PresExState.REQUEST_RECEIVED: {PresExState.PRESENTATION_SENT, PresExState.DECLINED},
    PresExState.PRESENTATION_SENT: {PresExState.VERIFIED_TRUE, PresExState.VERIFIED_FALSE},
    PresExState.PRESENTATION_RECEIVED: {PresExState.VERIFIED_TRUE, PresExState.VERIFIED_FALSE},
    PresExState.VERIFIED_TRUE: set(),
    PresExState.VERIFIED_FALSE: set(),
    PresExState.DECLINED: set(),
}


def _advance(record, table, new_state, clock_ms: int) -> None:
    if new_state not in table[record.state]:
        raise InvalidTransition(f"{record.state.value} -> {new_state.value} is not allowed")
    record.state = new_state
    record.updated_ms = clock_ms


@dataclass
class ConnectionRecord:
    conn_id: str
    role: str  # "inviter" | "invitee"
    state: ConnectionState
    my_label: str
    my_keypair: crypto.KeyPair
    created_ms: int
    updated_ms: int
    their_label: str = ""
    their_key: str = ""  # base58
    their_endpoint: str = ""
    challenge: bytes = b""
    puzzle_difficulty: int = 0

    def advance(self, new_state: ConnectionState, clock_ms: int) -> None:
        _advance(self, CONNECTION_TRANSITIONS, new_state, clock_ms)

    def to_dict(self) -> dict:
        return {
            "connectionId": self.conn_id,
            "role": self.role,
            "state": self.state.value,
            "myLabel": self.my_label,
            "myKey": self.my_keypair.verkey,
            "theirLabel": self.their_label,
            "theirKey": self.their_key,
            "theirEndpoint": self.their_endpoint,
            "createdAt": self.created_ms,
            "updatedAt": self.updated_ms,
        }


@dataclass
class CredExRecord:
    cred_ex_id: str
    conn_id: str
    role: str  # "issuer" | "holder"
    state: CredExState
    cred_def_id: str
    schema_id: str
    attributes: dict[str, str]
    created_ms: int
    updated_ms: int
    referent: str = ""  # wallet id of the stored credential
    holder_binding_key: str = ""
    rev_reg_id: str = ""  # issuer side: where the credential's slot lives
    rev_index: int = -1

    def advance(self, new_state: CredExState, clock_ms: int) -> None:
        _advance(self, CRED_EX_TRANSITIONS, new_state, clock_ms)

    def to_dict(self) -> dict:
        return {
            "credentialExchangeId": self.cred_ex_id,
            "connectionId": self.conn_id,
            "role": self.role,
            "state": self.state.value,
            "credDefId": self.cred_def_id,
            "schemaId": self.schema_id,
            "attributes": dict(self.attributes),
            "referent": self.referent,
            "createdAt": self.created_ms,
            "updatedAt": self.updated_ms,
        }


@dataclass
class PresExRecord:
    pres_ex_id: str
    conn_id: str
    role: str  # "verifier" | "prover"
    state: PresExState
    request: dict
    created_ms: int
    updated_ms: int
    presentation: dict | None = None
    verified: bool | None = None
    reasons: tuple[str, ...] = ()

    def advance(self, new_state: PresExState, clock_ms: int) -> None:
        _advance(self, PRES_EX_TRANSITIONS, new_state, clock_ms)

    def to_dict(self) -> dict:
        return {
            "presentationExchangeId": self.pres_ex_id,
            "connectionId": self.conn_id,
            "role": self.role,
            "state": self.state.value,
            "request": dict(self.request),
            "presentation": self.presentation,
            "verified": self.verified,
            "reasons": list(self.reasons),
            "createdAt": self.created_ms,
            "updatedAt": self.updated_ms,
        }


@dataclass(frozen=True)
class WebhookEvent:
    seq: int
    topic: str
    payload: dict
    timestamp_ms: int

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "topic": self.topic,
            "payload": self.payload,
            "timestamp": self.timestamp_ms,
        }


@dataclass
class EventLog:
    """Append-only event history; feeds webhooks and server-sent events."""

    events: list[WebhookEvent] = field(default_factory=list)

    def emit(self, topic: str, payload: dict, timestamp_ms: int) -> WebhookEvent:
        event = WebhookEvent(
            seq=len(self.events) + 1, topic=topic, payload=payload, timestamp_ms=timestamp_ms
        )
        self.events.append(event)
        return event

    def since(self, seq: int) -> list[WebhookEvent]:
        return [e for e in self.events if e.seq > seq]
