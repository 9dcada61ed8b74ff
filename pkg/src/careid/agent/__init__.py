"""Identity agents: wallets, pairwise messaging, credential protocols."""

from careid.agent.agent import (
    DEFAULT_PUZZLE_DIFFICULTY,
    Agent,
    invitation_from_url,
    invitation_to_url,
)
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
    ReplayRejected,
    UnknownRecord,
    WebhookEvent,
)
from careid.agent.transport import (
    HttpTransport,
    InProcessRouter,
    ReplayGuard,
    Transport,
    TransportError,
)
from careid.agent.wallet import Wallet, WalletError

__all__ = [
    "DEFAULT_PUZZLE_DIFFICULTY",
    "Agent",
    "AgentError",
    "ConnectionRecord",
    "ConnectionState",
    "CredExRecord",
    "CredExState",
    "EventLog",
    "HttpTransport",
    "InProcessRouter",
    "InvalidTransition",
    "NotConnected",
    "PresExRecord",
    "PresExState",
    "PuzzleRejected",
    "ReplayGuard",
    "ReplayRejected",
    "Transport",
    "TransportError",
    "UnknownRecord",
    "Wallet",
    "WalletError",
    "WebhookEvent",
    "invitation_from_url",
    "invitation_to_url",
]
