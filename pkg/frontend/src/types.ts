/**
 * Record and event shapes as the holder agent's REST API serves them.
 *
 * These mirror the agent's wire format exactly; the wallet UI never invents
 * fields, it only derives view state (pending actions, activity) from them.
 */

export type ConnectionState =
  | "INVITED"
  | "REQUESTED"
  | "RESPONDED"
  | "ACTIVE"
  | "ABANDONED";

export interface ConnectionRecord {
  connectionId: string;
  role: "inviter" | "invitee";
  state: ConnectionState;
  myLabel: string;
  myKey: string;
  theirLabel: string;
  theirKey: string;
  theirEndpoint: string;
  createdAt: number;
  updatedAt: number;
}

export type CredExState =
  | "OFFER_SENT"
  | "OFFER_RECEIVED"
  | "REQUEST_SENT"
  | "REQUEST_RECEIVED"
  | "CREDENTIAL_ISSUED"
  | "STORED"
  | "ACKED"
  | "DECLINED";

export interface CredExRecord {
  credentialExchangeId: string;
  connectionId: string;
  role: "issuer" | "holder";
  state: CredExState;
  credDefId: string;
  schemaId: string;
  attributes: Record<string, string>;
  referent: string | null;
  createdAt: number;
  updatedAt: number;
}

export type PresExState =
  | "REQUEST_SENT"
  | "REQUEST_RECEIVED"
  | "PRESENTATION_SENT"
  | "PRESENTATION_RECEIVED"
  | "VERIFIED_TRUE"
  | "VERIFIED_FALSE"
  | "DECLINED";

export interface ProofRequest {
  nonce: string;
  requested: string[];
  credDefId: string | null;
  nonRevoked: boolean;
}

export interface PresExRecord {
  presentationExchangeId: string;
  connectionId: string;
  role: "verifier" | "prover";
  state: PresExState;
  request: ProofRequest;
  presentation: unknown;
  verified: boolean | null;
  reasons: string[];
  createdAt: number;
  updatedAt: number;
}

export interface CredentialSummary {
  referent: string;
  credDefId: string;
  schemaId: string;
  revRegId: string;
  revIndex: number;
  attributes: Record<string, string>;
  revoked: boolean;
}

/** One entry from GET /events (also the SSE `data:` payload). */
export interface WebhookEvent {
  seq: number;
  topic: string;
  payload: Record<string, unknown>;
  timestamp: number;
}

/** Invitation payload carried in the `c_i` query parameter of an invitation URL. */
export interface InvitationPayload {
  label: string;
  recipientKey: string;
  endpoint: string;
  challenge: string;
  difficulty: number;
}

// -- view state derived from agent records -----------------------------------

export type PendingKind = "invitation" | "credential_offer" | "proof_request";

/** Something awaiting the holder's explicit decision. */
export interface PendingAction {
  kind: PendingKind;
  /** Agent record id, or a wallet-local id for a pasted invitation. */
  recordId: string;
  receivedAt: number;
  summary: {
    peerLabel: string;
    credDefId?: string;
    offeredAttributes?: Record<string, string>;
    requestedAttributes?: string[];
  };
  /** Set only for pasted invitations that have not touched the agent yet. */
  invitationUrl?: string;
}

export interface ActivityEntry {
  at: number;
  topic: string;
  message: string;
}
