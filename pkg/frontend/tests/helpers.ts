/**
 * Test scaffolding: record factories shaped exactly like the agent's wire
 * format, an invitation-URL builder matching the agent's encoding, and a fake
 * agent behind a stubbed fetch so tests exercise the real AgentClient —
 * including the request audit log the no-auto-decide assertions read.
 */

import type { FetchLike } from "../src/api.js";
import type {
  ConnectionRecord,
  CredentialSummary,
  CredExRecord,
  PresExRecord,
  WebhookEvent,
} from "../src/types.js";

let clock = 1_700_000_000_000;

export function tick(): number {
  clock += 1_000;
  return clock;
}

export function base64Url(value: unknown): string {
  return Buffer.from(JSON.stringify(value), "utf-8")
    .toString("base64")
    .replace(/\+/g, "-")
    .replace(/\//g, "_")
    .replace(/=+$/, "");
}

export function invitationUrl(label = "Government", endpoint = "127.0.0.1:8021"): string {
  const invitation = {
    label,
    recipientKey: "9wLKUFc5apok2czvLkRCTTEzBCHpDsNqLdk5dwQqpUqo",
    endpoint,
    challenge: "q83vEjRWeJA",
    difficulty: 12,
  };
  return `http://${endpoint}/invite?c_i=${base64Url(invitation)}`;
}

export function makeConnection(overrides: Partial<ConnectionRecord> = {}): ConnectionRecord {
  const at = tick();
  return {
    connectionId: "conn-1",
    role: "invitee",
    state: "ACTIVE",
    myLabel: "Patient",
    myKey: "my-key",
    theirLabel: "Government",
    theirKey: "their-key",
    theirEndpoint: "127.0.0.1:8021",
    createdAt: at,
    updatedAt: at,
    ...overrides,
  };
}

export function makeOffer(overrides: Partial<CredExRecord> = {}): CredExRecord {
  const at = tick();
  return {
    credentialExchangeId: "cred-ex-1",
    connectionId: "conn-1",
    role: "holder",
    state: "OFFER_RECEIVED",
    credDefId: "did-gov:3:CL:6:tag",
    schemaId: "did-gov:2:PID:1.0",
    attributes: {
      fullName: "Dr. Ayesha Rahman",
      licenseNumber: "BMDC-104233",
      designation: "physician",
    },
    referent: null,
    createdAt: at,
    updatedAt: at,
    ...overrides,
  };
}

export function makeProofRequest(
  requested: string[] = ["fullName", "licenseNumber"],
  overrides: Partial<PresExRecord> = {},
): PresExRecord {
  const at = tick();
  return {
    presentationExchangeId: "pres-ex-1",
    connectionId: "conn-2",
    role: "prover",
    state: "REQUEST_RECEIVED",
    request: {
      nonce: "bm9uY2U",
      requested,
      credDefId: "did-gov:3:CL:6:tag",
      nonRevoked: true,
    },
    presentation: null,
    verified: null,
    reasons: [],
    createdAt: at,
    updatedAt: at,
    ...overrides,
  };
}

export function makeCredential(overrides: Partial<CredentialSummary> = {}): CredentialSummary {
  return {
    referent: "cred-ex-1",
    credDefId: "did-gov:3:CL:6:tag",
    schemaId: "did-gov:2:PID:1.0",
    revRegId: "did-gov:4:did-gov:3:CL:6:tag:CL_ACCUM:tag",
    revIndex: 0,
    attributes: {
      fullName: "Dr. Ayesha Rahman",
      licenseNumber: "BMDC-104233",
      designation: "physician",
    },
    revoked: false,
    ...overrides,
  };
}

let eventSeq = 0;

export function makeEvent(topic: string, payload: Record<string, unknown>): WebhookEvent {
  eventSeq += 1;
  return { seq: eventSeq, topic, payload, timestamp: tick() };
}

// -- fake agent ---------------------------------------------------------------------

interface ServedRequest {
  method: string;
  path: string;
  body: unknown;
  headers: Record<string, string>;
}

export class FakeAgent {
  connections = new Map<string, ConnectionRecord>();
  credentials = new Map<string, CredentialSummary>();
  credExchanges = new Map<string, CredExRecord>();
  proofExchanges = new Map<string, PresExRecord>();
  /** Server-side request log (the client keeps its own audit log). */
  served: ServedRequest[] = [];
  /** Set to force the next respond call to fail with this envelope. */
  failNext: { status: number; error: string; detail: string } | null = null;

  readonly fetchFn: FetchLike = async (input, init) => {
    const url = new URL(input);
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.served.push({
      method,
      path: url.pathname,
      body,
      headers: Object.fromEntries(
        Object.entries((init?.headers ?? {}) as Record<string, string>),
      ),
    });
    return this.route(method, url.pathname, body);
  };

  private json(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  }

  private takeFailure(): Response | null {
    if (!this.failNext) return null;
    const { status, error, detail } = this.failNext;
    this.failNext = null;
    return this.json({ error, detail }, status);
  }

  private route(method: string, path: string, body: unknown): Response {
    if (method === "GET") {
      switch (path) {
        case "/connections":
          return this.json({ results: [...this.connections.values()] });
        case "/credentials":
          return this.json({ results: [...this.credentials.values()] });
        case "/issue-credential":
          return this.json({ results: [...this.credExchanges.values()] });
        case "/present-proof":
          return this.json({ results: [...this.proofExchanges.values()] });
      }
    }
    if (method === "POST") {
      const failure = this.takeFailure();
      if (failure) return failure;
      if (path === "/connections/receive-invitation") {
        const record = makeConnection({
          connectionId: `conn-${this.connections.size + 1}`,
          state: "ACTIVE",
          updatedAt: tick(),
        });
        this.connections.set(record.connectionId, record);
        return this.json(record);
      }
      const accepted = /\/connections\/(.+)\/accept$/.exec(path);
      if (accepted) {
        const record = this.connections.get(accepted[1]!);
        if (!record) return this.json({ error: "UnknownRecord", detail: path }, 404);
        record.state = "ACTIVE";
        record.updatedAt = tick();
        return this.json(record);
      }
      const offer = /\/issue-credential\/(.+)\/respond$/.exec(path);
      if (offer) {
        const record = this.credExchanges.get(offer[1]!);
        if (!record) return this.json({ error: "UnknownRecord", detail: path }, 404);
        const accept = (body as { accept?: boolean }).accept ?? true;
        record.state = accept ? "STORED" : "DECLINED";
        record.updatedAt = tick();
        if (accept) {
          record.referent = record.credentialExchangeId;
          this.credentials.set(
            record.credentialExchangeId,
            makeCredential({
              referent: record.credentialExchangeId,
              credDefId: record.credDefId,
              attributes: record.attributes,
            }),
          );
        }
        return this.json(record);
      }
      const proof = /\/present-proof\/(.+)\/respond$/.exec(path);
      if (proof) {
        const record = this.proofExchanges.get(proof[1]!);
        if (!record) return this.json({ error: "UnknownRecord", detail: path }, 404);
        const accept = (body as { accept?: boolean }).accept ?? true;
        record.state = accept ? "PRESENTATION_SENT" : "DECLINED";
        record.updatedAt = tick();
        return this.json(record);
      }
    }
    return this.json({ error: "NotFound", detail: path }, 404);
  }
}
