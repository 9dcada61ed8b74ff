/**
 * Thin client for the holder agent's REST API.
 *
 * Every call is appended to an audit log before it goes on the wire. The UI's
 * "never decide on its own" invariant is checked against that log in tests:
 * after any amount of idle event traffic it must contain no POSTs.
 */

import type { WalletConfig } from "./config.js";
import type {
  ConnectionRecord,
  CredentialSummary,
  CredExRecord,
  PresExRecord,
} from "./types.js";

export interface RecordedCall {
  at: number;
  method: string;
  path: string;
  body?: unknown;
}

/** The agent answered with an error envelope ({"error": type, "detail": text}). */
export class AgentApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorType: string,
    readonly detail: string,
  ) {
    super(`${errorType}: ${detail}`);
    this.name = "AgentApiError";
  }
}

/** The agent could not be reached at all (network failure, not an API error). */
export class AgentUnreachable extends Error {
  constructor(cause: unknown) {
    super(`agent unreachable: ${cause instanceof Error ? cause.message : String(cause)}`);
    this.name = "AgentUnreachable";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class AgentClient {
  /** Audit log of every request this client has issued, in order. */
  readonly calls: RecordedCall[] = [];

  constructor(
    private readonly config: WalletConfig,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    this.calls.push({ at: Date.now(), method, path, ...(body === undefined ? {} : { body }) });
    const headers: Record<string, string> = { accept: "application/json" };
    if (this.config.apiKey) headers["x-api-key"] = this.config.apiKey;
    if (body !== undefined) headers["content-type"] = "application/json";
    let response: Response;
    try {
      response = await this.fetchFn(`${this.config.agentBaseUrl}${path}`, {
        method,
        headers,
        ...(body === undefined ? {} : { body: JSON.stringify(body) }),
      });
    } catch (cause) {
      throw new AgentUnreachable(cause);
    }
    if (!response.ok) {
      let errorType = `HTTP ${response.status}`;
      let detail = "";
      try {
        const envelope = (await response.json()) as { error?: string; detail?: string };
        errorType = envelope.error ?? errorType;
        detail = envelope.detail ?? "";
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new AgentApiError(response.status, errorType, detail);
    }
    return (await response.json()) as T;
  }

  // -- reads -------------------------------------------------------------------

  status(): Promise<{ label: string; did: string; verkey: string }> {
    return this.request("GET", "/status");
  }

  async listConnections(): Promise<ConnectionRecord[]> {
    const { results } = await this.request<{ results: ConnectionRecord[] }>(
      "GET",
      "/connections",
    );
    return results;
  }

  async listCredentials(): Promise<CredentialSummary[]> {
    const { results } = await this.request<{ results: CredentialSummary[] }>(
      "GET",
      "/credentials",
    );
    return results;
  }

  async listCredentialExchanges(): Promise<CredExRecord[]> {
    const { results } = await this.request<{ results: CredExRecord[] }>(
      "GET",
      "/issue-credential",
    );
    return results;
  }

  async listProofExchanges(): Promise<PresExRecord[]> {
    const { results } = await this.request<{ results: PresExRecord[] }>(
      "GET",
      "/present-proof",
    );
    return results;
  }

  // -- holder decisions (only ever called from a user gesture) ------------------

  receiveInvitation(invitationUrl: string, accept = true): Promise<ConnectionRecord> {
    return this.request("POST", "/connections/receive-invitation", {
      invitationUrl,
      accept,
    });
  }

  acceptConnection(connectionId: string): Promise<ConnectionRecord> {
    return this.request("POST", `/connections/${connectionId}/accept`);
  }

  respondCredentialOffer(credExId: string, accept: boolean): Promise<CredExRecord> {
    return this.request("POST", `/issue-credential/${credExId}/respond`, { accept });
  }

  respondProofRequest(presExId: string, accept: boolean): Promise<PresExRecord> {
    return this.request("POST", `/present-proof/${presExId}/respond`, { accept });
  }
}
