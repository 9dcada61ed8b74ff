/**
 * Single state store for the wallet.
 *
 * Agent webhook events and user decisions meet here: events fold into the
 * record maps, screens render from a snapshot, and every holder decision
 * funnels through {@link WalletStore.decide} — the only code path that calls
 * a respond endpoint. Nothing in the event-handling path writes to the agent,
 * which is what keeps the wallet from ever deciding on its own.
 */

import { AgentApiError, AgentClient, AgentUnreachable } from "./api.js";
import {
  buildSelection,
  canSubmit,
  matchCredential,
  type DisclosureSelection,
} from "./disclosure.js";
import { parseInvitation } from "./invitation.js";
import type {
  ActivityEntry,
  ConnectionRecord,
  CredentialSummary,
  CredExRecord,
  PendingAction,
  PresExRecord,
  WebhookEvent,
} from "./types.js";

const ACTIVITY_LIMIT = 200;

export type ScreenName = "connections" | "credentials" | "pending" | "activity";

/** Thrown when a submit is attempted that the disclosure gate forbids. */
export class DisclosureBlocked extends Error {
  constructor(message: string) {
    super(message);
    this.name = "DisclosureBlocked";
  }
}

export interface WalletState {
  reachable: boolean;
  connections: Map<string, ConnectionRecord>;
  credentialExchanges: Map<string, CredExRecord>;
  proofExchanges: Map<string, PresExRecord>;
  credentials: Map<string, CredentialSummary>;
  activity: ActivityEntry[];
  toasts: string[];
  ui: {
    screen: ScreenName;
    disclosure: DisclosureSelection | null;
    invitationError: string | null;
  };
}

interface Timestamped {
  updatedAt: number;
}

/** Keep the newer of the stored and incoming copy of a record. */
function upsert<T extends Timestamped>(map: Map<string, T>, key: string, record: T): void {
  const existing = map.get(key);
  if (!existing || record.updatedAt >= existing.updatedAt) {
    map.set(key, record);
  }
}

export class WalletStore {
  readonly state: WalletState = {
    reachable: false,
    connections: new Map(),
    credentialExchanges: new Map(),
    proofExchanges: new Map(),
    credentials: new Map(),
    activity: [],
    toasts: [],
    ui: { screen: "pending", disclosure: null, invitationError: null },
  };

  private listeners = new Set<() => void>();
  private localInvitations: PendingAction[] = [];
  private dismissed = new Set<string>();
  private localSeq = 0;

  constructor(
    private readonly client: AgentClient,
    private readonly now: () => number = Date.now,
  ) {}

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  private record(topic: string, message: string): void {
    this.state.activity.unshift({ at: this.now(), topic, message });
    if (this.state.activity.length > ACTIVITY_LIMIT) {
      this.state.activity.length = ACTIVITY_LIMIT;
    }
  }

  private toast(message: string): void {
    this.state.toasts.push(message);
    this.notify();
  }

  dismissToast(index: number): void {
    this.state.toasts.splice(index, 1);
    this.notify();
  }

  setScreen(screen: ScreenName): void {
    this.state.ui.screen = screen;
    this.notify();
  }

  setReachable(reachable: boolean): void {
    if (this.state.reachable !== reachable) {
      this.state.reachable = reachable;
      this.notify();
    }
  }

  // -- reading agent state -------------------------------------------------------

  /** Pull all four record lists; the reconciliation step after any surprise. */
  async refresh(): Promise<void> {
    try {
      const [connections, credentials, credExchanges, proofExchanges] = await Promise.all([
        this.client.listConnections(),
        this.client.listCredentials(),
        this.client.listCredentialExchanges(),
        this.client.listProofExchanges(),
      ]);
      for (const record of connections) {
        upsert(this.state.connections, record.connectionId, record);
      }
      for (const summary of credentials) {
        this.state.credentials.set(summary.referent, summary);
      }
      for (const record of credExchanges) {
        upsert(this.state.credentialExchanges, record.credentialExchangeId, record);
      }
      for (const record of proofExchanges) {
        upsert(this.state.proofExchanges, record.presentationExchangeId, record);
      }
      this.state.reachable = true;
    } catch (error) {
      if (error instanceof AgentUnreachable) {
        this.state.reachable = false;
      } else {
        throw error;
      }
    }
    this.notify();
  }

  private async refreshCredentials(): Promise<void> {
    try {
      for (const summary of await this.client.listCredentials()) {
        this.state.credentials.set(summary.referent, summary);
      }
      this.notify();
    } catch {
      // a later refresh or event will catch us up
    }
  }

  // -- folding webhook events ------------------------------------------------------

  applyEvent(event: WebhookEvent): void {
    switch (event.topic) {
      case "connections": {
        const record = event.payload as unknown as ConnectionRecord;
        upsert(this.state.connections, record.connectionId, record);
        this.record(event.topic, `connection with ${record.theirLabel || "(pending)"}: ${record.state}`);
        break;
      }
      case "issue-credential": {
        const record = event.payload as unknown as CredExRecord;
        upsert(this.state.credentialExchanges, record.credentialExchangeId, record);
        this.record(event.topic, `credential exchange ${record.state}`);
        if (record.role === "holder" && (record.state === "STORED" || record.state === "ACKED")) {
          // the summary itself is only available from the wallet listing
          void this.refreshCredentials();
        }
        break;
      }
      case "present-proof": {
        const record = event.payload as unknown as PresExRecord;
        upsert(this.state.proofExchanges, record.presentationExchangeId, record);
        this.record(event.topic, `proof exchange ${record.state}`);
        break;
      }
      case "revocation": {
        const referent = event.payload["referent"];
        if (typeof referent === "string") {
          const summary = this.state.credentials.get(referent);
          if (summary) summary.revoked = true;
          this.record(event.topic, `credential ${referent} revoked by its issuer`);
        }
        break;
      }
      default:
        this.record(event.topic, JSON.stringify(event.payload));
    }
    this.notify();
  }

  // -- pending actions ----------------------------------------------------------

  private peerLabel(connectionId: string): string {
    return this.state.connections.get(connectionId)?.theirLabel || "(unknown peer)";
  }

  /** Everything awaiting an explicit holder decision, oldest first. */
  pendingActions(): PendingAction[] {
    const pending: PendingAction[] = this.localInvitations.filter(
      (action) => !this.dismissed.has(action.recordId),
    );
    for (const record of this.state.connections.values()) {
      if (
        record.role === "invitee" &&
        record.state === "INVITED" &&
        !this.dismissed.has(record.connectionId)
      ) {
        pending.push({
          kind: "invitation",
          recordId: record.connectionId,
          receivedAt: record.createdAt,
          summary: { peerLabel: record.theirLabel },
        });
      }
    }
    for (const record of this.state.credentialExchanges.values()) {
      if (record.role === "holder" && record.state === "OFFER_RECEIVED") {
        pending.push({
          kind: "credential_offer",
          recordId: record.credentialExchangeId,
          receivedAt: record.createdAt,
          summary: {
            peerLabel: this.peerLabel(record.connectionId),
            credDefId: record.credDefId,
            offeredAttributes: record.attributes,
          },
        });
      }
    }
    for (const record of this.state.proofExchanges.values()) {
      if (record.role === "prover" && record.state === "REQUEST_RECEIVED") {
        pending.push({
          kind: "proof_request",
          recordId: record.presentationExchangeId,
          receivedAt: record.createdAt,
          summary: {
            peerLabel: this.peerLabel(record.connectionId),
            ...(record.request.credDefId ? { credDefId: record.request.credDefId } : {}),
            requestedAttributes: [...record.request.requested],
          },
        });
      }
    }
    return pending.sort((a, b) => a.receivedAt - b.receivedAt);
  }

  // -- invitations ---------------------------------------------------------------

  /**
   * Validate a pasted invitation. A malformed paste sets an inline error and
   * never touches the agent; a well-formed one becomes a pending action that
   * still touches nothing until the holder accepts it.
   */
  submitInvitation(text: string): boolean {
    const parsed = parseInvitation(text);
    if (!parsed.ok) {
      this.state.ui.invitationError = parsed.error;
      this.notify();
      return false;
    }
    this.state.ui.invitationError = null;
    this.localSeq += 1;
    this.localInvitations.push({
      kind: "invitation",
      recordId: `local-${this.localSeq}`,
      receivedAt: this.now(),
      summary: { peerLabel: parsed.invitation.label },
      invitationUrl: parsed.url,
    });
    this.record("invitation", `invitation from ${parsed.invitation.label} ready to accept`);
    this.notify();
    return true;
  }

  // -- disclosure dialog ----------------------------------------------------------

  openDisclosure(presExId: string): void {
    const record = this.state.proofExchanges.get(presExId);
    if (!record) return;
    const credential = matchCredential(record, [...this.state.credentials.values()]);
    this.state.ui.disclosure = buildSelection(record, credential);
    this.notify();
  }

  updateDisclosure(selection: DisclosureSelection): void {
    this.state.ui.disclosure = selection;
    this.notify();
  }

  closeDisclosure(): void {
    this.state.ui.disclosure = null;
    this.notify();
  }

  // -- decisions (the only writes to the agent) -------------------------------------

  /**
   * Act on a pending action. Called from user gestures only; event handling
   * never reaches this. Gate violations throw before any request is made;
   * agent errors surface as a toast plus a reconciling refresh.
   */
  async decide(
    action: PendingAction,
    accept: boolean,
    selection?: DisclosureSelection,
  ): Promise<void> {
    if (action.kind === "proof_request" && accept) {
      if (!selection || selection.presExId !== action.recordId) {
        throw new DisclosureBlocked("no disclosure selection for this proof request");
      }
      if (!canSubmit(selection)) {
        throw new DisclosureBlocked("every requested attribute must stay checked");
      }
    }
    try {
      switch (action.kind) {
        case "invitation":
          await this.decideInvitation(action, accept);
          break;
        case "credential_offer": {
          const record = await this.client.respondCredentialOffer(action.recordId, accept);
          upsert(this.state.credentialExchanges, record.credentialExchangeId, record);
          this.record(
            "issue-credential",
            accept
              ? `accepted credential offer from ${action.summary.peerLabel}`
              : `declined credential offer from ${action.summary.peerLabel}`,
          );
          if (accept) await this.refreshCredentials();
          break;
        }
        case "proof_request": {
          const record = await this.client.respondProofRequest(action.recordId, accept);
          upsert(this.state.proofExchanges, record.presentationExchangeId, record);
          this.record(
            "present-proof",
            accept
              ? `sent presentation to ${action.summary.peerLabel}`
              : `declined proof request from ${action.summary.peerLabel}`,
          );
          this.state.ui.disclosure = null;
          break;
        }
      }
    } catch (error) {
      if (error instanceof AgentApiError) {
        // most likely the record moved on under us; reconcile and tell the user
        this.toast(`${error.errorType}: ${error.detail || "request failed"}`);
        await this.refresh();
        return;
      }
      if (error instanceof AgentUnreachable) {
        this.state.reachable = false;
        this.toast("Agent unreachable; your decision was not delivered.");
        this.notify();
        return;
      }
      throw error;
    }
    this.notify();
  }

  private async decideInvitation(action: PendingAction, accept: boolean): Promise<void> {
    if (!accept) {
      this.dismissed.add(action.recordId);
      this.localInvitations = this.localInvitations.filter(
        (entry) => entry.recordId !== action.recordId,
      );
      this.record("connections", `declined invitation from ${action.summary.peerLabel}`);
      return;
    }
    if (action.invitationUrl) {
      const record = await this.client.receiveInvitation(action.invitationUrl, true);
      upsert(this.state.connections, record.connectionId, record);
      this.localInvitations = this.localInvitations.filter(
        (entry) => entry.recordId !== action.recordId,
      );
    } else {
      const record = await this.client.acceptConnection(action.recordId);
      upsert(this.state.connections, record.connectionId, record);
    }
    this.record("connections", `accepted invitation from ${action.summary.peerLabel}`);
  }
}
