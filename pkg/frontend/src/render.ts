/**
 * Screen rendering. Pure DOM construction from a store snapshot; the only
 * code that calls back into {@link WalletStore.decide} are button click
 * handlers, so every write to the agent traces to a user gesture.
 */

import { canSubmit, setChecked, type DisclosureSelection } from "./disclosure.js";
import type { ScreenName, WalletStore } from "./store.js";
import type { CredentialSummary, PendingAction, PresExRecord } from "./types.js";

type Child = Node | string | null;

function h(tag: string, attrs: Record<string, unknown> = {}, ...children: Child[]): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = String(value);
    else if (key.startsWith("on") && typeof value === "function") {
      node.addEventListener(key.slice(2), value as EventListener);
    } else if (key === "disabled" || key === "checked") {
      if (value) node.setAttribute(key, "");
      (node as unknown as Record<string, unknown>)[key] = Boolean(value);
    } else if (value !== null && value !== undefined) {
      node.setAttribute(key, String(value));
    }
  }
  for (const child of children) {
    if (child === null) continue;
    node.append(child);
  }
  return node;
}

function timestamp(ms: number): string {
  return new Date(ms).toLocaleTimeString();
}

const SCREENS: Array<[ScreenName, string]> = [
  ["pending", "Pending actions"],
  ["connections", "Connections"],
  ["credentials", "Credentials"],
  ["activity", "Activity"],
];

// survives re-renders without forcing one per keystroke
let invitationDraft = "";

export function renderApp(root: HTMLElement, store: WalletStore): void {
  const state = store.state;
  const parts: Child[] = [
    h(
      "header",
      {},
      h("h1", {}, "Wallet"),
      h(
        "nav",
        {},
        ...SCREENS.map(([name, label]) =>
          h(
            "button",
            {
              class: state.ui.screen === name ? "nav-active" : "",
              "data-screen": name,
              onclick: () => store.setScreen(name),
            },
            name === "pending" ? `${label} (${store.pendingActions().length})` : label,
          ),
        ),
      ),
    ),
    state.reachable
      ? null
      : h(
          "div",
          { class: "banner", role: "alert" },
          "Agent unreachable — retrying in the background.",
        ),
    h(
      "div",
      { class: "toasts" },
      ...state.toasts.map((message, index) =>
        h(
          "div",
          { class: "toast" },
          message,
          h("button", { onclick: () => store.dismissToast(index) }, "dismiss"),
        ),
      ),
    ),
    renderScreen(store),
    state.ui.disclosure ? renderDisclosureDialog(store, state.ui.disclosure) : null,
  ];
  root.replaceChildren(...parts.filter((part): part is HTMLElement => part !== null));
}

function renderScreen(store: WalletStore): HTMLElement {
  switch (store.state.ui.screen) {
    case "connections":
      return renderConnections(store);
    case "credentials":
      return renderCredentials(store);
    case "activity":
      return renderActivity(store);
    case "pending":
      return renderPending(store);
  }
}

// -- connections ------------------------------------------------------------------

function renderConnections(store: WalletStore): HTMLElement {
  const rows = [...store.state.connections.values()].sort((a, b) => b.updatedAt - a.updatedAt);
  return h(
    "main",
    { class: "screen-connections" },
    h("h2", {}, "Connections"),
    rows.length === 0
      ? h("p", { class: "empty" }, "No connections yet. Paste an invitation under Pending actions.")
      : h(
          "ul",
          { class: "cards" },
          ...rows.map((record) =>
            h(
              "li",
              { class: "card" },
              h("strong", {}, record.theirLabel || "(pending)"),
              h("span", { class: `state state-${record.state.toLowerCase()}` }, record.state),
              h("small", {}, `updated ${timestamp(record.updatedAt)}`),
            ),
          ),
        ),
  );
}

// -- credentials ------------------------------------------------------------------

function renderCredentials(store: WalletStore): HTMLElement {
  const rows = [...store.state.credentials.values()];
  return h(
    "main",
    { class: "screen-credentials" },
    h("h2", {}, "Credentials"),
    rows.length === 0
      ? h("p", { class: "empty" }, "No stored credentials.")
      : h("ul", { class: "cards" }, ...rows.map(renderCredentialCard)),
  );
}

function renderCredentialCard(summary: CredentialSummary): HTMLElement {
  return h(
    "li",
    { class: "card", "data-referent": summary.referent },
    h(
      "div",
      { class: "card-title" },
      h("strong", {}, summary.credDefId),
      summary.revoked ? h("span", { class: "badge badge-revoked" }, "REVOKED") : null,
    ),
    h(
      "table",
      { class: "attributes" },
      ...Object.entries(summary.attributes).map(([name, value]) =>
        h("tr", {}, h("td", {}, name), h("td", {}, value)),
      ),
    ),
  );
}

// -- pending actions ---------------------------------------------------------------

function renderPending(store: WalletStore): HTMLElement {
  const pending = store.pendingActions();
  return h(
    "main",
    { class: "screen-pending" },
    h("h2", {}, "Pending actions"),
    renderInvitationBox(store),
    pending.length === 0
      ? h("p", { class: "empty" }, "Nothing awaits your decision.")
      : h("ul", { class: "cards" }, ...pending.map((action) => renderPendingCard(store, action))),
  );
}

function renderInvitationBox(store: WalletStore): HTMLElement {
  const textarea = h("textarea", {
    class: "invitation-input",
    placeholder: "Paste an invitation URL…",
    rows: 2,
  }) as HTMLTextAreaElement;
  textarea.value = invitationDraft;
  textarea.addEventListener("input", () => {
    invitationDraft = textarea.value;
  });
  const error = store.state.ui.invitationError;
  return h(
    "section",
    { class: "invitation-box" },
    h("h3", {}, "Add a connection"),
    textarea,
    h(
      "button",
      {
        class: "invitation-submit",
        onclick: () => {
          if (store.submitInvitation(textarea.value)) {
            invitationDraft = "";
          }
        },
      },
      "Check invitation",
    ),
    error ? h("p", { class: "inline-error", role: "alert" }, error) : null,
  );
}

function renderPendingCard(store: WalletStore, action: PendingAction): HTMLElement {
  const title = {
    invitation: `Connection invitation from ${action.summary.peerLabel}`,
    credential_offer: `Credential offer from ${action.summary.peerLabel}`,
    proof_request: `Proof request from ${action.summary.peerLabel}`,
  }[action.kind];
  const detail: Child[] = [];
  if (action.summary.credDefId) {
    detail.push(h("small", {}, action.summary.credDefId));
  }
  if (action.summary.offeredAttributes) {
    detail.push(
      h(
        "table",
        { class: "attributes" },
        ...Object.entries(action.summary.offeredAttributes).map(([name, value]) =>
          h("tr", {}, h("td", {}, name), h("td", {}, value)),
        ),
      ),
    );
  }
  if (action.summary.requestedAttributes) {
    detail.push(
      h("p", {}, `Requested attributes: ${action.summary.requestedAttributes.join(", ")}`),
    );
  }
  const accept =
    action.kind === "proof_request"
      ? h(
          "button",
          { class: "accept", onclick: () => store.openDisclosure(action.recordId) },
          "Review & present…",
        )
      : h(
          "button",
          { class: "accept", onclick: () => void store.decide(action, true) },
          "Accept",
        );
  return h(
    "li",
    { class: `card pending-${action.kind}`, "data-record-id": action.recordId },
    h("strong", {}, title),
    ...detail,
    h(
      "div",
      { class: "card-actions" },
      accept,
      h(
        "button",
        { class: "decline", onclick: () => void store.decide(action, false) },
        "Decline",
      ),
    ),
  );
}

// -- disclosure dialog --------------------------------------------------------------

function renderDisclosureDialog(store: WalletStore, selection: DisclosureSelection): HTMLElement {
  const action = store
    .pendingActions()
    .find((entry) => entry.kind === "proof_request" && entry.recordId === selection.presExId);
  const submittable = canSubmit(selection) && action !== undefined;
  return h(
    "div",
    { class: "dialog-backdrop" },
    h(
      "div",
      { class: "dialog disclosure", role: "dialog" },
      h("h3", {}, "Present credential"),
      selection.credentialId === null
        ? h(
            "p",
            { class: "inline-error", role: "alert" },
            "No stored credential can answer this request.",
          )
        : null,
      h(
        "ul",
        { class: "checklist" },
        ...selection.revealAttrs.map((choice) =>
          h(
            "li",
            {},
            h("input", {
              type: "checkbox",
              id: `reveal-${choice.name}`,
              "data-attr": choice.name,
              checked: choice.checked,
              // requested attributes are locked on; the rest stay hidden
              // because the agent reveals exactly the requested set
              disabled: true,
              onchange: (event: Event) => {
                const box = event.target as HTMLInputElement;
                store.updateDisclosure(setChecked(selection, choice.name, box.checked));
              },
            }),
            h(
              "label",
              { for: `reveal-${choice.name}` },
              choice.name,
              choice.requested
                ? h("span", { class: "badge badge-requested" }, "requested")
                : h("span", { class: "badge badge-hidden" }, "stays hidden"),
            ),
          ),
        ),
      ),
      h(
        "div",
        { class: "card-actions" },
        h(
          "button",
          {
            class: "submit-disclosure",
            disabled: !submittable,
            onclick: () => {
              // guard again at the gesture: the store re-checks the gate too
              if (submittable && action) void store.decide(action, true, selection);
            },
          },
          "Present",
        ),
        h("button", { class: "cancel", onclick: () => store.closeDisclosure() }, "Cancel"),
      ),
    ),
  );
}

// -- activity -----------------------------------------------------------------------

function renderActivity(store: WalletStore): HTMLElement {
  const presentations = [...store.state.proofExchanges.values()]
    .filter((record) => record.role === "prover" && record.presentation !== null)
    .sort((a, b) => b.updatedAt - a.updatedAt);
  return h(
    "main",
    { class: "screen-activity" },
    h("h2", {}, "Activity"),
    presentations.length === 0
      ? null
      : h(
          "section",
          {},
          h("h3", {}, "Presentations"),
          h("ul", { class: "cards" }, ...presentations.map((record) => renderPresentation(store, record))),
        ),
    h(
      "ol",
      { class: "activity-log" },
      ...store.state.activity.map((entry) =>
        h(
          "li",
          {},
          h("small", {}, timestamp(entry.at)),
          h("span", { class: "topic" }, entry.topic),
          entry.message,
        ),
      ),
    ),
  );
}

/**
 * A submitted presentation: revealed attributes show their values (they are
 * in the presentation), everything else shows its name only — the record
 * holds no value for an unrevealed attribute, and neither does this view.
 */
function renderPresentation(store: WalletStore, record: PresExRecord): HTMLElement {
  const presentation = record.presentation as { credDefId?: string; revealed?: Record<string, { value: string }> };
  const revealed = presentation.revealed ?? {};
  const credential = [...store.state.credentials.values()].find(
    (summary) => summary.credDefId === presentation.credDefId,
  );
  const hiddenNames = credential
    ? Object.keys(credential.attributes).filter((name) => !(name in revealed))
    : [];
  return h(
    "li",
    { class: "card", "data-pres-ex-id": record.presentationExchangeId },
    h("strong", {}, `Presentation ${record.state}`),
    h(
      "table",
      { class: "attributes" },
      ...Object.entries(revealed).map(([name, entry]) =>
        h("tr", {}, h("td", {}, name), h("td", {}, entry.value)),
      ),
      ...hiddenNames.map((name) =>
        h(
          "tr",
          { class: "hidden-attr" },
          h("td", {}, name),
          h("td", {}, h("em", {}, "not revealed")),
        ),
      ),
    ),
  );
}
