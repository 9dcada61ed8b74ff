// @vitest-environment happy-dom
import { describe, expect, it, vi } from "vitest";

import { AgentClient } from "../src/api.js";
import { setChecked } from "../src/disclosure.js";
import { renderApp } from "../src/render.js";
import { WalletStore } from "../src/store.js";
import {
  FakeAgent,
  makeConnection,
  makeCredential,
  makeEvent,
  makeOffer,
  makeProofRequest,
} from "./helpers.js";

const CONFIG = { agentBaseUrl: "http://127.0.0.1:8023", apiKey: "" };

function mount(agent = new FakeAgent()) {
  const client = new AgentClient(CONFIG, agent.fetchFn);
  const store = new WalletStore(client);
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  store.subscribe(() => renderApp(root, store));
  renderApp(root, store);
  return { agent, client, store, root };
}

function postCalls(client: AgentClient): string[] {
  return client.calls.filter((call) => call.method === "POST").map((call) => call.path);
}

describe("pending actions screen", () => {
  it("renders an incoming offer as a card with accept and decline", () => {
    const { store, root } = mount();
    store.applyEvent(makeEvent("connections", { ...makeConnection() }));
    store.applyEvent(makeEvent("issue-credential", { ...makeOffer() }));

    const card = root.querySelector(".pending-credential_offer");
    expect(card).not.toBeNull();
    expect(card?.textContent).toContain("Credential offer from Government");
    expect(card?.querySelector("button.accept")).not.toBeNull();
    expect(card?.querySelector("button.decline")).not.toBeNull();
  });

  it("accepting an offer by click issues exactly one respond call", async () => {
    const { agent, client, store, root } = mount();
    agent.credExchanges.set("cred-ex-1", makeOffer());
    store.applyEvent(makeEvent("connections", { ...makeConnection() }));
    store.applyEvent(makeEvent("issue-credential", { ...agent.credExchanges.get("cred-ex-1")! }));

    (root.querySelector(".pending-credential_offer button.accept") as HTMLButtonElement).click();
    await vi.waitFor(() => expect(postCalls(client)).toHaveLength(1));

    expect(postCalls(client)).toEqual(["/issue-credential/cred-ex-1/respond"]);
    await vi.waitFor(() => expect(root.querySelector(".pending-credential_offer")).toBeNull());
  });

  it("declining an offer by click leaves it DECLINED", async () => {
    const { agent, client, store, root } = mount();
    agent.credExchanges.set("cred-ex-1", makeOffer());
    store.applyEvent(makeEvent("issue-credential", { ...agent.credExchanges.get("cred-ex-1")! }));

    (root.querySelector(".pending-credential_offer button.decline") as HTMLButtonElement).click();
    await vi.waitFor(() =>
      expect(store.state.credentialExchanges.get("cred-ex-1")?.state).toBe("DECLINED"),
    );

    expect(postCalls(client)).toEqual(["/issue-credential/cred-ex-1/respond"]);
    expect(client.calls.at(-1)?.body).toEqual({ accept: false });
  });

  it("a malformed invitation paste shows an inline error and calls no API", () => {
    const { client, root } = mount();
    const box = root.querySelector(".invitation-input") as HTMLTextAreaElement;
    box.value = "certainly not an invitation";
    (root.querySelector(".invitation-submit") as HTMLButtonElement).click();

    expect(root.querySelector(".inline-error")?.textContent).toContain("not a valid URL");
    expect(client.calls).toHaveLength(0);
  });
});

describe("disclosure dialog", () => {
  function openDialog() {
    const fixture = mount();
    fixture.agent.proofExchanges.set("pres-ex-1", makeProofRequest());
    fixture.store.applyEvent(
      makeEvent("connections", { ...makeConnection({ connectionId: "conn-2", theirLabel: "Hospital" }) }),
    );
    fixture.store.applyEvent(
      makeEvent("present-proof", { ...fixture.agent.proofExchanges.get("pres-ex-1")! }),
    );
    fixture.store.state.credentials.set("cred-ex-1", makeCredential());
    (fixture.root.querySelector(".pending-proof_request button.accept") as HTMLButtonElement).click();
    return fixture;
  }

  it("opens from the pending card without calling the agent", () => {
    const { client, root } = openDialog();
    expect(root.querySelector(".dialog.disclosure")).not.toBeNull();
    expect(client.calls).toHaveLength(0);
  });

  it("pre-checks and locks the requested attributes", () => {
    const { root } = openDialog();
    const fullName = root.querySelector('input[data-attr="fullName"]') as HTMLInputElement;
    const license = root.querySelector('input[data-attr="licenseNumber"]') as HTMLInputElement;
    const designation = root.querySelector('input[data-attr="designation"]') as HTMLInputElement;

    expect(fullName.checked).toBe(true);
    expect(fullName.disabled).toBe(true);
    expect(license.checked).toBe(true);
    expect(designation.checked).toBe(false);
    const submit = root.querySelector(".submit-disclosure") as HTMLButtonElement;
    expect(submit.disabled).toBe(false);
  });

  it("cannot submit with a requested attribute unchecked", () => {
    const { client, store, root } = openDialog();
    // the checkbox is locked in the DOM, so force the state through the model
    store.updateDisclosure(setChecked(store.state.ui.disclosure!, "licenseNumber", false));

    const submit = root.querySelector(".submit-disclosure") as HTMLButtonElement;
    expect(submit.disabled).toBe(true);
    submit.click(); // a forced click must still do nothing
    expect(client.calls).toHaveLength(0);
    expect(store.state.proofExchanges.get("pres-ex-1")?.state).toBe("REQUEST_RECEIVED");
  });

  it("submits exactly one respond call when the gate passes", async () => {
    const { client, root } = openDialog();
    (root.querySelector(".submit-disclosure") as HTMLButtonElement).click();
    await vi.waitFor(() => expect(postCalls(client)).toHaveLength(1));
    expect(postCalls(client)).toEqual(["/present-proof/pres-ex-1/respond"]);
    expect(client.calls.at(-1)?.body).toEqual({ accept: true });
    await vi.waitFor(() => expect(root.querySelector(".dialog.disclosure")).toBeNull());
  });

  it("warns instead of submitting when no credential matches", () => {
    const fixture = mount();
    fixture.store.applyEvent(makeEvent("present-proof", { ...makeProofRequest(["nationalId"]) }));
    (fixture.root.querySelector(".pending-proof_request button.accept") as HTMLButtonElement).click();

    expect(fixture.root.querySelector(".dialog .inline-error")?.textContent).toContain(
      "No stored credential",
    );
    expect((fixture.root.querySelector(".submit-disclosure") as HTMLButtonElement).disabled).toBe(true);
  });
});

describe("credentials screen", () => {
  it("shows a revocation badge once the issuer revokes", () => {
    const { store, root } = mount();
    store.state.credentials.set("cred-ex-1", makeCredential());
    store.setScreen("credentials");
    expect(root.querySelector(".badge-revoked")).toBeNull();

    store.applyEvent(
      makeEvent("revocation", { credExId: "cred-ex-1", referent: "cred-ex-1", revoked: true }),
    );
    expect(root.querySelector(".badge-revoked")?.textContent).toBe("REVOKED");
  });
});

describe("activity screen", () => {
  it("shows unrevealed attribute names but never their values after submission", () => {
    const { store, root } = mount();
    store.state.credentials.set("cred-ex-1", makeCredential());
    const submitted = makeProofRequest(["fullName", "licenseNumber"], {
      state: "VERIFIED_TRUE",
      verified: true,
      presentation: {
        credDefId: "did-gov:3:CL:6:tag",
        revealed: {
          fullName: { value: "Dr. Ayesha Rahman" },
          licenseNumber: { value: "BMDC-104233" },
        },
      },
    });
    store.applyEvent(makeEvent("present-proof", { ...submitted }));
    store.setScreen("activity");

    const card = root.querySelector('[data-pres-ex-id="pres-ex-1"]');
    expect(card).not.toBeNull();
    expect(card?.textContent).toContain("Dr. Ayesha Rahman");
    expect(card?.textContent).toContain("designation");
    expect(card?.textContent).toContain("not revealed");
    // the unrevealed attribute's value must not appear anywhere on screen
    expect(root.textContent).not.toContain("physician");
  });
});

describe("agent reachability banner", () => {
  it("is shown while unreachable and gone once reconnected", () => {
    const { store, root } = mount();
    expect(root.querySelector(".banner")).not.toBeNull(); // starts unknown/unreachable

    store.setReachable(true);
    expect(root.querySelector(".banner")).toBeNull();

    store.setReachable(false);
    expect(root.querySelector(".banner")?.textContent).toContain("Agent unreachable");
  });
});

describe("idle soak at the DOM level", () => {
  it("keeps the audit log empty while events stream in and nobody clicks", () => {
    const { client, store, root } = mount();
    const connection = makeConnection({ state: "REQUESTED" });
    store.applyEvent(makeEvent("connections", { ...connection }));
    store.applyEvent(
      makeEvent("connections", { ...connection, state: "RESPONDED", updatedAt: connection.updatedAt + 1 }),
    );
    store.applyEvent(
      makeEvent("connections", { ...connection, state: "ACTIVE", updatedAt: connection.updatedAt + 2 }),
    );
    store.applyEvent(makeEvent("issue-credential", { ...makeOffer() }));
    store.applyEvent(
      makeEvent("connections", { ...makeConnection({ connectionId: "conn-2", theirLabel: "Hospital" }) }),
    );
    store.applyEvent(makeEvent("present-proof", { ...makeProofRequest() }));
    store.applyEvent(makeEvent("revocation", { credExId: "x", referent: "x", revoked: true }));
    for (const screen of ["connections", "credentials", "activity", "pending"] as const) {
      store.setScreen(screen);
    }

    // two decisions are pending on screen, yet the wallet said nothing
    expect(root.textContent).toContain("Pending actions (2)");
    expect(client.calls).toHaveLength(0);
  });
});
