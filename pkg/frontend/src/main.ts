/**
 * Wiring: config → API client → store → event stream → screens.
 */

import { AgentClient } from "./api.js";
import { loadConfig } from "./config.js";
import { EventStream } from "./events.js";
import { renderApp } from "./render.js";
import { WalletStore, type ScreenName } from "./store.js";

export function startWallet(root: HTMLElement): { store: WalletStore; stream: EventStream } {
  const config = loadConfig();
  const client = new AgentClient(config);
  const store = new WalletStore(client);
  const stream = new EventStream({
    baseUrl: config.agentBaseUrl,
    apiKey: config.apiKey,
    onEvent: (event) => store.applyEvent(event),
    onStatus: (status) => {
      store.setReachable(status === "connected");
      if (status === "connected") {
        // reconcile whatever changed while we were away
        void store.refresh();
      }
    },
  });

  store.subscribe(() => renderApp(root, store));
  renderApp(root, store);
  void store.refresh();
  void stream.start();

  const applyHash = () => {
    const name = location.hash.replace(/^#\/?/, "");
    if (["connections", "credentials", "pending", "activity"].includes(name)) {
      store.setScreen(name as ScreenName);
    }
  };
  window.addEventListener("hashchange", applyHash);
  applyHash();

  return { store, stream };
}

const root = typeof document === "undefined" ? null : document.getElementById("app");
if (root) {
  startWallet(root);
}
