/**
 * Wallet configuration: where the holder agent lives and which API key to
 * present. Resolved from the environment so the same build runs against any
 * agent:
 *
 *  - at runtime, a host page may inject `window.__WALLET_CONFIG__`;
 *  - at build/test time, `WALLET_AGENT_URL` / `WALLET_API_KEY` env vars win;
 *  - otherwise the default points at the holder agent of the local scenario.
 */

export interface WalletConfig {
  agentBaseUrl: string;
  apiKey: string;
}

const DEFAULT_AGENT_URL = "http://127.0.0.1:8023";

interface ConfigCarrier {
  __WALLET_CONFIG__?: Partial<WalletConfig>;
  process?: { env?: Record<string, string | undefined> };
}

export function loadConfig(carrier: ConfigCarrier = globalThis as ConfigCarrier): WalletConfig {
  const injected = carrier.__WALLET_CONFIG__ ?? {};
  const env = carrier.process?.env ?? {};
  const agentBaseUrl =
    injected.agentBaseUrl ?? env["WALLET_AGENT_URL"] ?? DEFAULT_AGENT_URL;
  const apiKey = injected.apiKey ?? env["WALLET_API_KEY"] ?? "";
  return { agentBaseUrl: agentBaseUrl.replace(/\/+$/, ""), apiKey };
}
