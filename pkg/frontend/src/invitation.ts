/**
 * Local validation of pasted invitation URLs.
 *
 * Everything here runs in the wallet, before any network call: a malformed
 * paste must produce an inline error without ever reaching the agent. Only a
 * URL that decodes to a structurally complete invitation is worth sending.
 */

import type { InvitationPayload } from "./types.js";

export type InvitationParse =
  | { ok: true; url: string; invitation: InvitationPayload }
  | { ok: false; error: string };

function base64UrlDecode(text: string): string {
  const padding = "=".repeat((4 - (text.length % 4)) % 4);
  const binary = atob(text.replace(/-/g, "+").replace(/_/g, "/") + padding);
  return new TextDecoder().decode(Uint8Array.from(binary, (ch) => ch.charCodeAt(0)));
}

const REQUIRED_FIELDS: Array<[keyof InvitationPayload, "string" | "number"]> = [
  ["label", "string"],
  ["recipientKey", "string"],
  ["endpoint", "string"],
  ["challenge", "string"],
  ["difficulty", "number"],
];

export function parseInvitation(text: string): InvitationParse {
  const trimmed = text.trim();
  if (!trimmed) {
    return { ok: false, error: "Paste an invitation URL first." };
  }
  let url: URL;
  try {
    url = new URL(trimmed);
  } catch {
    return { ok: false, error: "That is not a valid URL." };
  }
  const encoded = url.searchParams.get("c_i");
  if (!encoded) {
    return { ok: false, error: "The URL has no c_i invitation parameter." };
  }
  let invitation: unknown;
  try {
    invitation = JSON.parse(base64UrlDecode(encoded));
  } catch {
    return { ok: false, error: "The c_i parameter does not decode to an invitation." };
  }
  if (typeof invitation !== "object" || invitation === null || Array.isArray(invitation)) {
    return { ok: false, error: "The c_i parameter does not decode to an invitation." };
  }
  const record = invitation as Record<string, unknown>;
  for (const [field, kind] of REQUIRED_FIELDS) {
    if (typeof record[field] !== kind) {
      return { ok: false, error: `The invitation is missing its ${field} field.` };
    }
  }
  return { ok: true, url: trimmed, invitation: invitation as InvitationPayload };
}
