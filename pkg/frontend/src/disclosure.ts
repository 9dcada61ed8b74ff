/**
 * Selective-disclosure checklist for answering a proof request.
 *
 * The verifier's requested attributes arrive pre-checked and locked; the
 * holder may not submit unless every requested attribute is still checked
 * (reveal set ⊇ requested set). The agent reveals exactly the requested
 * attributes when it builds the presentation, so attributes outside the
 * request are shown for context but always stay hidden on the wire.
 */

import type { CredentialSummary, PresExRecord } from "./types.js";

export interface AttributeChoice {
  name: string;
  /** Requested by the verifier: pre-checked and locked in the UI. */
  requested: boolean;
  checked: boolean;
  /** The matching credential holds this attribute (requested ones always should). */
  held: boolean;
}

export interface DisclosureSelection {
  presExId: string;
  /** Referent of the credential that will answer the request, if one matches. */
  credentialId: string | null;
  revealAttrs: AttributeChoice[];
}

/** Find a stored credential able to answer the request, mirroring the agent's rule. */
export function matchCredential(
  presEx: PresExRecord,
  credentials: CredentialSummary[],
): CredentialSummary | null {
  for (const credential of credentials) {
    if (presEx.request.credDefId && credential.credDefId !== presEx.request.credDefId) {
      continue;
    }
    if (presEx.request.requested.every((name) => name in credential.attributes)) {
      return credential;
    }
  }
  return null;
}

export function buildSelection(
  presEx: PresExRecord,
  credential: CredentialSummary | null,
): DisclosureSelection {
  const requested = presEx.request.requested;
  const held = credential ? Object.keys(credential.attributes).sort() : [];
  const revealAttrs: AttributeChoice[] = requested.map((name) => ({
    name,
    requested: true,
    checked: true,
    held: credential !== null && name in credential.attributes,
  }));
  for (const name of held) {
    if (!requested.includes(name)) {
      revealAttrs.push({ name, requested: false, checked: false, held: true });
    }
  }
  return {
    presExId: presEx.presentationExchangeId,
    credentialId: credential?.referent ?? null,
    revealAttrs,
  };
}

/**
 * Toggle one attribute, returning a new selection. The model will represent
 * any state the caller asks for — including an unchecked requested attribute —
 * because the submit gate, not the toggle, is what enforces the invariant.
 */
export function setChecked(
  selection: DisclosureSelection,
  name: string,
  checked: boolean,
): DisclosureSelection {
  return {
    ...selection,
    revealAttrs: selection.revealAttrs.map((choice) =>
      choice.name === name ? { ...choice, checked } : choice,
    ),
  };
}

export function revealedNames(selection: DisclosureSelection): string[] {
  return selection.revealAttrs.filter((choice) => choice.checked).map((choice) => choice.name);
}

/**
 * The submit gate: every requested attribute must be checked and answerable
 * by the matched credential. Screens disable their submit control with this
 * predicate, and the store refuses to send a response that fails it.
 */
export function canSubmit(selection: DisclosureSelection): boolean {
  return (
    selection.credentialId !== null &&
    selection.revealAttrs
      .filter((choice) => choice.requested)
      .every((choice) => choice.checked && choice.held)
  );
}
