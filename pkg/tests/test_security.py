"""Adversarial suite: every test makes one concrete attack fail.

Covers forged credentials, presentation tampering, credential theft, message
and token replay, connection spam, and privilege escalation — each mounted at
the layer a real attacker would use: the live agent protocol where possible,
hand-crafted messages at the verification boundary otherwise.
"""

import os
from pathlib import Path

import pytest

from careid import authz, creds, crypto
from careid.agent.records import NotConnected
from careid.clock import FakeClock
from careid.ledger import Unauthorized
from careid.scenario import ScenarioConfig, build_environment

REPO_ROOT = Path(__file__).resolve().parent.parent

PID_ATTRS = {
    "fullName": "Dr. Ayesha Rahman",
    "licenseNumber": "BMDC-104233",
    "licenseExpiryDate": "2027-12-31",
    "designation": "physician",
    "medicalDiploma": "MBBS, Dhaka Medical College, 2014",
}
REQUESTED = ("fullName", "licenseNumber")


@pytest.fixture()
def env():
    config = ScenarioConfig.load(REPO_ROOT / "fixtures" / "config.json")
    return build_environment(config, clock=FakeClock(), puzzle_difficulty=4)


def connect(inviter, invitee):
    invitation = inviter.create_invitation()
    record = invitee.receive_invitation(invitation["invitation"])
    return invitation["connectionId"], record["connectionId"]


def enroll(env, agent):
    _, conn_id = connect(env.steward, agent)
    agent.request_verinym(conn_id, "ENDORSER")


def issue_pid(env):
    """Enroll Government, publish PID schema + cred def, issue to Patient."""
    issuer, holder = env["Government"], env["Patient"]
    enroll(env, issuer)
    schema = issuer.register_schema("PID", "1.0", list(PID_ATTRS))
    setup = issuer.register_cred_def(schema["schemaId"], max_cred_num=8)
    conn_id, _ = connect(issuer, holder)
    offer = issuer.send_credential_offer(conn_id, setup["credDefId"], PID_ATTRS)
    holder.respond_credential_offer(offer["credentialExchangeId"])
    return setup, offer["credentialExchangeId"]


def present_pid(env, setup):
    """Run a full proof exchange and return the verifier's exchange record."""
    verifier, holder = env["Hospital"], env["Patient"]
    conn_id, _ = connect(verifier, holder)
    request = verifier.send_proof_request(conn_id, list(REQUESTED), cred_def_id=setup["credDefId"])
    holder.respond_proof_request(request["presentationExchangeId"])
    return verifier.get_presentation_exchange(request["presentationExchangeId"])


def fresh_request(cred_def_id=None):
    return creds.PresentationRequest(
        nonce=os.urandom(16), requested=REQUESTED, cred_def_id=cred_def_id
    )


def resign(presentation_data: dict, keypair: crypto.KeyPair) -> creds.Presentation:
    """Rebuild a presentation from (possibly tampered) wire data and sign it."""
    presentation = creds.Presentation.from_dict(
        {**presentation_data, "holderSignature": crypto.b64e(b"\x00" * 64)}
    )
    presentation.holder_signature = crypto.sign(keypair, presentation.signing_bytes())
    return presentation


# -- forged credentials ------------------------------------------------------------


def test_credential_from_unregistered_cred_def_fails_verification(env):
    """Self-attested claims: a forger who never touched the ledger issues
    themselves a perfectly well-formed credential — the verifier rejects it
    because its credential definition resolves to nothing."""
    forger = crypto.generate_keypair()
    binding = crypto.generate_keypair()
    schema = creds.create_schema("PID", "1.0", list(PID_ATTRS))
    cred_def = creds.create_cred_def(forger.did, forger.verkey, f"{forger.did}:2:PID:1.0", 999)
    registry = creds.create_rev_registry(cred_def, 8)
    credential = creds.issue(
        cred_def, forger, registry, schema, PID_ATTRS, binding.verkey, acc_seq_no=1
    )
    request = fresh_request()
    presentation = creds.present(
        credential, binding, request,
        witness=registry.witness(0), accumulator=registry.accumulator, acc_seq_no=1,
    )
    result = creds.verify(request, presentation, env.pool)
    assert result.verified is False
    assert creds.UNKNOWN_CRED_DEF in result.reasons


def test_forged_issuer_signature_under_real_cred_def_fails(env):
    """A forger reuses a legitimately registered cred-def id but cannot sign
    with the registered issuer key, so the issuer signature check fails."""
    setup, _ = issue_pid(env)
    real = creds.CredentialDefinition.from_payload(env.pool.get_cred_def(setup["credDefId"]))
    forger = crypto.generate_keypair()
    binding = crypto.generate_keypair()
    imposter_def = creds.CredentialDefinition(
        cred_def_id=real.cred_def_id,
        schema_id=real.schema_id,
        issuer_did=real.issuer_did,
        verkey=forger.verkey,  # the one thing a forger can't copy
        tag=real.tag,
    )
    registry = creds.create_rev_registry(imposter_def, 8)
    schema = creds.create_schema("PID", "1.0", list(PID_ATTRS))
    credential = creds.issue(
        imposter_def, forger, registry, schema,
        {**PID_ATTRS, "designation": "chief surgeon"}, binding.verkey, acc_seq_no=1,
    )
    request = fresh_request()
    presentation = creds.present(
        credential, binding, request,
        witness=registry.witness(0), accumulator=registry.accumulator, acc_seq_no=1,
    )
    result = creds.verify(request, presentation, env.pool)
    assert result.verified is False
    assert creds.INVALID_ISSUER_SIGNATURE in result.reasons


# -- presentation tampering ---------------------------------------------------------


def _flip_b64(value: str) -> str:
    raw = crypto.b64d(value)
    return crypto.b64e(bytes([raw[0] ^ 1]) + raw[1:])


def _tamper_proof(proof: dict) -> dict:
    tampered = {"leafIndex": proof["leafIndex"], "path": [dict(p) for p in proof["path"]]}
    tampered["path"][0]["digest"] = _flip_b64(tampered["path"][0]["digest"])
    return tampered


MUTATIONS = {
    "credDefId": lambda v: v + "x",
    "schemaId": lambda v: v + "x",
    "credentialRoot": _flip_b64,
    "issuerSignature": _flip_b64,
    "revealed": lambda v: {
        **v, "fullName": {**v["fullName"], "value": "Dr. Mallory Intruder"}
    },
    "holderBindingKey": lambda v: v[:-1] + ("2" if v[-1] != "2" else "3"),
    "holderBindingProof": _tamper_proof,
    "revRegId": lambda v: v + "x",
    "revIndex": lambda v: v + 1,
    "revBindingProof": _tamper_proof,
    "statusProof": _tamper_proof,
    "accumulator": _flip_b64,
    "accSeqNo": lambda v: v + 1,
    "nonce": _flip_b64,
    "holderSignature": _flip_b64,
}


def test_every_presentation_field_is_covered_by_a_mutation(env):
    setup, _ = issue_pid(env)
    exchange = present_pid(env, setup)
    assert set(exchange["presentation"]) == set(MUTATIONS)


@pytest.mark.parametrize("field", sorted(MUTATIONS))
def test_single_field_mutation_fails_verification(env, field):
    """In-flight tampering: altering any one field of a captured presentation
    breaks verification, because the holder signature covers all of them."""
    setup, _ = issue_pid(env)
    exchange = present_pid(env, setup)
    assert exchange["verified"] is True
    request = creds.PresentationRequest.from_dict(exchange["request"])
    tampered = dict(exchange["presentation"])
    tampered[field] = MUTATIONS[field](tampered[field])
    result = creds.verify(request, creds.Presentation.from_dict(tampered), env.pool)
    assert result.verified is False


# The holder attests schemaId/accSeqNo but they gate nothing by themselves
# (attributes bind through the credential root, revocation through the
# accumulator value), so a holder re-signing those fields changes nothing.
RESIGNED_MUTATIONS = {
    field: (mutate, reason)
    for field, (mutate, reason) in {
        "credDefId": (MUTATIONS["credDefId"], creds.UNKNOWN_CRED_DEF),
        "credentialRoot": (MUTATIONS["credentialRoot"], creds.INVALID_ISSUER_SIGNATURE),
        "issuerSignature": (MUTATIONS["issuerSignature"], creds.INVALID_ISSUER_SIGNATURE),
        "revealed": (MUTATIONS["revealed"], creds.COMMITMENT_MISMATCH),
        "holderBindingProof": (MUTATIONS["holderBindingProof"], creds.HOLDER_BINDING_MISMATCH),
        "revRegId": (MUTATIONS["revRegId"], creds.REV_BINDING_MISMATCH),
        "revIndex": (MUTATIONS["revIndex"], creds.REV_BINDING_MISMATCH),
        "revBindingProof": (MUTATIONS["revBindingProof"], creds.REV_BINDING_MISMATCH),
        "statusProof": (MUTATIONS["statusProof"], creds.NON_REVOCATION_PROOF_INVALID),
        "accumulator": (MUTATIONS["accumulator"], creds.STALE_ACCUMULATOR),
        "nonce": (MUTATIONS["nonce"], creds.STALE_PRESENTATION),
    }.items()
}


@pytest.mark.parametrize("field", sorted(RESIGNED_MUTATIONS))
def test_resigned_mutation_still_fails_named_check(env, field):
    """A malicious holder CAN re-sign after tampering — the per-field
    cryptographic bindings must each fail on their own."""
    setup, cred_ex_id = issue_pid(env)
    exchange = present_pid(env, setup)
    request = creds.PresentationRequest.from_dict(exchange["request"])
    binding = env["Patient"].wallet.binding[cred_ex_id]
    mutate, reason = RESIGNED_MUTATIONS[field]
    tampered = dict(exchange["presentation"])
    tampered[field] = mutate(tampered[field])
    result = creds.verify(request, resign(tampered, binding), env.pool)
    assert result.verified is False
    assert reason in result.reasons


# -- credential theft ---------------------------------------------------------------


def test_stolen_credential_cannot_be_presented_with_thief_key(env):
    """A thief with the full credential wire format — attributes, salts, both
    signatures — but not the binding private key substitutes their own key;
    the root commitment exposes the swap even on a re-signed presentation."""
    setup, _ = issue_pid(env)
    exchange = present_pid(env, setup)
    request = creds.PresentationRequest.from_dict(exchange["request"])
    thief = crypto.generate_keypair()
    stolen = dict(exchange["presentation"])
    stolen["holderBindingKey"] = thief.verkey
    result = creds.verify(request, resign(stolen, thief), env.pool)
    assert result.verified is False
    assert creds.HOLDER_BINDING_MISMATCH in result.reasons


def test_wrong_key_signature_fails_without_key_substitution(env):
    """Replaying a captured presentation under a fresh challenge requires a
    new holder signature the thief cannot produce."""
    setup, _ = issue_pid(env)
    exchange = present_pid(env, setup)
    request = creds.PresentationRequest.from_dict(exchange["request"])
    thief = crypto.generate_keypair()
    presentation = resign(dict(exchange["presentation"]), thief)
    result = creds.verify(request, presentation, env.pool)
    assert result.verified is False
    assert creds.INVALID_HOLDER_SIGNATURE in result.reasons


# -- transport replay and connection spam ---------------------------------------------


def test_replayed_envelope_is_dropped(env):
    """Captured ciphertext re-injected verbatim is rejected by the nonce
    cache and leaves no new protocol state behind."""
    issuer, holder = env["Government"], env["Patient"]
    captured = []
    env.router.taps.append(lambda endpoint, raw: captured.append((endpoint, raw)))
    connect(issuer, holder)
    env.router.taps.clear()  # stop capturing before re-injecting
    connections_before = len(issuer.list_connections()) + len(holder.list_connections())
    assert captured
    for endpoint, raw in captured:
        response = env.router.send(endpoint, raw)
        assert response["ok"] is False
    assert len(issuer.list_connections()) + len(holder.list_connections()) == connections_before


def test_connection_spam_needs_proof_of_work(env):
    """A spammer who skips the invitation puzzle cannot move a connection
    past INVITED, so handshake work cannot be farmed for free."""
    issuer, spammer = env["Government"], env["Patient"]
    invitation = issuer.create_invitation()
    lazy = dict(invitation["invitation"])
    lazy["challenge"] = crypto.b64e(b"\x00" * 16)  # solves a puzzle nobody asked
    with pytest.raises(NotConnected):
        spammer.receive_invitation(lazy)
    assert issuer.get_connection(invitation["connectionId"])["state"] == "INVITED"


# -- token replay and privilege escalation ----------------------------------------------


PID_RULES = """
{
  "rules": [
    {
      "credDefId": "$PID_CRED_DEF",
      "requiredAttrs": ["licenseNumber"],
      "grants": ["clinician"]
    }
  ],
  "resources": [
    {"resourceId": "ehr-portal", "allowedRoles": ["clinician"]},
    {"resourceId": "pharmacy-orders", "allowedRoles": ["pharmacist"]}
  ]
}
"""


def make_provider(env, setup):
    rules, resources = authz.load_rules_config(
        PID_RULES, {"PID_CRED_DEF": setup["credDefId"]}
    )
    return authz.AuthorizationProvider(rules=rules, resources=resources, clock=env.clock)


def test_token_nonce_reuse_is_rejected(env):
    setup, _ = issue_pid(env)
    exchange = present_pid(env, setup)
    provider = make_provider(env, setup)
    token = provider.authorize(exchange)
    assert provider.validate_token(token).roles == ("clinician",)
    with pytest.raises(authz.ReplayRejected):
        provider.validate_token(token)


def test_no_token_without_verified_presentation(env):
    setup, _ = issue_pid(env)
    verifier, holder = env["Hospital"], env["Patient"]
    conn_id, _ = connect(verifier, holder)
    pending = verifier.send_proof_request(conn_id, ["nationalId"], cred_def_id=setup["credDefId"])
    holder.respond_proof_request(pending["presentationExchangeId"])  # declined: no match
    exchange = verifier.get_presentation_exchange(pending["presentationExchangeId"])
    assert exchange["state"] != "VERIFIED_TRUE"
    provider = make_provider(env, setup)
    with pytest.raises(authz.NotVerified):
        provider.authorize(exchange)


def test_token_roles_exactly_match_rules(env):
    """No rule matched beyond the clinician grant, so the token must carry
    that single role and open only clinician resources."""
    setup, _ = issue_pid(env)
    exchange = present_pid(env, setup)
    provider = make_provider(env, setup)
    claims = provider.validate_token(provider.authorize(exchange))
    assert claims.roles == ("clinician",)
    assert provider.check_access(claims, "ehr-portal") is True
    assert provider.check_access(claims, "pharmacy-orders") is False


def test_tampered_token_payload_is_rejected(env):
    setup, _ = issue_pid(env)
    exchange = present_pid(env, setup)
    provider = make_provider(env, setup)
    header, payload, signature = provider.authorize(exchange).split(".")
    doctored = crypto.b64e(
        crypto.b64d(payload).replace(b'"clinician"', b'"trustee__"')
    )
    with pytest.raises(authz.InvalidToken):
        provider.validate_token(f"{header}.{doctored}.{signature}")


# -- revocation and ledger writes --------------------------------------------------------


def test_revoked_credential_cannot_regain_access(env):
    setup, cred_ex_id = issue_pid(env)
    provider = make_provider(env, setup)

    before = present_pid(env, setup)
    assert before["verified"] is True
    provider.validate_token(provider.authorize(before))

    env["Government"].revoke_credential(cred_ex_id)
    after = present_pid(env, setup)
    assert after["verified"] is False
    assert creds.REVOKED in after["reasons"]
    with pytest.raises(authz.NotVerified):
        provider.authorize(after)


def test_agent_without_verinym_cannot_write_to_ledger(env):
    with pytest.raises(Unauthorized):
        env["Government"].register_schema("PID", "1.0", list(PID_ATTRS))


def test_enrolled_endorser_cannot_mint_other_roles(env):
    """An endorser may write DIDs but may not grant elevated roles — the
    ledger ACL, not the agent, enforces it."""
    issuer = env["Government"]
    enroll(env, issuer)
    mule = crypto.generate_keypair()
    with pytest.raises(Unauthorized):
        issuer.register_nym(mule.did, mule.verkey, "TRUSTEE")
