"""Agent protocol tests: handshakes, exchanges, events, and the admin API."""

import json

import pytest
from fastapi.testclient import TestClient

from careid import creds, crypto
from careid.agent import (
    Agent,
    ConnectionState,
    CredExState,
    InProcessRouter,
    InvalidTransition,
    NotConnected,
    PresExState,
    Wallet,
    invitation_from_url,
    invitation_to_url,
)
from careid.agent.api import build_agent_app
from careid.clock import FakeClock
from careid.ledger import LedgerPool, generate_genesis

PID_ATTRS = {"fullName": "Dr. Ayesha Rahman", "licenseNumber": "BMDC-104233"}


@pytest.fixture()
def env():
    clock = FakeClock()
    pool = LedgerPool.bootstrap(generate_genesis(["n0", "n1", "n2", "n3"]), clock=clock)
    router = InProcessRouter()

    def make(label, endpoint, seed, **kwargs):
        agent = Agent(
            label, endpoint, pool, router, clock=clock, seed=seed,
            puzzle_difficulty=4, **kwargs,
        )
        router.register(endpoint, agent.handle_inbound)
        return agent

    steward = make("Gov", "gov", b"\x01" * 32)
    issuer = make("Council", "council", b"\x02" * 32)
    holder = make("Doctor", "doctor", b"\x03" * 32)
    verifier = make("Hospital", "hospital", b"\x04" * 32)
    steward.register_nym(steward.did, steward.verkey, "STEWARD")

    class Env:
        pass

    e = Env()
    e.clock, e.pool, e.router = clock, pool, router
    e.steward, e.issuer, e.holder, e.verifier = steward, issuer, holder, verifier
    return e


def connect(inviter, invitee):
    inv = inviter.create_invitation()
    conn = invitee.receive_invitation(inv["invitation"])
    return inv["connectionId"], conn["connectionId"]


def enroll_issuer(e, max_cred_num=8):
    conn_id, _ = connect(e.steward, e.issuer)
    # the steward side owns conn_id; issuer asks over its own record
    issuer_conn = e.issuer.list_connections()[0]["connectionId"]
    e.issuer.request_verinym(issuer_conn, "ENDORSER")
    schema = e.issuer.register_schema("PID", "1.0", list(PID_ATTRS))
    setup = e.issuer.register_cred_def(schema["schemaId"], max_cred_num=max_cred_num)
    return setup


def issue_to_holder(e, attributes=PID_ATTRS):
    setup = enroll_issuer(e)
    issuer_conn, _ = connect(e.issuer, e.holder)
    offer = e.issuer.send_credential_offer(issuer_conn, setup["credDefId"], attributes)
    e.holder.respond_credential_offer(offer["credentialExchangeId"])
    return setup, offer["credentialExchangeId"]


# -- connections -----------------------------------------------------------------


def test_handshake_reaches_active_on_both_sides(env):
    inviter_id, invitee_id = connect(env.issuer, env.holder)
    assert env.issuer.get_connection(inviter_id)["state"] == "ACTIVE"
    assert env.holder.get_connection(invitee_id)["state"] == "ACTIVE"
    inviter_view = env.issuer.get_connection(inviter_id)
    invitee_view = env.holder.get_connection(invitee_id)
    assert inviter_view["theirKey"] == invitee_view["myKey"]
    assert invitee_view["theirKey"] == inviter_view["myKey"]
    assert inviter_view["theirLabel"] == "Doctor"


def test_each_connection_uses_fresh_pairwise_keys(env):
    connect(env.issuer, env.holder)
    connect(env.issuer, env.holder)
    keys = [c["myKey"] for c in env.issuer.list_connections()]
    keys += [c["myKey"] for c in env.holder.list_connections()]
    assert len(set(keys)) == len(keys)
    assert env.issuer.verkey not in keys  # identity key never leaks into channels


def test_invitation_url_round_trip(env):
    inv = env.issuer.create_invitation()
    url = invitation_to_url(inv["invitation"])
    assert invitation_from_url(url) == inv["invitation"]
    conn = env.holder.receive_invitation(inv["invitationUrl"])
    assert conn["state"] == "ACTIVE"


def test_wrong_puzzle_solution_is_rejected(env):
    inv = env.issuer.create_invitation()
    bad = dict(inv["invitation"])
    bad["challenge"] = crypto.b64e(b"\x00" * 16)  # invitee solves the wrong puzzle
    with pytest.raises(NotConnected):
        env.holder.receive_invitation(bad)
    assert env.issuer.get_connection(inv["connectionId"])["state"] == "INVITED"
    assert env.holder.list_connections()[0]["state"] == "ABANDONED"


def test_deferred_accept(env):
    inv = env.issuer.create_invitation()
    conn = env.holder.receive_invitation(inv["invitation"], accept=False)
    assert conn["state"] == "INVITED"
    done = env.holder.accept_invitation(conn["connectionId"])
    assert done["state"] == "ACTIVE"


# -- replay protection ------------------------------------------------------------


def test_replayed_envelope_is_rejected(env):
    captured = []
    env.router.taps.append(lambda endpoint, raw: captured.append((endpoint, raw)))
    connect(env.issuer, env.holder)
    assert captured
    endpoint, raw = captured[0]
    response = env.router.send(endpoint, raw)
    assert response["ok"] is False
    assert "seen" in response["error"] or "replay" in response["error"].lower()


def test_stale_timestamp_is_rejected(env):
    conn_id, _ = connect(env.issuer, env.holder)
    record = env.issuer.connections[conn_id]
    stale = crypto.seal(
        record.my_keypair,
        crypto.b58decode(record.their_key),
        crypto.canonical_json({"type": "connection-ack"}),
        timestamp_ms=env.clock.now_ms() - 600_000,
    )
    response = env.router.send(record.their_endpoint, stale.to_bytes())
    assert response["ok"] is False
    assert "window" in response["error"]


def test_garbage_inbound_is_an_error_not_a_crash(env):
    assert env.holder.handle_inbound(b"not json")["ok"] is False
    assert env.holder.handle_inbound(b"{}")["ok"] is False


# -- verinym ---------------------------------------------------------------------


def test_verinym_grants_ledger_role(env):
    conn_id, _ = connect(env.steward, env.issuer)
    issuer_conn = env.issuer.list_connections()[0]["connectionId"]
    result = env.issuer.request_verinym(issuer_conn, "ENDORSER")
    nym = env.pool.get_nym(env.issuer.did)
    assert nym.verkey == env.issuer.verkey
    assert nym.role.value == "ENDORSER"
    # 4 NODE + 1 CONFIG genesis txns, the steward's own NYM, then this one
    assert result["seqNo"] == 7


def test_issuer_without_verinym_cannot_register_schema(env):
    from careid.ledger import Unauthorized

    with pytest.raises(Unauthorized):
        env.issuer.register_schema("PID", "1.0", ["a"])


# -- credential issuance ------------------------------------------------------------


def test_issue_flow_state_sequence(env):
    setup, cred_ex_id = issue_to_holder(env)
    issuer_rec = env.issuer.list_cred_exchanges()[0]
    holder_rec = env.holder.list_cred_exchanges()[0]
    assert issuer_rec["state"] == "ACKED"
    assert holder_rec["state"] == "STORED"
    stored = env.holder.list_credentials()
    assert len(stored) == 1
    assert stored[0]["attributes"] == PID_ATTRS
    assert stored[0]["revoked"] is False
    assert stored[0]["credDefId"] == setup["credDefId"]


def test_declined_offer(env):
    setup = enroll_issuer(env)
    conn_id, _ = connect(env.issuer, env.holder)
    offer = env.issuer.send_credential_offer(conn_id, setup["credDefId"], PID_ATTRS)
    env.holder.respond_credential_offer(offer["credentialExchangeId"], accept=False)
    assert env.issuer.list_cred_exchanges()[0]["state"] == "DECLINED"
    assert env.holder.list_cred_exchanges()[0]["state"] == "DECLINED"
    assert env.holder.list_credentials() == []


def test_double_respond_is_invalid_transition(env):
    _, cred_ex_id = issue_to_holder(env)
    with pytest.raises(InvalidTransition):
        env.holder.respond_credential_offer(cred_ex_id)


def test_auto_accept_holder(env):
    env.holder.auto_accept = True
    setup = enroll_issuer(env)
    conn_id, _ = connect(env.issuer, env.holder)
    env.issuer.send_credential_offer(conn_id, setup["credDefId"], PID_ATTRS)
    assert env.holder.list_credentials()
    assert env.issuer.list_cred_exchanges()[0]["state"] == "ACKED"


# -- presentations -------------------------------------------------------------------


def test_presentation_flow_and_result_propagation(env):
    setup, _ = issue_to_holder(env)
    verifier_conn, _ = connect(env.verifier, env.holder)
    request = env.verifier.send_proof_request(
        verifier_conn, ["licenseNumber"], cred_def_id=setup["credDefId"]
    )
    pres_ex_id = request["presentationExchangeId"]
    prover = env.holder.respond_proof_request(pres_ex_id)
    assert prover["state"] == "VERIFIED_TRUE"
    verifier_rec = env.verifier.get_presentation_exchange(pres_ex_id)
    assert verifier_rec["state"] == "VERIFIED_TRUE"
    assert verifier_rec["verified"] is True
    revealed = verifier_rec["presentation"]["revealed"]
    assert set(revealed) == {"licenseNumber"}


def test_proof_request_without_matching_credential_is_declined(env):
    verifier_conn, _ = connect(env.verifier, env.holder)
    request = env.verifier.send_proof_request(verifier_conn, ["somethingElse"])
    result = env.holder.respond_proof_request(request["presentationExchangeId"])
    assert result["state"] == "DECLINED"
    assert (
        env.verifier.get_presentation_exchange(request["presentationExchangeId"])["state"]
        == "DECLINED"
    )


def test_explicit_decline(env):
    issue_to_holder(env)
    verifier_conn, _ = connect(env.verifier, env.holder)
    request = env.verifier.send_proof_request(verifier_conn, ["licenseNumber"])
    result = env.holder.respond_proof_request(request["presentationExchangeId"], accept=False)
    assert result["state"] == "DECLINED"


# -- revocation -------------------------------------------------------------------------


def test_revocation_notifies_holder_and_breaks_proofs(env):
    setup, cred_ex_id = issue_to_holder(env)
    out = env.issuer.revoke_credential(cred_ex_id)
    assert out["revIndex"] == 0
    assert env.holder.list_credentials()[0]["revoked"] is True

    verifier_conn, _ = connect(env.verifier, env.holder)
    request = env.verifier.send_proof_request(verifier_conn, ["licenseNumber"])
    result = env.holder.respond_proof_request(request["presentationExchangeId"])
    assert result["state"] == "VERIFIED_FALSE"
    reasons = env.verifier.get_presentation_exchange(request["presentationExchangeId"])["reasons"]
    assert "REVOKED" in reasons


def test_double_revoke_raises(env):
    _, cred_ex_id = issue_to_holder(env)
    env.issuer.revoke_credential(cred_ex_id)
    with pytest.raises(creds.AlreadyRevoked):
        env.issuer.revoke_credential(cred_ex_id)


def test_other_holders_unaffected_by_revocation(env):
    setup, first_ex = issue_to_holder(env)
    conn_id = env.issuer.list_cred_exchanges()[0]["connectionId"]
    second = env.issuer.send_credential_offer(conn_id, setup["credDefId"], PID_ATTRS)
    env.holder.respond_credential_offer(second["credentialExchangeId"])
    env.issuer.revoke_credential(first_ex)

    verifier_conn, _ = connect(env.verifier, env.holder)
    request = env.verifier.send_proof_request(verifier_conn, ["licenseNumber"])
    # wallet still holds the revoked credential first; remove it so the live one answers
    env.holder.wallet.credentials.pop(first_ex)
    result = env.holder.respond_proof_request(request["presentationExchangeId"])
    assert result["state"] == "VERIFIED_TRUE"


# -- wallet portability --------------------------------------------------------------------


def test_wallet_export_import_round_trip(env):
    setup, cred_ex_id = issue_to_holder(env)
    blob = env.holder.export_wallet("hunter2 horse battery")
    wallet = Wallet.import_encrypted(blob, "hunter2 horse battery")
    restored = Agent(
        "Doctor2", "doctor2", env.pool, env.router, clock=env.clock, wallet=wallet
    )
    assert restored.did == env.holder.did
    assert restored.list_credentials() == env.holder.list_credentials()

    # the imported credential still proves
    credential = wallet.credentials[cred_ex_id]
    binding = wallet.binding[cred_ex_id]
    request = creds.PresentationRequest(nonce=b"\x07" * 16, requested=("licenseNumber",))
    witness, acc, seq = creds.refresh_witness(
        env.pool.get_rev_reg(credential.rev_reg_id), credential.rev_index
    )
    pres = creds.present(credential, binding, request, witness, acc, seq)
    assert creds.verify(request, pres, env.pool).verified


def test_wallet_import_needs_right_passphrase(env):
    issue_to_holder(env)
    blob = env.holder.export_wallet("correct")
    with pytest.raises(crypto.CryptoError):
        Wallet.import_encrypted(blob, "wrong")


# -- events ---------------------------------------------------------------------------------


def test_events_cover_the_exchange_lifecycle(env):
    issue_to_holder(env)
    topics = {e.topic for e in env.holder.events.events}
    assert {"connections", "issue-credential"} <= topics
    seqs = [e.seq for e in env.holder.events.events]
    assert seqs == list(range(1, len(seqs) + 1))


def test_listener_receives_live_events(env):
    q = env.holder.add_listener()
    connect(env.issuer, env.holder)
    received = []
    while not q.empty():
        received.append(q.get())
    assert any(e.topic == "connections" for e in received)
    env.holder.remove_listener(q)


def test_webhook_posts_are_emitted(env, monkeypatch):
    calls = []

    def fake_post(url, json=None, timeout=None):
        calls.append((url, json))

    monkeypatch.setattr("careid.agent.agent.httpx.post", fake_post)
    env.holder.webhook_url = "http://hooks.local/base"
    connect(env.issuer, env.holder)
    assert calls
    url, payload = calls[0]
    assert url.startswith("http://hooks.local/base/topic/connections")
    assert payload["topic"] == "connections"


# -- admin REST API ----------------------------------------------------------------------------


@pytest.fixture()
def clients(env):
    enroll_issuer(env)
    return {
        "issuer": TestClient(build_agent_app(env.issuer)),
        "holder": TestClient(build_agent_app(env.holder)),
        "verifier": TestClient(build_agent_app(env.verifier)),
    }


def test_api_status(clients, env):
    body = clients["issuer"].get("/status").json()
    assert body["label"] == "Council"
    assert body["did"] == env.issuer.did


def test_api_connection_flow(clients):
    inv = clients["issuer"].post("/connections/create-invitation").json()
    received = clients["holder"].post(
        "/connections/receive-invitation",
        json={"invitationUrl": inv["invitationUrl"], "accept": True},
    ).json()
    assert received["state"] == "ACTIVE"
    listed = clients["issuer"].get("/connections").json()["results"]
    assert any(c["connectionId"] == inv["connectionId"] for c in listed)
    single = clients["issuer"].get(f"/connections/{inv['connectionId']}").json()
    assert single["state"] == "ACTIVE"


def test_api_unknown_connection_404(clients):
    response = clients["issuer"].get("/connections/nope")
    assert response.status_code == 404
    assert response.json()["error"] == "UnknownRecord"


def test_api_receive_invitation_validates_body(clients):
    response = clients["holder"].post("/connections/receive-invitation", json={})
    assert response.status_code == 422


def test_api_full_credential_and_proof_cycle(clients, env):
    inv = clients["issuer"].post("/connections/create-invitation").json()
    clients["holder"].post(
        "/connections/receive-invitation", json={"invitationUrl": inv["invitationUrl"]}
    )
    cred_def_id = next(iter(env.issuer.wallet.cred_defs))
    offer = clients["issuer"].post(
        "/issue-credential/send-offer",
        json={
            "connectionId": inv["connectionId"],
            "credDefId": cred_def_id,
            "attributes": PID_ATTRS,
        },
    ).json()
    cred_ex_id = offer["credentialExchangeId"]
    stored = clients["holder"].post(
        f"/issue-credential/{cred_ex_id}/respond", json={"accept": True}
    ).json()
    assert stored["state"] == "STORED"
    assert clients["holder"].get("/credentials").json()["results"]

    vinv = clients["verifier"].post("/connections/create-invitation").json()
    clients["holder"].post(
        "/connections/receive-invitation", json={"invitationUrl": vinv["invitationUrl"]}
    )
    request = clients["verifier"].post(
        "/present-proof/send-request",
        json={"connectionId": vinv["connectionId"], "requestedAttributes": ["licenseNumber"]},
    ).json()
    pres_ex_id = request["presentationExchangeId"]
    result = clients["holder"].post(
        f"/present-proof/{pres_ex_id}/respond", json={"accept": True}
    ).json()
    assert result["state"] == "VERIFIED_TRUE"
    verifier_view = clients["verifier"].get(f"/present-proof/{pres_ex_id}").json()
    assert verifier_view["verified"] is True

    revoked = clients["issuer"].post("/revocation/revoke", json={"credExId": cred_ex_id}).json()
    assert revoked["revIndex"] == 0
    again = clients["issuer"].post("/revocation/revoke", json={"credExId": cred_ex_id})
    assert again.status_code == 409


def test_api_register_schema_and_cred_def(clients):
    schema = clients["issuer"].post(
        "/ledger/register-schema",
        json={"name": "NID", "version": "1.0", "attrNames": ["fullName", "nationalId"]},
    ).json()
    assert schema["schemaId"].endswith(":2:NID:1.0")
    setup = clients["issuer"].post(
        "/ledger/register-cred-def", json={"schemaId": schema["schemaId"], "maxCredNum": 4}
    ).json()
    assert ":3:CL:" in setup["credDefId"]
    assert ":CL_ACCUM:" in setup["revRegId"]


def test_api_events_replay(clients, env):
    connect(env.issuer, env.holder)
    lines = []
    with clients["holder"].stream("GET", "/events", params={"live": "false"}) as response:
        for line in response.iter_lines():
            lines.append(line)
    events = [json.loads(l[len("data: "):]) for l in lines if l.startswith("data: ")]
    assert events
    assert events[0]["seq"] == 1
    assert [e["seq"] for e in events] == sorted(e["seq"] for e in events)
    topics = {e["topic"] for e in events}
    assert "connections" in topics

    # since= skips already-seen history
    last = events[-1]["seq"]
    with clients["holder"].stream(
        "GET", "/events", params={"live": "false", "since": last}
    ) as response:
        rest = [l for l in response.iter_lines() if l.startswith("data: ")]
    assert rest == []


def test_api_didcomm_rejects_garbage(clients):
    response = clients["holder"].post("/didcomm", content=b"junk")
    assert response.json()["ok"] is False
