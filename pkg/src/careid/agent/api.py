"""Admin REST API for one agent, plus its inbound message endpoint.

The same app serves three audiences: a wallet UI (admin routes and the
/events stream), peer agents (POST /didcomm), and operators (GET /status).
Events stream as server-sent events; history replays on connect so a client
can rebuild state from scratch, then stays live.
"""

from __future__ import annotations

import json
import queue

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from careid.agent.agent import Agent
from careid.agent.records import (
    AgentError,
    InvalidTransition,
    NotConnected,
    PuzzleRejected,
    UnknownRecord,
    WebhookEvent,
)
from careid.creds import AlreadyRevoked, CredsError, NotIssued, RegistryFull
from careid.ledger import LedgerError, NotFound, Unauthorized

_STATUS = {
    UnknownRecord: 404,
    NotFound: 404,
    InvalidTransition: 409,
    NotConnected: 409,
    PuzzleRejected: 403,
    Unauthorized: 403,
    AlreadyRevoked: 409,
    NotIssued: 409,
    RegistryFull: 409,
}


def _sse_line(event: WebhookEvent) -> str:
    return f"id: {event.seq}\nevent: {event.topic}\ndata: {json.dumps(event.to_dict())}\n\n"


def build_agent_app(agent: Agent) -> FastAPI:
    app = FastAPI(title=f"agent:{agent.label}", docs_url=None, redoc_url=None)

    @app.exception_handler(AgentError)
    async def agent_error(_request: Request, exc: AgentError):
        return JSONResponse(
            status_code=_STATUS.get(type(exc), 400),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(LedgerError)
    async def ledger_error(_request: Request, exc: LedgerError):
        return JSONResponse(
            status_code=_STATUS.get(type(exc), 400),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(CredsError)
    async def creds_error(_request: Request, exc: CredsError):
        return JSONResponse(
            status_code=_STATUS.get(type(exc), 400),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/status")
    def status() -> dict:
        return agent.status()

    # -- connections ------------------------------------------------------------

    @app.post("/connections/create-invitation")
    def create_invitation() -> dict:
        return agent.create_invitation()

    @app.post("/connections/receive-invitation")
    async def receive_invitation(request: Request) -> dict:
        body = await request.json()
        invitation = body.get("invitationUrl") or body.get("invitation")
        if not invitation:
            return JSONResponse(
                status_code=422,
                content={"error": "BadRequest", "detail": "invitationUrl or invitation required"},
            )
        return agent.receive_invitation(invitation, accept=body.get("accept", True))

    @app.post("/connections/{conn_id}/accept")
    def accept_invitation(conn_id: str) -> dict:
        return agent.accept_invitation(conn_id)

    @app.post("/connections/{conn_id}/request-verinym")
    async def request_verinym(conn_id: str, request: Request) -> dict:
        body = await request.json()
        return agent.request_verinym(conn_id, body.get("role", "ENDORSER"))

    @app.get("/connections")
    def list_connections() -> dict:
        return {"results": agent.list_connections()}

    @app.get("/connections/{conn_id}")
    def get_connection(conn_id: str) -> dict:
        return agent.get_connection(conn_id)

    # -- credential issuance -------------------------------------------------------

    @app.post("/issue-credential/send-offer")
    async def send_offer(request: Request) -> dict:
        body = await request.json()
        return agent.send_credential_offer(
            body["connectionId"], body["credDefId"], body["attributes"]
        )

    @app.post("/issue-credential/{cred_ex_id}/respond")
    async def respond_offer(cred_ex_id: str, request: Request) -> dict:
        body = await request.json()
        return agent.respond_credential_offer(cred_ex_id, accept=body.get("accept", True))

    @app.get("/issue-credential")
    def list_cred_exchanges() -> dict:
        return {"results": agent.list_cred_exchanges()}

    @app.get("/credentials")
    def list_credentials() -> dict:
        return {"results": agent.list_credentials()}

    # -- proof presentations ----------------------------------------------------------

    @app.post("/present-proof/send-request")
    async def send_proof_request(request: Request) -> dict:
        body = await request.json()
        return agent.send_proof_request(
            body["connectionId"],
            body["requestedAttributes"],
            cred_def_id=body.get("credDefId"),
            non_revoked=body.get("nonRevoked", True),
        )

    @app.post("/present-proof/{pres_ex_id}/respond")
    async def respond_proof_request(pres_ex_id: str, request: Request) -> dict:
        body = await request.json()
        return agent.respond_proof_request(pres_ex_id, accept=body.get("accept", True))

    @app.get("/present-proof")
    def list_pres_exchanges() -> dict:
        return {"results": agent.list_pres_exchanges()}

    @app.get("/present-proof/{pres_ex_id}")
    def get_pres_exchange(pres_ex_id: str) -> dict:
        return agent.get_presentation_exchange(pres_ex_id)

    # -- revocation ----------------------------------------------------------------------

    @app.post("/revocation/revoke")
    async def revoke(request: Request) -> dict:
        body = await request.json()
        return agent.revoke_credential(body["credExId"], notify=body.get("notify", True))

    # -- ledger writes ------------------------------------------------------------------------

    @app.post("/ledger/register-schema")
    async def register_schema(request: Request) -> dict:
        body = await request.json()
        return agent.register_schema(body["name"], body["version"], body["attrNames"])

    @app.post("/ledger/register-cred-def")
    async def register_cred_def(request: Request) -> dict:
        body = await request.json()
        return agent.register_cred_def(
            body["schemaId"],
            max_cred_num=body.get("maxCredNum", 8),
            tag=body.get("tag", "default"),
        )

    # -- peer traffic ----------------------------------------------------------------------------

    @app.post("/didcomm")
    async def didcomm(request: Request) -> dict:
        raw = await request.body()
        return agent.handle_inbound(raw)

    # -- events ------------------------------------------------------------------------------------

    @app.get("/events")
    def events(since: int = 0, live: bool = True, keepalive: float = 15.0):
        def stream():
            listener = agent.add_listener() if live else None
            try:
                last = since
                for event in agent.events.since(since):
                    last = event.seq
                    yield _sse_line(event)
                if listener is None:
                    return
                while True:
                    try:
                        event = listener.get(timeout=keepalive)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    if event.seq > last:
                        last = event.seq
                        yield _sse_line(event)
            finally:
                if listener is not None:
                    agent.remove_listener(listener)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
