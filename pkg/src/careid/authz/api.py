"""HTTP facade for an authorization provider.

Mounted next to a verifier agent: ``/authorize`` trades a verified
presentation exchange for an access token, ``/introspect`` validates a token,
and ``/resources/{id}`` is a Bearer-guarded sample endpoint.
"""

from __future__ import annotations

from typing import Callable

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse

from careid.agent.records import UnknownRecord
from careid.authz.provider import (
    AuthorizationProvider,
    AuthzError,
    Expired,
    InvalidToken,
    NoRole,
    NotFound,
    NotVerified,
    ReplayRejected,
)

_STATUS = {
    NotVerified: 403,
    NoRole: 403,
    Expired: 401,
    InvalidToken: 401,
    ReplayRejected: 401,
    NotFound: 404,
}


def build_authz_app(
    provider: AuthorizationProvider,
    exchange_lookup: Callable[[str], dict],
) -> FastAPI:
    """``exchange_lookup`` resolves a presentation-exchange id to its record
    (typically the verifier agent's ``get_presentation_exchange``)."""
    app = FastAPI(docs_url=None, redoc_url=None)

    @app.exception_handler(AuthzError)
    async def _authz_error(request: Request, exc: AuthzError) -> JSONResponse:
        status = _STATUS.get(type(exc), 400)
        return JSONResponse(
            status_code=status, content={"error": type(exc).__name__, "detail": str(exc)}
        )

    @app.exception_handler(UnknownRecord)
    async def _unknown_record(request: Request, exc: UnknownRecord) -> JSONResponse:
        return JSONResponse(
            status_code=404, content={"error": "UnknownRecord", "detail": str(exc)}
        )

    @app.get("/status")
    def status() -> dict:
        return {
            "verkey": provider.verkey,
            "rules": [r.to_dict() for r in provider.rules],
            "resources": [r.to_dict() for r in provider.resources.values()],
        }

    @app.post("/rules")
    def reload_rules(body: dict) -> dict:
        """Replace the rule set, substituting ``$NAME`` placeholders — lets a
        deployment bind rules to cred-def ids that were registered after the
        provider started."""
        from careid.authz.provider import load_rules_config

        rules, resources = load_rules_config(
            body["config"], body.get("substitutions") or {}
        )
        provider.rules = rules
        provider.resources = {r.resource_id: r for r in resources}
        return {"rules": len(rules), "resources": len(resources)}

    @app.post("/authorize")
    def authorize(body: dict) -> dict:
        exchange = exchange_lookup(body["presExId"])
        return {"accessToken": provider.authorize(exchange)}

    @app.post("/introspect")
    def introspect(body: dict) -> dict:
        claims = provider.validate_token(body["token"])
        return {"active": True, **claims.to_dict()}

    @app.get("/resources/{resource_id}")
    def resource(resource_id: str, authorization: str = Header(default="")) -> JSONResponse:
        if not authorization.startswith("Bearer "):
            return JSONResponse(
                status_code=401, content={"error": "InvalidToken", "detail": "missing bearer token"}
            )
        claims = provider.validate_token(authorization[len("Bearer "):])
        if not provider.check_access(claims, resource_id):
            return JSONResponse(
                status_code=403,
                content={"granted": False, "resourceId": resource_id, "roles": list(claims.roles)},
            )
        return JSONResponse(
            content={"granted": True, "resourceId": resource_id, "roles": list(claims.roles)}
        )

    return app
