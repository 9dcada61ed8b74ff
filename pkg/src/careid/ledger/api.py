"""HTTP facade over a validator pool, for agents running out of process."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from careid import crypto
from careid.ledger.pool import LedgerPool
from careid.ledger.types import (
    InvalidSignature,
    InvalidTransaction,
    LedgerError,
    NoConsensus,
    NotFound,
    TxnKind,
    TxnRequest,
    Unauthorized,
    dumps_genesis,
)

_STATUS = {
    Unauthorized: 403,
    InvalidSignature: 403,
    InvalidTransaction: 422,
    NotFound: 404,
    NoConsensus: 503,
}


def _error_response(exc: LedgerError) -> JSONResponse:
    status = _STATUS.get(type(exc), 400)
    return JSONResponse(
        status_code=status,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


def build_ledger_app(pool: LedgerPool) -> FastAPI:
    app = FastAPI(title="ledger", docs_url=None, redoc_url=None)

    @app.exception_handler(LedgerError)
    async def ledger_error(_request: Request, exc: LedgerError):
        return _error_response(exc)

    @app.get("/genesis", response_class=PlainTextResponse)
    def genesis() -> str:
        return dumps_genesis(pool.genesis)

    @app.post("/submit")
    async def submit(request: Request) -> dict:
        body = await request.json()
        txn_request = TxnRequest(
            kind=TxnKind(body["kind"]),
            payload=body["payload"],
            author_did=body["authorDid"],
            signature=crypto.b64d(body["signature"]),
        )
        receipt = pool.submit(txn_request)
        return {
            "seqNo": receipt.seq_no,
            "txnTime": receipt.txn_time_ms,
            "rootHash": crypto.b64e(receipt.root_hash),
        }

    @app.get("/nym/{did}")
    def get_nym(did: str) -> dict:
        return pool.get_nym(did).to_dict()

    @app.get("/schema/{schema_id:path}")
    def get_schema(schema_id: str) -> dict:
        return pool.get_schema(schema_id)

    @app.get("/cred-def/{cred_def_id:path}")
    def get_cred_def(cred_def_id: str) -> dict:
        return pool.get_cred_def(cred_def_id)

    @app.get("/rev-reg/{rev_reg_id:path}")
    def get_rev_reg(rev_reg_id: str, atTime: int | None = None) -> dict:
        snap = pool.get_rev_reg(rev_reg_id, at_time_ms=atTime)
        return {
            "revRegId": snap.rev_reg_id,
            "credDefId": snap.cred_def_id,
            "accumulator": crypto.b64e(snap.accumulator),
            "revoked": sorted(snap.revoked),
            "accSeqNo": snap.acc_seq_no,
            "salt": crypto.b64e(snap.salt),
            "maxCredNum": snap.max_cred_num,
        }

    @app.get("/config")
    def get_config() -> dict:
        return dict(pool._read_state().config)

    @app.get("/audit", response_class=PlainTextResponse)
    def audit() -> str:
        return pool.export_audit_jsonl()

    @app.get("/root")
    def root_hash() -> dict:
        return {"rootHash": crypto.b64e(pool._read_state().root_hash)}

    return app
