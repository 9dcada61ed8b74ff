"""Client for the ledger HTTP facade, same surface as a local pool handle."""

from __future__ import annotations

import httpx

from careid import crypto
from careid.ledger.pool import Receipt, RevRegSnapshot
from careid.ledger.types import (
    InvalidSignature,
    InvalidTransaction,
    LedgerError,
    NoConsensus,
    NotFound,
    NymRecord,
    Role,
    TxnRequest,
    Unauthorized,
)

_ERRORS = {
    "Unauthorized": Unauthorized,
    "InvalidSignature": InvalidSignature,
    "InvalidTransaction": InvalidTransaction,
    "NotFound": NotFound,
    "NoConsensus": NoConsensus,
}


class HttpLedgerClient:
    def __init__(self, base_url: str = "", timeout: float = 10.0, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(base_url=self.base_url, timeout=timeout)

    def _raise_for(self, response: httpx.Response) -> None:
        if response.is_success:
            return
        try:
            body = response.json()
        except ValueError:
            raise LedgerError(f"ledger returned {response.status_code}")
        exc = _ERRORS.get(body.get("error"), LedgerError)
        raise exc(body.get("detail", f"ledger returned {response.status_code}"))

    def submit(self, request: TxnRequest) -> Receipt:
        response = self._client.post(
            "/submit",
            json={
                "kind": request.kind.value,
                "payload": request.payload,
                "authorDid": request.author_did,
                "signature": crypto.b64e(request.signature),
            },
        )
        self._raise_for(response)
        body = response.json()
        return Receipt(
            seq_no=body["seqNo"],
            txn_time_ms=body["txnTime"],
            root_hash=crypto.b64d(body["rootHash"]),
        )

    def get_nym(self, did: str) -> NymRecord:
        response = self._client.get(f"/nym/{did}")
        self._raise_for(response)
        body = response.json()
        return NymRecord(
            did=body["did"],
            verkey=body["verkey"],
            role=Role(body["role"]),
            added_by=body["addedBy"],
        )

    def get_schema(self, schema_id: str) -> dict:
        response = self._client.get(f"/schema/{schema_id}")
        self._raise_for(response)
        return response.json()

    def get_cred_def(self, cred_def_id: str) -> dict:
        response = self._client.get(f"/cred-def/{cred_def_id}")
        self._raise_for(response)
        return response.json()

    def get_rev_reg(self, rev_reg_id: str, at_time_ms: int | None = None) -> RevRegSnapshot:
        params = {"atTime": at_time_ms} if at_time_ms is not None else {}
        response = self._client.get(f"/rev-reg/{rev_reg_id}", params=params)
        self._raise_for(response)
        body = response.json()
        return RevRegSnapshot(
            rev_reg_id=body["revRegId"],
            cred_def_id=body["credDefId"],
            accumulator=crypto.b64d(body["accumulator"]),
            revoked=frozenset(body["revoked"]),
            acc_seq_no=body["accSeqNo"],
            salt=crypto.b64d(body["salt"]),
            max_cred_num=body["maxCredNum"],
        )

    def get_config(self, key: str, default=None):
        response = self._client.get("/config")
        self._raise_for(response)
        return response.json().get(key, default)

    def export_audit_jsonl(self) -> str:
        response = self._client.get("/audit")
        self._raise_for(response)
        return response.text
