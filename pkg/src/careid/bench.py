"""Load-generation harness: timed request schedules against agent operations.

Profiles pair a scenario (connection handshake, schema registration,
credential issuance, proof request, full presentation) with a request count,
a mode (SEQUENTIAL: one worker issues requests back to back; CONCURRENT: one
worker per request), and a ramp-up window — worker k of W starts at
k·(rampup/W) seconds.  Reports carry min/max/avg latency, population standard
deviation, throughput, and an error count; raw per-request samples are always
persisted next to the CSV so every aggregate can be recomputed.
"""

from __future__ import annotations

import csv
import json
import statistics
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from careid.scenario import Environment

CONNECTION_INVITATION = "CONNECTION_INVITATION"
REGISTER_SCHEMA = "REGISTER_SCHEMA"
ISSUE_CREDENTIAL = "ISSUE_CREDENTIAL"
SEND_PROOF_REQUEST = "SEND_PROOF_REQUEST"
PRESENT_PROOF = "PRESENT_PROOF"
SCENARIOS = (
    CONNECTION_INVITATION,
    REGISTER_SCHEMA,
    ISSUE_CREDENTIAL,
    SEND_PROOF_REQUEST,
    PRESENT_PROOF,
)

SEQUENTIAL = "SEQUENTIAL"
CONCURRENT = "CONCURRENT"
MODES = (SEQUENTIAL, CONCURRENT)

CSV_HEADER = "scenario,n_requests,mode,rampup_s,min_ms,max_ms,avg_ms,stddev,throughput_rps,errors"

# CLI spellings accepted for each scenario.
SCENARIO_ALIASES = {
    "connection-invitation": CONNECTION_INVITATION,
    "register-schema": REGISTER_SCHEMA,
    "issue": ISSUE_CREDENTIAL,
    "issue-credential": ISSUE_CREDENTIAL,
    "send-proof-request": SEND_PROOF_REQUEST,
    "present-proof": PRESENT_PROOF,
}


class BenchError(Exception):
    """The harness itself failed (as opposed to individual requests erroring)."""


class TargetDown(BenchError):
    """The target agent did not answer the pre-run health check."""


@dataclass(frozen=True)
class LoadProfile:
    scenario: str
    n_requests: int
    rampup_seconds: float = 0.0
    mode: str = SEQUENTIAL

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise BenchError(f"unknown scenario {self.scenario!r}; one of {SCENARIOS}")
        if self.mode not in MODES:
            raise BenchError(f"unknown mode {self.mode!r}; one of {MODES}")
        if self.n_requests < 1:
            raise BenchError("nRequests must be >= 1")
        if self.rampup_seconds < 0:
            raise BenchError("rampupSeconds must be >= 0")


@dataclass
class MetricsReport:
    scenario: str
    n_requests: int
    mode: str
    rampup_seconds: float
    min_ms: float
    max_ms: float
    avg_ms: float
    stddev: float
    throughput_rps: float
    errors: int
    samples: list[dict] = field(default_factory=list, repr=False)

    @classmethod
    def from_samples(
        cls, profile: LoadProfile, samples: list[dict], wall_seconds: float
    ) -> "MetricsReport":
        latencies = [s["elapsedMs"] for s in samples]
        errors = sum(1 for s in samples if not s["ok"])
        successes = len(samples) - errors
        throughput = successes / wall_seconds if wall_seconds > 0 and successes else 0.0
        return cls(
            scenario=profile.scenario,
            n_requests=profile.n_requests,
            mode=profile.mode,
            rampup_seconds=profile.rampup_seconds,
            min_ms=round(min(latencies), 3),
            max_ms=round(max(latencies), 3),
            avg_ms=round(statistics.fmean(latencies), 3),
            stddev=round(statistics.pstdev(latencies), 3),
            throughput_rps=round(throughput, 3),
            errors=errors,
        )

    def csv_row(self) -> list:
        return [
            self.scenario,
            self.n_requests,
            self.mode,
            self.rampup_seconds,
            self.min_ms,
            self.max_ms,
            self.avg_ms,
            self.stddev,
            self.throughput_rps,
            self.errors,
        ]


class BenchTargets:
    """Prepares the cast for a profile and hands out the per-request callable.

    Counterpart agents run with auto-accept so a single driver thread (or many)
    can exercise full exchanges. Preparation work (enrollment, connections,
    credential definitions) happens before timing starts and is sized to the
    run, so registry capacity never throttles an issuance benchmark.
    """

    def __init__(self, env: Environment):
        self.env = env
        self.issuer = env.by_role("issuer")[0]
        self.holder = env.by_role("holder")[0]
        self.verifier = env.by_role("verifier")[0]
        self.steward = env.steward
        self._enrolled = False
        self._issue_conn: str | None = None
        self._proof_conn: str | None = None
        self._bench_attrs = {"fullName": "Bench Holder", "licenseNumber": "BENCH-0001"}

    # -- preparation ---------------------------------------------------------

    def _connect(self, inviter, invitee) -> str:
        invitation = inviter.create_invitation()
        invitee.receive_invitation(invitation["invitation"])
        return invitation["connectionId"]

    def ensure_enrolled(self) -> None:
        if self._enrolled:
            return
        self._connect(self.steward, self.issuer)
        conn_id = self.issuer.list_connections()[0]["connectionId"]
        self.issuer.request_verinym(conn_id, "ENDORSER")
        self._enrolled = True

    def _fresh_cred_def(self, capacity: int) -> str:
        self.ensure_enrolled()
        max_cred_num = 2
        while max_cred_num < max(2, capacity):
            max_cred_num *= 2
        name = f"Bench{uuid.uuid4().hex[:10]}"
        schema = self.issuer.register_schema(name, "1.0", sorted(self._bench_attrs))
        setup = self.issuer.register_cred_def(
            schema["schemaId"], max_cred_num=max_cred_num, tag=name
        )
        return setup["credDefId"]

    def ensure_issue_conn(self) -> str:
        if self._issue_conn is None:
            self._issue_conn = self._connect(self.issuer, self.holder)
        return self._issue_conn

    def ensure_proof_conn(self) -> str:
        if self._proof_conn is None:
            self._proof_conn = self._connect(self.verifier, self.holder)
        return self._proof_conn

    def ping(self) -> None:
        for agent in (self.issuer, self.holder, self.verifier):
            try:
                agent.status()
            except Exception as exc:
                raise TargetDown(f"agent {agent.label} unreachable: {exc}") from exc

    # -- request callables ----------------------------------------------------

    def request_fn(self, profile: LoadProfile) -> Callable[[], None]:
        self.ping()
        if profile.scenario == CONNECTION_INVITATION:
            return self._connection_invitation_fn()
        if profile.scenario == REGISTER_SCHEMA:
            return self._register_schema_fn()
        if profile.scenario == ISSUE_CREDENTIAL:
            return self._issue_credential_fn(profile.n_requests)
        if profile.scenario == SEND_PROOF_REQUEST:
            return self._send_proof_request_fn()
        return self._present_proof_fn()

    def _connection_invitation_fn(self) -> Callable[[], None]:
        def request() -> None:
            invitation = self.issuer.create_invitation()
            connection = self.holder.receive_invitation(invitation["invitation"])
            if connection["state"] != "ACTIVE":
                raise BenchError(f"handshake ended in {connection['state']}")

        return request

    def _register_schema_fn(self) -> Callable[[], None]:
        self.ensure_enrolled()

        def request() -> None:
            self.issuer.register_schema(f"Bench{uuid.uuid4().hex[:10]}", "1.0", ["a", "b"])

        return request

    def _issue_credential_fn(self, n_requests: int) -> Callable[[], None]:
        cred_def_id = self._fresh_cred_def(2 * n_requests)
        conn_id = self.ensure_issue_conn()
        self.holder.auto_accept = True

        def request() -> None:
            record = self.issuer.send_credential_offer(
                conn_id, cred_def_id, dict(self._bench_attrs)
            )
            if record["state"] != "ACKED":
                raise BenchError(f"issuance ended in {record['state']}")

        return request

    def _holder_has_credential(self, cred_def_id: str) -> None:
        conn_id = self.ensure_issue_conn()
        self.holder.auto_accept = True
        record = self.issuer.send_credential_offer(
            conn_id, cred_def_id, dict(self._bench_attrs)
        )
        if record["state"] != "ACKED":
            raise BenchError("could not seed the holder's wallet")

    def _send_proof_request_fn(self) -> Callable[[], None]:
        cred_def_id = self._fresh_cred_def(2)
        self._holder_has_credential(cred_def_id)
        conn_id = self.ensure_proof_conn()
        self.holder.auto_accept = False  # measure delivery, not the response

        def request() -> None:
            record = self.verifier.send_proof_request(
                conn_id, ["licenseNumber"], cred_def_id=cred_def_id
            )
            if record["state"] != "REQUEST_SENT":
                raise BenchError(f"request ended in {record['state']}")

        return request

    def _present_proof_fn(self) -> Callable[[], None]:
        cred_def_id = self._fresh_cred_def(2)
        self._holder_has_credential(cred_def_id)
        conn_id = self.ensure_proof_conn()
        self.holder.auto_accept = True

        def request() -> None:
            record = self.verifier.send_proof_request(
                conn_id, ["licenseNumber"], cred_def_id=cred_def_id
            )
            if record["state"] != "VERIFIED_TRUE":
                raise BenchError(f"presentation ended in {record['state']}")

        return request


def run(profile: LoadProfile, targets: BenchTargets) -> MetricsReport:
    """Execute exactly ``profile.n_requests`` requests and aggregate latencies."""
    request = targets.request_fn(profile)
    samples: list[dict] = []
    lock = threading.Lock()
    if profile.mode == SEQUENTIAL:
        worker_count, per_worker = 1, profile.n_requests
    else:
        worker_count, per_worker = profile.n_requests, 1
    start_wall = time.perf_counter()

    def worker(k: int) -> None:
        delay = k * (profile.rampup_seconds / worker_count)
        if delay:
            time.sleep(delay)
        for i in range(per_worker):
            t0 = time.perf_counter()
            ok, error = True, None
            try:
                request()
            except Exception as exc:
                ok, error = False, f"{type(exc).__name__}: {exc}"
            elapsed_ms = (time.perf_counter() - t0) * 1000
            with lock:
                samples.append(
                    {
                        "scenario": profile.scenario,
                        "worker": k,
                        "i": i,
                        "startMs": round((t0 - start_wall) * 1000, 3),
                        "elapsedMs": round(elapsed_ms, 3),
                        "ok": ok,
                        "error": error,
                    }
                )

    threads = [threading.Thread(target=worker, args=(k,)) for k in range(worker_count)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    wall_seconds = time.perf_counter() - start_wall
    report = MetricsReport.from_samples(profile, samples, wall_seconds)
    report.samples = samples
    return report


def export(report: MetricsReport, path: str | Path) -> Path:
    """Append the report to a CSV (header written once) and dump its raw
    samples as JSON lines beside it."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fresh = not path.exists() or path.stat().st_size == 0
        with path.open("a", newline="") as fh:
            writer = csv.writer(fh)
            if fresh:
                writer.writerow(CSV_HEADER.split(","))
            writer.writerow(report.csv_row())
        samples_path = path.with_suffix(".samples.jsonl")
        with samples_path.open("a") as fh:
            for sample in report.samples:
                fh.write(json.dumps(sample) + "\n")
    except OSError as exc:
        raise BenchError(f"cannot write {path}: {exc}") from exc
    return path


def read_reports(path: str | Path) -> list[MetricsReport]:
    """Parse an exported CSV back into reports (samples not reattached)."""
    reports = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER.split(","):
            raise BenchError(f"unexpected CSV header in {path}")
        for row in reader:
            reports.append(
                MetricsReport(
                    scenario=row["scenario"],
                    n_requests=int(row["n_requests"]),
                    mode=row["mode"],
                    rampup_seconds=float(row["rampup_s"]),
                    min_ms=float(row["min_ms"]),
                    max_ms=float(row["max_ms"]),
                    avg_ms=float(row["avg_ms"]),
                    stddev=float(row["stddev"]),
                    throughput_rps=float(row["throughput_rps"]),
                    errors=int(row["errors"]),
                )
            )
    return reports


def run_process_suite(config, n_exchanges: int) -> dict[str, float]:
    """Time the four end-to-end phases: environment startup, enrollment plus
    the issuer↔holder connection, schema/cred-def registration, and
    ``n_exchanges`` sequential credential exchanges.  Seconds per phase."""
    from careid.scenario import build_environment

    if n_exchanges < 0:
        raise BenchError("nExchanges must be >= 0")
    durations: dict[str, float] = {}
    state: dict = {}

    def phase(name: str, fn: Callable[[], None]) -> None:
        t0 = time.perf_counter()
        try:
            fn()
        except Exception as exc:
            raise BenchError(f"phase {name!r} failed: {exc}") from exc
        durations[name] = round(time.perf_counter() - t0, 6)

    def startup() -> None:
        state["targets"] = BenchTargets(build_environment(config))

    def connection() -> None:
        targets = state["targets"]
        targets.ensure_enrolled()
        targets.ensure_issue_conn()

    def register_schema() -> None:
        state["credDefId"] = state["targets"]._fresh_cred_def(max(2, 2 * n_exchanges))

    def exchange() -> None:
        targets = state["targets"]
        targets.holder.auto_accept = True
        for _ in range(n_exchanges):
            record = targets.issuer.send_credential_offer(
                targets.ensure_issue_conn(), state["credDefId"], dict(targets._bench_attrs)
            )
            if record["state"] != "ACKED":
                raise RuntimeError(f"exchange ended in {record['state']}")

    phase("startup", startup)
    phase("connection", connection)
    phase("registerSchema", register_schema)
    phase("exchangeCredential", exchange)
    return durations
