"""Command-line entry point: boot the ledger and agents, run the end-to-end
demo workflow, drive the bench harness, and export audit logs.

Subcommands:
  bootstrap   start the validator pool, its HTTP facade, and every configured
              agent as HTTP services in this process (prints a READY line)
  serve       start a subset of agents against an already-running ledger
  demo        run the full enroll→issue→present→authorize→revoke workflow,
              in-process by default or against running services via --attach
  bench       run a load scenario and append a CSV row (plus raw samples)
  export-log  fetch the audit log from a running ledger facade

Exit codes: 0 success, 2 usage/config errors, 3 protocol failures.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import socket
import sys
import threading
import time
from pathlib import Path
from typing import NoReturn

import httpx
import uvicorn

from careid import authz, bench, crypto
from careid.agent import Agent, HttpTransport
from careid.agent.api import build_agent_app
from careid.authz.api import build_authz_app
from careid.ledger import InvalidGenesis, LedgerPool, load_genesis
from careid.ledger.api import build_ledger_app
from careid.ledger.client import HttpLedgerClient
from careid.scenario import (
    ConfigError,
    ScenarioConfig,
    agent_seed_for_label,
    build_environment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROTOCOL = 3

DEFAULT_CONFIG = os.environ.get("CAREID_CONFIG", "fixtures/config.json")


def _emit(obj: dict) -> None:
    print(json.dumps(obj, separators=(",", ":")), flush=True)


def _fail(code: int, message: str) -> NoReturn:
    print(message, file=sys.stderr, flush=True)
    raise SystemExit(code)


def _load_config(path: str) -> ScenarioConfig:
    try:
        return ScenarioConfig.load(path)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, f"config error: {exc}")


def _load_genesis_or_fail(config: ScenarioConfig):
    path = config.resolve(config.genesis_path)
    try:
        return load_genesis(path)
    except FileNotFoundError:
        _fail(EXIT_CONFIG, f"genesis file not found: {path}")
    except (InvalidGenesis, ValueError, KeyError) as exc:
        _fail(EXIT_CONFIG, f"bad genesis file {path}: {exc}")


# -- HTTP serving -----------------------------------------------------------------


class ServerHandle:
    """A uvicorn server running on its own thread."""

    def __init__(self, app, host: str, port: int):
        self.host, self.port = host, port
        self.server = uvicorn.Server(
            uvicorn.Config(app, host=host, port=port, log_level="error", access_log=False)
        )
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def start(self) -> None:
        self.thread.start()

    def wait_started(self, timeout: float = 10.0) -> None:
        deadline = time.monotonic() + timeout
        while not self.server.started:
            if not self.thread.is_alive() or time.monotonic() > deadline:
                raise RuntimeError(f"server on port {self.port} failed to start")
            time.sleep(0.02)

    def stop(self) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=5)


def _check_ports_free(addresses: list[tuple[str, int]]) -> None:
    for host, port in addresses:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        try:
            probe.bind((host, port))
        except OSError:
            _fail(EXIT_CONFIG, f"port {port} on {host} is already in use")
        finally:
            probe.close()


def _build_agent_servers(
    config: ScenarioConfig, specs, pool, webhook_url: str | None = None
) -> tuple[list[ServerHandle], dict[str, Agent]]:
    transport = HttpTransport()
    servers, agents = [], {}
    rules_path = config.resolve(config.authz_rules_path)
    for spec in specs:
        agent = Agent(
            spec.label,
            spec.base_url,
            pool,
            transport,
            seed=agent_seed_for_label(spec.label),
            webhook_url=webhook_url,
        )
        app = build_agent_app(agent)
        if spec.role == "verifier":
            provider = authz.AuthorizationProvider(clock=agent.clock)
            if rules_path.exists():
                rules, resources = authz.load_rules_config(rules_path.read_text())
                provider.rules = rules
                provider.resources = {r.resource_id: r for r in resources}
            app.mount("/authz", build_authz_app(provider, agent.get_presentation_exchange))
        servers.append(ServerHandle(app, spec.endpoint, spec.port))
        agents[spec.label] = agent
    return servers, agents


def _hold_until_interrupt(servers: list[ServerHandle]) -> int:
    stop = threading.Event()

    def handler(signum, frame):
        stop.set()

    signal.signal(signal.SIGINT, handler)
    signal.signal(signal.SIGTERM, handler)
    try:
        while not stop.is_set():
            stop.wait(0.2)
    finally:
        for server in servers:
            server.stop()
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    config = _load_config(args.config)
    genesis = _load_genesis_or_fail(config)
    facade_host, facade_port = genesis.nodes[0].endpoint.split(":")
    addresses = [(facade_host, int(facade_port))]
    addresses += [(spec.endpoint, spec.port) for spec in config.agents]
    _check_ports_free(addresses)

    pool = LedgerPool.bootstrap(genesis)
    servers, agents = _build_agent_servers(
        config, config.agents, pool, webhook_url=os.environ.get("CAREID_WEBHOOK_URL")
    )
    steward = agents[config.steward.label]
    steward.register_nym(steward.did, steward.verkey, "STEWARD")
    servers.insert(0, ServerHandle(build_ledger_app(pool), facade_host, int(facade_port)))

    for server in servers:
        server.start()
    try:
        for server in servers:
            server.wait_started()
    except RuntimeError as exc:
        _fail(EXIT_CONFIG, str(exc))
    _emit(
        {
            "ready": True,
            "ledger": f"http://{genesis.nodes[0].endpoint}",
            "agents": {spec.label: spec.base_url for spec in config.agents},
        }
    )
    return _hold_until_interrupt(servers)


def cmd_serve(args) -> int:
    config = _load_config(args.config)
    try:
        specs = [config.by_label(label) for label in args.agent]
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    genesis = _load_genesis_or_fail(config)
    ledger_url = args.ledger_url or os.environ.get(
        "CAREID_LEDGER_URL", f"http://{genesis.nodes[0].endpoint}"
    )
    pool = HttpLedgerClient(ledger_url)
    _check_ports_free([(spec.endpoint, spec.port) for spec in specs])
    servers, agents = _build_agent_servers(
        config, specs, pool, webhook_url=os.environ.get("CAREID_WEBHOOK_URL")
    )
    steward_label = config.steward.label
    if steward_label in agents:
        steward = agents[steward_label]
        try:
            steward.register_nym(steward.did, steward.verkey, "STEWARD")
        except Exception as exc:
            print(f"warning: steward NYM not registered: {exc}", file=sys.stderr)
    for server in servers:
        server.start()
    try:
        for server in servers:
            server.wait_started()
    except RuntimeError as exc:
        _fail(EXIT_CONFIG, str(exc))
    _emit({"ready": True, "agents": {spec.label: spec.base_url for spec in specs}})
    return _hold_until_interrupt(servers)


# -- demo ---------------------------------------------------------------------------


class StepFailure(Exception):
    def __init__(self, step: str, cause: Exception):
        super().__init__(f"step {step!r} failed: {cause}")
        self.step = step
        self.cause = cause


class LocalActor:
    """Drives an in-process Agent through the same verbs the REST API offers."""

    def __init__(self, agent: Agent):
        self.agent = agent

    def status(self) -> dict:
        return self.agent.status()

    def create_invitation(self) -> dict:
        return self.agent.create_invitation()

    def receive_invitation(self, invitation_url: str) -> dict:
        return self.agent.receive_invitation(invitation_url)

    def request_verinym(self, conn_id: str, role: str) -> dict:
        return self.agent.request_verinym(conn_id, role)

    def register_schema(self, name: str, version: str, attr_names: list[str]) -> dict:
        return self.agent.register_schema(name, version, attr_names)

    def register_cred_def(self, schema_id: str, max_cred_num: int) -> dict:
        return self.agent.register_cred_def(schema_id, max_cred_num=max_cred_num)

    def send_credential_offer(self, conn_id: str, cred_def_id: str, attributes: dict) -> dict:
        return self.agent.send_credential_offer(conn_id, cred_def_id, attributes)

    def respond_credential_offer(self, cred_ex_id: str) -> dict:
        return self.agent.respond_credential_offer(cred_ex_id)

    def send_proof_request(self, conn_id: str, requested: list[str], cred_def_id: str) -> dict:
        return self.agent.send_proof_request(conn_id, requested, cred_def_id=cred_def_id)

    def respond_proof_request(self, pres_ex_id: str) -> dict:
        return self.agent.respond_proof_request(pres_ex_id)

    def get_presentation_exchange(self, pres_ex_id: str) -> dict:
        return self.agent.get_presentation_exchange(pres_ex_id)

    def revoke_credential(self, cred_ex_id: str) -> dict:
        return self.agent.revoke_credential(cred_ex_id)


class RemoteActor:
    """Drives a served agent over its admin REST API."""

    def __init__(self, base_url: str, client: httpx.Client):
        self.base_url = base_url.rstrip("/")
        self.client = client

    def _call(self, method: str, path: str, body: dict | None = None) -> dict:
        response = self.client.request(
            method, f"{self.base_url}{path}", json=body, timeout=30.0
        )
        if response.status_code >= 400:
            raise RuntimeError(f"{method} {path} -> {response.status_code}: {response.text}")
        return response.json()

    def status(self) -> dict:
        return self._call("GET", "/status")

    def create_invitation(self) -> dict:
        return self._call("POST", "/connections/create-invitation", {})

    def receive_invitation(self, invitation_url: str) -> dict:
        return self._call(
            "POST", "/connections/receive-invitation", {"invitationUrl": invitation_url}
        )

    def request_verinym(self, conn_id: str, role: str) -> dict:
        return self._call("POST", f"/connections/{conn_id}/request-verinym", {"role": role})

    def register_schema(self, name: str, version: str, attr_names: list[str]) -> dict:
        return self._call(
            "POST",
            "/ledger/register-schema",
            {"name": name, "version": version, "attrNames": attr_names},
        )

    def register_cred_def(self, schema_id: str, max_cred_num: int) -> dict:
        return self._call(
            "POST",
            "/ledger/register-cred-def",
            {"schemaId": schema_id, "maxCredNum": max_cred_num},
        )

    def send_credential_offer(self, conn_id: str, cred_def_id: str, attributes: dict) -> dict:
        return self._call(
            "POST",
            "/issue-credential/send-offer",
            {"connectionId": conn_id, "credDefId": cred_def_id, "attributes": attributes},
        )

    def respond_credential_offer(self, cred_ex_id: str) -> dict:
        return self._call("POST", f"/issue-credential/{cred_ex_id}/respond", {"accept": True})

    def send_proof_request(self, conn_id: str, requested: list[str], cred_def_id: str) -> dict:
        return self._call(
            "POST",
            "/present-proof/send-request",
            {
                "connectionId": conn_id,
                "requestedAttributes": requested,
                "credDefId": cred_def_id,
            },
        )

    def respond_proof_request(self, pres_ex_id: str) -> dict:
        return self._call("POST", f"/present-proof/{pres_ex_id}/respond", {"accept": True})

    def get_presentation_exchange(self, pres_ex_id: str) -> dict:
        return self._call("GET", f"/present-proof/{pres_ex_id}")

    def revoke_credential(self, cred_ex_id: str) -> dict:
        return self._call("POST", "/revocation/revoke", {"credExId": cred_ex_id})


class LocalAuthz:
    """In-process authorization provider handle."""

    def __init__(self, provider: authz.AuthorizationProvider, verifier: Agent):
        self.provider = provider
        self.verifier = verifier

    def load_rules(self, raw: str, substitutions: dict[str, str]) -> None:
        rules, resources = authz.load_rules_config(raw, substitutions)
        self.provider.rules = rules
        self.provider.resources = {r.resource_id: r for r in resources}

    def try_token(self, pres_ex_id: str) -> str | None:
        exchange = self.verifier.get_presentation_exchange(pres_ex_id)
        try:
            return self.provider.authorize(exchange)
        except (authz.NotVerified, authz.NoRole):
            return None

    def token_roles(self, token: str) -> list[str]:
        return json.loads(crypto.b64d(token.split(".")[1]))["roles"]

    def access(self, token: str, resource_id: str) -> bool:
        try:
            claims = self.provider.validate_token(token)
            return self.provider.check_access(claims, resource_id)
        except authz.AuthzError:
            return False


class RemoteAuthz:
    """Authorization facade mounted under the served verifier at /authz."""

    def __init__(self, base_url: str, client: httpx.Client):
        self.base_url = base_url.rstrip("/") + "/authz"
        self.client = client

    def load_rules(self, raw: str, substitutions: dict[str, str]) -> None:
        response = self.client.post(
            f"{self.base_url}/rules",
            json={"config": json.loads(raw), "substitutions": substitutions},
            timeout=30.0,
        )
        response.raise_for_status()

    def try_token(self, pres_ex_id: str) -> str | None:
        response = self.client.post(
            f"{self.base_url}/authorize", json={"presExId": pres_ex_id}, timeout=30.0
        )
        if response.status_code == 403:
            return None
        if response.status_code >= 400:
            raise RuntimeError(f"authorize -> {response.status_code}: {response.text}")
        return response.json()["accessToken"]

    def token_roles(self, token: str) -> list[str]:
        return json.loads(crypto.b64d(token.split(".")[1]))["roles"]

    def access(self, token: str, resource_id: str) -> bool:
        response = self.client.get(
            f"{self.base_url}/resources/{resource_id}",
            headers={"Authorization": f"Bearer {token}"},
            timeout=30.0,
        )
        return response.status_code == 200 and response.json().get("granted", False)


def run_demo(config: ScenarioConfig, actors: dict, authz_handle, skip_revoke: bool) -> None:
    """Execute the full workflow, printing one JSON transcript line per step.

    Raises StepFailure naming the first step that does not complete.
    """
    demo = config.demo
    issuer = actors[demo["issuer"]]
    holder = actors[demo["holder"]]
    verifier = actors[demo["verifier"]]
    steward = actors[config.steward.label]
    rules_raw = config.resolve(config.authz_rules_path).read_text()

    def step(name, fn):
        try:
            return fn()
        except StepFailure:
            raise
        except Exception as exc:
            raise StepFailure(name, exc) from exc

    def bootstrap():
        agents = {label: actor.status()["did"] for label, actor in actors.items()}
        _emit({"step": "bootstrap", "agents": agents})

    step("bootstrap", bootstrap)

    def enroll():
        for spec in config.agents:
            if spec.role not in ("issuer", "verifier"):
                continue
            actor = actors[spec.label]
            invitation = steward.create_invitation()
            record = actor.receive_invitation(invitation["invitationUrl"])
            result = actor.request_verinym(record["connectionId"], "ENDORSER")
            _emit(
                {
                    "step": "enroll",
                    "label": spec.label,
                    "did": result["did"],
                    "role": result["role"],
                    "seqNo": result["seqNo"],
                }
            )

    step("enroll", enroll)

    schema_ids = {}

    def register_schemas():
        for fixture in config.schemas:
            result = actors[fixture.issuer].register_schema(
                fixture.name, fixture.version, list(fixture.attr_names)
            )
            schema_ids[fixture.name] = result["schemaId"]
            _emit(
                {
                    "step": "register-schema",
                    "name": fixture.name,
                    "schemaId": result["schemaId"],
                    "seqNo": result["seqNo"],
                }
            )

    step("register-schema", register_schemas)

    def register_cred_def():
        result = issuer.register_cred_def(
            schema_ids[demo["schema"]], demo.get("maxCredNum", 16)
        )
        _emit(
            {
                "step": "register-cred-def",
                "credDefId": result["credDefId"],
                "revRegId": result["revRegId"],
            }
        )
        return result

    setup = step("register-cred-def", register_cred_def)

    def connect(inviter_name, inviter, invitee_name, invitee):
        def go():
            invitation = inviter.create_invitation()
            record = invitee.receive_invitation(invitation["invitationUrl"])
            if record["state"] != "ACTIVE":
                raise RuntimeError(f"handshake ended in {record['state']}")
            _emit(
                {
                    "step": "connect",
                    "inviter": inviter_name,
                    "invitee": invitee_name,
                    "state": record["state"],
                }
            )
            return invitation["connectionId"]

        return go

    issue_conn = step(
        "connect", connect(demo["issuer"], issuer, demo["holder"], holder)
    )

    def issue():
        offer = issuer.send_credential_offer(
            issue_conn, setup["credDefId"], dict(demo["attributes"])
        )
        stored = holder.respond_credential_offer(offer["credentialExchangeId"])
        if stored["state"] != "STORED":
            raise RuntimeError(f"issuance ended in {stored['state']}")
        _emit(
            {
                "step": "issue",
                "credExId": offer["credentialExchangeId"],
                "state": stored["state"],
            }
        )
        return offer["credentialExchangeId"]

    cred_ex_id = step("issue", issue)

    proof_conn = step(
        "connect", connect(demo["verifier"], verifier, demo["holder"], holder)
    )

    requested = list(demo["requestedAttributes"])

    def proof_round(step_name):
        request = verifier.send_proof_request(proof_conn, requested, setup["credDefId"])
        pres_ex_id = request["presentationExchangeId"]
        if step_name == "proof-request":
            _emit({"step": "proof-request", "presExId": pres_ex_id, "requested": requested})
        holder.respond_proof_request(pres_ex_id)
        return verifier.get_presentation_exchange(pres_ex_id)

    def verify():
        exchange = proof_round("proof-request")
        if not exchange["verified"]:
            raise RuntimeError(f"presentation not verified: {exchange['reasons']}")
        _emit(
            {
                "step": "verify",
                "presExId": exchange["presentationExchangeId"],
                "verified": exchange["verified"],
                "revealed": sorted(exchange["presentation"]["revealed"]),
                "presentation": exchange["presentation"],
            }
        )
        return exchange

    first_exchange = step("verify", verify)

    def authz_token():
        authz_handle.load_rules(rules_raw, {"PID_CRED_DEF": setup["credDefId"]})
        token = authz_handle.try_token(first_exchange["presentationExchangeId"])
        if token is None:
            raise RuntimeError("no access token issued for a verified presentation")
        _emit(
            {
                "step": "authz-token",
                "roles": authz_handle.token_roles(token),
                "accessToken": token,
            }
        )
        return token

    token = step("authz-token", authz_token)
    resource_id = demo.get("resourceId", "ehr-portal")

    def access():
        granted = authz_handle.access(token, resource_id)
        if not granted:
            raise RuntimeError(f"access to {resource_id!r} denied for a fresh token")
        _emit({"step": "access", "resourceId": resource_id, "granted": granted})

    step("access", access)

    if not skip_revoke:

        def revoke():
            result = issuer.revoke_credential(cred_ex_id)
            _emit(
                {
                    "step": "revoke",
                    "credExId": cred_ex_id,
                    "revRegId": result["revRegId"],
                    "revIndex": result["revIndex"],
                    "seqNo": result["seqNo"],
                }
            )

        step("revoke", revoke)

    def post_revocation_verify():
        exchange = proof_round("post-revocation-verify")
        verified = bool(exchange["verified"])
        if skip_revoke and not verified:
            raise RuntimeError(f"unrevoked credential failed: {exchange['reasons']}")
        if not skip_revoke and verified:
            raise RuntimeError("revoked credential still verifies")
        second_token = authz_handle.try_token(exchange["presentationExchangeId"])
        access_denied = second_token is None or not authz_handle.access(
            second_token, resource_id
        )
        if skip_revoke and access_denied:
            raise RuntimeError("access denied for an unrevoked credential")
        if not skip_revoke and not access_denied:
            raise RuntimeError("access granted after revocation")
        line = {
            "step": "post-revocation-verify",
            "verified": verified,
            "accessDenied": access_denied,
        }
        if not verified:
            line["reasons"] = exchange["reasons"]
        _emit(line)

    step("post-revocation-verify", post_revocation_verify)


def cmd_demo(args) -> int:
    config = _load_config(args.config)
    demo = config.demo
    for key in ("issuer", "holder", "verifier", "schema", "attributes", "requestedAttributes"):
        if key not in demo:
            _fail(EXIT_CONFIG, f"config demo section is missing {key!r}")
    if args.attach:
        client = httpx.Client()
        actors = {
            spec.label: RemoteActor(spec.base_url, client) for spec in config.agents
        }
        authz_handle = RemoteAuthz(config.by_label(demo["verifier"]).base_url, client)
    else:
        _load_genesis_or_fail(config)  # surface config problems as exit 2, not a traceback
        env = build_environment(config)
        actors = {label: LocalActor(agent) for label, agent in env.agents.items()}
        provider = authz.AuthorizationProvider(clock=env.clock)
        authz_handle = LocalAuthz(provider, env.agents[demo["verifier"]])
    try:
        run_demo(config, actors, authz_handle, skip_revoke=args.skip_revoke)
    except StepFailure as exc:
        _fail(EXIT_PROTOCOL, f"demo failed at step {exc.step!r}: {exc.cause}")
    return EXIT_OK


# -- bench ------------------------------------------------------------------------------


def cmd_bench(args) -> int:
    config = _load_config(args.config)
    if args.scenario == "process-suite":
        try:
            durations = bench.run_process_suite(config, args.requests)
        except bench.BenchError as exc:
            _fail(EXIT_PROTOCOL, str(exc))
        _emit({"scenario": "process-suite", "nExchanges": args.requests, **durations})
        return EXIT_OK
    scenario = bench.SCENARIO_ALIASES.get(args.scenario)
    if scenario is None:
        names = sorted(set(bench.SCENARIO_ALIASES) | {"process-suite"})
        _fail(EXIT_CONFIG, f"unknown scenario {args.scenario!r}; valid: {', '.join(names)}")
    try:
        profile = bench.LoadProfile(
            scenario=scenario,
            n_requests=args.requests,
            rampup_seconds=args.rampup,
            mode=args.mode.upper(),
        )
    except bench.BenchError as exc:
        _fail(EXIT_CONFIG, str(exc))
    env = build_environment(config, puzzle_difficulty=args.puzzle_difficulty)
    targets = bench.BenchTargets(env)
    try:
        report = bench.run(profile, targets)
        out = bench.export(report, args.out)
    except bench.BenchError as exc:
        _fail(EXIT_PROTOCOL, str(exc))
    _emit(
        {
            "scenario": report.scenario,
            "nRequests": report.n_requests,
            "mode": report.mode,
            "rampupS": report.rampup_seconds,
            "minMs": report.min_ms,
            "maxMs": report.max_ms,
            "avgMs": report.avg_ms,
            "stddev": report.stddev,
            "throughputRps": report.throughput_rps,
            "errors": report.errors,
            "csv": str(out),
        }
    )
    return EXIT_OK


# -- audit export ----------------------------------------------------------------------


def cmd_export_log(args) -> int:
    config = _load_config(args.config)
    genesis = _load_genesis_or_fail(config)
    ledger_url = args.ledger_url or os.environ.get(
        "CAREID_LEDGER_URL", f"http://{genesis.nodes[0].endpoint}"
    )
    try:
        text = HttpLedgerClient(ledger_url).export_audit_jsonl()
    except Exception as exc:
        _fail(EXIT_PROTOCOL, f"cannot export audit log from {ledger_url}: {exc}")
    if args.out:
        Path(args.out).write_text(text)
        _emit({"written": args.out, "entries": len(text.strip().splitlines())})
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="careid",
        description="Self-sovereign identity stack: ledger, agents, demo, and bench.",
    )
    parser.add_argument(
        "--config",
        default=DEFAULT_CONFIG,
        help=f"scenario config file (default: {DEFAULT_CONFIG})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("bootstrap", help="run the ledger facade and all agents as HTTP services")

    serve = sub.add_parser("serve", help="run selected agents against a running ledger")
    serve.add_argument(
        "--agent",
        action="append",
        required=True,
        help="agent label to serve (repeatable)",
    )
    serve.add_argument("--ledger-url", default=None, help="ledger facade base URL")

    demo = sub.add_parser("demo", help="run the end-to-end workflow")
    demo.add_argument("--skip-revoke", action="store_true", help="stop before revocation")
    demo.add_argument(
        "--attach",
        action="store_true",
        help="drive already-running services instead of an in-process cast",
    )

    bench_cmd = sub.add_parser("bench", help="run a load scenario")
    bench_cmd.add_argument("scenario", help="scenario name (or process-suite)")
    bench_cmd.add_argument("-n", "--requests", type=int, default=10)
    bench_cmd.add_argument("--rampup", type=float, default=0.0, help="ramp-up seconds")
    bench_cmd.add_argument(
        "--mode", choices=["sequential", "concurrent"], default="sequential"
    )
    bench_cmd.add_argument("--out", default="bench.csv", help="CSV output path (appended)")
    bench_cmd.add_argument(
        "--puzzle-difficulty",
        type=int,
        default=8,
        help="invitation puzzle difficulty for the benched agents",
    )

    export_log = sub.add_parser("export-log", help="download the audit log")
    export_log.add_argument("--ledger-url", default=None, help="ledger facade base URL")
    export_log.add_argument("--out", default=None, help="write to a file instead of stdout")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "bootstrap": cmd_bootstrap,
        "serve": cmd_serve,
        "demo": cmd_demo,
        "bench": cmd_bench,
        "export-log": cmd_export_log,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
