"""Scenario wiring: turn a config file into a running ledger plus agents.

A scenario config names the agents (exactly one steward), the credential
schemas they publish, the genesis file for the validator pool, and the
authorization rules the verifier loads.  ``build_environment`` assembles the
whole cast in one process with an in-memory message router — the fast path
used by the demo, the bench harness, and the tests.  The CLI's ``bootstrap``
and ``serve`` commands expose the same parts over HTTP.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from careid.agent import Agent, InProcessRouter
from careid.clock import Clock
from careid.ledger import LedgerPool, load_genesis

AGENT_ROLES = ("steward", "issuer", "holder", "verifier")


class ConfigError(Exception):
    """The scenario config is malformed."""


def agent_seed_for_label(label: str) -> bytes:
    """Deterministic identity seed per agent label (simulation convenience —
    a real deployment provisions seeds out of band)."""
    return hashlib.sha256(b"careid-agent-seed:" + label.encode("utf-8")).digest()


@dataclass(frozen=True)
class AgentSpec:
    label: str
    role: str
    endpoint: str
    port: int

    def __post_init__(self) -> None:
        if self.role not in AGENT_ROLES:
            raise ConfigError(f"unknown agent role {self.role!r} for {self.label!r}")

    @property
    def channel(self) -> str:
        """Address peers dial — also the in-process router key."""
        return f"{self.endpoint}:{self.port}"

    @property
    def base_url(self) -> str:
        return f"http://{self.endpoint}:{self.port}"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "role": self.role,
            "endpoint": self.endpoint,
            "port": self.port,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AgentSpec":
        return cls(
            label=data["label"],
            role=data["role"],
            endpoint=data["endpoint"],
            port=int(data["port"]),
        )


@dataclass(frozen=True)
class SchemaFixture:
    name: str
    version: str
    issuer: str
    attr_names: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "issuer": self.issuer,
            "attrNames": list(self.attr_names),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SchemaFixture":
        return cls(
            name=data["name"],
            version=data["version"],
            issuer=data["issuer"],
            attr_names=tuple(data["attrNames"]),
        )


@dataclass
class ScenarioConfig:
    genesis_path: str
    authz_rules_path: str
    agents: list[AgentSpec]
    schemas: list[SchemaFixture]
    demo: dict = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path.cwd)

    def validate(self) -> None:
        stewards = [a for a in self.agents if a.role == "steward"]
        if len(stewards) != 1:
            raise ConfigError(f"config must name exactly one steward, found {len(stewards)}")
        ports = [a.port for a in self.agents]
        if len(set(ports)) != len(ports):
            raise ConfigError("agent ports must be unique")
        labels = [a.label for a in self.agents]
        if len(set(labels)) != len(labels):
            raise ConfigError("agent labels must be unique")
        for schema in self.schemas:
            if schema.issuer not in labels:
                raise ConfigError(
                    f"schema {schema.name!r} names unknown issuer {schema.issuer!r}"
                )

    @property
    def steward(self) -> AgentSpec:
        return next(a for a in self.agents if a.role == "steward")

    def by_label(self, label: str) -> AgentSpec:
        for spec in self.agents:
            if spec.label == label:
                return spec
        raise ConfigError(f"no agent labelled {label!r}")

    def by_role(self, role: str) -> list[AgentSpec]:
        return [a for a in self.agents if a.role == role]

    def resolve(self, path: str) -> Path:
        """Paths in the config are relative to the config file itself."""
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def to_dict(self) -> dict:
        return {
            "genesisPath": self.genesis_path,
            "authzRulesPath": self.authz_rules_path,
            "agents": [a.to_dict() for a in self.agents],
            "schemas": [s.to_dict() for s in self.schemas],
            "demo": dict(self.demo),
        }

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "ScenarioConfig":
        try:
            config = cls(
                genesis_path=data["genesisPath"],
                authz_rules_path=data["authzRulesPath"],
                agents=[AgentSpec.from_dict(a) for a in data["agents"]],
                schemas=[SchemaFixture.from_dict(s) for s in data.get("schemas", [])],
                demo=dict(data.get("demo", {})),
                base_dir=base_dir or Path.cwd(),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed scenario config: {exc}") from None
        config.validate()
        return config

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        return cls.from_dict(data, base_dir=path.parent)


class Environment:
    """A fully wired in-process cast: pool, router, and one Agent per spec."""

    def __init__(
        self,
        config: ScenarioConfig,
        pool: LedgerPool,
        router: InProcessRouter,
        agents: dict[str, Agent],
        clock: Clock,
    ) -> None:
        self.config = config
        self.pool = pool
        self.router = router
        self.agents = agents
        self.clock = clock

    def __getitem__(self, label: str) -> Agent:
        return self.agents[label]

    @property
    def steward(self) -> Agent:
        return self.agents[self.config.steward.label]

    def by_role(self, role: str) -> list[Agent]:
        return [self.agents[spec.label] for spec in self.config.by_role(role)]

    def load_authz_rules(self, substitutions: dict[str, str] | None = None):
        from careid import authz

        raw = self.config.resolve(self.config.authz_rules_path).read_text()
        return authz.load_rules_config(raw, substitutions)


def build_environment(
    config: ScenarioConfig,
    clock: Clock | None = None,
    auto_accept: tuple[str, ...] = (),
    puzzle_difficulty: int | None = None,
) -> Environment:
    """Bootstrap the pool and construct every agent from the config.

    ``auto_accept`` lists agent labels that should accept offers and proof
    requests unattended (the bench harness turns this on for counterparts).
    """
    clock = clock or Clock()
    genesis = load_genesis(config.resolve(config.genesis_path))
    pool = LedgerPool.bootstrap(genesis, clock=clock)
    router = InProcessRouter()
    agents: dict[str, Agent] = {}
    for spec in config.agents:
        kwargs = {}
        if puzzle_difficulty is not None:
            kwargs["puzzle_difficulty"] = puzzle_difficulty
        agent = Agent(
            spec.label,
            spec.channel,
            pool,
            router,
            clock=clock,
            seed=agent_seed_for_label(spec.label),
            auto_accept=spec.label in auto_accept,
            **kwargs,
        )
        router.register(spec.channel, agent.handle_inbound)
        agents[spec.label] = agent
    steward = agents[config.steward.label]
    steward.register_nym(steward.did, steward.verkey, "STEWARD")
    return Environment(config, pool, router, agents, clock)
