"""Self-sovereign identity stack for healthcare credential exchange.

Subpackages: crypto primitives, a permissioned multi-ledger registry,
credential issuance/presentation/revocation, issuer/holder/verifier agents,
an OIDC-style authorization provider, and a load-test harness.
"""

__version__ = "0.1.0"
