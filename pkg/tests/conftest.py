"""Shared pytest wiring: a one-line verdict per release-gate test.

The release gate lives in test_acceptance.py — one test per shipping
requirement.  After any run that included those tests, print a compact
PASS/FAIL table so the gate's outcome is readable without scanning the
full report.
"""

GATE_MODULE = "test_acceptance.py"

GATE_LABELS = {
    "test_demo_end_to_end_selective_disclosure_and_revocation":
        "end-to-end demo: issue, disclose 2 of 5 attrs, verify, authorize, revoke, deny",
    "test_ledger_survives_one_fault_not_two_and_enforces_role_gates":
        "ledger fault tolerance: writes commit with 1 of 4 nodes down, refuse with 2; role ACL matrix",
    "test_audit_log_replay_is_deterministic_and_tamper_evident":
        "audit replay: byte-identical state; any single-entry mutation reported at the right seqNo",
    "test_revocation_accumulator_matches_brute_force_oracle":
        "revocation accumulator: 500 random subsets equal brute-force Merkle roots; witness soundness",
    "test_adversarial_defenses_hold":
        "security: forged cred-def, field tampering, stolen key, replays, token reuse, role grants",
    "test_bench_latency_trends_at_desk_scale":
        "bench trends: flat sequential latency, concurrent >= sequential, stddev(n=1)=0, CSV header",
    "test_process_suite_scales_superlinearly_within_bounds":
        "process suite: exchange phase scales 5-40x from n=10 to n=100",
    "test_wallet_export_import_round_trip":
        "wallet DKMS: passphrase export/import round trip; wrong passphrase fails; blob leaks nothing",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = {}
    for bucket, verdict in (
        ("passed", "PASS"),
        ("failed", "FAIL"),
        ("error", "FAIL"),
        ("skipped", "SKIP"),
    ):
        for report in terminalreporter.stats.get(bucket, []):
            path, _, name = report.nodeid.partition("::")
            if not path.endswith(GATE_MODULE) or name not in GATE_LABELS:
                continue
            if verdict == "FAIL" or name not in verdicts:
                verdicts[name] = verdict
    if not verdicts:
        return
    terminalreporter.write_sep("=", "release gate")
    for name, label in GATE_LABELS.items():
        if name in verdicts:
            terminalreporter.write_line(f"{verdicts[name]}  {label}")
