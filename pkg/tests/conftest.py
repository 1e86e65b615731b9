import sys


def pytest_addoption(parser):
    parser.addoption("--long", action="store_true", default=False, help="run long acceptance cells")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(mod.RESULTS):
        checks = mod.RESULTS[crit]
        bad = [c for c in checks if not c[1]]
        status = "PASS" if not bad else "FAIL"
        tr.write_line(f"criterion {crit:>2}: {status} ({len(checks) - len(bad)}/{len(checks)} checks) {mod.TITLES[crit]}")
        for name, _, detail in bad:
            tr.write_line(f"    failed: {name}: {detail}")
