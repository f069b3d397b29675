import pytest

from pitchcast import ingest
from pitchcast.fixtures import load_public_fixture

from support import F1_CSV


@pytest.fixture()
def f1_csv(tmp_path):
    path = tmp_path / "f1.csv"
    path.write_text(F1_CSV)
    return path


@pytest.fixture()
def f1_store(f1_csv):
    return ingest.parse_csv(f1_csv).store


@pytest.fixture(scope="session")
def syn_store():
    return load_public_fixture()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    reports = []
    for status in ("passed", "failed", "error"):
        reports.extend(terminalreporter.stats.get(status, []))
    lines = []
    for rep in reports:
        if getattr(rep, "when", "call") != "call":
            continue
        if "test_acceptance" not in str(getattr(rep, "nodeid", "")):
            continue
        name = rep.nodeid.split("::")[-1]
        lines.append((name, "PASS" if rep.passed else "FAIL"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}: {name}")
