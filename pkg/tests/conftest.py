import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from subwordfst.grammar import build_sg_wfst, parse_grammar  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "subwordfst" / "data"
FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def toy_spec():
    return parse_grammar((DATA / "tamil_toy.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def toy_sg(toy_spec):
    return build_sg_wfst(toy_spec)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
