import textwrap

import pytest

from asmkit import parse


@pytest.fixture
def unit():
    """Parse a dedented ``.asm`` snippet."""
    return lambda text: parse(textwrap.dedent(text).strip() + "\n")


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts at the end of the run."""
    import sys
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
