import warnings

import pytest

from bsgl.basis import OutOfDomainWarning

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Store a one-line verdict for the end-of-run acceptance summary."""

    def _record(label: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _strict_domain_warnings():
    # a stray clamp in a test usually means a mismatched bounding box
    with warnings.catch_warnings():
        warnings.simplefilter("error", OutOfDomainWarning)
        yield
