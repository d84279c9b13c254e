import warnings

import pytest

from twospin.errors import MultiphotonRegimeWarning


@pytest.fixture(autouse=True)
def _quiet_regime_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MultiphotonRegimeWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
