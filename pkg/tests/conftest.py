import pytest

from ftmcfe.pairing_core import init_pairing
from helpers import make_system


@pytest.fixture(scope="session")
def bls():
    return init_pairing("bls12-381")


@pytest.fixture(scope="session")
def toy():
    return init_pairing("toy")


@pytest.fixture(params=["toy", "bls12-381"])
def ctx(request):
    return init_pairing(request.param)


@pytest.fixture(scope="session")
def bls_n3(bls):
    return make_system(bls, 3, seed=11)


# --- acceptance reporting ----------------------------------------------------

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        _CRITERIA[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}")
