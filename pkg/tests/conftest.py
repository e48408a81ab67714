import pytest

from seqtest import make_classic, make_cross_entropy, make_l1, make_l2

_CRITERIA = {}


@pytest.fixture
def ce():
    return make_cross_entropy(1.0, 1.0)


@pytest.fixture
def ce_asym():
    return make_cross_entropy(2.0, 1.0)


@pytest.fixture
def l1():
    return make_l1()


@pytest.fixture
def l2():
    return make_l2()


@pytest.fixture
def classic():
    return make_classic(1.0, 1.0)


@pytest.fixture
def criterion(request):
    """Record one acceptance line; printed in the terminal summary."""

    def record(number, title, passed, detail=""):
        _CRITERIA[number] = (title, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}  {detail}")
