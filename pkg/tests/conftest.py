import pytest

ACCEPTANCE = {}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="run the slow full-scale suite")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow; pass --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
            if item.name.startswith("test_criterion_"):
                ACCEPTANCE[int(item.name.split("_")[2])] = ("SKIP", "slow suite; pass --runslow")


@pytest.fixture
def verdict():
    """Record a one-line acceptance verdict, then assert (or skip) it."""

    def record(number, ok, detail, skip=False):
        if skip:
            ACCEPTANCE[number] = ("SKIP", detail)
            pytest.skip(detail)
        ACCEPTANCE[number] = ("PASS" if ok else "FAIL", detail)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{status} criterion {number}: {detail}")
