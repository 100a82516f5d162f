import pytest

from molcomm import ChannelParams, DpConfig


@pytest.fixture
def paper_channel():
    """Zero-BER experiment link: D = 0.43 cm^2/s, d = 1.5 cm."""
    return ChannelParams(0.43, 1.5)


@pytest.fixture
def dp_k4():
    return DpConfig(1000.0, 4.0, 20)


@pytest.fixture
def dp_k2():
    return DpConfig(1000.0, 2.0, 40)


_criteria = {}


def pytest_runtest_logreport(report):
    if "acceptance" not in report.keywords:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for item in terminalreporter.config._acceptance_items:
        outcome = _criteria.get(item.nodeid)
        if outcome is None:
            continue
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {item.function.__doc__.strip().splitlines()[0]}")


def pytest_collection_modifyitems(config, items):
    config._acceptance_items = [i for i in items if "acceptance" in i.keywords]
