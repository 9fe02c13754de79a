import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion."""
    record = {"name": request.node.name, "detail": ""}
    yield record
    ACCEPTANCE_LINES.append(record)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and "criterion" in item.fixturenames:
        item.funcargs["criterion"]["passed"] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for rec in ACCEPTANCE_LINES:
        status = "PASS" if rec.get("passed") else "FAIL"
        terminalreporter.write_line(f"{status}  {rec['name']}  {rec['detail']}")
