import random

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("lamos", deadline=None, max_examples=150, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lamos")


@pytest.fixture
def rng():
    return random.Random(20261019)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
