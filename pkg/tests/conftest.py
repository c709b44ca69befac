from __future__ import annotations

import pytest

from duet.tasks import CompositeTask
from duet.telecom import build_environment, generate_universe

# One line per acceptance criterion, echoed after the run (outside capture).
ACCEPTANCE_REPORT: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def universe() -> list[CompositeTask]:
    return generate_universe()


@pytest.fixture(scope="session")
def tasks_by_id(universe) -> dict[str, CompositeTask]:
    return {t.id: t for t in universe}


@pytest.fixture(scope="session")
def appendix_task(tasks_by_id) -> CompositeTask:
    return tasks_by_id["[service_issue]airplane_mode_on|unseat_sim_card"]


@pytest.fixture
def env():
    return build_environment()
