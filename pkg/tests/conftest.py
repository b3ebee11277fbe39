import pytest

from pddl_induction.bench.tasks import hanoi_demo, stack_demo, unstack_demo
from pddl_induction.bridge import InductionConfig, OracleBackend, induce_domain

# acceptance lines collected during the run, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def stack_traj():
    return stack_demo()


@pytest.fixture(scope="session")
def stack_result(stack_traj):
    return induce_domain([stack_traj], OracleBackend(), InductionConfig(k=3))


@pytest.fixture(scope="session")
def composed_result(stack_traj):
    return induce_domain([stack_traj, unstack_demo()], OracleBackend(), InductionConfig(k=3))


@pytest.fixture(scope="session")
def hanoi_result():
    return induce_domain([hanoi_demo()], OracleBackend(), InductionConfig(k=3))
