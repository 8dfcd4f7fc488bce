import numpy as np
import pytest

from tabshapley.table import LabelMatrix

# Evidence sets listed for the 6-record, 5-attribute worked example (0-based).
EXAMPLE1_SETS = {
    0: {0, 1, 3, 4},
    1: {1, 2, 5},
    2: {0, 2, 3, 4, 5},
    3: {0, 1, 4, 5},
    4: {0, 2, 4},
}


def example1_labels() -> LabelMatrix:
    pa = np.ones((6, 5), dtype=bool)
    for j, records in EXAMPLE1_SETS.items():
        for i in records:
            pa[i, j] = False
    return LabelMatrix(pa)


@pytest.fixture
def ex1():
    return example1_labels()


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p

    return _write


# verdict lines from the acceptance suite, echoed in the terminal summary
CRITERIA_LINES = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # lets fixtures see whether the test body failed
    outcome = yield
    if call.when == "call":
        item.rep_call = outcome.get_result()


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
