import math

import numpy as np
import pytest

from impact_series.core_model import PhaseSettings

# filled by test_acceptance.py, printed at the end of the session
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def random_phase_triples():
    rng = np.random.default_rng(20240611)
    return [PhaseSettings(*row) for row in rng.uniform(-3 * math.pi, 3 * math.pi, size=(1000, 3))]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
