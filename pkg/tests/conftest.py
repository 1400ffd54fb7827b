from pathlib import Path

import numpy as np
import pytest

from bumpwalk.gait import GaitParams
from bumpwalk.planner import plan_walk

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

_verdicts: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the acceptance summary."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else "")
        _verdicts.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _verdicts:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def configs_dir() -> Path:
    return CONFIGS


@pytest.fixture(scope="session")
def four_step_plan():
    return plan_walk(GaitParams(n_steps=4))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
