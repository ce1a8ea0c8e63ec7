"""Shared fixtures: code layouts, noise models, seeded generators."""

import numpy as np
import pytest

from softqec._rng import rng_for
from softqec.surface import CodeLayout, NoiseModel, build_planar_code


@pytest.fixture(scope="session")
def layout3() -> CodeLayout:
    return build_planar_code(3)


@pytest.fixture(scope="session")
def layout5() -> CodeLayout:
    return build_planar_code(5)


@pytest.fixture(scope="session")
def depol01() -> NoiseModel:
    return NoiseModel.depolarizing(0.01)


@pytest.fixture(scope="session")
def depol05() -> NoiseModel:
    return NoiseModel.depolarizing(0.05)


@pytest.fixture
def rng() -> np.random.Generator:
    return rng_for(20260822)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(criterion: int, passed: bool, detail: str):
        line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def all_syndromes(layout: CodeLayout):
    """Every syndrome of a layout, ordered by (x_defect, z_defect) integers."""
    from softqec.surface import Syndrome

    mx, mz = layout.num_x_checks, layout.num_z_checks
    for sx in range(1 << mx):
        x_def = np.array([(sx >> i) & 1 for i in range(mx)], dtype=np.uint8)
        for sz in range(1 << mz):
            z_def = np.array([(sz >> i) & 1 for i in range(mz)], dtype=np.uint8)
            yield Syndrome(x_defects=x_def, z_defects=z_def)
