from pathlib import Path

import numpy as np
import pytest

from glu.io import load_image

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def astronaut():
    return load_image(DATA / "astronaut.png")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def gray(v, w=1, h=1):
    return np.full((h, w, 3), v, dtype=np.float32)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one pass/fail line for an acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
