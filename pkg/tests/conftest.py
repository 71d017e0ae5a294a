import numpy as np
import pytest
from hypothesis import strategies as st

from heisenlab.forms import make_real_heisenberg
from heisenlab.group import GroupElement, Model

small_ints = st.integers(min_value=-6, max_value=6).map(float)


@st.composite
def models(draw, max_n=5, max_d=3):
    """Integer-valued skew forms, so group arithmetic in floats is exact."""
    n = draw(st.integers(2, max_n))
    d = draw(st.integers(1, max_d))
    om = np.zeros((d, n, n))
    for l in range(d):
        for i in range(n):
            for j in range(i + 1, n):
                v = draw(st.integers(-3, 3))
                om[l, i, j], om[l, j, i] = v, -v
    return Model(n, d, om)


def vectors(length):
    return st.lists(small_ints, min_size=length, max_size=length).map(np.array)


@st.composite
def model_and_elements(draw, count=3):
    m = draw(models())
    elems = [GroupElement(draw(vectors(m.n)), draw(vectors(m.d))) for _ in range(count)]
    return m, elems


@pytest.fixture
def heis():
    return make_real_heisenberg(1)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one summary line per acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE_LINES.append(f"criterion {number:>2} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
