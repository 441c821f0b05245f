from __future__ import annotations

import numpy as np
import hypothesis.strategies as st
from hypothesis import settings
from hypothesis.extra import numpy as hnp

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


@st.composite
def image_arrays(
    draw,
    min_side: int = 3,
    max_side: int = 10,
    lo: float = -2.0,
    hi: float = 2.0,
    channels: int | None = None,
):
    """(channels, height, width) float64 arrays with bounded finite entries."""
    c = draw(st.sampled_from([1, 3])) if channels is None else channels
    h = draw(st.integers(min_side, max_side))
    w = draw(st.integers(min_side, max_side))
    elements = st.floats(lo, hi, allow_nan=False, allow_infinity=False)
    return draw(hnp.arrays(np.float64, (c, h, w), elements=elements))


# one summary line per acceptance criterion, printed after the run
_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    if _acceptance_outcomes.get(name) != "failed":
        _acceptance_outcomes[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_outcomes.items():
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
