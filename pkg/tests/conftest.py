import math

import numpy as np
import pytest

from sfm.convex_geometry import disc, ellipse, pball, sampled

_CRITERIA = {}


def asym_sampled():
    """A body with no central symmetry, given by 1024 support samples."""
    th = np.arange(1024) * (2 * math.pi / 1024)
    return sampled(th, 1.0 + 0.05 * np.cos(3 * th) + 0.03 * np.sin(2 * th))


def builtin_bodies():
    return {
        "disc": disc(),
        "ellipse(2,1)": ellipse(2, 1),
        "pball(1.5)": pball(1.5),
        "pball(3)": pball(3),
        "ellipse(2,1)+(0.3,-0.2)": ellipse(2, 1).translated((0.3, -0.2)),
        "pball(1.5)+(-0.2,0.1)": pball(1.5).translated((-0.2, 0.1)),
        "sampled": asym_sampled(),
    }


@pytest.fixture(scope="session")
def bodies():
    return builtin_bodies()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _CRITERIA[number] = (title, rep.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}")
