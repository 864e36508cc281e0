import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from elastica_coarea.curve_core import ElasticaParams, circle
from elastica_coarea.grid_function import GridFunction
from elastica_coarea.smoothing import CutoffProfile, build_smooth_indicator

settings.register_profile("repo", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def params():
    return ElasticaParams(p=2.0, alpha=1.0, beta=1.0)


@pytest.fixture(scope="session")
def template512():
    return GridFunction.sample(lambda x, y: np.zeros_like(x), (-2, -2, 2, 2), 512)


@pytest.fixture(scope="session")
def template256():
    return GridFunction.sample(lambda x, y: np.zeros_like(x), (-2, -2, 2, 2), 256)


@pytest.fixture(scope="session")
def smooth_disk(template512):
    """Smoothed indicator of the unit disk, collar 0.2, on [-2, 2]^2 at 512^2."""
    return build_smooth_indicator(circle(1.0, 1024), 1.0, CutoffProfile(0.2), template512)


@pytest.fixture(scope="session")
def smooth_disk_small(template256):
    return build_smooth_indicator(circle(1.0, 512), 1.0, CutoffProfile(0.3), template256)


# -- acceptance report ---------------------------------------------------------------

_ACCEPTANCE = pytest.StashKey[list]()


class AcceptanceLog:
    def __init__(self, rows):
        self.rows = rows

    def record(self, number: int, title: str, passed: bool, detail: str, seconds: float, limit: float):
        within = seconds < limit
        ok = passed and within
        self.rows.append((number, f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} "
                                  f"[{seconds:.2f} s, limit {limit:g} s{'' if within else ' EXCEEDED'}]"))
        print(self.rows[-1][1])
        return ok


@pytest.fixture(scope="session")
def acceptance(request):
    return AcceptanceLog(request.config.stash.setdefault(_ACCEPTANCE, []))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = config.stash.get(_ACCEPTANCE, [])
    if rows:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(rows):
            terminalreporter.write_line(line)
