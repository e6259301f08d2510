import numpy as np
import pytest

from equimeasure import families, harmonics


@pytest.fixture(scope="session")
def dictionary():
    return harmonics.harmonic_dictionary(2, 8)


@pytest.fixture(scope="session")
def low_dictionary(dictionary):
    return dictionary.subset(max_degree=4)


@pytest.fixture(scope="session")
def square():
    return families.power_map(2)


@pytest.fixture(scope="session")
def chebyshev():
    return families.chebyshev_map()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ------------------------------------------------------------ acceptance summary

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion checked by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    entry = _CRITERIA.setdefault(crit, {"passed": True, "details": []})
    entry["passed"] &= report.outcome == "passed"
    entry["details"].extend(v for k, v in report.user_properties if k == "detail")


def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        item.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_CRITERIA):
        entry = _CRITERIA[crit]
        status = "PASS" if entry["passed"] else "FAIL"
        detail = "; ".join(entry["details"])
        terminalreporter.write_line(f"criterion {crit}: {status}" + (f"  ({detail})" if detail else ""))
