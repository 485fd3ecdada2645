from functools import lru_cache

import pytest

from sl2ulrich.exactalg import RankPolicy
from sl2ulrich.instanton import e_table, ee_table, s2_from_ee


def pytest_addoption(parser):
    parser.addoption("--run-long", action="store_true", default=False,
                     help="run the m = 3 verifications")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-long"):
        return
    skip = pytest.mark.skip(reason="needs --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


SERRE_RANGE = range(-8, 5)
E_RANGE = range(-8, 7)


@lru_cache(maxsize=None)
def shared_ee(m):
    return ee_table(m, SERRE_RANGE, RankPolicy())


@lru_cache(maxsize=None)
def shared_e(m):
    return e_table(m, E_RANGE, RankPolicy())


@pytest.fixture(scope="session")
def ee_tables():
    return {m: shared_ee(m) for m in (1, 2)}


@pytest.fixture(scope="session")
def f_tables(ee_tables):
    return {m: s2_from_ee(t) for m, t in ee_tables.items()}


@pytest.fixture(scope="session")
def e_tables():
    return {m: shared_e(m) for m in (1, 2)}


_criteria: dict[int, list[str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = report.keywords.get("criterion")
    if not marker:
        return
    num = int(report.nodeid.split("test_criterion_")[1].split("_")[0])
    _criteria.setdefault(num, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        outcomes = _criteria[num]
        if "failed" in outcomes:
            verdict = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        detail = ", ".join(f"{outcomes.count(o)} {o}" for o in ("passed", "failed", "skipped")
                           if outcomes.count(o))
        terminalreporter.write_line(f"criterion {num:2d}: {verdict} ({detail})")
