"""Shared fixtures and the acceptance-criteria reporting hook."""

from __future__ import annotations

from pathlib import Path

import pytest

from mlbalance import build_neighbor_cache, build_vdm_table, read_dataset

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

_acceptance_outcomes: dict[tuple[int, str], str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(number, title): acceptance criterion; outcome is printed "
        "as one line per criterion after the run",
    )


@pytest.fixture(scope="session")
def emotions():
    return read_dataset(
        DATA_DIR / "emotions.arff", xml_path=DATA_DIR / "emotions.xml"
    )


@pytest.fixture(scope="session")
def emotions_vdm(emotions):
    return build_vdm_table(emotions)


@pytest.fixture(scope="session")
def emotions_cache(emotions, emotions_vdm):
    return build_neighbor_cache(emotions, emotions_vdm)


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    marker_info = getattr(report, "_acceptance", None)
    if marker_info:
        number, title = marker_info
        previous = _acceptance_outcomes.get((number, title))
        outcome = "PASS" if report.passed else "FAIL"
        if previous != "FAIL":
            _acceptance_outcomes[(number, title)] = outcome


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker:
        report._acceptance = (marker.args[0], marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), outcome in sorted(_acceptance_outcomes.items()):
        terminalreporter.write_line(f"criterion {number} ({title}): {outcome}")
