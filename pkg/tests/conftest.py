import json
import os
from pathlib import Path

import pytest
from hypothesis import settings

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"

settings.register_profile("default", max_examples=1000, deadline=None)
settings.register_profile("quick", max_examples=100, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


PROPERTY_REPORT_ENV = "BITEXT_LENS_PROPERTY_REPORT"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")
    config.addinivalue_line("markers", "run_last: run after every other collected test")
    config._property_results = {}


def pytest_collection_modifyitems(session, config, items):
    items.sort(key=lambda item: item.get_closest_marker("run_last") is not None)


def _is_property(item):
    return getattr(getattr(item, "obj", None), "is_hypothesis_test", False)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if _is_property(item) and (report.when == "call" or report.outcome != "passed"):
        results = item.config._property_results
        if results.get(item.nodeid) in (None, "passed"):
            results[item.nodeid] = report.outcome
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        item.config._criteria = getattr(item.config, "_criteria", [])
        reason = ""
        if report.outcome == "failed" and call.excinfo is not None:
            reason = str(call.excinfo.value).strip().splitlines()[0][:160]
        item.config._criteria.append((marker.args[0], report.outcome, reason))


def pytest_sessionfinish(session, exitstatus):
    path = os.environ.get(PROPERTY_REPORT_ENV)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(session.config._property_results, fh)


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_criteria", [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, reason in results:
        status = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        line = f"{status}  {name}"
        if reason:
            line += f"  -- {reason}"
        terminalreporter.write_line(line)


@pytest.fixture
def mini_corpus_path():
    return DATA / "mini_corpus.jsonl"


@pytest.fixture
def pos_fixture_path():
    return DATA / "mini_pos.tsv"
