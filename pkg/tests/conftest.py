import os

import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(key, text): acceptance criterion reported in the summary")


@pytest.fixture(scope="session", autouse=True)
def _cone_cache(tmp_path_factory):
    # keep the user's cache untouched; each session builds its own
    os.environ.pop("NJ_CONES_CACHE", None)
    yield


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key, text = marker.args
    if call.when == "setup" and call.excinfo is not None:
        _results[key] = (text, "ERROR")
    elif call.when == "call":
        _results[key] = (text, "FAIL" if call.excinfo is not None else "PASS")


def _sort_key(key):
    num = "".join(ch for ch in key if ch.isdigit())
    return (int(num), key)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_results, key=_sort_key):
        text, status = _results[key]
        tr.write_line(f"[{status}] criterion {key}: {text}")
    passed = sum(s == "PASS" for _, s in _results.values())
    tr.write_line(f"{passed}/{len(_results)} acceptance criteria passed")
