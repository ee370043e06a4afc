import pytest

import _golden

SMALL = ("UPO", "UVIC")


@pytest.fixture(scope="session")
def golden(tmp_path_factory):
    """Full 28-institution corpus on disk."""
    return _golden.build(tmp_path_factory.mktemp("golden"))


@pytest.fixture(scope="session")
def small_golden(tmp_path_factory):
    return _golden.build(tmp_path_factory.mktemp("small"), SMALL)


# --- acceptance summary: one PASS/FAIL line per criterion -------------------------------

_criteria: dict[str, tuple[int, str]] = {}
_verdicts: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test decides")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _criteria[item.nodeid] = mark.args


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    if report.when == "call" or report.outcome != "passed":
        number, title = _criteria[report.nodeid]
        detail = dict(report.user_properties).get("detail", "")
        _verdicts.setdefault(number, []).append((title, report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_verdicts):
        results = _verdicts[number]
        ok = all(outcome == "passed" for _, outcome, _ in results)
        title = results[0][0]
        details = "; ".join(d for _, _, d in results if d)
        line = f"{'PASS' if ok else 'FAIL'}  {number}. {title}"
        terminalreporter.write_line(f"{line}  ({details})" if details else line)
