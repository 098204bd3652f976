import pytest

_criteria: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    label = f"criterion {marker.args[0]}: {marker.args[1]}"
    detail = ""
    if rep.failed and call.excinfo is not None:
        detail = str(call.excinfo.value).splitlines()[0]
    _criteria[label] = ("PASS" if rep.passed else "FAIL", detail)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, (status, detail) in sorted(_criteria.items(), key=lambda kv: int(kv[0].split()[1].rstrip(":"))):
        line = f"{status}  {label}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
