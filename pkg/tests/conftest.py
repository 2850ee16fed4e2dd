import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, name): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = dict(item.user_properties).get("detail", "")
        _CRITERIA[mark.args[0]] = (mark.args[1], rep.passed, detail, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        name, ok, detail, dt = _CRITERIA[n]
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {name}  [{dt:.1f} s]"
        terminalreporter.write_line(line + (f"  {detail}" if detail else ""))
