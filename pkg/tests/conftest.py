import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    failed = rep.failed
    if rep.when == "call" or failed:
        prev = _results.get(number)
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        _results[number] = (title, failed or (prev is not None and prev[1]), detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        title, failed, detail = _results[number]
        line = f"criterion {number:>2}: {'FAIL' if failed else 'PASS'}  {title}"
        tr.write_line(line + (f"  [{detail}]" if detail else ""))
    passed = sum(1 for _, f, _ in _results.values() if not f)
    tr.write_line(f"{passed}/{len(_results)} criteria passed")
