import pytest

RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, text): acceptance criterion number and summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    k, text = mark.args
    failed = rep.failed or (rep.when == "setup" and rep.skipped)
    prev = RESULTS.get(k, (text, True, ""))
    detail = getattr(item, "criterion_detail", prev[2])
    RESULTS[k] = (text, prev[1] and not failed, detail)


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        text, ok, detail = RESULTS[k]
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {text}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
