import pytest

from zoo import standard_measures


@pytest.fixture(params=list(standard_measures()))
def named_measure(request):
    return request.param, standard_measures()[request.param]


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.report_lines():
        terminalreporter.write_line(line)
