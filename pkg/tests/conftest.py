import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_outcomes: dict[int, list[bool]] = {}
_titles: dict[int, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = _CRITERION.match(item.name)
        if m and item.module.__doc__:
            n = int(m.group(1))
            for line in item.module.__doc__.splitlines():
                if line.strip().startswith(f"{n}."):
                    _titles[n] = line.strip()[len(f"{n}."):].strip()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = _CRITERION.match(item.name)
    if not m:
        return
    n = int(m.group(1))
    # a test counts once: failed in any phase, or passed in the call phase
    if rep.failed or (rep.when == "call" and rep.passed):
        _outcomes.setdefault(n, []).append(rep.passed)
    elif rep.skipped:
        _outcomes.setdefault(n, []).append(False)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        status = "PASS" if all(_outcomes[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {_titles.get(n, '')}")
