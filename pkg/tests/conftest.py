import re

import pytest

_DETAILS = {}
_OUTCOMES = {}
_NAME = re.compile(r"test_criterion_(\d+)_(\w+)")


class Recorder:
    """Collects (label, value, ok) checks for one acceptance criterion."""

    def __init__(self, number):
        self.number = number
        self.items = []

    def check(self, label, value, ok):
        self.items.append((label, value, bool(ok)))
        _DETAILS[self.number] = self.items
        return ok

    def verify(self):
        bad = [f"{label}={value:.3g}" if isinstance(value, float) else f"{label}={value}"
               for label, value, ok in self.items if not ok]
        assert not bad, "failed checks: " + ", ".join(bad)


@pytest.fixture
def acceptance(request):
    m = _NAME.match(request.node.name)
    return Recorder(int(m.group(1)) if m else 0)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = _NAME.match(item.name)
    if m and (rep.when == "call" or rep.failed):
        n = int(m.group(1))
        if rep.failed or n not in _OUTCOMES:
            _OUTCOMES[n] = ("PASS" if rep.passed else "FAIL", m.group(2).replace("_", " "))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for n in sorted(_OUTCOMES):
        status, title = _OUTCOMES[n]
        worst = [f"{label} {value:.2e}" for label, value, _ in _DETAILS.get(n, [])
                 if isinstance(value, float)][:3]
        tail = f"  [{'; '.join(worst)}]" if worst else ""
        tr.write_line(f"criterion {n:2d}: {status}  {title}{tail}")
