import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from convote import _kernels  # noqa: E402
from convote._kernels import _pure  # noqa: E402

BACKENDS = {"python": _pure}
try:
    from convote._kernels import _fast
except ImportError:  # extension not built
    _fast = None
else:
    BACKENDS["compiled"] = _fast


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run a test once per available kernel implementation."""
    mod = BACKENDS[request.param]
    monkeypatch.setattr(_kernels, "smo_solve", mod.smo_solve)
    monkeypatch.setattr(_kernels, "max_flow", mod.max_flow)
    return request.param


_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion of the build")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        detail = dict(item.user_properties).get("detail", "")
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        if rep.skipped and hasattr(rep, "longrepr") and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2]
        _ACCEPTANCE.append((marker.args[0], marker.args[1], status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number}: {status}  {title}" + (f" | {detail}" if detail else ""))
