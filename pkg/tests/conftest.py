import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


class Recorder:
    def __call__(self, criterion: str, ok: bool, detail: str) -> bool:
        _ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
        return bool(ok)


@pytest.fixture(scope="session")
def record():
    return Recorder()


def _order(name):
    head = name.split()[0]
    return (0, int(head)) if head.isdigit() else (1, name)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=_order):
        parts = _ACCEPTANCE[name]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{d}{'' if ok else ' [not met]'}" for ok, d in parts)
        terminalreporter.write_line(f"criterion {name}: {status} - {detail}")
