import importlib

import pytest

from a2gchan import _kernels_py

try:
    _kernels_c = importlib.import_module("a2gchan._kernels_c")
except ImportError:  # extension not built
    _kernels_c = None

KERNEL_BACKENDS = [pytest.param(_kernels_py, id="python")]
if _kernels_c is not None:
    KERNEL_BACKENDS.append(pytest.param(_kernels_c, id="cython"))


@pytest.fixture(params=KERNEL_BACKENDS)
def kern(request):
    return request.param


# criterion id -> list of (ok, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[key]
        ok = all(c for c, _ in checks)
        detail = "; ".join(d for _, d in checks)
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
