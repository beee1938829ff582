import numpy as np
import pytest

from erpqk import _accel

ACCEPTANCE_RESULTS = []


def record_criterion(name, passed, detail=""):
    ACCEPTANCE_RESULTS.append((name, bool(passed), detail))
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}" + (f" -- {detail}" if detail else ""))


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def random_spd(rng, n, scale=1.0):
    a = rng.normal(size=(n, n))
    return scale * (a @ a.T) + n * 0.1 * np.eye(n)


IMPLS = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])


@pytest.fixture(params=IMPLS)
def kernel_impl(request, monkeypatch):
    """Run a test once per kernel implementation by patching the dispatch names."""
    from erpqk import _smo
    from erpqk.quantum import _sampling, _statevector

    use_numba = request.param == "numba"
    monkeypatch.setattr(_statevector, "run_gates",
                        _statevector.run_gates_numba if use_numba else _statevector.run_gates_numpy)
    monkeypatch.setattr(_sampling, "count_zero",
                        _sampling.count_zero_numba if use_numba else _sampling.count_zero_numpy)
    monkeypatch.setattr(_smo, "smo", _smo.smo_numba if use_numba else _smo.smo_numpy)
    return request.param
