"""Time the numba and numpy implementations of the hot kernels side by side.

    python benchmarks/bench_kernels.py [--quick]

Each kernel is run once untimed (numba compilation), then ``--repeat`` times;
the best wall time is reported together with the speed-up.
"""
import argparse
import time

import numpy as np

from erpqk import _accel, _smo
from erpqk.quantum import _sampling, _statevector
from erpqk.quantum.circuit import feature_map_angles, feature_map_layout
from erpqk.svm import rbf_gram


def best_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def gates_case(n_states, n_qubits, rng):
    kinds, q0, q1, single, pairs = feature_map_layout(n_qubits, 2)
    thetas = feature_map_angles(rng.uniform(0, np.pi, (n_states, n_qubits)), single, pairs)

    def run(impl):
        states = np.zeros((n_states, 2 ** n_qubits), dtype=complex)
        states[:, 0] = 1.0
        impl(states, kinds, q0, q1, thetas)

    return run


def sampling_case(n_entries, shots, rng):
    probs = rng.uniform(0, 1, n_entries)
    seeds = _sampling.entry_seed(0, np.arange(n_entries), np.arange(n_entries) + 1)
    return lambda impl: impl(probs, seeds, shots)


def smo_case(m, rng):
    X = rng.normal(size=(m, 10))
    y = np.where(X[:, 0] + 0.5 * rng.normal(size=m) > 0, 1.0, -1.0)
    Q = np.ascontiguousarray(np.outer(y, y) * rbf_gram(X, X, 0.1))
    return lambda impl: impl(Q, y, 1.0, 1e-3, 500)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="small sizes (smoke run)")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    if args.quick:
        cases = [("statevector 16 x 6 qubits", gates_case(16, 6, rng), _statevector),
                 ("sampling 500 entries x 256 shots", sampling_case(500, 256, rng), _sampling),
                 ("smo m=60", smo_case(60, rng), _smo)]
    else:
        cases = [("statevector 614 x 10 qubits", gates_case(614, 10, rng), _statevector),
                 ("sampling 188k entries x 1024 shots", sampling_case(188_191, 1024, rng), _sampling),
                 ("smo m=614, 500 updates", smo_case(614, rng), _smo)]
    names = {_statevector: ("run_gates_numba", "run_gates_numpy"),
             _sampling: ("count_zero_numba", "count_zero_numpy"),
             _smo: ("smo_numba", "smo_numpy")}
    print(f"numba available: {_accel.HAVE_NUMBA}")
    print(f"{'kernel':38s} {'numba s':>10s} {'numpy s':>10s} {'speed-up':>9s}")
    rows = []
    for label, case, module in cases:
        fast, slow = (getattr(module, n) for n in names[module])
        t_fast = best_time(lambda: case(fast), args.repeat)
        t_slow = best_time(lambda: case(slow), args.repeat)
        rows.append((label, t_fast, t_slow))
        print(f"{label:38s} {t_fast:10.4f} {t_slow:10.4f} {t_slow / t_fast:8.1f}x")
    return rows


if __name__ == "__main__":
    main()
