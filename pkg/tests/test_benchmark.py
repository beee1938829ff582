import importlib.util
from pathlib import Path


def test_benchmark_smoke():
    path = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    rows = bench.main(["--quick", "--repeat", "1"])
    assert len(rows) == 3 and all(t > 0 for _, a, b in rows for t in (a, b))
