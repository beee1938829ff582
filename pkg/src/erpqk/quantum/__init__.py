"""Simulated quantum fidelity kernel."""
from .circuit import (
    MAX_QUBITS,
    Circuit,
    build_feature_map,
    feature_map_layout,
    feature_states,
    simulate,
)
from .kernel import (
    EXACT,
    SHOTS,
    KernelMatrix,
    enforce_spd,
    entry_seed,
    gram,
    kernel_exact,
    kernel_shots,
    read_gram_csv,
    write_gram_csv,
)

__all__ = [
    "MAX_QUBITS", "Circuit", "build_feature_map", "feature_map_layout", "feature_states",
    "simulate", "EXACT", "SHOTS", "KernelMatrix", "enforce_spd", "entry_seed", "gram",
    "kernel_exact", "kernel_shots", "read_gram_csv", "write_gram_csv",
]
