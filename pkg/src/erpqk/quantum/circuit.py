"""Circuit description, the second-order Pauli-Z feature map, and simulation."""
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ParameterError, ResourceError
from . import _statevector
from ._statevector import GATE_CX, GATE_H, GATE_P

MAX_QUBITS = 24
_NAMES = {"h": GATE_H, "p": GATE_P, "cx": GATE_CX}


@dataclass
class Circuit:
    """Ordered gate list on ``n_qubits`` qubits.

    Gates are tuples ``("h", q)``, ``("p", q, theta)`` or ``("cx", control, target)``.
    """

    n_qubits: int
    gates: list = field(default_factory=list)

    def __post_init__(self):
        for gate in self.gates:
            _check_gate(gate, self.n_qubits)

    def append(self, gate):
        _check_gate(gate, self.n_qubits)
        self.gates.append(gate)

    def relabel(self, perm):
        """Copy with qubit ``q`` renamed to ``perm[q]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n_qubits)):
            raise ParameterError("perm must be a permutation of the qubit indices")
        out = []
        for gate in self.gates:
            if gate[0] == "cx":
                out.append(("cx", perm[gate[1]], perm[gate[2]]))
            elif gate[0] == "p":
                out.append(("p", perm[gate[1]], gate[2]))
            else:
                out.append(("h", perm[gate[1]]))
        return Circuit(self.n_qubits, out)

    def encode(self):
        """Gate arrays ``(kinds, q0, q1, thetas)`` for the simulation kernels."""
        k = len(self.gates)
        kinds = np.empty(k, dtype=np.int64)
        q0 = np.zeros(k, dtype=np.int64)
        q1 = np.zeros(k, dtype=np.int64)
        thetas = np.zeros(k)
        for g, gate in enumerate(self.gates):
            kinds[g] = _NAMES[gate[0]]
            q0[g] = gate[1]
            if gate[0] == "cx":
                q1[g] = gate[2]
            elif gate[0] == "p":
                thetas[g] = gate[2]
        return kinds, q0, q1, thetas


def _check_gate(gate, n_qubits):
    name = gate[0]
    if name not in _NAMES:
        raise ParameterError(f"unknown gate {name!r}")
    qubits = gate[1:3] if name == "cx" else gate[1:2]
    if any(not 0 <= int(q) < n_qubits for q in qubits):
        raise ParameterError(f"gate {gate!r} addresses a qubit outside [0, {n_qubits})")
    if name == "cx" and gate[1] == gate[2]:
        raise ParameterError("CX control and target must differ")


def feature_map_layout(n_qubits, reps=2, entanglement="linear"):
    """Gate structure of the feature map, independent of the data.

    Returns ``(kinds, q0, q1, single, pairs)``: ``single[g] = i`` marks a
    phase gate with angle ``2 x_i``; ``pairs[g] = i`` marks the entangling
    phase with angle ``2 (pi - x_i)(pi - x_{i+1})``. Unused slots are -1.
    """
    if entanglement != "linear":
        raise ParameterError(f"only linear entanglement is supported, got {entanglement!r}")
    if n_qubits < 2:
        raise ParameterError("the second-order feature map needs at least 2 features")
    if reps < 1:
        raise ParameterError("reps must be >= 1")
    kinds, q0, q1, single, pairs = [], [], [], [], []

    def add(kind, a, b=0, s=-1, p=-1):
        kinds.append(kind)
        q0.append(a)
        q1.append(b)
        single.append(s)
        pairs.append(p)

    for _ in range(reps):
        for q in range(n_qubits):
            add(GATE_H, q)
        for q in range(n_qubits):
            add(GATE_P, q, s=q)
        for q in range(n_qubits - 1):
            add(GATE_CX, q, q + 1)
            add(GATE_P, q + 1, p=q)
            add(GATE_CX, q, q + 1)
    as_int = lambda v: np.asarray(v, dtype=np.int64)  # noqa: E731
    return as_int(kinds), as_int(q0), as_int(q1), as_int(single), as_int(pairs)


def feature_map_angles(X, single, pairs):
    """Phase angles per row of ``X`` for a layout from :func:`feature_map_layout`."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    thetas = np.zeros((len(X), len(single)))
    s = single >= 0
    thetas[:, s] = 2.0 * X[:, single[s]]
    p = pairs >= 0
    i = pairs[p]
    thetas[:, p] = 2.0 * (np.pi - X[:, i]) * (np.pi - X[:, i + 1])
    return thetas


def build_feature_map(x, reps=2, entanglement="linear"):
    """Circuit of the second-order Pauli-Z evolution map for one input vector."""
    x = np.asarray(x, dtype=float).ravel()
    kinds, q0, q1, single, pairs = feature_map_layout(len(x), reps, entanglement)
    thetas = feature_map_angles(x, single, pairs)[0]
    gates = []
    for g, kind in enumerate(kinds):
        if kind == GATE_H:
            gates.append(("h", int(q0[g])))
        elif kind == GATE_P:
            gates.append(("p", int(q0[g]), float(thetas[g])))
        else:
            gates.append(("cx", int(q0[g]), int(q1[g])))
    return Circuit(len(x), gates)


def _zero_states(m, n_qubits):
    if n_qubits > MAX_QUBITS:
        raise ResourceError(f"{n_qubits} qubits exceeds the simulation budget of {MAX_QUBITS}")
    states = np.zeros((m, 1 << n_qubits), dtype=np.complex128)
    states[:, 0] = 1.0
    return states


def simulate(circuit):
    """Amplitudes of ``U |0...0>``, shape ``(2**n_qubits,)``."""
    states = _zero_states(1, circuit.n_qubits)
    kinds, q0, q1, thetas = circuit.encode()
    _statevector.run_gates(states, kinds, q0, q1, thetas[None, :])
    return states[0]


def feature_states(X, reps=2, entanglement="linear"):
    """Encoded states of every row of ``X``, shape ``(m, 2**n_features)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    kinds, q0, q1, single, pairs = feature_map_layout(X.shape[1], reps, entanglement)
    states = _zero_states(len(X), X.shape[1])
    if len(X):
        _statevector.run_gates(states, kinds, q0, q1, feature_map_angles(X, single, pairs))
    return states
