"""Density-matrix circuit simulator with shot sampling and optional noise.

Mid-circuit measurements pinch the target and copy the outcome into a
classical register kept as an extra (decohered) subsystem, so recovery
channels conditioned on the register are exact.  Shots are sampled from
the exact final distribution; there is no per-shot re-execution.

Noise model: symmetric depolarizing with strength ``depolarizing_p`` on
every qubit a gate touches, plus a classical bit flip with probability
``readout_flip`` on every recorded or sampled measurement bit.  Device
calibration data is not modeled; noisy results are model-dependent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, dagger
from .recovery import CpMap, choi_from_kraus
from .states import (
    DensityOperator,
    KET_MINUS,
    KET_PLUS,
    bell_phi,
    ket_bra,
    maximally_mixed,
    pauli_pvm,
)

GATES = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "t": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
}


@dataclass(frozen=True)
class Gate:
    name: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()


@dataclass(frozen=True)
class Measure:
    target: int
    register: str


@dataclass(frozen=True)
class Recovery:
    map_id: str


@dataclass(frozen=True)
class Circuit:
    """Ordered gate/measure/recovery program on ``qubit_count`` qubits."""

    qubit_count: int
    ops: tuple

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        seen_registers = set()
        for op in self.ops:
            if isinstance(op, Gate):
                for q in op.targets + op.controls:
                    if not 0 <= q < self.qubit_count:
                        raise ValueError(f"gate touches qubit {q} out of range")
                if op.name not in GATES:
                    raise ValueError(f"unknown gate {op.name!r}")
            elif isinstance(op, Measure):
                if not 0 <= op.target < self.qubit_count:
                    raise ValueError(f"measure target {op.target} out of range")
                if op.register in seen_registers:
                    raise ValueError(f"register {op.register!r} written twice")
                seen_registers.add(op.register)
            elif not isinstance(op, Recovery):
                raise TypeError(f"unknown circuit op {op!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """Depolarizing strength per gate and classical readout flip probability."""

    depolarizing_p: float = 0.0
    readout_flip: float = 0.0

    def __post_init__(self):
        for name in ("depolarizing_p", "readout_flip"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


NOISELESS = NoiseSpec()


@dataclass(frozen=True)
class ShotTable:
    """Empirical outcome counts with binomial standard errors."""

    counts: dict
    shots: int

    def __post_init__(self):
        counts = {str(k): int(v) for k, v in self.counts.items()}
        object.__setattr__(self, "counts", counts)
        if sum(counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")

    def frequency(self, outcome: str) -> float:
        return self.counts.get(str(outcome), 0) / self.shots

    def stderr(self, outcome: str) -> float:
        p = self.frequency(outcome)
        return float(np.sqrt(p * (1.0 - p) / self.shots))

    def to_rows(self) -> list[dict]:
        return [
            {
                "outcome": k,
                "count": v,
                "frequency": self.frequency(k),
                "stderr": self.stderr(k),
            }
            for k, v in sorted(self.counts.items())
        ]

    def to_dict(self) -> dict:
        return {"shots": self.shots, "outcomes": self.to_rows()}


def permutation_matrix(dims, order) -> np.ndarray:
    """Matrix sending basis |i_0 .. i_{n-1}> to the subsystem order given."""
    dims = tuple(int(d) for d in dims)
    d = int(np.prod(dims))
    src = np.unravel_index(np.arange(d), dims)
    perm_dims = tuple(dims[o] for o in order)
    dst = np.ravel_multi_index([src[o] for o in order], perm_dims)
    p = np.zeros((d, d), dtype=complex)
    p[dst, np.arange(d)] = 1.0
    return p


def embed_operator(op: np.ndarray, positions, dims) -> np.ndarray:
    """Full-space operator acting as ``op`` on ``positions`` (in order)."""
    positions = list(positions)
    rest = [i for i in range(len(dims)) if i not in positions]
    p = permutation_matrix(dims, positions + rest)
    rest_dim = int(np.prod([dims[i] for i in rest], initial=1))
    return dagger(p) @ np.kron(as_matrix(op), np.eye(rest_dim, dtype=complex)) @ p


def apply_gate(rho: np.ndarray, dims, name: str, targets, controls=()) -> np.ndarray:
    """Apply a (possibly controlled) named gate; trace is preserved."""
    g = GATES[name]
    targets, controls = tuple(targets), tuple(controls)
    if controls:
        ctrl_dim = int(np.prod([dims[c] for c in controls]))
        ones = np.zeros((ctrl_dim, ctrl_dim), dtype=complex)
        ones[-1, -1] = 1.0  # all controls in |1>
        block = np.kron(np.eye(ctrl_dim) - ones, np.eye(g.shape[0])) + np.kron(ones, g)
        u = embed_operator(block, controls + targets, dims)
    else:
        u = embed_operator(g, targets, dims)
    return u @ rho @ dagger(u)


def apply_channel(rho: np.ndarray, dims, kraus, positions):
    """Apply a Kraus map to the named subsystem positions.

    The map's output subsystems take the place of its inputs (they move to
    the front of the subsystem list); returns ``(rho', out_dims_at_front,
    rest_positions)`` so the caller can rebuild labels.
    """
    dims = tuple(int(d) for d in dims)
    positions = list(positions)
    rest = [i for i in range(len(dims)) if i not in positions]
    p_in = permutation_matrix(dims, positions + rest)
    rest_dim = int(np.prod([dims[i] for i in rest], initial=1))
    eye = np.eye(rest_dim, dtype=complex)
    moved = p_in @ rho @ dagger(p_in)
    out = None
    for k in kraus:
        k_full = np.kron(as_matrix(k), eye)
        term = k_full @ moved @ dagger(k_full)
        out = term if out is None else out + term
    return out, rest


def depolarize(rho: np.ndarray, dims, qubit: int, p: float) -> np.ndarray:
    """Symmetric single-qubit depolarizing: p = 1 yields the maximally mixed
    marginal regardless of input."""
    if p == 0.0:
        return rho
    out = (1.0 - 3.0 * p / 4.0) * rho
    for axis in ("x", "y", "z"):
        out = out + (p / 4.0) * apply_gate(rho, dims, axis, (qubit,))
    return out


def _flip_matrix(q: float) -> np.ndarray:
    return np.array([[1.0 - q, q], [q, 1.0 - q]])


def flip_distribution(probs: np.ndarray, q: float) -> np.ndarray:
    """Independent classical bit flips on a 2**n outcome distribution."""
    if q == 0.0:
        return probs
    n_bits = int(np.log2(len(probs)))
    t = probs.reshape((2,) * n_bits)
    for axis in range(n_bits):
        t = np.tensordot(_flip_matrix(q), t, axes=([1], [axis]))
        t = np.moveaxis(t, 0, axis)
    return t.reshape(-1)


class _SimState:
    """Mutable density matrix with tracked subsystem labels."""

    def __init__(self, qubit_count: int):
        self.dims = [2] * qubit_count
        self.labels = [f"q{i}" for i in range(qubit_count)]
        psi = np.zeros(2 ** qubit_count, dtype=complex)
        psi[0] = 1.0
        self.rho = ket_bra(psi)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def gate(self, op: Gate, noise: NoiseSpec):
        targets = tuple(self.index(f"q{i}") for i in op.targets)
        controls = tuple(self.index(f"q{i}") for i in op.controls)
        self.rho = apply_gate(self.rho, self.dims, op.name, targets, controls)
        for pos in targets + controls:
            self.rho = depolarize(self.rho, self.dims, pos, noise.depolarizing_p)

    def measure(self, op: Measure, noise: NoiseSpec):
        pos = self.index(f"q{op.target}")
        d = self.dims[pos]
        new = np.zeros((self.rho.shape[0] * d,) * 2, dtype=complex)
        for m in range(d):
            proj = np.zeros((d, d), dtype=complex)
            proj[m, m] = 1.0
            full = embed_operator(proj, [pos], self.dims)
            reg = np.zeros((d, d), dtype=complex)
            reg[m, m] = 1.0
            new += np.kron(full @ self.rho @ full, reg)
        self.rho = new
        self.dims.append(d)
        self.labels.append(op.register)
        if noise.readout_flip > 0.0:
            self.rho = depolarize_register(
                self.rho, self.dims, len(self.dims) - 1, noise.readout_flip
            )

    def recover(self, cpmap: CpMap, in_labels, out_labels):
        positions = [self.index(s) for s in in_labels]
        if cpmap.kraus is not None:
            kraus = cpmap.kraus
        else:
            from .recovery import kraus_from_choi

            kraus = kraus_from_choi(cpmap.choi, cpmap.in_dim, cpmap.out_dim)
        rho, rest = apply_channel(self.rho, self.dims, kraus, positions)
        self.rho = rho
        rest_dims = [self.dims[i] for i in rest]
        rest_labels = [self.labels[i] for i in rest]
        self.dims = list(cpmap.out_dims) + rest_dims
        self.labels = list(out_labels) + rest_labels

    def density_operator(self) -> DensityOperator:
        return DensityOperator(self.rho, tuple(self.dims), tuple(self.labels))


def depolarize_register(rho: np.ndarray, dims, pos: int, q: float) -> np.ndarray:
    """Classical bit flip with probability q on a dimension-2 register."""
    if dims[pos] != 2:
        raise ValueError("readout flips are defined for binary registers only")
    flip = embed_operator(GATES["x"], [pos], dims)
    return (1.0 - q) * rho + q * (flip @ rho @ dagger(flip))


def run_circuit(
    circuit: Circuit,
    recovery_bindings: dict | None = None,
    noise: NoiseSpec = NOISELESS,
) -> DensityOperator:
    """Exact noisy evolution; returns the full final state with labels.

    ``recovery_bindings`` maps a ``Recovery.map_id`` to a tuple
    ``(cpmap, in_labels, out_labels)``.
    """
    state = _SimState(circuit.qubit_count)
    for op in circuit.ops:
        if isinstance(op, Gate):
            state.gate(op, noise)
        elif isinstance(op, Measure):
            state.measure(op, noise)
        elif isinstance(op, Recovery):
            if not recovery_bindings or op.map_id not in recovery_bindings:
                raise ValueError(f"no binding for recovery map {op.map_id!r}")
            cpmap, in_labels, out_labels = recovery_bindings[op.map_id]
            state.recover(cpmap, in_labels, out_labels)
    return state.density_operator()


def sample_distribution(probs, outcome_labels, shots: int, rng) -> ShotTable:
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    probs = probs / probs.sum()
    counts = rng.multinomial(shots, probs)
    return ShotTable(dict(zip(outcome_labels, (int(c) for c in counts))), shots)


def bloch_tomography(tables: dict) -> tuple[float, float, float]:
    """Bloch vector estimate from X/Y/Z-basis shot tables."""
    shots = {t.shots for t in tables.values()}
    if len(shots) != 1:
        raise ValueError("tomography tables have mismatched shot counts")
    coords = []
    for axis in ("X", "Y", "Z"):
        t = tables[axis]
        coords.append(t.frequency("0") - t.frequency("1"))
    return tuple(coords)


def _r1_register_map() -> CpMap:
    """Reversal of an X measurement from the register alone: 0 -> |+>, 1 -> |->."""
    kraus = (
        np.outer(KET_PLUS, [1.0, 0.0]),
        np.outer(KET_MINUS, [0.0, 1.0]),
    )
    return CpMap(
        choi=choi_from_kraus(kraus), in_dims=(2,), out_dims=(2,), kraus=kraus
    )


def _qubit_distribution(rho: DensityOperator, label: str, axis: str) -> np.ndarray:
    reduced = rho.reduce([label])
    pvm = pauli_pvm(axis)
    return np.array(
        [float(np.trace(p @ reduced.matrix).real) for p in pvm.projectors]
    )


def _pair_distribution(
    rho: DensityOperator, labels: tuple[str, str], axis: str
) -> np.ndarray:
    """Joint outcome distribution of (sigma_axis, sigma_axis*) on two qubits."""
    reduced = rho.reduce(list(labels))
    if reduced.labels != tuple(labels):
        raise ValueError("unexpected label order after reduction")
    pvm = pauli_pvm(axis)
    probs = []
    for pa in pvm.projectors:
        for pb in pvm.projectors:
            proj = np.kron(pa, pb.conj())
            probs.append(float(np.trace(proj @ reduced.matrix).real))
    return np.array(probs)


@dataclass(frozen=True)
class ExperimentResult:
    """Shot tables plus exact and tomography-estimated output states."""

    experiment: int
    shots: int
    seed: int
    noise: NoiseSpec
    tables: dict
    final_state: DensityOperator
    ideal_state: DensityOperator
    bloch_estimate: tuple[float, float, float] | None = None
    bloch_ideal: tuple[float, float, float] | None = None
    rng_algorithm: str = "numpy.random.PCG64"

    def estimated_state(self) -> np.ndarray | None:
        """Single-qubit state reconstructed from the Bloch estimate."""
        if self.bloch_estimate is None:
            return None
        x, y, z = self.bloch_estimate
        paulis = (GATES["x"], GATES["y"], GATES["z"])
        m = 0.5 * (np.eye(2, dtype=complex) + x * paulis[0] + y * paulis[1] + z * paulis[2])
        return m

    def to_dict(self) -> dict:
        out = {
            "experiment": self.experiment,
            "shots": self.shots,
            "seed": self.seed,
            "noise": {
                "depolarizing_p": self.noise.depolarizing_p,
                "readout_flip": self.noise.readout_flip,
            },
            "rng_algorithm": self.rng_algorithm,
            "tables": {k: t.to_dict() for k, t in self.tables.items()},
        }
        if self.bloch_estimate is not None:
            out["bloch_estimate"] = list(self.bloch_estimate)
            out["bloch_ideal"] = list(self.bloch_ideal)
        return out


def experiment_circuit(exp_id: int) -> Circuit:
    """The logical circuit of one of the six protocol variants.

    A Pauli-X measurement is a computational measurement conjugated by
    Hadamards; the register op itself always reads the computational basis.
    """
    x_measurement = [Gate("h", (0,)), Measure(0, "X"), Gate("h", (0,))]
    if exp_id in (1, 2, 3, 4):
        ops = [Gate("h", (0,))]
        if exp_id in (3, 4):
            ops.append(Gate("s", (0,)))  # |+> -> |+_Y>
        if exp_id in (2, 4):
            ops.append(Measure(0, "Z"))
        ops += x_measurement + [Recovery("r1")]
        return Circuit(1, tuple(ops))
    if exp_id in (5, 6):
        ops = [Gate("h", (0,)), Gate("x", (1,), controls=(0,))]
        if exp_id == 6:
            ops.append(Measure(0, "Z"))
        ops += x_measurement + [Recovery("r3")]
        return Circuit(2, tuple(ops))
    raise ValueError(f"experiment id must be 1..6, got {exp_id}")


def _ideal_state(exp_id: int) -> DensityOperator:
    if exp_id == 1:
        return DensityOperator(ket_bra(KET_PLUS), (2,), ("Ap",))
    if exp_id in (2, 3, 4):
        return DensityOperator(maximally_mixed(2), (2,), ("Ap",))
    if exp_id == 5:
        return DensityOperator(ket_bra(bell_phi()), (2, 2), ("Ap", "B"))
    correlated = 0.5 * (
        ket_bra(np.array([1, 0, 0, 0], dtype=complex))
        + ket_bra(np.array([0, 0, 0, 1], dtype=complex))
    )
    return DensityOperator(correlated, (2, 2), ("Ap", "B"))


def run_experiment(
    exp_id: int,
    shots: int = 8192,
    noise: NoiseSpec = NOISELESS,
    seed: int = 0,
) -> ExperimentResult:
    """Simulate one protocol variant and sample its measurement statistics.

    Experiments 1-4 finish with Bloch tomography of the recovered qubit;
    5-6 with the three two-qubit correlation measurements.  Deterministic
    under ``seed``.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    circuit = experiment_circuit(exp_id)
    from .gallery import recovery_map_r3

    bindings = {
        "r1": (_r1_register_map(), ("X",), ("Ap",)),
        "r3": (recovery_map_r3(), ("X", "q1"), ("Ap", "B")),
    }
    final = run_circuit(circuit, bindings, noise)
    rng = np.random.default_rng([int(seed), int(exp_id)])
    tables = {}
    if exp_id <= 4:
        for axis in ("X", "Y", "Z"):
            probs = _qubit_distribution(final, "Ap", axis)
            probs = flip_distribution(probs, noise.readout_flip)
            tables[axis] = sample_distribution(probs, ("0", "1"), shots, rng)
        bloch = bloch_tomography(tables)
        ideal = _ideal_state(exp_id)
        bloch_ideal = tuple(
            float(np.trace(GATES[a] @ ideal.matrix).real) for a in ("x", "y", "z")
        )
        return ExperimentResult(
            experiment=exp_id, shots=shots, seed=int(seed), noise=noise,
            tables=tables, final_state=final.reduce(["Ap"]), ideal_state=ideal,
            bloch_estimate=bloch, bloch_ideal=bloch_ideal,
        )
    for key, axis in (("XX", "X"), ("YY*", "Y"), ("ZZ", "Z")):
        probs = _pair_distribution(final, ("Ap", "B"), axis)
        probs = flip_distribution(probs, noise.readout_flip)
        tables[key] = sample_distribution(probs, ("00", "01", "10", "11"), shots, rng)
    return ExperimentResult(
        experiment=exp_id, shots=shots, seed=int(seed), noise=noise,
        tables=tables, final_state=final.reduce(["Ap", "B"]),
        ideal_state=_ideal_state(exp_id),
    )
