"""States, projective measurements, and the operations connecting them.

A :class:`DensityOperator` is a dense matrix plus an ordered list of
subsystem dimensions and labels.  Classical measurement outcomes live in
:class:`CqState` blocks, convertible to block-diagonal density operators
so the entropy code treats classical registers like any other subsystem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    as_matrix,
    dagger,
    herm_eig,
    is_hermitian,
    op_norm,
    partial_trace,
    tensor,
)

STATE_TOL = 1e-10
PVM_TOL = 1e-10


class InvalidStateError(ValueError):
    """An operator violates a state/PVM invariant (used for exit code 3)."""


# Computational-basis kets and the standard qubit operators.
KET_0 = np.array([1.0, 0.0], dtype=complex)
KET_1 = np.array([0.0, 1.0], dtype=complex)
KET_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
KET_MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)
KET_PLUS_Y = np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0)
KET_MINUS_Y = np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2.0)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def ket_bra(v: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    w = v if w is None else np.asarray(w, dtype=complex).reshape(-1)
    return np.outer(v, np.conjugate(w))


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def bell_phi() -> np.ndarray:
    """The two-qubit state (|00> + |11>)/sqrt(2) as a vector."""
    return np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class DensityOperator:
    """Positive unit-trace matrix on a labeled tensor product of subsystems."""

    matrix: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.dims)
        labels = tuple(str(s) for s in self.labels)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)
        if len(dims) != len(labels):
            raise InvalidStateError("dims and labels length mismatch")
        if len(set(labels)) != len(labels):
            raise InvalidStateError(f"duplicate subsystem labels {labels}")
        if m.shape[0] != m.shape[1] or m.shape[0] != int(np.prod(dims)):
            raise InvalidStateError(
                f"matrix shape {m.shape} does not match dims {dims}"
            )
        if not is_hermitian(m, STATE_TOL):
            raise InvalidStateError("density operator is not Hermitian")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > 1e-8:
            raise InvalidStateError(f"density operator has trace {tr}")
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < -1e-8:
            raise InvalidStateError(f"density operator has eigenvalue {lo}")

    @classmethod
    def from_vector(cls, psi, dims, labels) -> "DensityOperator":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(ket_bra(psi), tuple(dims), tuple(labels))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no subsystem labeled {label!r} in {self.labels}") from None

    def reduce(self, keep_labels) -> "DensityOperator":
        """Partial trace keeping the named subsystems (original order)."""
        if isinstance(keep_labels, str):
            keep_labels = [keep_labels]
        keep = sorted(self.label_index(s) for s in keep_labels)
        reduced = partial_trace(self.matrix, self.dims, keep)
        return DensityOperator(
            reduced,
            tuple(self.dims[i] for i in keep),
            tuple(self.labels[i] for i in keep),
        )

    def permute(self, label_order) -> "DensityOperator":
        """Reorder subsystems to the given label sequence."""
        order = [self.label_index(s) for s in label_order]
        if sorted(order) != list(range(len(self.dims))):
            raise InvalidStateError(f"{label_order!r} is not a permutation of {self.labels}")
        n = len(self.dims)
        t = self.matrix.reshape(self.dims + self.dims)
        t = t.transpose(order + [n + i for i in order])
        return DensityOperator(
            t.reshape(self.dim, self.dim),
            tuple(self.dims[i] for i in order),
            tuple(self.labels[i] for i in order),
        )

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def is_pure(self, tol: float = 1e-8) -> bool:
        return self.purity() >= 1.0 - tol


@dataclass(frozen=True)
class Pvm:
    """Orthogonal projectors summing to identity on one subsystem."""

    projectors: tuple[np.ndarray, ...]
    outcome_labels: tuple[int, ...] = ()

    def __post_init__(self):
        projs = tuple(as_matrix(p) for p in self.projectors)
        object.__setattr__(self, "projectors", projs)
        if not projs:
            raise InvalidStateError("PVM needs at least one projector")
        d = projs[0].shape[0]
        labels = self.outcome_labels or tuple(range(len(projs)))
        object.__setattr__(self, "outcome_labels", tuple(int(x) for x in labels))
        if len(self.outcome_labels) != len(projs):
            raise InvalidStateError("outcome label count mismatch")
        total = np.zeros((d, d), dtype=complex)
        for i, p in enumerate(projs):
            if p.shape != (d, d):
                raise InvalidStateError("PVM projectors differ in dimension")
            if not is_hermitian(p, PVM_TOL):
                raise InvalidStateError(f"projector {i} is not Hermitian")
            if np.abs(p @ p - p).max() > PVM_TOL:
                raise InvalidStateError(f"projector {i} is not idempotent")
            total += p
        if np.abs(total - np.eye(d)).max() > PVM_TOL:
            raise InvalidStateError("PVM projectors do not sum to identity")
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if np.abs(projs[i] @ projs[j]).max() > PVM_TOL:
                    raise InvalidStateError(f"projectors {i},{j} are not orthogonal")

    @classmethod
    def from_basis(cls, vectors) -> "Pvm":
        """Rank-one PVM from an orthonormal family of kets."""
        return cls(tuple(ket_bra(v) for v in vectors))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def __len__(self) -> int:
        return len(self.projectors)

    def ranks(self) -> tuple[int, ...]:
        return tuple(int(round(float(np.trace(p).real))) for p in self.projectors)

    def is_rank_one(self) -> bool:
        return all(r == 1 for r in self.ranks())

    def basis_vectors(self) -> list[np.ndarray]:
        """The defining kets of a rank-one PVM (global phase arbitrary)."""
        if not self.is_rank_one():
            raise InvalidStateError("PVM is not rank one")
        out = []
        for p in self.projectors:
            eig = herm_eig(p)
            out.append(eig.eigenvectors[:, 0])
        return out


def pauli_pvm(axis: str) -> Pvm:
    """Qubit PVM in the eigenbasis of Pauli X, Y or Z (outcome 0 = +1)."""
    basis = {
        "X": (KET_PLUS, KET_MINUS),
        "Y": (KET_PLUS_Y, KET_MINUS_Y),
        "Z": (KET_0, KET_1),
    }
    try:
        return Pvm.from_basis(basis[axis.upper()])
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def fourier_pvm(dim: int) -> Pvm:
    """Rank-one PVM in the discrete Fourier basis."""
    w = np.exp(2j * np.pi / dim)
    vecs = [np.array([w ** (j * k) for k in range(dim)]) / np.sqrt(dim) for j in range(dim)]
    return Pvm.from_basis(vecs)


@dataclass(frozen=True)
class CqState:
    """Classical register paired with unnormalized quantum blocks.

    ``blocks[x]`` is the (PSD, subnormalized) state of the quantum
    subsystems conditioned on outcome ``x``; block traces sum to one.
    """

    register_label: str
    blocks: tuple[np.ndarray, ...]
    qdims: tuple[int, ...]
    qlabels: tuple[str, ...]

    def __post_init__(self):
        blocks = tuple(as_matrix(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "qdims", tuple(int(d) for d in self.qdims))
        object.__setattr__(self, "qlabels", tuple(self.qlabels))
        qdim = int(np.prod(self.qdims))
        for b in blocks:
            if b.shape != (qdim, qdim):
                raise InvalidStateError("block shape does not match quantum dims")
        total = sum(float(np.trace(b).real) for b in blocks)
        if abs(total - 1.0) > 1e-8:
            raise InvalidStateError(f"block traces sum to {total}, expected 1")

    @property
    def n_outcomes(self) -> int:
        return len(self.blocks)

    def probabilities(self) -> np.ndarray:
        return np.array([float(np.trace(b).real) for b in self.blocks])

    def to_density_operator(self) -> DensityOperator:
        """Block-diagonal form with the classical register as subsystem 0."""
        n = self.n_outcomes
        qdim = int(np.prod(self.qdims))
        m = np.zeros((n * qdim, n * qdim), dtype=complex)
        for x, b in enumerate(self.blocks):
            m[x * qdim:(x + 1) * qdim, x * qdim:(x + 1) * qdim] = b
        return DensityOperator(
            m, (n,) + self.qdims, (self.register_label,) + self.qlabels
        )

    @classmethod
    def from_density_operator(cls, rho: DensityOperator, register_label: str) -> "CqState":
        """Inverse of :meth:`to_density_operator` for any register position."""
        pos = rho.label_index(register_label)
        n = rho.dims[pos]
        qdims = tuple(d for i, d in enumerate(rho.dims) if i != pos)
        qlabels = tuple(s for i, s in enumerate(rho.labels) if i != pos)
        blocks = []
        for x in range(n):
            e = np.zeros(n, dtype=complex)
            e[x] = 1.0
            blocks.append(_sandwich_vector(rho.matrix, rho.dims, pos, e))
        return cls(register_label, tuple(blocks), qdims, qlabels)


def embed_at(op: np.ndarray, pos: int, dims) -> np.ndarray:
    """Embed a single-subsystem operator into the full tensor product."""
    factors = [np.eye(int(d), dtype=complex) for d in dims]
    factors[pos] = as_matrix(op)
    return tensor(*factors)


def _sandwich_vector(m: np.ndarray, dims, pos: int, vec: np.ndarray) -> np.ndarray:
    """Contract subsystem ``pos`` with <vec| ... |vec>, returning the rest."""
    n = len(dims)
    t = as_matrix(m).reshape(tuple(dims) + tuple(dims))
    t = np.tensordot(np.conjugate(vec), t, axes=([0], [pos]))
    # The contracted row axis is gone; the matching column axis shifted left.
    t = np.tensordot(t, vec, axes=([n - 1 + pos], [0]))
    rest = int(np.prod([d for i, d in enumerate(dims) if i != pos], initial=1))
    return t.reshape(rest, rest)


def measure(
    rho: DensityOperator, pvm: Pvm, measured: str, register_label: str
) -> CqState:
    """Measure one subsystem, keeping the outcome in a classical register.

    Block ``x`` is ``Tr_measured{(P_x (x) I) rho}``; the measured subsystem
    is consumed.
    """
    pos = rho.label_index(measured)
    if pvm.dim != rho.dims[pos]:
        raise InvalidStateError(
            f"PVM dimension {pvm.dim} != subsystem {measured!r} dimension {rho.dims[pos]}"
        )
    keep = [i for i in range(len(rho.dims)) if i != pos]
    blocks = []
    for p in pvm.projectors:
        full = embed_at(p, pos, rho.dims)
        blocks.append(partial_trace(full @ rho.matrix, rho.dims, keep))
    qdims = tuple(rho.dims[i] for i in keep)
    qlabels = tuple(rho.labels[i] for i in keep)
    return CqState(register_label, tuple(blocks), qdims, qlabels)


def pinch(rho: DensityOperator, pvm: Pvm, measured: str) -> DensityOperator:
    """Apply the PVM and discard the outcome: rho -> sum_z Q_z rho Q_z."""
    pos = rho.label_index(measured)
    if pvm.dim != rho.dims[pos]:
        raise InvalidStateError("PVM dimension mismatch in pinch")
    out = np.zeros_like(rho.matrix)
    for q in pvm.projectors:
        full = embed_at(q, pos, rho.dims)
        out += full @ rho.matrix @ full
    return DensityOperator(out, rho.dims, rho.labels)


def theta_state(
    rho: DensityOperator,
    x_pvm: Pvm,
    z_pvm: Pvm,
    measured: str = "A",
    register_label: str = "X",
) -> CqState:
    """Outcome statistics of an X measurement performed after a Z one.

    Requires a rank-one Z measurement.  Block ``x`` is
    ``sum_z <z|P_x|z> omega_z`` with ``omega_z = (<z| (x) I) rho (|z> (x) I)``.
    """
    if not z_pvm.is_rank_one():
        raise InvalidStateError("theta_state needs a rank-one Z measurement")
    pos = rho.label_index(measured)
    if x_pvm.dim != rho.dims[pos] or z_pvm.dim != rho.dims[pos]:
        raise InvalidStateError("PVM dimension mismatch in theta_state")
    zvecs = z_pvm.basis_vectors()
    omegas = [_sandwich_vector(rho.matrix, rho.dims, pos, z) for z in zvecs]
    blocks = []
    for p in x_pvm.projectors:
        weights = [float(np.real(np.conjugate(z) @ p @ z)) for z in zvecs]
        blocks.append(sum(w * om for w, om in zip(weights, omegas)))
    qdims = tuple(d for i, d in enumerate(rho.dims) if i != pos)
    qlabels = tuple(s for i, s in enumerate(rho.labels) if i != pos)
    return CqState(register_label, tuple(blocks), qdims, qlabels)


def incompatibility_c(x_pvm: Pvm, z_pvm: Pvm) -> float:
    """Largest squared operator norm of products of projector pairs."""
    if x_pvm.dim != z_pvm.dim:
        raise InvalidStateError("PVMs act on different dimensions")
    best = 0.0
    for p in x_pvm.projectors:
        for q in z_pvm.projectors:
            best = max(best, op_norm(p @ q) ** 2)
    return min(best, 1.0)


def isometric_extension(pvm: Pvm) -> np.ndarray:
    """Isometry ``sum_x |x> (x) |x> (x) P_x`` from A into X, X', A."""
    n, d = len(pvm), pvm.dim
    u = np.zeros((n * n * d, d), dtype=complex)
    for x, p in enumerate(pvm.projectors):
        e = np.zeros((n, 1), dtype=complex)
        e[x] = 1.0
        u += np.kron(np.kron(e, e), p)
    return u


def purify(rho: DensityOperator, purifier_label: str = "R") -> DensityOperator:
    """Pure state on a doubled space whose reduction returns ``rho``.

    The purifying subsystem is appended last and its dimension equals the
    rank of the input.
    """
    if purifier_label in rho.labels:
        raise InvalidStateError(f"label {purifier_label!r} already in use")
    eig = herm_eig(rho.matrix)
    mask = eig.support_mask()
    vals = eig.eigenvalues[mask]
    vecs = eig.eigenvectors[:, mask]
    rank = int(mask.sum())
    # |psi> = sum_k sqrt(l_k) |v_k> (x) |k>
    psi = np.zeros(rho.dim * rank, dtype=complex)
    for k in range(rank):
        psi += np.sqrt(vals[k]) * np.kron(vecs[:, k], np.eye(rank, dtype=complex)[:, k])
    psi /= np.linalg.norm(psi)
    return DensityOperator.from_vector(
        psi, rho.dims + (rank,), rho.labels + (purifier_label,)
    )


def random_state(dim: int, rank: int, seed, label: str = "A") -> DensityOperator:
    """Random state from partial trace of a Gaussian pure state on dim x rank."""
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must be in [1, {dim}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ dagger(g)
    m /= np.trace(m).real
    return DensityOperator(m, (dim,), (label,))


def random_multipartite_state(dims, rank: int, seed, labels) -> DensityOperator:
    """Random state on an explicit subsystem layout."""
    dims = tuple(int(d) for d in dims)
    full = int(np.prod(dims))
    rho = random_state(full, rank, seed)
    return DensityOperator(rho.matrix, dims, tuple(labels))


def random_pvm(dim: int, seed) -> Pvm:
    """Haar-random rank-one PVM from QR of a Gaussian matrix."""
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return Pvm.from_basis([q[:, k] for k in range(dim)])


def random_pure_state(dims, seed, labels) -> DensityOperator:
    """Haar-random pure state on the given subsystem layout."""
    dims = tuple(int(d) for d in dims)
    full = int(np.prod(dims))
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=full) + 1j * rng.normal(size=full)
    return DensityOperator.from_vector(psi, dims, tuple(labels))
