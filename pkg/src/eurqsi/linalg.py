"""Dense complex linear algebra for small multipartite operators.

Everything here works on plain ``numpy`` complex matrices.  Subsystem
ordering is fixed package-wide: subsystem 0 is the slowest-varying tensor
factor, i.e. ``tensor(a, b)`` puts ``a`` on subsystem 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative cutoff separating genuine zero eigenvalues of rank-deficient
# states from round-off.
EPS_SUPP = 1e-10

HERM_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-D complex ndarray, rejecting non-finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(m.T)


def tensor(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices, first factor slowest."""
    if not factors:
        raise ValueError("tensor() needs at least one factor")
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def is_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> bool:
    m = as_matrix(m)
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    return bool(np.abs(m - dagger(m)).max(initial=0.0) <= tol * scale)


@dataclass(frozen=True)
class HermEig:
    """Spectral decomposition of a Hermitian matrix.

    ``eigenvalues`` are real and sorted in descending order;
    ``eigenvectors`` holds the matching orthonormal columns, so that
    ``eigenvectors @ diag(eigenvalues) @ eigenvectors.conj().T``
    reconstructs the input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def support_mask(self, eps: float = EPS_SUPP) -> np.ndarray:
        """Boolean mask of eigenvalues above the relative support cutoff."""
        top = float(np.abs(self.eigenvalues).max(initial=0.0))
        return np.abs(self.eigenvalues) > eps * top

    def support_projector(self, eps: float = EPS_SUPP) -> np.ndarray:
        v = self.eigenvectors[:, self.support_mask(eps)]
        return v @ dagger(v)


def herm_eig(m: np.ndarray, tol: float = HERM_TOL) -> HermEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(m)
    return HermEig(eigenvalues=vals[::-1].copy(), eigenvectors=vecs[:, ::-1].copy())


def _subsystem_axes(dims, total_dim: int):
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"subsystem dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != total_dim:
        raise ValueError(f"product of dims {dims} != matrix dimension {total_dim}")
    return dims


def partial_trace(m: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out all subsystems not listed in ``keep``.

    Parameters
    ----------
    m : square matrix on the tensor product of ``dims``
    dims : dimension of each subsystem, subsystem 0 slowest-varying
    keep : iterable of subsystem indices to retain (original order kept)
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("partial_trace needs a square matrix")
    dims = _subsystem_axes(dims, m.shape[0])
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")

    t = m.reshape(dims + dims)
    # Row axis i and column axis n+i of each traced subsystem share a label.
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out_axes = [i for i in keep] + [n + i for i in keep]
    kept_dim = int(np.prod([dims[i] for i in keep], initial=1))
    reduced = np.einsum(t, row + col, out_axes)
    return reduced.reshape(kept_dim, kept_dim)


def mat_power_on_support(m: np.ndarray, z: complex, eps: float = EPS_SUPP) -> np.ndarray:
    """Pseudo-power ``m**z`` of a PSD matrix, restricted to its support.

    Eigenvalues above the relative cutoff are raised to ``z``; the rest map
    to zero, so negative real parts of ``z`` give the support-restricted
    inverse power.
    """
    eig = herm_eig(m)
    top = float(eig.eigenvalues.max(initial=0.0))
    if eig.eigenvalues.min(initial=0.0) < -max(eps * max(top, 1.0), eps):
        raise ValueError("matrix has negative eigenvalues beyond tolerance")
    mask = eig.eigenvalues > eps * max(top, 0.0)
    powered = np.zeros(len(eig.eigenvalues), dtype=complex)
    powered[mask] = np.power(eig.eigenvalues[mask].astype(complex), z)
    v = eig.eigenvectors
    return (v * powered) @ dagger(v)


def op_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of ``a - b``."""
    d = as_matrix(a) - as_matrix(b)
    sv = np.linalg.svd(d, compute_uv=False)
    return 0.5 * float(sv.sum())


def _check_state_matrix(rho: np.ndarray, tol: float, what: str) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{what} must be square")
    if not is_hermitian(rho, tol):
        raise ValueError(f"{what} is not Hermitian within tolerance")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > 1e-8:
        raise ValueError(f"{what} has trace {tr}, expected 1")
    return rho


def fidelity(rho: np.ndarray, sigma: np.ndarray, guard: float = 1e-9) -> float:
    """Uhlmann fidelity: squared trace norm of ``sqrt(rho) sqrt(sigma)``.

    Computed through the spectrum of ``sqrt(rho) sigma sqrt(rho)``, which
    keeps every intermediate Hermitian.  The result is clipped to [0, 1]
    after a guard band.
    """
    rho = _check_state_matrix(rho, HERM_TOL, "fidelity argument")
    sigma = _check_state_matrix(sigma, HERM_TOL, "fidelity argument")
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    sqrt_rho = mat_power_on_support(rho, 0.5)
    inner = sqrt_rho @ sigma @ sqrt_rho
    vals = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    # eigh noise on zero modes is O(eps); summing their square roots would
    # cost ~1e-8, so cut at the support threshold first
    vals[vals <= EPS_SUPP * vals.max(initial=0.0)] = 0.0
    f = float(np.sum(np.sqrt(vals)) ** 2)
    if f < -guard or f > 1.0 + guard:
        raise ValueError(f"fidelity {f} outside [0, 1] beyond guard band")
    return min(max(f, 0.0), 1.0)


def purity(rho: np.ndarray) -> float:
    rho = as_matrix(rho)
    return float(np.trace(rho @ rho).real)
