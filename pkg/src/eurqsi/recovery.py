"""Recovery channels: Petz, rotated Petz, and the measurement-reversal map.

Completely positive maps are stored by their Choi matrix, built as
``(id (x) map)`` applied to the unnormalized maximally entangled operator
with the input system first: ``choi = sum_ij E_ij (x) map(E_ij)``.  In this
convention a map that preserves trace on a subspace with projector ``P``
satisfies ``Tr_out(choi) = P.T``.

The rotated Petz construction averages unitary rotations by imaginary
operator powers against the density ``p(t) = (pi/2) / (cosh(pi t) + 1)``,
discretized by a fixed composite Gauss-Legendre rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import EPS_SUPP, as_matrix, dagger, herm_eig, mat_power_on_support
from .states import (
    CqState,
    DensityOperator,
    InvalidStateError,
    Pvm,
    _sandwich_vector,
    ket_bra,
)

CHOI_TOL = 1e-8


class QuadratureError(ValueError):
    """The quadrature rule violates its normalization invariant."""


def p_density(t) -> np.ndarray:
    """Rotation density (pi/2) / (cosh(pi t) + 1); integrates to one."""
    t = np.asarray(t, dtype=float)
    return (np.pi / 2.0) / (np.cosh(np.pi * t) + 1.0)


@dataclass(frozen=True)
class Quadrature:
    """Nodes and p(t)-folded weights for the rotation integral."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise QuadratureError("nodes and weights must be equal-length vectors")
        if np.any(weights < 0):
            raise QuadratureError("quadrature weights must be positive")

    @property
    def normalization_defect(self) -> float:
        return abs(float(self.weights.sum()) - 1.0)

    def validate(self, tol: float = 1e-10) -> None:
        if self.normalization_defect > tol:
            raise QuadratureError(
                f"quadrature weights sum to 1 {self.normalization_defect:+.3e}; "
                "the p(t) integral is not resolved"
            )

    @classmethod
    def gauss_legendre(
        cls, t_max: float = 12.0, panels: int = 64, order: int = 8
    ) -> "Quadrature":
        """Composite Gauss-Legendre rule on [-t_max, t_max], p(t) folded in.

        The default resolves the integral to ~1e-15; the tail mass beyond
        |t| = 12 is below 1e-15 because p decays like exp(-pi |t|).
        """
        x, w = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(-t_max, t_max, panels + 1)
        nodes, weights = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            nodes.append(mid + half * x)
            weights.append(half * w)
        nodes = np.concatenate(nodes)
        weights = np.concatenate(weights) * p_density(nodes)
        return cls(nodes, weights)


@lru_cache(maxsize=1)
def default_quadrature() -> Quadrature:
    return Quadrature.gauss_legendre()


@dataclass(frozen=True)
class CpMap:
    """Completely positive map between labeled multipartite spaces.

    ``support`` is the projector on the input space where the map is
    trace-preserving (identity when None).  Kraus operators are optional;
    quadrature-built maps keep only the Choi matrix.
    """

    choi: np.ndarray
    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]
    kraus: tuple[np.ndarray, ...] | None = None
    support: np.ndarray | None = None
    in_labels: tuple[str, ...] = ()
    out_labels: tuple[str, ...] = ()

    def __post_init__(self):
        choi = as_matrix(self.choi)
        in_dims = tuple(int(d) for d in self.in_dims)
        out_dims = tuple(int(d) for d in self.out_dims)
        object.__setattr__(self, "choi", choi)
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)
        if not self.in_labels:
            object.__setattr__(self, "in_labels", tuple(f"in{i}" for i in range(len(in_dims))))
        if not self.out_labels:
            object.__setattr__(self, "out_labels", tuple(f"out{i}" for i in range(len(out_dims))))
        d = self.in_dim * self.out_dim
        if choi.shape != (d, d):
            raise ValueError(f"Choi shape {choi.shape} does not match dims ({d}, {d})")
        scale = max(1.0, float(np.abs(choi).max()))
        if np.abs(choi - dagger(choi)).max() > CHOI_TOL * scale:
            raise ValueError("Choi matrix is not Hermitian")
        if float(np.linalg.eigvalsh(choi).min()) < -CHOI_TOL * scale:
            raise ValueError("Choi matrix is not positive semidefinite")
        if self.kraus is not None:
            kraus = tuple(as_matrix(k) for k in self.kraus)
            object.__setattr__(self, "kraus", kraus)
            for k in kraus:
                if k.shape != (self.out_dim, self.in_dim):
                    raise ValueError("Kraus operator shape mismatch")
            rebuilt = choi_from_kraus(kraus)
            if np.abs(rebuilt - choi).max() > CHOI_TOL * scale:
                raise ValueError("Choi matrix inconsistent with Kraus operators")
        if self.support is not None:
            object.__setattr__(self, "support", as_matrix(self.support))

    @property
    def in_dim(self) -> int:
        return int(np.prod(self.in_dims))

    @property
    def out_dim(self) -> int:
        return int(np.prod(self.out_dims))

    def choi_blocks(self) -> np.ndarray:
        """Choi reshaped to (in, out, in, out) axes."""
        di, do = self.in_dim, self.out_dim
        return self.choi.reshape(di, do, di, do)

    def apply_matrix(self, xi: np.ndarray) -> np.ndarray:
        """Apply to a raw input-space matrix (no state validation)."""
        xi = as_matrix(xi)
        if xi.shape != (self.in_dim, self.in_dim):
            raise ValueError(f"input shape {xi.shape} does not match {self.in_dim}")
        if self.kraus is not None:
            out = np.zeros((self.out_dim, self.out_dim), dtype=complex)
            for k in self.kraus:
                out += k @ xi @ dagger(k)
            return out
        return np.einsum("ij,iajb->ab", xi, self.choi_blocks())

    def trace_preservation_defect(self, support: np.ndarray | None = None) -> float:
        """Max deviation of Tr_out(choi) from the support projector."""
        target = support if support is not None else self.support
        if target is None:
            target = np.eye(self.in_dim, dtype=complex)
        tr_out = np.einsum("iaja->ij", self.choi_blocks())
        # Tr{map(E_ij)} = P[j, i], hence the transpose.
        return float(np.abs(tr_out - as_matrix(target).T).max())


def vec_operator(k: np.ndarray) -> np.ndarray:
    """Column-stacking vec matching the Choi convention (input index slow)."""
    return np.ravel(as_matrix(k), order="F")


def choi_from_kraus(kraus, weights=None) -> np.ndarray:
    """Choi matrix of ``sum_k w_k K_k (.) K_k^dag``."""
    vecs = np.stack([vec_operator(k) for k in kraus])
    if weights is not None:
        vecs = vecs * np.sqrt(np.asarray(weights, dtype=float))[:, None]
    return vecs.T @ vecs.conj()


def kraus_from_choi(choi: np.ndarray, in_dim: int, out_dim: int, tol: float = 1e-12):
    """Kraus operators from the spectral decomposition of a Choi matrix."""
    eig = herm_eig(choi)
    top = float(eig.eigenvalues.max(initial=0.0))
    kraus = []
    for lam, v in zip(eig.eigenvalues, eig.eigenvectors.T):
        if lam > tol * max(top, 1.0):
            kraus.append(np.sqrt(lam) * v.reshape(in_dim, out_dim).T)
    return tuple(kraus)


def identity_channel(dims, labels=()) -> CpMap:
    dims = tuple(int(d) for d in dims)
    d = int(np.prod(dims))
    eye = np.eye(d, dtype=complex)
    return CpMap(
        choi=choi_from_kraus([eye]),
        in_dims=dims,
        out_dims=dims,
        kraus=(eye,),
        support=eye,
        in_labels=tuple(labels),
        out_labels=tuple(labels),
    )


def measurement_channel(
    pvm: Pvm, measured_label: str = "A", register_label: str = "X"
) -> CpMap:
    """Channel mapping a state to its measurement statistics register.

    Kraus operators ``|x><j| P_x`` over outcomes x and basis states j.
    """
    n, d = len(pvm), pvm.dim
    kraus = []
    for x, p in enumerate(pvm.projectors):
        e = np.zeros((n, 1), dtype=complex)
        e[x] = 1.0
        for j in range(d):
            f = np.zeros((1, d), dtype=complex)
            f[0, j] = 1.0
            kraus.append(e @ f @ p)
    kraus = tuple(kraus)
    return CpMap(
        choi=choi_from_kraus(kraus),
        in_dims=(d,),
        out_dims=(n,),
        kraus=kraus,
        support=np.eye(d, dtype=complex),
        in_labels=(measured_label,),
        out_labels=(register_label,),
    )


def tensor_with_identity(channel: CpMap, side_dims, side_labels) -> CpMap:
    """Extend a channel to act as ``channel (x) id`` on appended subsystems."""
    if channel.kraus is None:
        raise ValueError("need Kraus operators to extend a channel")
    side_dims = tuple(int(d) for d in side_dims)
    eye = np.eye(int(np.prod(side_dims)), dtype=complex)
    kraus = tuple(np.kron(k, eye) for k in channel.kraus)
    support = np.kron(
        channel.support if channel.support is not None else np.eye(channel.in_dim),
        eye,
    )
    return CpMap(
        choi=choi_from_kraus(kraus),
        in_dims=channel.in_dims + side_dims,
        out_dims=channel.out_dims + side_dims,
        kraus=kraus,
        support=support,
        in_labels=channel.in_labels + tuple(side_labels),
        out_labels=channel.out_labels + tuple(side_labels),
    )


def petz_map(sigma: np.ndarray, channel: CpMap) -> CpMap:
    """Petz recovery of ``channel`` relative to the PSD operator ``sigma``.

    Kraus operators ``sigma^{1/2} K^dag N(sigma)^{-1/2}``; the map restores
    ``sigma`` from ``N(sigma)`` and is trace-preserving on supp(N(sigma)).
    """
    sigma = as_matrix(sigma)
    if sigma.shape != (channel.in_dim, channel.in_dim):
        raise ValueError(
            f"sigma dimension {sigma.shape[0]} incompatible with channel input {channel.in_dim}"
        )
    if channel.kraus is None:
        raise ValueError("petz_map needs a channel with Kraus operators")
    n_sigma = channel.apply_matrix(sigma)
    sqrt_sigma = mat_power_on_support(sigma, 0.5)
    inv_sqrt_n = mat_power_on_support(n_sigma, -0.5)
    kraus = tuple(sqrt_sigma @ dagger(k) @ inv_sqrt_n for k in channel.kraus)
    return CpMap(
        choi=choi_from_kraus(kraus),
        in_dims=channel.out_dims,
        out_dims=channel.in_dims,
        kraus=kraus,
        support=herm_eig(n_sigma).support_projector(),
        in_labels=channel.out_labels,
        out_labels=channel.in_labels,
    )


def _powers_of(matrix: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Stack of support pseudo-powers ``matrix**e`` over an exponent vector."""
    eig = herm_eig(matrix)
    top = float(eig.eigenvalues.max(initial=0.0))
    mask = eig.eigenvalues > EPS_SUPP * max(top, 0.0)
    lam = eig.eigenvalues[mask].astype(complex)
    v = eig.eigenvectors[:, mask]
    lam_pow = lam[None, :] ** exponents[:, None]
    return np.einsum("bk,tk,ck->tbc", v, lam_pow, v.conj())


def rotated_petz_map(
    sigma: np.ndarray,
    channel: CpMap,
    quad: Quadrature | None = None,
    validate_quadrature: bool = True,
) -> CpMap:
    """Rotated Petz recovery: Petz conjugated by imaginary powers, averaged
    over p(t).

    Per quadrature node the Kraus set is
    ``sigma^{(1-it)/2} K^dag N(sigma)^{(-1+it)/2}``; weights carry p(t).
    """
    quad = quad if quad is not None else default_quadrature()
    if validate_quadrature:
        quad.validate(tol=1e-8)
    sigma = as_matrix(sigma)
    if sigma.shape != (channel.in_dim, channel.in_dim):
        raise ValueError("sigma dimension incompatible with channel input")
    if channel.kraus is None:
        raise ValueError("rotated_petz_map needs a channel with Kraus operators")
    n_sigma = channel.apply_matrix(sigma)
    t = quad.nodes
    s_pow = _powers_of(sigma, (1.0 - 1j * t) / 2.0)           # (nt, din, din)
    n_pow = _powers_of(n_sigma, (-1.0 + 1j * t) / 2.0)        # (nt, dout, dout)
    k_dag = np.stack([dagger(k) for k in channel.kraus])      # (nk, din, dout)
    a = np.einsum("tab,kbc,tcd->tkad", s_pow, k_dag, n_pow)
    # vec with input index slow: V[(t,k), i*dout + o] = A[t,k,o,i]
    nt, nk = a.shape[0], a.shape[1]
    v = a.transpose(0, 1, 3, 2).reshape(nt * nk, channel.in_dim * channel.out_dim)
    v = v * np.sqrt(np.repeat(quad.weights, nk))[:, None]
    choi = v.T @ v.conj()
    return CpMap(
        choi=choi,
        in_dims=channel.out_dims,
        out_dims=channel.in_dims,
        support=herm_eig(n_sigma).support_projector(),
        in_labels=channel.out_labels,
        out_labels=channel.in_labels,
    )


def eur_recovery_map(
    rho_ab: DensityOperator,
    x_pvm: Pvm,
    z_pvm: Pvm,
    quad: Quadrature | None = None,
    measured: str = "A",
    register_label: str = "X",
    validate_quadrature: bool = True,
) -> CpMap:
    """Explicit recovery channel undoing an X measurement given a prior
    rank-one Z measurement.

    Acts on the (register, rest) space and restores the measured subsystem
    in front of the rest.  Built on the support of the doubly measured
    state; the orthogonal complement is routed to the Z-pinched state by a
    completion branch so the channel is trace-preserving everywhere.
    """
    if not z_pvm.is_rank_one():
        raise InvalidStateError("eur_recovery_map needs a rank-one Z measurement")
    quad = quad if quad is not None else default_quadrature()
    if validate_quadrature:
        quad.validate(tol=1e-8)
    pos = rho_ab.label_index(measured)
    d_a = rho_ab.dims[pos]
    if x_pvm.dim != d_a or z_pvm.dim != d_a:
        raise InvalidStateError("PVM dimension mismatch with measured subsystem")
    rest = [i for i in range(len(rho_ab.dims)) if i != pos]
    b_dims = tuple(rho_ab.dims[i] for i in rest)
    b_labels = tuple(rho_ab.labels[i] for i in rest)
    d_b = int(np.prod(b_dims, initial=1))
    n_x = len(x_pvm)

    zvecs = z_pvm.basis_vectors()
    zmat = np.stack(zvecs)                                   # (nz, dA), rows |z>
    z_p_m = np.stack([zmat.conj() @ p for p in x_pvm.projectors])  # (nx, nz, dA)

    omegas = [_sandwich_vector(rho_ab.matrix, rho_ab.dims, pos, z) for z in zvecs]
    thetas = []
    for x in range(n_x):
        w = np.real(np.einsum("zm,zm->z", z_p_m[x], zmat))    # <z|P_x|z>
        thetas.append(sum(wz * om for wz, om in zip(w, omegas)))

    t = quad.nodes
    om_pow = np.stack([_powers_of(om, (1.0 - 1j * t) / 2.0) for om in omegas])
    # axes: (z, t, b, b')

    d_in = n_x * d_b
    d_out = d_a * d_b
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    sqrt_w = np.sqrt(quad.weights)
    support_blocks = []
    for x in range(n_x):
        if float(np.trace(thetas[x]).real) <= EPS_SUPP:
            # zero-probability branch: excluded from the map's support
            support_blocks.append(np.zeros((d_b, d_b), dtype=complex))
            continue
        th_pow = _powers_of(thetas[x], (-1.0 + 1j * t) / 2.0)  # (t, b, b')
        m = np.einsum("ztbc,tcd->ztbd", om_pow, th_pow)        # (z, t, b, b')
        # G[t, m, a, b_out, b_in] = sum_z <a|z> <z|P_x|m> M[z, t, b_out, b_in]
        g = np.einsum("za,zm,ztbc->tmabc", zmat, z_p_m[x], m)
        g = g * sqrt_w[:, None, None, None, None]
        # vec index order within the x block: (b_in, a, b_out)
        v = g.transpose(0, 1, 4, 2, 3).reshape(len(t) * d_a, d_b * d_a * d_b)
        block = v.T @ v.conj()
        off = x * d_b * d_out
        size = d_b * d_out
        choi[off:off + size, off:off + size] += block
        support_blocks.append(herm_eig(thetas[x]).support_projector())

    # completion: route the complement of supp(theta_XB) to the pinched state
    support = np.zeros((d_in, d_in), dtype=complex)
    for x, blk in enumerate(support_blocks):
        support[x * d_b:(x + 1) * d_b, x * d_b:(x + 1) * d_b] = blk
    complement = np.eye(d_in, dtype=complex) - support
    if float(np.abs(complement).max()) > EPS_SUPP:
        tau = np.zeros((d_out, d_out), dtype=complex)
        for z, om in zip(zvecs, omegas):
            tau += np.kron(ket_bra(z), om)
        tau = tau / float(np.trace(tau).real)
        choi += np.kron(complement.T, tau)

    return CpMap(
        choi=choi,
        in_dims=(n_x,) + b_dims,
        out_dims=(d_a,) + b_dims,
        support=np.eye(d_in, dtype=complex),
        in_labels=(register_label,) + b_labels,
        out_labels=(measured,) + b_labels,
    )


def apply_map(cpmap: CpMap, state: DensityOperator | CqState) -> DensityOperator:
    """Apply a CP map to a state, returning a validated density operator."""
    if isinstance(state, CqState):
        state = state.to_density_operator()
    if tuple(state.dims) != cpmap.in_dims:
        raise ValueError(
            f"state dims {state.dims} do not match map input dims {cpmap.in_dims}"
        )
    out = cpmap.apply_matrix(state.matrix)
    return DensityOperator(out, cpmap.out_dims, cpmap.out_labels)


@dataclass(frozen=True)
class CptpReport:
    """Residuals of the complete-positivity and trace-preservation checks."""

    choi_min_eigenvalue: float
    trace_preservation_defect: float
    kraus_completeness_defect: float | None
    kraus_choi_defect: float | None
    tolerance: float

    @property
    def cp_ok(self) -> bool:
        return self.choi_min_eigenvalue >= -self.tolerance

    @property
    def tp_ok(self) -> bool:
        return self.trace_preservation_defect <= self.tolerance

    @property
    def ok(self) -> bool:
        extra = True
        if self.kraus_completeness_defect is not None:
            extra = self.kraus_completeness_defect <= self.tolerance
        return self.cp_ok and self.tp_ok and extra


def verify_cptp(
    cpmap: CpMap, support: np.ndarray | None = None, tol: float = CHOI_TOL
) -> CptpReport:
    """Check Choi positivity and trace preservation on the declared support."""
    min_eig = float(np.linalg.eigvalsh(cpmap.choi).min())
    tp_defect = cpmap.trace_preservation_defect(support)
    kraus_complete = None
    kraus_choi = None
    if cpmap.kraus is not None:
        target = support if support is not None else cpmap.support
        if target is None:
            target = np.eye(cpmap.in_dim, dtype=complex)
        acc = np.zeros((cpmap.in_dim, cpmap.in_dim), dtype=complex)
        for k in cpmap.kraus:
            acc += dagger(k) @ k
        kraus_complete = float(np.abs(acc - as_matrix(target)).max())
        kraus_choi = float(np.abs(choi_from_kraus(cpmap.kraus) - cpmap.choi).max())
    return CptpReport(
        choi_min_eigenvalue=min_eig,
        trace_preservation_defect=tp_defect,
        kraus_completeness_defect=kraus_complete,
        kraus_choi_defect=kraus_choi,
        tolerance=tol,
    )
