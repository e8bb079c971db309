"""Entropic functionals in base-2 logarithms with explicit support handling.

The relative entropy returns ``math.inf`` (never a float overflow) when the
first argument has weight outside the support of the second.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import EPS_SUPP, as_matrix, herm_eig
from .states import DensityOperator

# Trace mass tolerated outside the second argument's support before the
# relative entropy is declared infinite.
SUPPORT_MASS_TOL = 1e-9


def entropy_of_spectrum(eigenvalues) -> float:
    """Shannon entropy in bits of a nonnegative spectrum, 0 log 0 := 0."""
    vals = np.asarray(eigenvalues, dtype=float)
    top = float(vals.max(initial=0.0))
    vals = vals[vals > EPS_SUPP * max(top, 0.0)]
    if vals.size == 0:
        return 0.0
    return float(-np.sum(vals * np.log2(vals)))


def von_neumann(rho: DensityOperator) -> float:
    """Von Neumann entropy in bits."""
    vals = np.linalg.eigvalsh(rho.matrix)
    return entropy_of_spectrum(np.clip(vals, 0.0, None))


def conditional(rho: DensityOperator, cond_subsystems) -> float:
    """Conditional entropy H(rest | cond) = H(full) - H(cond), in bits."""
    if isinstance(cond_subsystems, str):
        cond_subsystems = [cond_subsystems]
    cond = list(cond_subsystems)
    if not cond:
        raise ValueError("conditioning subsystem list is empty")
    if set(cond) == set(rho.labels):
        raise ValueError("conditioning on every subsystem leaves nothing")
    reduced = rho.reduce(cond)
    return von_neumann(rho) - von_neumann(reduced)


def relative(rho: DensityOperator | np.ndarray, sigma: np.ndarray) -> float:
    """Quantum relative entropy D(rho || sigma) in bits, or ``inf``.

    ``sigma`` only needs to be PSD (it may be unnormalized).  The two trace
    terms are evaluated in their own eigenbases; the cross term uses the
    overlap of ``rho`` with ``sigma``'s eigenvectors, which is exact in the
    commuting case and stable otherwise.
    """
    rho_m = rho.matrix if isinstance(rho, DensityOperator) else as_matrix(rho)
    sigma = as_matrix(sigma)
    if rho_m.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho_m.shape} vs {sigma.shape}")

    sig_eig = herm_eig(sigma)
    if sig_eig.eigenvalues.min() < -EPS_SUPP * max(1.0, sig_eig.eigenvalues.max(initial=0.0)):
        raise ValueError("second argument is not positive semidefinite")
    sig_mask = sig_eig.support_mask()

    # Weight of rho on the orthogonal complement of supp(sigma).
    overlaps = np.real(np.einsum("ij,jk,ki->i", sig_eig.eigenvectors.conj().T,
                                 rho_m, sig_eig.eigenvectors))
    off_support = float(np.clip(overlaps[~sig_mask], 0.0, None).sum())
    if off_support > SUPPORT_MASS_TOL:
        return math.inf

    rho_vals = np.clip(np.linalg.eigvalsh(rho_m), 0.0, None)
    tr_rho_log_rho = -entropy_of_spectrum(rho_vals)
    tr_rho_log_sig = float(
        np.sum(overlaps[sig_mask] * np.log2(sig_eig.eigenvalues[sig_mask]))
    )
    return tr_rho_log_rho - tr_rho_log_sig
