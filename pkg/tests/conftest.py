"""Shared independent oracles for the test suite.

These deliberately avoid the library code paths they are used to check:
the partial trace runs explicit index loops, the fidelity oracle goes
through scipy matrix square roots, and matrix powers are taken on scalars.
"""

import numpy as np
import scipy.linalg


def loop_partial_trace(m, dims, keep):
    """Partial trace via explicit index summation (slow, obviously correct)."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    traced = [i for i in range(n) if i not in keep]
    kept_dims = [dims[i] for i in keep]
    dk = int(np.prod(kept_dims)) if kept_dims else 1
    out = np.zeros((dk, dk), dtype=complex)

    def flat(idx):
        val = 0
        for i, d in enumerate(dims):
            val = val * d + idx[i]
        return val

    def flat_kept(idx):
        val = 0
        for pos, i in enumerate(keep):
            val = val * kept_dims[pos] + idx[i]
        return val

    from itertools import product
    for row in product(*[range(d) for d in dims]):
        for col in product(*[range(d) for d in dims]):
            if any(row[i] != col[i] for i in traced):
                continue
            out[flat_kept(row), flat_kept(col)] += m[flat(row), flat(col)]
    return out


def sqrtm_fidelity(rho, sigma):
    """Uhlmann fidelity via scipy's sqrtm, independent of the eigh route."""
    s = scipy.linalg.sqrtm(rho)
    inner = scipy.linalg.sqrtm(s @ sigma @ s)
    return float(np.real(np.trace(inner)) ** 2)


def shannon_bits(probs):
    probs = np.asarray(probs, dtype=float)
    probs = probs[probs > 1e-15]
    return float(-np.sum(probs * np.log2(probs)))


def dagger(m):
    return np.conjugate(np.asarray(m).T)


def pinched_state_oracle(rho_ab, zvecs):
    """sum_z |z><z| (x) (<z| (x) I) rho (|z> (x) I) by plain kron algebra."""
    d_a = len(zvecs[0])
    d_b = rho_ab.shape[0] // d_a
    out = np.zeros_like(rho_ab)
    for z in zvecs:
        bra = np.kron(np.conjugate(z).reshape(1, -1), np.eye(d_b))
        block = bra @ rho_ab @ dagger(bra)
        out += np.kron(np.outer(z, np.conjugate(z)), block)
    return out
