"""Dense complex linear algebra and quantum-information primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Qubit basis
index 0 is the ``sigma_z = +1`` state; in tensor products the left factor is
the most significant index. The global slot order of the full
system+bath space is ``(S1, S2, A1, A2)``.
"""
from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .tolerances import (
    ENTROPY_CLAMP,
    HERMITIAN_TOL,
    PSD_TOL,
    SUPPORT_TOL,
    SUPPORT_WEIGHT,
    TRACE_TOL,
    UNITARY_TOL,
)

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
# raising/lowering: sigma_+ maps index 1 (down) to index 0 (up)
SP = 0.5 * (SX + 1j * SY)
SM = 0.5 * (SX - 1j * SY)


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


def dag(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def kron(*ops: np.ndarray) -> np.ndarray:
    """Tensor product of any number of matrices, left factor most significant."""
    if not ops:
        raise ValueError("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def embed(op: np.ndarray, slot: int, n_qubits: int) -> np.ndarray:
    """Place a single-qubit operator on ``slot`` of an ``n_qubits`` register."""
    if not 0 <= slot < n_qubits:
        raise DimensionError(f"slot {slot} out of range for {n_qubits} qubits")
    factors = [I2] * n_qubits
    factors[slot] = op
    return kron(*factors)


def partial_trace(rho: np.ndarray, keep: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Reduced operator on the slots listed in ``keep``.

    Parameters
    ----------
    rho : ndarray
        Square operator on the product space with slot dimensions ``dims``.
    keep : sequence of int
        Slots to retain, in the order they should appear in the result.
    dims : sequence of int
        Dimension of every tensor slot.
    """
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"layout {dims} does not match operator of shape {rho.shape}")
    keep = [int(k) for k in keep]
    n = len(dims)
    if len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"invalid slots to keep: {keep}")
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    # contract traced slots pairwise, highest index first so axes stay valid
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    remaining = sorted(keep)
    perm = [remaining.index(k) for k in keep]
    m = len(remaining)
    t = t.transpose(perm + [p + m for p in perm])
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    err = np.max(np.abs(m - dag(m))) if m.size else 0.0
    if err > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {err:.3e})")


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(dag(u) @ u - np.eye(u.shape[0]))) <= tol)


def is_density_matrix(rho: np.ndarray, psd_tol: float = PSD_TOL) -> bool:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.max(np.abs(rho - dag(rho))) > HERMITIAN_TOL:
        return False
    if abs(np.trace(rho) - 1) > TRACE_TOL:
        return False
    return bool(np.linalg.eigvalsh(rho)[0] >= -psd_tol)


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dag(m))


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvector matrix of a Hermitian matrix."""
    check_hermitian(m)
    w, v = np.linalg.eigh(hermitize(np.asarray(m, dtype=complex)))
    return w, v


def unitary_exp(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` through its eigendecomposition."""
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * t)) @ dag(v)


def _entropy_from_eigs(p: np.ndarray) -> float:
    p = p[p > ENTROPY_CLAMP]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``-Tr rho ln rho`` in nats."""
    p = np.linalg.eigvalsh(hermitize(np.asarray(rho)))
    return max(_entropy_from_eigs(p), 0.0)


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``D(rho||sigma) = Tr rho ln rho - Tr rho ln sigma``; ``inf`` off support."""
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch: {rho.shape} vs {sigma.shape}")
    p, _ = np.linalg.eigh(hermitize(rho))
    s, v = np.linalg.eigh(hermitize(sigma))
    # weight of rho on each eigenvector of sigma
    weights = np.real(np.einsum("ij,jk,ki->i", dag(v), rho, v))
    null = s < SUPPORT_TOL
    if np.any(weights[null] > SUPPORT_WEIGHT):
        return float("inf")
    cross = float(np.sum(weights[~null] * np.log(s[~null])))
    return -_entropy_from_eigs(p) - cross


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(a - b)))))
