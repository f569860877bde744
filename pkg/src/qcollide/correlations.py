"""Correlation measures: mutual information, concurrence, quantum discord."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .linalg import SX, SY, SZ, DimensionError, dag, hermitize, kron, partial_trace, von_neumann_entropy

DISCORD_METHOD = "projective"  # upper bound on POVM-optimal discord


def mutual_information(rho: np.ndarray, dims: Sequence[int], part: Sequence[int]) -> float:
    """``S(rho_A) + S(rho_B) - S(rho_AB)`` with ``A`` the slots in ``part``.

    >>> mutual_information(np.eye(4) / 4, (2, 2), (0,))
    0.0
    """
    n = len(dims)
    part = list(part)
    rest = [k for k in range(n) if k not in part]
    if not part or not rest or any(k < 0 or k >= n for k in part):
        raise DimensionError(f"invalid bipartition {part} of {n} slots")
    sa = von_neumann_entropy(partial_trace(rho, part, dims))
    sb = von_neumann_entropy(partial_trace(rho, rest, dims))
    return sa + sb - von_neumann_entropy(rho)


_YY = kron(SY, SY)


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"concurrence needs a 4x4 state, got {rho.shape}")
    # the lambdas are the singular values of sqrt(rho) (Y x Y) sqrt(rho)^*; this
    # avoids square roots of noisy eigenvalues of rho rho~ for rank-deficient rho
    w, v = np.linalg.eigh(hermitize(rho))
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ dag(v)
    lam = np.linalg.svd(root @ _YY @ root.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _bloch(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


class _ConditionalEntropy:
    """Average post-measurement entropy of the unmeasured qubit, vectorised."""

    def __init__(self, rho: np.ndarray, measured: int):
        if measured not in (0, 1):
            raise ValueError(f"measured slot must be 0 or 1, got {measured}")
        other = 1 - measured
        self.reduced = partial_trace(rho, [other], (2, 2))
        ops = []
        for s in (SX, SY, SZ):
            full = kron(s, np.eye(2)) if measured == 0 else kron(np.eye(2), s)
            ops.append(partial_trace(full @ rho, [other], (2, 2)))
        self.t = np.stack(ops)  # (3, 2, 2)

    def __call__(self, n: np.ndarray) -> np.ndarray:
        n = np.atleast_2d(n)
        nt = np.einsum("pk,kij->pij", n, self.t)
        total = 0.0
        for sign in (1.0, -1.0):
            m = 0.5 * (self.reduced + sign * nt)
            a, d = m[:, 0, 0].real, m[:, 1, 1].real
            q = a + d
            disc = np.sqrt((a - d) ** 2 + 4 * np.abs(m[:, 0, 1]) ** 2)
            with np.errstate(divide="ignore", invalid="ignore"):
                total = total + _h2(0.5 * (q + disc), q) + _h2(0.5 * (q - disc), q)
        return total


def _h2(lam, q):
    # q-weighted entropy term  -lam ln(lam/q); zero where lam or q vanish
    lam = np.clip(lam, 0.0, None)
    ok = (lam > 1e-15) & (q > 1e-15)
    out = np.zeros_like(lam)
    out[ok] = -lam[ok] * np.log(lam[ok] / q[ok])
    return out


def classical_information(
    rho: np.ndarray,
    measured: int = 0,
    grid: tuple[int, int] = (61, 120),
    refine: bool = True,
) -> float:
    """Classical correlation ``J`` extracted by projective measurements on ``measured``.

    The optimal measurement axis is located on a polar/azimuthal grid and then
    refined with Nelder-Mead.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"expected a two-qubit state, got {rho.shape}")
    f = _ConditionalEntropy(rho, measured)
    th = np.linspace(0.0, np.pi, grid[0])
    ph = np.linspace(0.0, 2 * np.pi, grid[1], endpoint=False)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    vals = f(_bloch(tt.ravel(), pp.ravel()))
    k = int(np.argmin(vals))
    best = float(vals[k])
    if refine:
        x0 = np.array([tt.ravel()[k], pp.ravel()[k]])
        res = minimize(
            lambda x: float(f(_bloch(x[0], x[1]))[0]),
            x0,
            method="Nelder-Mead",
            options={
                "xatol": 1e-6,
                "fatol": 1e-8,
                "initial_simplex": x0 + np.array([[0, 0], [0.05, 0], [0, 0.05]]),
            },
        )
        best = min(best, float(res.fun))
    s_other = von_neumann_entropy(f.reduced)
    return max(s_other - best, 0.0)


def quantum_discord(rho: np.ndarray, measured: int = 0, **kwargs) -> float:
    """Mutual information minus the projective classical information."""
    mi = mutual_information(rho, (2, 2), (0,))
    return max(mi - classical_information(rho, measured, **kwargs), 0.0)


@dataclass(frozen=True)
class CorrelationRecord:
    mi_s1s2: float
    mi_a1a2: float
    mi_as: float
    discord_s1s2: float
    concurrence_a1a2: float

    CSV_COLUMNS = ("I_S1S2", "I_A1A2", "I_AS", "D_S1S2", "C_A1A2")

    def as_row(self) -> tuple[float, ...]:
        return tuple(asdict(self).values())


def correlation_record(rho_s: np.ndarray, rho_b_prepared: np.ndarray, rho_sb_after: np.ndarray) -> CorrelationRecord:
    """Correlations of one steady-state configuration.

    ``rho_s`` is the system steady state, ``rho_b_prepared`` the bath pair
    before the collision and ``rho_sb_after`` the joint state after it.
    """
    return CorrelationRecord(
        mi_s1s2=mutual_information(rho_s, (2, 2), (0,)),
        mi_a1a2=mutual_information(rho_b_prepared, (2, 2), (0,)),
        mi_as=mutual_information(rho_sb_after, (4, 4), (0,)),
        discord_s1s2=quantum_discord(rho_s),
        concurrence_a1a2=concurrence(rho_b_prepared),
    )
