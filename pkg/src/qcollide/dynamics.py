"""Collision map, its fixed point, and the continuous-time Lindblad limit."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .linalg import SM, SP, DimensionError, dag, embed, hermitize, unitary_exp
from .model import ModelParams, system_hamiltonian, total_hamiltonian
from .tolerances import DEGENERACY_TOL, POWER_MAX_ITER, STEADY_RESIDUAL


class DegenerateSteadyState(RuntimeError):
    """The fixed point of the map or generator is not unique."""


class NonConvergence(RuntimeError):
    pass


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorisation."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int = 4) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


@lru_cache(maxsize=64)
def collision_unitary(p: ModelParams) -> np.ndarray:
    """``exp(-i H_tot tau)`` on the ``(S1, S2, A1, A2)`` space."""
    u = unitary_exp(total_hamiltonian(p), p.tau)
    u.setflags(write=False)
    return u


def _trace_out_bath(m: np.ndarray) -> np.ndarray:
    # works on stacks (..., 16, 16)
    t = m.reshape(m.shape[:-2] + (4, 4, 4, 4))
    return np.trace(t, axis1=-3, axis2=-1)


def _trace_out_system(m: np.ndarray) -> np.ndarray:
    t = m.reshape(m.shape[:-2] + (4, 4, 4, 4))
    return np.trace(t, axis1=-4, axis2=-2)


@dataclass(frozen=True)
class CollisionChannel:
    """One collision of the system with a freshly prepared bath pair."""

    params: ModelParams
    collision_unitary: np.ndarray = field(repr=False)
    bath_state: np.ndarray = field(repr=False)
    superoperator: np.ndarray = field(repr=False)

    def joint_state_after(self, rho_s: np.ndarray) -> np.ndarray:
        """``U_coll (rho_S x rho'_B) U_coll^dagger`` on the full space."""
        u = self.collision_unitary
        return u @ np.kron(rho_s, self.bath_state) @ dag(u)


def build_channel(p: ModelParams, bath: np.ndarray) -> CollisionChannel:
    bath = np.asarray(bath, dtype=complex)
    if bath.shape != (4, 4):
        raise DimensionError(f"bath state must be 4x4, got {bath.shape}")
    u = collision_unitary(p)
    # image of the 16 matrix units E_jk, j + 4k being the column-stacked index
    units = np.zeros((16, 4, 4), dtype=complex)
    idx = np.arange(16)
    units[idx, idx % 4, idx // 4] = 1.0
    joint = np.einsum("nij,ab->niajb", units, bath).reshape(16, 16, 16)
    images = _trace_out_bath(u @ joint @ dag(u))
    sop = images.transpose(0, 2, 1).reshape(16, 16).T
    return CollisionChannel(p, u, bath, np.ascontiguousarray(sop))


def apply_channel(ch: CollisionChannel, rho: np.ndarray) -> np.ndarray:
    """Apply the collision map through its superoperator."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise DimensionError(f"system state must be 4x4, got {rho.shape}")
    return unvec(ch.superoperator @ vec(rho))


def apply_channel_direct(ch: CollisionChannel, rho: np.ndarray) -> np.ndarray:
    """Apply the collision map as ``Tr_B[U (rho x rho'_B) U^dagger]``."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise DimensionError(f"system state must be 4x4, got {rho.shape}")
    return _trace_out_bath(ch.joint_state_after(rho))


def choi_matrix(ch: CollisionChannel) -> np.ndarray:
    """Choi matrix ``sum_jk E_jk x Phi(E_jk)``."""
    c = np.zeros((16, 16), dtype=complex)
    for j in range(4):
        for k in range(4):
            e = np.zeros((4, 4), dtype=complex)
            e[j, k] = 1.0
            c += np.kron(e, apply_channel(ch, e))
    return c


@dataclass(frozen=True)
class SteadyStateResult:
    state: np.ndarray = field(repr=False)
    residual: float
    spectral_gap: float
    method: str  # "spectral" or "power-iteration"


def _normalise(rho: np.ndarray) -> np.ndarray:
    rho = hermitize(rho)
    return rho / np.trace(rho).real


def steady_state(ch: CollisionChannel, cross_check: bool = False) -> SteadyStateResult:
    """Unique fixed point of the collision map from its spectrum.

    With ``cross_check`` the result is compared against power iteration
    and a ``NonConvergence`` is raised if the two disagree beyond 1e-9.
    """
    w, v = np.linalg.eig(ch.superoperator)
    k = int(np.argmin(np.abs(w - 1)))
    others = np.abs(np.delete(w, k))
    if abs(w[k] - 1) > DEGENERACY_TOL or np.any(others > 1 - DEGENERACY_TOL):
        raise DegenerateSteadyState(
            f"no isolated unit eigenvalue (closest {w[k]:.3e}, next modulus {others.max():.12f})"
        )
    rho = _normalise(unvec(v[:, k]))
    residual = _residual(ch, rho)
    if residual > STEADY_RESIDUAL:
        rho = _polish(ch, rho)
        residual = _residual(ch, rho)
    result = SteadyStateResult(rho, residual, float(1 - others.max()), "spectral")
    if cross_check:
        other = power_iteration(ch)
        diff = np.max(np.abs(other.state - rho))
        if diff > 1e-9:
            raise NonConvergence(f"spectral and power-iteration steady states differ by {diff:.3e}")
    return result


def _residual(ch: CollisionChannel, rho: np.ndarray) -> float:
    return float(np.max(np.abs(apply_channel(ch, rho) - rho)))


def _polish(ch: CollisionChannel, rho: np.ndarray) -> np.ndarray:
    # (S - 1) v = 0 with the trace row imposing Tr rho = 1
    a = ch.superoperator - np.eye(16)
    a[0] = vec(np.eye(4))
    b = np.zeros(16, dtype=complex)
    b[0] = 1.0
    return _normalise(unvec(np.linalg.solve(a, b)))


def power_iteration(
    ch: CollisionChannel,
    rho0: np.ndarray | None = None,
    tol: float = STEADY_RESIDUAL,
    max_iter: int = POWER_MAX_ITER,
) -> SteadyStateResult:
    """Repeated collisions starting from the maximally mixed state."""
    s = ch.superoperator
    x = vec(np.eye(4) / 4 if rho0 is None else rho0).astype(complex)
    for _ in range(max_iter):
        y = s @ x
        if np.max(np.abs(y - x)) <= tol * 1e-2:
            x = y
            break
        x = y
    rho = _normalise(unvec(x))
    residual = _residual(ch, rho)
    if residual > tol:
        raise NonConvergence(f"power iteration stalled at residual {residual:.3e}")
    return SteadyStateResult(rho, residual, float("nan"), "power-iteration")


# -- continuous limit ---------------------------------------------------------

_SP1, _SP2 = embed(SP, 0, 2), embed(SP, 1, 2)
_SM1, _SM2 = embed(SM, 0, 2), embed(SM, 1, 2)


@dataclass(frozen=True)
class LindbladGenerator:
    """``-i[H, .] + sum_k r_k L_{a_k} + c (M(s+1, s-2) + M(s-2, s+1) + h.c.)``."""

    hamiltonian: np.ndarray = field(repr=False)
    dissipators: tuple = field(repr=False)  # ((rate, jump operator), ...)
    cross_coefficient: float = 0.0


def lindblad_generator(p: ModelParams, phi: float = 0.0) -> LindbladGenerator:
    g = p.gamma
    dissipators = (
        (g * (1 + p.n1), _SM1),
        (g * p.n1, _SP1),
        (g * (1 + p.n2), _SM2),
        (g * p.n2, _SP2),
    )
    cross = g * phi * (p.n2 - p.n1) / math.sqrt((1 + 2 * p.n1) * (1 + 2 * p.n2))
    return LindbladGenerator(system_hamiltonian(p), dissipators, cross)


def _lindblad_term(a: np.ndarray, rho: np.ndarray) -> np.ndarray:
    ad = dag(a)
    ada = ad @ a
    return 2 * a @ rho @ ad - ada @ rho - rho @ ada


def _m_term(a: np.ndarray, b: np.ndarray, rho: np.ndarray) -> np.ndarray:
    ba = b @ a
    return 2 * a @ rho @ b - ba @ rho - rho @ ba


def lindblad_rhs(g: LindbladGenerator, rho: np.ndarray) -> np.ndarray:
    h = g.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for rate, a in g.dissipators:
        if rate:
            out = out + rate * _lindblad_term(a, rho)
    if g.cross_coefficient:
        # "+ h.c." taken as the linear map rho -> x(rho^dagger)^dagger, so the
        # generator stays linear on non-Hermitian inputs (matrix units)
        def x(r):
            return _m_term(_SP1, _SM2, r) + _m_term(_SM2, _SP1, r)

        out = out + g.cross_coefficient * (x(rho) + dag(x(dag(rho))))
    return out


def lindblad_matrix(g: LindbladGenerator) -> np.ndarray:
    """Generator as a 16x16 matrix on column-stacked states."""
    cols = []
    for n in range(16):
        e = np.zeros(16, dtype=complex)
        e[n] = 1.0
        cols.append(vec(lindblad_rhs(g, unvec(e))))
    return np.stack(cols, axis=1)


def lindblad_steady_state(g: LindbladGenerator) -> np.ndarray:
    """Null vector of the generator, Hermitised and trace-normalised."""
    m = lindblad_matrix(g)
    _, s, vh = np.linalg.svd(m)
    scale = max(s[0], 1.0)
    if s[-2] <= DEGENERACY_TOL * scale:
        raise DegenerateSteadyState(f"generator null space is degenerate (s = {s[-2:]})")
    rho = _normalise(unvec(vh[-1].conj()))
    residual = float(np.max(np.abs(lindblad_rhs(g, rho))))
    if residual > STEADY_RESIDUAL:
        a = m.copy()
        a[0] = vec(np.eye(4))
        b = np.zeros(16, dtype=complex)
        b[0] = 1.0
        rho = _normalise(unvec(np.linalg.solve(a, b)))
    return rho


def integrate_lindblad(
    g: LindbladGenerator, rho0: np.ndarray, t_final: float, dt: float | None = None
) -> np.ndarray:
    """Fixed-step RK4 integration up to ``t_final``; default step ``0.01/gamma``."""
    rate = max([r for r, _ in g.dissipators] + [1.0])
    max_dt = 0.01 / rate
    dt = max_dt if dt is None else min(dt, max_dt)
    steps = max(1, math.ceil(t_final / dt))
    h = t_final / steps
    rho = np.asarray(rho0, dtype=complex)
    for _ in range(steps):
        k1 = lindblad_rhs(g, rho)
        k2 = lindblad_rhs(g, rho + 0.5 * h * k1)
        k3 = lindblad_rhs(g, rho + 0.5 * h * k2)
        k4 = lindblad_rhs(g, rho + h * k3)
        rho = rho + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho
