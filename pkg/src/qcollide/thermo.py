"""Work, heat and entropy production at steady state, partial and complete scenarios.

Sign convention: positive work or heat is energy flowing into the system.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .correlations import mutual_information
from .dynamics import (
    CollisionChannel,
    SteadyStateResult,
    _trace_out_bath,
    _trace_out_system,
    apply_channel,
    build_channel,
    steady_state,
)
from .linalg import dag, relative_entropy
from .model import (
    ModelParams,
    bath_hamiltonian,
    bath_product_state,
    correlated_bath_state,
    interaction_hamiltonian,
    system_hamiltonian,
)
from .tolerances import MODE_EPS, STEADY_RESIDUAL

MODES = ("engine", "refrigerator", "accelerator", "heater", "degenerate")


class NotSteadyError(ValueError):
    pass


@dataclass(frozen=True)
class Machine:
    """Every state of one steady-state configuration.

    ``bath_prepared`` is the correlated pair before the collision,
    ``joint_before = rho_S x bath_prepared`` and ``joint_after`` its image
    under the collision unitary; ``bath_after`` is the pair after the
    collision.
    """

    params: ModelParams
    bath_unitary: np.ndarray = field(repr=False)
    channel: CollisionChannel = field(repr=False)
    steady: SteadyStateResult = field(repr=False)
    joint_before: np.ndarray = field(repr=False)
    joint_after: np.ndarray = field(repr=False)

    @property
    def rho_s(self) -> np.ndarray:
        return self.steady.state

    @property
    def bath_thermal(self) -> np.ndarray:
        return bath_product_state(self.params)

    @property
    def bath_prepared(self) -> np.ndarray:
        return self.channel.bath_state

    @property
    def bath_after(self) -> np.ndarray:
        return _trace_out_system(self.joint_after)

    @property
    def system_after(self) -> np.ndarray:
        return _trace_out_bath(self.joint_after)


def solve_machine(p: ModelParams, u: np.ndarray, cross_check: bool = False) -> Machine:
    """Prepare the bath with ``u``, find the steady state and the joint states."""
    ch = build_channel(p, correlated_bath_state(p, u))
    ss = steady_state(ch, cross_check=cross_check)
    before = np.kron(ss.state, ch.bath_state)
    after = ch.collision_unitary @ before @ dag(ch.collision_unitary)
    return Machine(p, np.asarray(u, dtype=complex), ch, ss, before, after)


def _require_steady(m: Machine) -> None:
    res = float(np.max(np.abs(apply_channel(m.channel, m.rho_s) - m.rho_s)))
    if res > STEADY_RESIDUAL:
        raise NotSteadyError(f"system state is not stationary (residual {res:.3e})")


def _bath_change(m: Machine) -> np.ndarray:
    return m.bath_after - m.bath_prepared


def partial_work(m: Machine) -> float:
    """``Tr[(H_S + H_B)(rho'_SB - rho_SB)]``."""
    _require_steady(m)
    hs = system_hamiltonian(m.params)
    hb = bath_hamiltonian(m.params)[2]
    d_s = m.system_after - m.rho_s
    return float(np.real(np.trace(hs @ d_s) + np.trace(hb @ _bath_change(m))))


def partial_heat(m: Machine, i: int) -> float:
    """``-Tr[H_Bi (rho'_SB - rho_SB)]`` for bath ``i`` in {1, 2}."""
    _require_steady(m)
    hbi = _local_bath(m.params, i)
    return float(-np.real(np.trace(hbi @ _bath_change(m))))


def interaction_energy_change(m: Machine) -> float:
    """``Tr[H_SB (rho'_SB - rho_SB)]``; equals ``-W_partial`` by energy conservation."""
    h = interaction_hamiltonian(m.params)
    return float(np.real(np.trace(h @ (m.joint_after - m.joint_before))))


def unitary_work(p: ModelParams, u: np.ndarray) -> float:
    """Work ``Tr[H_B(U rho_B U^dagger - rho_B)]`` spent on preparing the bath pair."""
    hb = bath_hamiltonian(p)[2]
    return float(np.real(np.trace(hb @ (correlated_bath_state(p, u) - bath_product_state(p)))))


def complete_heat(m: Machine, i: int) -> float:
    """``-Tr[H_Bi (rho'_SB - rho_S x rho_B)]`` for bath ``i`` in {1, 2}."""
    _require_steady(m)
    hbi = _local_bath(m.params, i)
    return float(-np.real(np.trace(hbi @ (m.bath_after - m.bath_thermal))))


def _local_bath(p: ModelParams, i: int) -> np.ndarray:
    if i not in (1, 2):
        raise ValueError(f"bath index must be 1 or 2, got {i}")
    return bath_hamiltonian(p)[i - 1]


def entropy_production(m: Machine, scenario: str) -> float:
    """``I(rho'_SB) + D(rho''_B || reference)``; reference is ``rho'_B`` (partial) or ``rho_B`` (complete).

    Returns ``inf`` if the post-collision bath leaves the reference support.
    """
    if scenario == "partial":
        ref = m.bath_prepared
    elif scenario == "complete":
        ref = m.bath_thermal
    else:
        raise ValueError(f"scenario must be 'partial' or 'complete', got {scenario!r}")
    mi = mutual_information(m.joint_after, (4, 4), (0,))
    return mi + relative_entropy(m.bath_after, ref)


def hot_bath(p: ModelParams) -> int:
    """Index of the hotter bath: by temperature when both are defined, else by occupation."""
    b1, b2 = p.betas
    if b1 is not None and b2 is not None and b1 != b2:
        return 1 if b1 < b2 else 2
    return 1 if p.n1 > p.n2 else 2


@dataclass(frozen=True)
class ThermoRecord:
    w_partial: float
    q1_partial: float
    q2_partial: float
    w_u: float
    w_complete: float
    q1_complete: float
    q2_complete: float
    sigma_partial: float
    sigma_complete: float
    hot: int = 2

    @property
    def mode_partial(self) -> str:
        return classify_mode(self, "partial")

    @property
    def mode_complete(self) -> str:
        return classify_mode(self, "complete")

    def scenario(self, scenario: str) -> tuple[float, float, float]:
        """``(W, Q1, Q2)`` of one scenario."""
        if scenario == "partial":
            return self.w_partial, self.q1_partial, self.q2_partial
        if scenario == "complete":
            return self.w_complete, self.q1_complete, self.q2_complete
        raise ValueError(f"unknown scenario {scenario!r}")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["mode_partial"] = self.mode_partial
        d["mode_complete"] = self.mode_complete
        return d


CSV_COLUMNS = (
    "scenario",
    "phi_or_seed",
    "W_partial",
    "Q1_partial",
    "Q2_partial",
    "W_U",
    "W_complete",
    "Q1_complete",
    "Q2_complete",
    "Sigma_partial",
    "Sigma_complete",
    "mode_partial",
    "mode_complete",
)


def csv_row(rec: ThermoRecord, scenario: str, tag) -> list:
    return [
        scenario,
        tag,
        rec.w_partial,
        rec.q1_partial,
        rec.q2_partial,
        rec.w_u,
        rec.w_complete,
        rec.q1_complete,
        rec.q2_complete,
        rec.sigma_partial,
        rec.sigma_complete,
        rec.mode_partial,
        rec.mode_complete,
    ]


def thermo_record(m: Machine) -> ThermoRecord:
    _require_steady(m)
    p = m.params
    hb1, hb2, hb = bath_hamiltonian(p)
    d_prep = _bath_change(m)
    d_full = m.bath_after - m.bath_thermal
    q1p = -np.real(np.trace(hb1 @ d_prep))
    q2p = -np.real(np.trace(hb2 @ d_prep))
    hs = system_hamiltonian(p)
    wp = np.real(np.trace(hs @ (m.system_after - m.rho_s)) + np.trace(hb @ d_prep))
    wu = np.real(np.trace(hb @ (m.bath_prepared - m.bath_thermal)))
    return ThermoRecord(
        w_partial=float(wp),
        q1_partial=float(q1p),
        q2_partial=float(q2p),
        w_u=float(wu),
        w_complete=float(wp + wu),
        q1_complete=float(-np.real(np.trace(hb1 @ d_full))),
        q2_complete=float(-np.real(np.trace(hb2 @ d_full))),
        sigma_partial=entropy_production(m, "partial"),
        sigma_complete=entropy_production(m, "complete"),
        hot=hot_bath(p),
    )


def evaluate(p: ModelParams, u: np.ndarray, cross_check: bool = False) -> tuple[Machine, ThermoRecord]:
    m = solve_machine(p, u, cross_check=cross_check)
    return m, thermo_record(m)


def classify_mode(rec: ThermoRecord, scenario: str, eps: float = MODE_EPS) -> str:
    """Operating mode from the signs of work and heats."""
    w, q1, q2 = rec.scenario(scenario)
    q_hot, q_cold = (q1, q2) if rec.hot == 1 else (q2, q1)
    if w < -eps:
        return "engine"
    if w > eps:
        if q_cold > eps:
            return "refrigerator"
        if q_hot > eps:
            return "accelerator"
        if q_hot < -eps:
            return "heater"
    return "degenerate"


@dataclass(frozen=True)
class OttoFigures:
    kind: str  # "efficiency" or "cop"
    value: float | None
    otto: float | None


def otto_figures(p: ModelParams, rec: ThermoRecord, scenario: str = "partial") -> OttoFigures:
    """Efficiency (engine) or coefficient of performance (refrigerator) next to its Otto value."""
    w, q1, q2 = rec.scenario(scenario)
    q_hot, q_cold = (q1, q2) if rec.hot == 1 else (q2, q1)
    bmin, bmax = sorted((abs(p.B1), abs(p.B2)))
    mode = classify_mode(rec, scenario)
    if mode == "engine":
        return OttoFigures("efficiency", abs(w) / q_hot, 1 - bmin / bmax if bmax else None)
    if mode == "refrigerator":
        otto = None if p.B1 == p.B2 else bmin / abs(p.B2 - p.B1)
        return OttoFigures("cop", q_cold / w, otto)
    raise ValueError(f"Otto figures need an engine or refrigerator, got {mode}")
