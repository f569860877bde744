"""Hamiltonians, bath states and the special bath unitaries of the machine.

Slots of the full space are ordered ``(S1, S2, A1, A2)``: the two system
qubits followed by the two flying (bath) qubits.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from functools import lru_cache, wraps
from pathlib import Path

import numpy as np

from .linalg import I2, SX, SY, SZ, DimensionError, dag, embed, is_unitary, kron, unitary_exp

PARAM_KEYS = ("J", "Delta", "B1", "B2", "gamma", "n1", "n2", "tau")


def _frozen(fn):
    """Cache a constructor per parameter set; cached arrays are made read-only."""

    @wraps(fn)
    @lru_cache(maxsize=256)
    def wrapper(*args):
        out = fn(*args)
        for a in out if isinstance(out, tuple) else (out,):
            a.setflags(write=False)
        return out

    return wrapper


@dataclass(frozen=True)
class ModelParams:
    """Physical scalars of the machine.

    Defaults are the parameter set of the partial-swap sweep
    (``Delta=1, gamma=1, B1=0.1, B2=0.3, n1=0.1, n2=2, tau=0.1``).
    """

    J: float = 1.0
    Delta: float = 1.0
    B1: float = 0.1
    B2: float = 0.3
    gamma: float = 1.0
    n1: float = 0.1
    n2: float = 2.0
    tau: float = 0.1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{f.name} must be a finite number, got {v!r}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("thermal occupations must be non-negative")

    @property
    def betas(self) -> tuple[float | None, float | None]:
        """Inverse temperatures ``ln(1 + 1/n) / (2B)``; ``None`` where undefined."""
        return (_beta(self.n1, self.B1), _beta(self.n2, self.B2))

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    def dumps(self) -> str:
        return "".join(f"{k} = {getattr(self, k)!r}\n" for k in PARAM_KEYS)

    @classmethod
    def loads(cls, text: str) -> "ModelParams":
        return cls(**parse_config(text))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "ModelParams":
        return cls.loads(Path(path).read_text())


def _beta(n: float, b: float) -> float | None:
    if n <= 0 or b <= 0:
        return None
    return math.log1p(1.0 / n) / (2.0 * b)


def parse_config(text: str) -> dict[str, float]:
    """Parse a flat ``key = value`` file. ``#`` starts a comment."""
    out: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in PARAM_KEYS:
            raise ValueError(f"line {lineno}: unknown parameter {key!r}")
        out[key] = float(value)
    return out


@_frozen
def system_hamiltonian(p: ModelParams) -> np.ndarray:
    """XXZ Hamiltonian of the two system qubits with local fields."""
    h = p.J * (kron(SX, SX) + kron(SY, SY) + p.Delta * kron(SZ, SZ))
    return h + p.B1 * kron(SZ, I2) + p.B2 * kron(I2, SZ)


@_frozen
def bath_hamiltonian(p: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Local bath Hamiltonians ``(H_B1, H_B2, H_B)`` on the flying-qubit pair."""
    hb1 = p.B1 * kron(SZ, I2)
    hb2 = p.B2 * kron(I2, SZ)
    return hb1, hb2, hb1 + hb2


def coupling_strengths(p: ModelParams) -> tuple[float, float]:
    return tuple(math.sqrt(p.gamma * (2 * n + 1) / (2 * p.tau)) for n in (p.n1, p.n2))


@_frozen
def interaction_hamiltonian(p: ModelParams) -> np.ndarray:
    """Exchange coupling between each system qubit and its flying qubit (16x16)."""
    h = np.zeros((16, 16), dtype=complex)
    for i, g in enumerate(coupling_strengths(p)):
        for pauli in (SX, SY):
            h += g * embed(pauli, i, 4) @ embed(pauli, i + 2, 4)
    return h


@_frozen
def total_hamiltonian(p: ModelParams) -> np.ndarray:
    """``H_S + H_B + H_SB`` on the full ``(S1, S2, A1, A2)`` space."""
    hb = bath_hamiltonian(p)[2]
    return kron(system_hamiltonian(p), np.eye(4)) + kron(np.eye(4), hb) + interaction_hamiltonian(p)


def thermal_qubit(n: float) -> np.ndarray:
    """Thermal flying-qubit state at occupation ``n``."""
    if n < 0:
        raise ValueError(f"occupation must be non-negative, got {n}")
    return np.diag([n / (1 + 2 * n), (1 + n) / (1 + 2 * n)]).astype(complex)


@_frozen
def bath_product_state(p: ModelParams) -> np.ndarray:
    return kron(thermal_qubit(p.n1), thermal_qubit(p.n2))


_SWAP_GENERATOR = kron(SX, SY) - kron(SY, SX)


def partial_swap(phi: float) -> np.ndarray:
    """``exp(-i phi/2 (sx1 sy2 - sy1 sx2))``; the total swap at ``phi = pi/2``."""
    return unitary_exp(_SWAP_GENERATOR, phi / 2)


def correlated_bath_state(p: ModelParams, u: np.ndarray) -> np.ndarray:
    """Prepared bath pair ``U rho_B U^dagger``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise DimensionError(f"bath unitary must be 4x4, got {u.shape}")
    if not is_unitary(u):
        raise ValueError("bath preparation operator is not unitary")
    return u @ bath_product_state(p) @ dag(u)


def effective_population(p: ModelParams, phi: float, i: int) -> float:
    """Thermal occupation of flying qubit ``i`` (1 or 2) after the partial swap."""
    if i not in (1, 2):
        raise ValueError(f"qubit index must be 1 or 2, got {i}")
    n1, n2 = p.n1, p.n2
    s = (-1) ** i * (n2 - n1) * math.cos(2 * phi)
    return 0.5 * (n1 + n2 + 4 * n1 * n2 + s) / (1 + n1 + n2 - s)


# population vector after each operation, as indices into (p1, p2, p3, p4)
NONCORRELATING_POPULATIONS = {
    "I": (0, 1, 2, 3),
    "II": (0, 2, 1, 3),
    "III": (1, 0, 3, 2),
    "IV": (1, 3, 0, 2),
    "V": (2, 0, 3, 1),
    "VI": (2, 3, 0, 1),
    "VII": (3, 1, 2, 0),
    "VIII": (3, 2, 1, 0),
}
LABELS = tuple(NONCORRELATING_POPULATIONS)


def noncorrelating_unitary(label: str) -> np.ndarray:
    """One of the eight population-permuting bath unitaries, labelled I..VIII."""
    swap = partial_swap(math.pi / 2)
    x1, x2 = kron(SX, I2), kron(I2, SX)
    table = {
        "I": np.eye(4, dtype=complex),
        "II": swap,
        "III": x2,
        "IV": swap @ x2,
        "V": swap @ x1,
        "VI": x1,
        "VII": swap @ x1 @ x2,
        "VIII": x1 @ x2,
    }
    try:
        return table[label]
    except KeyError:
        raise ValueError(f"unknown operation label {label!r}; expected one of {LABELS}") from None


def permutation_unitary(perm) -> np.ndarray:
    """Permutation matrix ``P`` with ``diag(P diag(p) P^T) = p[perm]``."""
    perm = tuple(int(k) for k in perm)
    if sorted(perm) != [0, 1, 2, 3]:
        raise ValueError(f"not a permutation of 0..3: {perm}")
    u = np.zeros((4, 4), dtype=complex)
    for row, col in enumerate(perm):
        u[row, col] = 1.0
    return u
