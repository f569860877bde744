import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from qcollide.linalg import (
    I2,
    SX,
    SY,
    SZ,
    DimensionError,
    NotHermitianError,
    dag,
    embed,
    hermitian_eig,
    is_density_matrix,
    is_unitary,
    kron,
    partial_trace,
    relative_entropy,
    trace_distance,
    unitary_exp,
    von_neumann_entropy,
)
from qcollide.model import ModelParams, system_hamiltonian, thermal_qubit, total_hamiltonian

seeds = st.integers(0, 2**32 - 1)


def test_kron_examples():
    assert np.array_equal(kron(I2, I2), np.eye(4))
    assert np.array_equal(kron(SZ, I2), np.diag([1, 1, -1, -1]))
    ket00 = np.array([1, 0, 0, 0])
    assert np.array_equal(kron(SX, SX) @ ket00, [0, 0, 0, 1])


def test_embed_matches_kron():
    assert np.array_equal(embed(SY, 2, 4), kron(I2, I2, SY, I2))


def test_partial_trace_examples():
    rng = np.random.default_rng(3)
    a, b = oracles.random_density(rng, 2), oracles.random_density(rng, 2)
    assert np.allclose(partial_trace(kron(a, b), [0], (2, 2)), a, atol=1e-14)
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert np.allclose(partial_trace(np.outer(bell, bell), [0], (2, 2)), I2 / 2, atol=1e-15)


def test_partial_trace_rejects_bad_layout():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4), [0], (2, 3))
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4), [2], (2, 2))


@given(seeds, st.sampled_from([[0], [1], [2], [0, 2], [2, 0], [1, 3], [3, 1, 0]]))
def test_partial_trace_against_loops(seed, keep):
    rho = oracles.random_density(np.random.default_rng(seed), 16)
    assert np.allclose(partial_trace(rho, keep, (2, 2, 2, 2)), oracles.ptrace_loops(rho, keep, (2, 2, 2, 2)), atol=1e-13)


@given(seeds)
def test_partial_trace_complementary_slots_keep_trace(seed):
    rho = oracles.random_density(np.random.default_rng(seed), 16)
    for keep in ([0, 1], [2, 3]):
        assert abs(np.trace(partial_trace(rho, keep, (2, 2, 2, 2))) - 1) <= 1e-12


def test_eig_examples():
    w, _ = hermitian_eig(SZ)
    assert np.allclose(w, [-1, 1])
    w, v = hermitian_eig(SX)
    assert np.allclose(w, [-1, 1])
    minus, plus = np.array([1, -1]) / math.sqrt(2), np.array([1, 1]) / math.sqrt(2)
    assert abs(abs(v[:, 0] @ minus) - 1) < 1e-14 and abs(abs(v[:, 1] @ plus) - 1) < 1e-14
    hs = system_hamiltonian(ModelParams(B1=0.0, B2=0.0))
    assert np.allclose(hermitian_eig(hs)[0], [-3, 1, 1, 1], atol=1e-13)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]], dtype=complex))


@given(seeds)
def test_eig_round_trip(seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    m = g + dag(g)
    w, v = hermitian_eig(m)
    assert np.max(np.abs((v * w) @ dag(v) - m)) <= 1e-10


def test_unitary_exp_examples():
    assert np.allclose(unitary_exp(SX, 0.0), I2)
    assert np.allclose(unitary_exp(SZ, math.pi), -I2, atol=1e-15)


@given(seeds)
def test_unitary_exp_conserves_total_energy(seed):
    p = ModelParams()
    h = total_hamiltonian(p)
    rho = oracles.random_density(np.random.default_rng(seed), 16)
    u = unitary_exp(h, p.tau)
    assert is_unitary(u)
    before = np.trace(h @ rho).real
    after = np.trace(h @ u @ rho @ dag(u)).real
    assert abs(after - before) <= 1e-12


def test_entropy_examples():
    assert von_neumann_entropy(np.diag([1.0, 0, 0, 0])) == 0.0
    assert von_neumann_entropy(I2 / 2) == pytest.approx(math.log(2), abs=1e-15)
    # oracle: Shannon entropy of the thermal populations at n=1
    expected = oracles.shannon([1 / 3, 2 / 3])
    assert expected == pytest.approx(0.6365141682948128, abs=1e-15)
    assert von_neumann_entropy(thermal_qubit(1.0)) == pytest.approx(expected, abs=1e-14)


@given(seeds)
def test_entropy_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho, u = oracles.random_density(rng, 4), oracles.random_unitary(rng, 4)
    assert abs(von_neumann_entropy(u @ rho @ dag(u)) - von_neumann_entropy(rho)) <= 1e-10


def test_relative_entropy_examples():
    rng = np.random.default_rng(0)
    rho = oracles.random_density(rng, 4)
    assert abs(relative_entropy(rho, rho)) <= 1e-12
    expected = oracles.kl([0.5, 0.5], [1 / 3, 2 / 3])
    assert expected == pytest.approx(0.0588915178, abs=1e-10)
    assert relative_entropy(I2 / 2, np.diag([1 / 3, 2 / 3])) == pytest.approx(expected, abs=1e-14)
    assert relative_entropy(np.diag([1.0, 0]), np.diag([0, 1.0])) == math.inf


def test_relative_entropy_shape_mismatch():
    with pytest.raises(DimensionError):
        relative_entropy(np.eye(2) / 2, np.eye(4) / 4)


def test_klein_inequality_1000_pairs():
    rng = np.random.default_rng(11)
    worst = min(relative_entropy(oracles.random_density(rng), oracles.random_density(rng)) for _ in range(1000))
    assert worst >= 0.0


@given(seeds)
def test_relative_entropy_commuting_matches_kl(seed):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
    assert relative_entropy(np.diag(p), np.diag(q)) == pytest.approx(oracles.kl(p, q), abs=1e-12)


def test_density_checks_and_trace_distance():
    assert is_density_matrix(I2 / 2)
    assert not is_density_matrix(np.diag([1.5, -0.5]))
    assert not is_density_matrix(np.eye(2))
    assert trace_distance(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(1.0)
