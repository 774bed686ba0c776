import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entx.gates import xxz_hamiltonian
from entx.qcore import (
    SX,
    SZ,
    NotHermitianError,
    NotPSDError,
    embed,
    hermitian_eig,
    jacobi_eigh,
    kron,
    partial_trace,
    permute_qubits,
    projector,
    sqrtm_psd,
    unitary_from_hamiltonian,
)
from oracles import random_density, random_hermitian

import oracles


def test_kron_identity_and_bit_flip():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    ket00 = np.array([1, 0, 0, 0])
    assert np.allclose(kron(SX, SX) @ ket00, [0, 0, 0, 1])


def test_kron_mixed_product():
    rng = np.random.default_rng(1)
    a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
    lhs = kron(a, b) @ kron(c, d)
    # entrywise 4x4 product of the two kron factors, no library kron
    rhs = np.zeros((4, 4), dtype=complex)
    ac, bd = a @ c, b @ d
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    rhs[2 * i + k, 2 * j + l] = ac[i, j] * bd[k, l]
    assert np.abs(lhs - rhs).max() < 1e-12


def test_kron_associative():
    rng = np.random.default_rng(2)
    # integer entries keep every product exact, so equality is bitwise
    a, b, c = (rng.integers(-9, 9, size=(2, 3)) + 1j * rng.integers(-9, 9, size=(2, 3)) for _ in range(3))
    assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


def test_eig_diagonal_and_sigma_x():
    w, _ = hermitian_eig(SZ)
    assert np.allclose(w, [1, -1])
    w, v = hermitian_eig(SX)
    assert np.allclose(w, [1, -1])
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    assert abs(abs(np.vdot(v[:, 0], plus)) - 1) < 1e-12
    assert abs(abs(np.vdot(v[:, 1], minus)) - 1) < 1e-12


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eig_heisenberg_triplet_singlet(method):
    w, _ = hermitian_eig(xxz_hamiltonian(1.0, 1.0), method=method)
    assert np.abs(w - [1, 1, 1, -3]).max() < 1e-12


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
@pytest.mark.parametrize("d", [2, 4, 8, 16, 32])
def test_eig_reconstruction_and_unitarity(method, d):
    rng = np.random.default_rng(d)
    h = random_hermitian(rng, d)
    w, v = hermitian_eig(h, method=method)
    assert np.all(np.diff(w) <= 0)
    assert np.abs((v * w) @ v.conj().T - h).max() < 1e-10
    assert np.abs(v.conj().T @ v - np.eye(d)).max() < 1e-10


def test_jacobi_agrees_with_lapack():
    rng = np.random.default_rng(7)
    h = random_hermitian(rng, 12)
    w_j, _ = jacobi_eigh(h)
    assert np.abs(w_j - np.linalg.eigvalsh(h)).max() < 1e-10


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError, match="not Hermitian"):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_unitary_zero_time_is_identity():
    h = random_hermitian(np.random.default_rng(3), 4)
    assert np.abs(unitary_from_hamiltonian(h, 0.0) - np.eye(4)).max() < 1e-12


def test_xy_unitary_on_single_excitations():
    t = 0.37
    u = unitary_from_hamiltonian(xxz_hamiltonian(1.0, 0.0), t)
    # 2x2 block [[0, 2], [2, 0]] on {|01>, |10>}: exp(-2it X)
    assert np.abs(u @ [0, 1, 0, 0] - [0, np.cos(2 * t), -1j * np.sin(2 * t), 0]).max() < 1e-12
    assert abs(u[0, 0] - 1) < 1e-12 and abs(u[3, 3] - 1) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(-3, 3))
def test_unitary_inverse_and_energy_conservation(seed, t):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, 8)
    u = unitary_from_hamiltonian(h, t)
    assert np.abs(u @ unitary_from_hamiltonian(h, -t) - np.eye(8)).max() < 1e-10
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    e0 = np.vdot(psi, h @ psi).real
    for s in (0.0, 0.3, 0.7, 1.1):
        phi = unitary_from_hamiltonian(h, s) @ psi
        assert abs(np.vdot(phi, h @ phi).real - e0) < 1e-10


def test_partial_trace_singlet_gives_maximally_mixed():
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert np.abs(partial_trace(projector(psi), [0]) - np.eye(2) / 2).max() < 1e-12


def test_partial_trace_product():
    rng = np.random.default_rng(4)
    a, b = random_density(rng, 2), random_density(rng, 4)
    assert np.abs(partial_trace(np.kron(a, b), [0]) - a).max() < 1e-12
    assert np.abs(partial_trace(np.kron(a, b), [1, 2]) - b).max() < 1e-12


def test_partial_trace_keeps_requested_order():
    rng = np.random.default_rng(5)
    a, b = random_density(rng, 2), random_density(rng, 2)
    assert np.abs(partial_trace(np.kron(a, b), [1, 0]) - np.kron(b, a)).max() < 1e-12


def test_partial_trace_swapping_state():
    # cos|00>|psi-> - i sin|psi->|00> on (1, 2, L, R) ordering chain first
    jt = 0.41
    psi_m = np.array([0, 1, -1, 0]) / np.sqrt(2)
    e00 = np.array([1, 0, 0, 0])
    state = np.cos(2 * jt) * np.kron(psi_m, e00) - 1j * np.sin(2 * jt) * np.kron(e00, psi_m)
    probes = partial_trace(projector(state), [2, 3])
    expected = np.cos(2 * jt) ** 2 * projector(e00) + np.sin(2 * jt) ** 2 * projector(psi_m)
    assert np.abs(probes - expected).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_partial_trace_composes_and_is_a_state(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 16)
    two_steps = partial_trace(partial_trace(rho, [0, 1, 3]), [0, 2])
    one_step = partial_trace(rho, [0, 3])
    assert np.abs(two_steps - one_step).max() < 1e-12
    assert abs(np.trace(one_step) - 1) < 1e-12
    assert np.linalg.eigvalsh(one_step).min() > -1e-10


@pytest.mark.parametrize("keep", [[], [0, 0], [4], [-1]])
def test_partial_trace_rejects_bad_keep(keep):
    with pytest.raises(ValueError):
        partial_trace(np.eye(16) / 16, keep)


def test_embed_matches_oracle_site_operators():
    got = embed(np.kron(oracles.X, oracles.Z), (3, 1), 4)
    assert np.abs(got - oracles.site_op(4, {3: oracles.X, 1: oracles.Z})).max() == 0


def test_permute_qubits_roundtrip():
    rng = np.random.default_rng(6)
    op = random_hermitian(rng, 8)
    assert np.abs(permute_qubits(permute_qubits(op, [2, 0, 1]), [1, 2, 0]) - op).max() < 1e-15


def test_sqrtm_psd_clamps_rounding_but_rejects_negative():
    rho = np.diag([0.5, 0.5, -1e-13, 0.0])
    s = sqrtm_psd(rho)
    assert np.abs(s @ s - np.diag([0.5, 0.5, 0, 0])).max() < 1e-12
    with pytest.raises(NotPSDError):
        sqrtm_psd(np.diag([1.0, -1e-6]))
