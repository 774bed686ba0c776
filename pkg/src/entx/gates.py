"""Collision Hamiltonians and the closed-form gates they generate.

Time enters only through the dimensionless area ``j_tau`` (coupling times
interaction time); for a time-dependent coupling pass its integral.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .qcore import SX, SY, SZ, embed, unitary_from_hamiltonian

MAX_SPIN_STAR_QUBITS = 12

# four-body register (1, 2, L, R)
CHAIN1, CHAIN2, PROBE_L, PROBE_R = 0, 1, 2, 3

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


class Geometry(Enum):
    PAIR_LOCAL = "pair_local"
    GLOBAL_SWAP = "global_swap"
    SPIN_STAR = "spin_star"


@dataclass(frozen=True)
class CollisionConfig:
    j_tau: float
    lam: float = 1.0
    geometry: Geometry = Geometry.PAIR_LOCAL
    chain_length: int | None = None
    spins_per_probe: int | None = None

    def __post_init__(self):
        if not np.isfinite(self.j_tau):
            raise ValueError(f"j_tau must be finite, got {self.j_tau}")
        if self.geometry is Geometry.SPIN_STAR:
            L, N = self.chain_length, self.spins_per_probe
            if L is None or N is None or N < 1:
                raise ValueError("spin-star geometry needs chain_length and spins_per_probe >= 1")
            if 2 * N > L:
                raise ValueError(f"probe subsets overlap: 2N = {2 * N} > L = {L}")
            if L + 2 > MAX_SPIN_STAR_QUBITS:
                raise ValueError(f"register of {L + 2} qubits exceeds {MAX_SPIN_STAR_QUBITS}")

    @classmethod
    def spin_star(cls, j_tau, lam, L, N):
        return cls(j_tau, lam, Geometry.SPIN_STAR, L, N)


def xxz_hamiltonian(J=1.0, lam=1.0):
    """``J (sx sx + sy sy + lam sz sz)`` on two qubits."""
    return J * (np.kron(SX, SX) + np.kron(SY, SY) + lam * np.kron(SZ, SZ))


def _pair_coupling(a, b, n, lam, J=1.0):
    return embed(xxz_hamiltonian(J, lam), (a, b), n)


def total_hamiltonian(cfg, J=1.0):
    """Probe L coupled to spin 1 and probe R to spin 2, on register (1, 2, L, R)."""
    if cfg.geometry is not Geometry.PAIR_LOCAL:
        raise ValueError(f"total_hamiltonian needs the pair-local geometry, got {cfg.geometry.value}")
    return _pair_coupling(CHAIN1, PROBE_L, 4, cfg.lam, J) + _pair_coupling(CHAIN2, PROBE_R, 4, cfg.lam, J)


def collision_unitary(lam, j_tau):
    """``exp(-i H_T t)`` at ``J t = j_tau`` for the pair-local geometry."""
    return unitary_from_hamiltonian(total_hamiltonian(CollisionConfig(j_tau, lam)), j_tau)


def partial_swap(j_t):
    """``e^{i Jt} (cos 2Jt I - i sin 2Jt SWAP)``, generated by the Heisenberg exchange."""
    return np.exp(1j * j_t) * (np.cos(2 * j_t) * np.eye(4) - 1j * np.sin(2 * j_t) * SWAP)


def iswap():
    return np.array(
        [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex
    )


def _ket_bra(out_bits, in_bits):
    m = np.zeros((16, 16), dtype=complex)
    m[int(out_bits, 2), int(in_bits, 2)] = 1.0
    return m


def global_swap_generator(J=1.0):
    """Four-body exchange operator on (1, 2, L, R), written out term by term.

    Diagonal projectors, pair exchanges, and the genuinely four-spin
    exchanges ``|0011><1100|`` and ``|1001><0110|``, each with its
    Hermitian conjugate.
    """
    h = sum(_ket_bra(b, b) for b in ("0000", "0101", "1010", "1111"))
    exchanges = [
        ("0001", "0100"),
        ("0010", "1000"),
        ("1011", "1110"),
        ("1101", "0111"),
        ("0011", "1100"),
        ("1001", "0110"),
    ]
    for out, inp in exchanges:
        term = _ket_bra(out, inp)
        h = h + term + term.conj().T
    return J * h


def global_partial_swap(j_t):
    """``e^{i Jt} (cos 2Jt I - i sin 2Jt SWAP_1L SWAP_2R)`` on (1, 2, L, R)."""
    return np.exp(1j * j_t) * (
        np.cos(2 * j_t) * np.eye(16) - 1j * np.sin(2 * j_t) * global_swap_generator()
    )


def spin_star_hamiltonian(cfg, J=1.0):
    """Each probe coupled equally to its own block of ``N`` chain spins.

    Register order is chain spins ``0..L-1`` followed by probes L and R.
    Probe L talks to the first ``N`` spins, probe R to the last ``N``.
    """
    if cfg.geometry is not Geometry.SPIN_STAR:
        raise ValueError(f"spin_star_hamiltonian needs the spin-star geometry, got {cfg.geometry.value}")
    L, N = cfg.chain_length, cfg.spins_per_probe
    n = L + 2
    h = np.zeros((2**n, 2**n), dtype=complex)
    for s in range(N):
        h += _pair_coupling(s, L, n, cfg.lam, J)
        h += _pair_coupling(L - N + s, L + 1, n, cfg.lam, J)
    return h


def pairwise_collision_hamiltonian(n, lam=1.0, J=1.0):
    """Chain spin ``i`` coupled to probe ``i`` on register (chain 0..n-1, probes 0..n-1)."""
    m = 2 * n
    h = np.zeros((2**m, 2**m), dtype=complex)
    for i in range(n):
        h += _pair_coupling(i, n + i, m, lam, J)
    return h


__all__ = [
    "CollisionConfig",
    "Geometry",
    "SWAP",
    "collision_unitary",
    "global_partial_swap",
    "global_swap_generator",
    "iswap",
    "pairwise_collision_hamiltonian",
    "partial_swap",
    "spin_star_hamiltonian",
    "total_hamiltonian",
    "xxz_hamiltonian",
]
