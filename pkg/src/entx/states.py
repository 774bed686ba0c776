"""State constructors: correlation-parametrized chain pairs, Bell and W
states, probe product states, and exact-diagonalization ground states."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .qcore import (
    NotPSDError,
    NumericalError,
    SX,
    SY,
    SZ,
    hermitian_eig,
    kron,
    projector,
)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)

PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
PHI_MINUS = np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)

# a PSD violation smaller than this is rounding, not a bad parameter pair
_PAIR_PSD_ATOL = 1e-12


@dataclass(frozen=True)
class CorrelationPair:
    """Nearest-neighbour correlators ``g_xx = <sx sx>/4`` and ``g_zz = <sz sz>/4``."""

    g_xx: float
    g_zz: float

    def __post_init__(self):
        for name in ("g_xx", "g_zz"):
            v = getattr(self, name)
            if not np.isfinite(v) or abs(v) > 0.25 + _PAIR_PSD_ATOL:
                raise ValueError(f"{name}={v!r} outside [-1/4, 1/4]")
        ev = pair_eigenvalues(self.g_xx, self.g_zz)
        if ev.min() < -_PAIR_PSD_ATOL:
            raise NotPSDError(
                f"(g_xx, g_zz) = ({self.g_xx}, {self.g_zz}) gives a non-PSD pair state; "
                f"eigenvalue {ev.min():.6g}",
                float(ev.min()),
            )

    @classmethod
    def diagonal(cls, g):
        return cls(g, g)

    @staticmethod
    def admissible(g_xx, g_zz):
        return abs(g_xx) <= 0.25 and abs(g_zz) <= 0.25 and pair_eigenvalues(g_xx, g_zz).min() >= -_PAIR_PSD_ATOL


def pair_eigenvalues(g_xx, g_zz):
    """Spectrum of the pair state, from an explicit 4x4 Hermitian solve."""
    return hermitian_eig(_pair_matrix(g_xx, g_zz))[0]


def _pair_matrix(g_xx, g_zz):
    d, o = 0.25 + g_zz, 0.25 - g_zz
    return np.array(
        [[d, 0, 0, 0], [0, o, 2 * g_xx, 0], [0, 2 * g_xx, o, 0], [0, 0, 0, d]],
        dtype=complex,
    )


def pair_state(c):
    """Two-spin chain state built from the correlators of ``c``."""
    if not isinstance(c, CorrelationPair):
        c = CorrelationPair(*c)
    return _pair_matrix(c.g_xx, c.g_zz)


@dataclass(frozen=True)
class ProbeAngles:
    """Bloch angles of one probe: ``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        if not 0.0 <= self.phi < 2 * np.pi:
            raise ValueError(f"phi={self.phi} outside [0, 2pi)")

    @classmethod
    def wrap(cls, theta, phi):
        """Fold arbitrary real angles onto the canonical ranges (same state up to phase)."""
        theta = float(np.mod(theta, 2 * np.pi))
        phi = float(phi)
        if theta > np.pi:
            theta = 2 * np.pi - theta
            phi += np.pi
        phi = float(np.mod(phi, 2 * np.pi))
        if phi >= 2 * np.pi:
            phi = 0.0
        return cls(theta, phi)

    def ket(self):
        return qubit_ket(self.theta, self.phi)


def qubit_ket(theta, phi):
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)


def probe_product_state(angles):
    """Tensor product of single-probe states, in list order."""
    angles = list(angles)
    if not angles:
        raise ValueError("need at least one probe")
    return kron(*[a.ket() if isinstance(a, ProbeAngles) else qubit_ket(*a) for a in angles])


_LABEL_KETS = {
    "0": KET0,
    "1": KET1,
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
}


def basis_product_state(label):
    """Product ket from a label over ``0 1 + -``, e.g. ``"01"`` or ``"++"``."""
    try:
        return kron(*[_LABEL_KETS[ch] for ch in label])
    except KeyError as exc:
        raise ValueError(f"bad probe label {label!r}; use characters from '01+-'") from exc


def basis_ket(bits):
    """Computational basis ket for a bit string such as ``"0110"``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def w_state(n):
    """Equal superposition of the ``n`` single-excitation basis states."""
    if int(n) != n or n < 2:
        raise ValueError(f"W state needs n >= 2, got {n}")
    n = int(n)
    v = np.zeros(2**n, dtype=complex)
    for i in range(n):
        v[1 << (n - 1 - i)] = 1.0
    return v / np.sqrt(n)


def density(psi):
    return projector(psi)


# ---------------------------------------------------------------------------
# exact diagonalization


def chain_bonds(L, boundary):
    if boundary not in ("open", "periodic"):
        raise ValueError(f"boundary must be 'open' or 'periodic', got {boundary!r}")
    bonds = [(i, i + 1) for i in range(L - 1)]
    # a 2-site ring would double-count its only bond
    if boundary == "periodic" and L > 2:
        bonds.append((L - 1, 0))
    return bonds


def _sector_basis(L, n_up):
    """Basis indices with ``n_up`` set bits (qubit 0 = most significant)."""
    states = []
    for ones in combinations(range(L), n_up):
        states.append(sum(1 << (L - 1 - q) for q in ones))
    return np.array(sorted(states), dtype=np.int64)


def _bit(states, q, L):
    return (states >> (L - 1 - q)) & 1


def _sector_hamiltonian(L, bonds, lam, states, J=1.0):
    """XXZ Hamiltonian restricted to one magnetization sector.

    ``sx sx + sy sy`` flips an antiparallel pair with amplitude 2;
    ``sz sz`` is diagonal with value +-1.
    """
    d = len(states)
    h = np.zeros((d, d))
    diag = np.arange(d)
    for i, j in bonds:
        bi, bj = _bit(states, i, L), _bit(states, j, L)
        h[diag, diag] += J * lam * np.where(bi == bj, 1.0, -1.0)
        flip = (1 << (L - 1 - i)) | (1 << (L - 1 - j))
        src = np.nonzero(bi != bj)[0]
        h[np.searchsorted(states, states[src] ^ flip), src] += 2.0 * J
    return h


def _bond_correlators(L, bonds, states, amps):
    """Bond-averaged ``<sx sx>`` and ``<sz sz>`` for a real/complex sector vector."""
    p = np.abs(amps) ** 2
    xx = zz = 0.0
    for i, j in bonds:
        bi, bj = _bit(states, i, L), _bit(states, j, L)
        zz += float(np.sum(p * np.where(bi == bj, 1.0, -1.0)))
        flip = (1 << (L - 1 - i)) | (1 << (L - 1 - j))
        # sx_i sx_j flips both bits; only antiparallel pairs stay in the sector
        tgt = np.searchsorted(states, states[bi != bj] ^ flip)
        xx += float(np.real(np.vdot(amps[tgt], amps[bi != bj])))
    return xx / len(bonds), zz / len(bonds)


def ground_state_correlations(lam, L, boundary="periodic", gap_tol=1e-10):
    """Nearest-neighbour ground-state correlators of the XXZ chain.

    ``H = sum_<ij> (sx sx + sy sy + lam sz sz)`` with unit coupling. The
    Hamiltonian conserves total ``sz``, so each magnetization sector is
    diagonalized separately and the global ground state taken from the
    merged spectrum. A ground space with more than one state (gap below
    ``gap_tol``) raises :class:`DegenerateGroundStateError`.
    """
    if int(L) != L:
        raise ValueError(f"L must be an integer, got {L}")
    L = int(L)
    if L % 2:
        raise ValueError(f"L={L} is odd; chain length must be even (parity rule avoids a degenerate antiferromagnetic ground state)")
    if not 2 <= L <= 12:
        raise ValueError(f"L={L} outside the supported range 2..12")
    bonds = chain_bonds(L, boundary)
    spectra = []
    for n_up in range(L + 1):
        states = _sector_basis(L, n_up)
        w, v = hermitian_eig(_sector_hamiltonian(L, bonds, lam, states))
        spectra.append((w[::-1], v[:, ::-1], states))
    energies = np.sort(np.concatenate([s[0] for s in spectra]))
    e0 = energies[0]
    degeneracy = int(np.sum(energies - e0 < gap_tol))
    if degeneracy > 1:
        raise DegenerateGroundStateError(L, boundary, lam, degeneracy)
    for w, v, states in spectra:
        if w[0] - e0 < gap_tol:
            xx, zz = _bond_correlators(L, bonds, states, v[:, 0])
            return CorrelationPair(xx / 4.0, zz / 4.0)
    raise NumericalError("ground state lost between sectors")  # unreachable


class DegenerateGroundStateError(NumericalError):
    def __init__(self, L, boundary, lam, degeneracy):
        super().__init__(
            f"ground space of the {boundary} L={L} chain at lambda={lam} is {degeneracy}-fold degenerate"
        )
        self.degeneracy = degeneracy


__all__ = [
    "CorrelationPair",
    "DegenerateGroundStateError",
    "PSI_MINUS",
    "PSI_PLUS",
    "PHI_MINUS",
    "PHI_PLUS",
    "ProbeAngles",
    "basis_ket",
    "basis_product_state",
    "chain_bonds",
    "density",
    "ground_state_correlations",
    "pair_state",
    "probe_product_state",
    "qubit_ket",
    "w_state",
    "SX",
    "SY",
    "SZ",
]
