"""Dense complex linear algebra on qubit registers.

Conventions: qubit 0 is the most significant bit of a basis index, so
``|b0 b1 ... b_{n-1}>`` lives at ``sum(b_i * 2**(n-1-i))``. Four-body
collision registers are ordered ``(1, 2, L, R)``.
"""
from __future__ import annotations

import numpy as np

HERMITIAN_ATOL = 1e-12
RECONSTRUCT_ATOL = 1e-10
PSD_CLAMP = 1e-10
# eigenvalues this small are indistinguishable from eigensolver rounding
ZERO_FLOOR = 1e-15

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


class NumericalError(ArithmeticError):
    """A numerical contract was violated (PSD, degeneracy, convergence)."""


class NotHermitianError(NumericalError, ValueError):
    pass


class NotPSDError(NumericalError, ValueError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


def kron(*ops):
    """Kronecker product of any number of matrices or vectors, left to right."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def n_qubits(dim):
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def is_hermitian(m, atol=HERMITIAN_ATOL):
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.abs(m - m.conj().T).max(initial=0.0) <= atol


def _check_hermitian(m):
    m = np.asarray(m)
    m = m.astype(complex if np.iscomplexobj(m) else float, copy=False)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {m.shape}")
    dev = np.abs(m - m.conj().T).max(initial=0.0)
    if dev > HERMITIAN_ATOL:
        raise NotHermitianError(f"matrix is not Hermitian: max |M - M^dag| = {dev:.3e}")
    return m


def jacobi_eigh(m, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Each off-diagonal pair ``(p, q)`` is annihilated by a complex Givens
    rotation; sweeps repeat until the off-diagonal Frobenius norm drops
    below ``tol`` times the full norm. Returns ascending eigenvalues and
    the column eigenvectors, like :func:`numpy.linalg.eigh`.
    """
    a = _check_hermitian(m).astype(complex)
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                # real symmetric 2x2 problem after removing the phase of a[p, q]
                theta = 0.5 * np.arctan2(2 * mag, (a[q, q] - a[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                # columns p, q of the unitary rotation
                gp = np.array([c, -s * np.conj(phase)])
                gq = np.array([s, c * np.conj(phase)])
                cols = a[:, [p, q]]
                a[:, p] = cols @ gp
                a[:, q] = cols @ gq
                rows = a[[p, q], :]
                a[p, :] = gp.conj() @ rows
                a[q, :] = gq.conj() @ rows
                a[p, q] = a[q, p] = 0.0
                vc = v[:, [p, q]]
                v[:, p] = vc @ gp
                v[:, q] = vc @ gq
    else:
        raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eig(m, method="lapack"):
    """Eigen-decompose a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues in descending
    order and eigenvectors as the matching columns of a unitary matrix.
    ``method="jacobi"`` uses :func:`jacobi_eigh`; the default defers to LAPACK.
    """
    m = _check_hermitian(m)
    if method == "lapack":
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    elif method == "jacobi":
        w, v = jacobi_eigh(m)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return w[::-1].copy(), v[:, ::-1].copy()


def unitary_from_hamiltonian(h, t):
    """``exp(-i h t)`` through the spectral decomposition of ``h``."""
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def hermitian_function(m, fn, psd=False):
    """Apply ``fn`` to the spectrum of a Hermitian matrix.

    With ``psd=True`` eigenvalues in ``[-PSD_CLAMP, 0)`` are set to zero and
    anything more negative raises :class:`NotPSDError`.
    """
    w, v = hermitian_eig(m)
    if psd:
        w = clamp_psd(w)
    return (v * fn(w)) @ v.conj().T


def clamp_psd(eigenvalues):
    w = np.asarray(eigenvalues, dtype=float)
    if w.size and w.min() < -PSD_CLAMP:
        raise NotPSDError(f"negative eigenvalue {w.min():.3e} below -{PSD_CLAMP:g}", float(w.min()))
    return np.where(w < 0, 0.0, w)


def sqrtm_psd(m, floor=ZERO_FLOOR):
    """Principal square root of a PSD matrix.

    Eigenvalues below ``floor`` (relative to the largest) are zeroed so that
    rounding noise in a null space does not reappear as ``sqrt(eps)``.
    """
    w, v = hermitian_eig(m)
    w = clamp_psd(w)
    w = np.where(w <= floor * max(w[0], 1.0), 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def _normalize_keep(keep, n):
    keep = [int(k) for k in keep]
    if not keep:
        raise ValueError("keep set must be nonempty")
    if len(set(keep)) != len(keep):
        raise ValueError(f"keep indices must be distinct, got {keep}")
    bad = [k for k in keep if not 0 <= k < n]
    if bad:
        raise ValueError(f"qubit indices {bad} out of range for {n} qubits")
    return keep


def partial_trace(rho, keep):
    """Reduce a density matrix onto the qubits listed in ``keep``.

    The kept qubits appear in the output in the order given, so
    ``keep=(3, 2)`` also exchanges their roles.
    """
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits(rho.shape[0])
    keep = _normalize_keep(keep, n)
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    t = np.transpose(t, keep + drop + [n + q for q in keep] + [n + q for q in drop])
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    return np.einsum("ajbj->ab", t.reshape(dk, dd, dk, dd))


def embed(op, targets, n):
    """Lift an operator on ``len(targets)`` qubits to an ``n``-qubit register."""
    op = np.asarray(op, dtype=complex)
    targets = _normalize_keep(targets, n)
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not act on {k} qubits")
    rest = [q for q in range(n) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex)).reshape((2,) * (2 * n))
    # axes of ``full`` are ordered targets + rest; move them back to 0..n-1
    order = targets + rest
    perm = [order.index(q) for q in range(n)]
    full = np.transpose(full, perm + [n + p for p in perm])
    return full.reshape(2**n, 2**n)


def permute_qubits(op, order):
    """Reorder the qubits of an operator: new qubit ``i`` is old qubit ``order[i]``."""
    op = np.asarray(op, dtype=complex)
    n = n_qubits(op.shape[0])
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} qubits")
    if op.ndim == 1:
        return np.transpose(op.reshape((2,) * n), order).reshape(-1)
    t = op.reshape((2,) * (2 * n))
    return np.transpose(t, order + [n + q for q in order]).reshape(2**n, 2**n)


def projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def check_density(rho, atol=HERMITIAN_ATOL):
    """Validate the density-matrix invariants and return ``rho`` as complex."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    n_qubits(rho.shape[0])
    dev = np.abs(rho - rho.conj().T).max()
    if dev > atol:
        raise NotHermitianError(f"density matrix not Hermitian (deviation {dev:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > atol:
        raise NumericalError(f"density matrix trace {tr.real:.15g} != 1")
    clamp_psd(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))
    return rho
