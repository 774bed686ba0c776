"""Independent reference computations used only by the tests.

Nothing here imports the package under test.
"""
import numpy as np

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I = np.eye(2, dtype=complex)


def site_op(L, ops):
    """Product operator with ``ops[site]`` on the given sites, identity elsewhere."""
    m = np.eye(1, dtype=complex)
    for s in range(L):
        m = np.kron(m, ops.get(s, I))
    return m


def brute_force_correlations(lam, L, boundary):
    """Dense 2^L exact diagonalization; returns (g_xx, g_zz, spectrum)."""
    bonds = [(i, i + 1) for i in range(L - 1)]
    if boundary == "periodic" and L > 2:
        bonds.append((L - 1, 0))
    h = sum(
        site_op(L, {i: X, j: X}) + site_op(L, {i: Y, j: Y}) + lam * site_op(L, {i: Z, j: Z})
        for i, j in bonds
    )
    w, v = np.linalg.eigh(h)
    g = v[:, 0]
    xx = np.mean([(g.conj() @ site_op(L, {i: X, j: X}) @ g).real for i, j in bonds])
    zz = np.mean([(g.conj() @ site_op(L, {i: Z, j: Z}) @ g).real for i, j in bonds])
    return xx / 4, zz / 4, w


def x_state_concurrence(rho):
    """Wootters concurrence of an X-shaped state from its entries."""
    r = np.asarray(rho)
    a = abs(r[1, 2]) - np.sqrt(max(r[0, 0].real * r[3, 3].real, 0.0))
    b = abs(r[0, 3]) - np.sqrt(max(r[1, 1].real * r[2, 2].real, 0.0))
    return max(0.0, 2 * a, 2 * b)


def wootters_eigvals(rho):
    """Concurrence from the non-Hermitian product rho * rho~ (textbook route)."""
    yy = np.kron(Y, Y)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(r).real)[::-1], 0, None))
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def swap_permutation(n, pairs):
    """Permutation matrix exchanging qubits in each pair, built bit by bit."""
    dim = 2**n
    m = np.zeros((dim, dim))
    for idx in range(dim):
        bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
        for a, b in pairs:
            bits[a], bits[b] = bits[b], bits[a]
        out = sum(bit << (n - 1 - q) for q, bit in enumerate(bits))
        m[out, idx] = 1
    return m


def random_unitary(rng, d):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T
