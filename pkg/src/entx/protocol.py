"""Extraction protocols: single and repeated collisions, probe optimization,
channel fixed points, global-swap homogenization, W-state and spin-star
extraction, threshold scans and the exponential fit of repeated curves."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .gates import (
    CollisionConfig,
    collision_unitary,
    global_partial_swap,
    pairwise_collision_hamiltonian,
    spin_star_hamiltonian,
)
from .measures import (
    concurrence,
    concurrence_from_factor,
    density_factor,
    fidelity,
    signed_from_factors,
    trace_distance,
)
from .qcore import (
    SX,
    SY,
    SZ,
    NumericalError,
    check_density,
    hermitian_eig,
    kron,
    partial_trace,
    projector,
)
from .states import CorrelationPair, ProbeAngles, basis_ket, pair_state, qubit_ket, w_state

GRID_POINTS_PER_ANGLE = 12
SIMPLEX_DIAMETER = 1e-6
POSITIVE_EXTRACTION = 1e-10


@dataclass
class CollisionOutcome:
    probe_state: np.ndarray
    concurrence: float
    chain_state_after: np.ndarray


@dataclass
class FixedPointReport:
    fixed_state: np.ndarray
    residual: float
    iterations_to_converge: int
    concurrence: float
    power_state: np.ndarray
    agreement: float


@dataclass
class OptimizationResult:
    best_angles: tuple
    best_concurrence: float
    evaluations: int
    best_signed: float = 0.0


@dataclass
class SweepRecord:
    inputs: dict
    concurrence: float | None = None
    auxiliary: dict = field(default_factory=dict)
    status: str = "ok"
    message: str = ""


def _map(fn, items, workers=None):
    """Ordered map, in a process pool when ``workers > 1``."""
    items = list(items)
    if workers is None:
        workers = 1
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# single collision and the probe channel


def collide_once(chain, probes, lam, j_tau):
    """One pair-local collision of the probes (L, R) with chain spins (1, 2)."""
    chain = check_density(chain)
    probes = check_density(probes)
    u = collision_unitary(lam, j_tau)
    rho = u @ np.kron(chain, probes) @ u.conj().T
    probe_state = partial_trace(rho, (2, 3))
    # Kraus images of a factor of the probes give the concurrence without
    # square roots of the output's tiny eigenvalues
    x = np.einsum("jpr,rl->pjl", collision_kraus(u, chain), density_factor(probes))
    return CollisionOutcome(
        probe_state=probe_state,
        concurrence=concurrence_from_factor(x.reshape(4, -1)).value,
        chain_state_after=partial_trace(rho, (0, 1)),
    )


def channel_superoperator(u, chain):
    """Matrix of ``rho -> Tr_chain[u (chain x rho) u^dag]`` acting on ``rho.ravel()``.

    ``u`` acts on a register whose first two qubits are the chain pair and
    last two the probes.
    """
    u4 = np.asarray(u).reshape(4, 4, 4, 4)
    phi = np.einsum("apcr,cd,aqds->pqrs", u4, chain, u4.conj())
    return phi.reshape(16, 16)


def collision_kraus(u, chain):
    """Kraus operators ``<a| u (sqrt(chain) |k>)`` of the probe channel, shape (16, 4, 4)."""
    u4 = np.asarray(u).reshape(4, 4, 4, 4)
    return np.einsum("apcr,ck->akpr", u4, density_factor(chain)).reshape(16, 4, 4)


def probe_channel(chain, lam, j_tau):
    return channel_superoperator(collision_unitary(lam, j_tau), check_density(chain))


def apply_channel(phi, rho):
    return (phi @ np.asarray(rho, dtype=complex).ravel()).reshape(4, 4)


# ---------------------------------------------------------------------------
# probe optimization


def _angle_grid(points=GRID_POINTS_PER_ANGLE):
    thetas = np.linspace(0.0, np.pi, points)
    phis = np.linspace(0.0, 2 * np.pi, points, endpoint=False)
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    return np.stack([th.ravel(), ph.ravel()], axis=1)


def _single_kets(angles):
    theta, phi = angles[..., 0], angles[..., 1]
    return np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)


def _output_factors(kraus, psi):
    """Factors ``[K_j psi]_j`` of the channel output for a stack of probe kets."""
    return np.einsum("jpr,br->bpj", kraus, psi)


def _signed_extraction(kraus, x):
    psi = np.kron(qubit_ket(x[0], x[1]), qubit_ket(x[2], x[3]))
    return float(signed_from_factors(_output_factors(kraus, psi[None]))[0])


_TOTAL_Z = np.kron(SZ, np.eye(2)) + np.kron(np.eye(2), SZ)


def _z_symmetric(chain):
    return np.abs(chain @ _TOTAL_Z - _TOTAL_Z @ chain).max() < 1e-12


def optimize_probes(chain, lam, j_tau, grid_points=GRID_POINTS_PER_ANGLE):
    """Maximize the extracted concurrence over product states of the two probes.

    A coarse grid over both probes' Bloch angles seeds a Nelder-Mead
    refinement that runs until the simplex is smaller than
    ``SIMPLEX_DIAMETER``. The objective is the signed Wootters quantity
    ``l1 - l2 - l3 - l4`` so the search still has a slope where the
    clipped concurrence is flat at zero.
    """
    chain = check_density(chain)
    kraus = collision_kraus(collision_unitary(lam, j_tau), chain)
    grid = _angle_grid(grid_points)
    left = grid
    if _z_symmetric(chain):
        # XXZ collisions conserve total sz, so a common phase rotation of both
        # probes is a local unitary on the output; only phi_R - phi_L matters
        left = grid[grid[:, 1] == 0.0]
    kets_l, kets_r = _single_kets(left), _single_kets(grid)
    psi = np.einsum("ia,jb->ijab", kets_l, kets_r).reshape(-1, 4)
    signed = signed_from_factors(_output_factors(kraus, psi))
    k = int(np.argmax(signed))
    i, j = divmod(k, len(grid))
    x0 = np.concatenate([left[i], grid[j]])
    best_x, best = x0, float(signed[k])
    evaluations = len(signed)

    step = np.pi / (grid_points - 1) / 2
    simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(4)])
    res = minimize(
        lambda x: -_signed_extraction(kraus, x),
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": SIMPLEX_DIAMETER,
            "fatol": np.inf,
            "maxiter": 20000,
            "maxfev": 40000,
        },
    )
    evaluations += int(res.nfev)
    if -res.fun > best:
        best_x, best = res.x, float(-res.fun)

    angles = (ProbeAngles.wrap(best_x[0], best_x[1]), ProbeAngles.wrap(best_x[2], best_x[3]))
    return OptimizationResult(angles, max(0.0, best), evaluations, best)


def probe_density(angles):
    left, right = angles
    return projector(np.kron(left.ket(), right.ket()))


# ---------------------------------------------------------------------------
# sweeps


def _surface_point(args):
    g, j_tau, lam = args
    inputs = {"g_xx": g, "g_zz": g, "j_tau": j_tau, "lambda": lam}
    if not CorrelationPair.admissible(g, g):
        return SweepRecord(inputs, None, {}, "skipped", f"g={g} gives a non-PSD pair state")
    res = optimize_probes(pair_state(CorrelationPair(g, g)), lam, j_tau)
    aux = {
        "evaluations": res.evaluations,
        "theta_l": res.best_angles[0].theta,
        "phi_l": res.best_angles[0].phi,
        "theta_r": res.best_angles[1].theta,
        "phi_r": res.best_angles[1].phi,
    }
    return SweepRecord(inputs, res.best_concurrence, aux)


def concurrence_surface(g_grid, j_tau_grid, lam, workers=None):
    """Optimized extraction on the ``g_xx = g_zz = g`` by ``j_tau`` grid, g-major."""
    g_grid, j_tau_grid = list(g_grid), list(j_tau_grid)
    if not g_grid or not j_tau_grid:
        raise ValueError("grids must be nonempty")
    points = [(float(g), float(t), float(lam)) for g in g_grid for t in j_tau_grid]
    return _map(_surface_point, points, workers)


# ---------------------------------------------------------------------------
# repeated collisions and fixed points


def repeated_collisions(chain, probes0, lam, j_tau, n):
    """Collide the same probes with ``n`` fresh copies of ``chain``.

    Returns ``(step, concurrence, probe_state)`` after every collision.
    """
    if n < 1:
        raise ValueError(f"need at least one collision, got n={n}")
    chain = check_density(chain)
    rho = check_density(probes0)
    u = collision_unitary(lam, j_tau)
    out = []
    for step in range(1, n + 1):
        full = u @ np.kron(chain, rho) @ u.conj().T
        rho = partial_trace(full, (2, 3))
        out.append((step, concurrence(rho, validate=False).value, rho))
    return out


def _pauli_basis():
    paulis = [np.eye(2, dtype=complex), SX, SY, SZ]
    return np.array([kron(a, b) for a in paulis for b in paulis])


_PAULI2 = _pauli_basis()


def _to_pauli_coords(phi):
    """Real 16x16 transfer matrix ``T`` with ``rho = sum_k r_k P_k / 4``."""
    cols = []
    for p in _PAULI2:
        out = apply_channel(phi, p)
        cols.append([np.trace(q @ out).real for q in _PAULI2])
    return np.array(cols).T / 4.0


def channel_fixed_point(chain, lam, j_tau, tol=1e-12, max_iter=2_000_000):
    """Unique fixed point of the repeated-collision probe channel.

    The primary answer solves ``(T - 1) r = 0`` for the real Pauli
    coordinates ``r`` with the identity component pinned to one (unit
    trace). Power iteration from the maximally mixed state cross-checks it.
    """
    if abs(math.remainder(j_tau, math.pi / 2)) < 1e-12:
        raise ValueError(f"j_tau={j_tau} is a multiple of pi/2; the collision channel has no unique fixed point there")
    phi = probe_channel(chain, lam, j_tau)
    t = _to_pauli_coords(phi)
    a = t[1:, 1:] - np.eye(15)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.min() < 1e-10 * max(1.0, sv.max()):
        raise NumericalError(
            f"fixed point is not unique: {int(np.sum(sv < 1e-10))} extra invariant direction(s) besides the trace"
        )
    r = np.linalg.solve(a, -t[1:, 0])
    coords = np.concatenate([[1.0], r])
    rho = np.einsum("k,kab->ab", coords, _PAULI2) / 4.0
    rho = 0.5 * (rho + rho.conj().T)
    check_density(rho, atol=1e-10)

    vec = (np.eye(4, dtype=complex) / 4).ravel()
    iterations = 0
    check_every = 16
    while iterations < max_iter:
        for _ in range(check_every):
            vec = phi @ vec
        iterations += check_every
        cur = vec.reshape(4, 4)
        if trace_distance(apply_channel(phi, cur), cur) < tol:
            break
    else:
        raise NumericalError(f"power iteration did not converge in {max_iter} steps")
    power = vec.reshape(4, 4)
    power = 0.5 * (power + power.conj().T)
    return FixedPointReport(
        fixed_state=rho,
        residual=trace_distance(apply_channel(phi, rho), rho),
        iterations_to_converge=iterations,
        concurrence=concurrence(rho).value,
        power_state=power,
        agreement=trace_distance(rho, power),
    )


def fit_exponential(curve):
    """Fit ``C(n) = 1 - exp(-kappa n)`` by least squares on ``log(1 - C)``.

    Points with ``1 - C <= 1e-12`` carry no information and are dropped.
    Returns ``(kappa, r_squared)``; r-squared is taken in log space, where
    the fit is done.
    """
    pts = [(float(n), float(c)) for n, c in curve]
    for n, c in pts:
        if not -1e-12 <= c <= 1 + 1e-12:
            raise ValueError(f"concurrence {c} at step {n} outside [0, 1]")
    use = [(n, c) for n, c in pts if 1 - c > 1e-12]
    if len(use) < 3:
        raise ValueError(f"need at least 3 points with C < 1, got {len(use)}")
    n = np.array([p[0] for p in use])
    y = np.log1p(-np.clip([p[1] for p in use], 0.0, None))
    kappa = float(-np.dot(n, y) / np.dot(n, n))
    ss_res = float(np.sum((y + kappa * n) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return kappa, r2


def homogenize_global(chain, probes0, j_tau, n):
    """Repeated collisions through the four-body global partial swap.

    Returns ``(step, fidelity(probe_state, chain))`` after every collision.
    """
    if n < 1:
        raise ValueError(f"need at least one collision, got n={n}")
    chain = check_density(chain)
    rho = check_density(probes0)
    phi = channel_superoperator(global_partial_swap(j_tau), chain)
    out = []
    for step in range(1, n + 1):
        rho = apply_channel(phi, rho)
        rho = 0.5 * (rho + rho.conj().T)
        out.append((step, fidelity(rho, chain)))
    return out


# ---------------------------------------------------------------------------
# many-spin geometries


def _popcounts(dim):
    return np.array([bin(i).count("1") for i in range(dim)])


def evolve_state(h, psi, t):
    """``exp(-i h t) psi``, restricted to one excitation-number sector when possible.

    XXZ couplings conserve the number of up spins. If ``psi`` lives in a
    single sector and ``h`` does not leak out of it, only that block is
    exponentiated.
    """
    psi = np.asarray(psi, dtype=complex)
    counts = _popcounts(len(psi))
    occupied = np.unique(counts[np.abs(psi) > 0])
    if len(occupied) == 1:
        idx = np.nonzero(counts == occupied[0])[0]
        rest = np.nonzero(counts != occupied[0])[0]
        if not np.any(np.abs(h[np.ix_(rest, idx)]) > 0):
            w, v = hermitian_eig(h[np.ix_(idx, idx)])
            out = np.zeros_like(psi)
            out[idx] = (v * np.exp(-1j * w * t)) @ (v.conj().T @ psi[idx])
            return out
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * t)) @ (v.conj().T @ psi)


def _ket_factor(psi, keep):
    """``t`` with ``t t^dag`` the reduced state of ``psi`` on ``keep`` (in order)."""
    n = len(psi).bit_length() - 1
    drop = [q for q in range(n) if q not in keep]
    return np.transpose(psi.reshape((2,) * n), list(keep) + drop).reshape(2 ** len(keep), -1)


def _reduced_from_ket(psi, keep):
    """Reduced density matrix of a pure state on the qubits ``keep`` (in order)."""
    t = _ket_factor(psi, keep)
    return t @ t.conj().T


def w_extraction(n, j_tau):
    """Probe state after ``n`` probes each collide (Heisenberg) with one spin of a W chain."""
    if int(n) != n or not 2 <= n <= 5:
        raise ValueError(f"n={n} outside 2..5")
    n = int(n)
    psi0 = np.kron(w_state(n), basis_ket("0" * n))
    psi = evolve_state(pairwise_collision_hamiltonian(n, lam=1.0), psi0, j_tau)
    return _reduced_from_ket(psi, list(range(n, 2 * n)))


def w_extraction_expected(n, j_tau):
    zero = basis_ket("0" * n)
    return np.cos(2 * j_tau) ** 2 * projector(zero) + np.sin(2 * j_tau) ** 2 * projector(w_state(n))


def spin_star_analytic(L, N, j_tau):
    return 2 * N / L * np.sin(2 * j_tau * np.sqrt(N)) ** 2


def spin_star_extraction(L, N, lam, j_tau):
    """Probe concurrence when each probe couples to its own block of ``N`` spins of a W chain.

    Returns ``(numeric, analytic)``; the closed form is only known for the
    XY coupling, so ``analytic`` is None unless ``lam == 0``.
    """
    cfg = CollisionConfig.spin_star(j_tau, lam, L, N)
    psi0 = np.kron(w_state(L), basis_ket("00"))
    psi = evolve_state(spin_star_hamiltonian(cfg), psi0, j_tau)
    numeric = concurrence_from_factor(_ket_factor(psi, [L, L + 1])).value
    analytic = float(spin_star_analytic(L, N, j_tau)) if lam == 0 else None
    return numeric, analytic


# ---------------------------------------------------------------------------
# thresholds


def _extracts(args):
    g, lam, j_tau = args
    return optimize_probes(pair_state(CorrelationPair(g, g)), lam, j_tau).best_concurrence > POSITIVE_EXTRACTION


def _bisect(predicate, lo, hi, tol):
    """Largest g in [lo, hi] with ``predicate`` true, given it holds at ``lo``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo


def threshold_scan(lam, j_tau_grid, tol=1e-4):
    """Entanglement-extraction thresholds along ``g_xx = g_zz = g``.

    ``g_boundary`` is the largest g for which some ``j_tau`` in the grid
    extracts entanglement; ``g_always`` the largest g for which every
    ``j_tau`` does. Both come from bisection to ``tol``.
    """
    grid = [float(t) for t in j_tau_grid]
    if not grid:
        raise ValueError("j_tau grid must be nonempty")
    # the strongest swaps first for "some", the weakest first for "all"
    by_strength = sorted(grid, key=lambda t: -abs(math.sin(2 * t)))

    def some(g):
        return any(_extracts((g, lam, t)) for t in by_strength)

    def every(g):
        return all(_extracts((g, lam, t)) for t in reversed(by_strength))

    lo = -0.25
    if not some(lo):
        raise ValueError("no extraction even from the singlet on this grid")
    g_boundary = _bisect(some, lo, 0.0, tol)
    if not every(lo):
        raise ValueError("the singlet does not yield extraction at every grid point")
    g_always = _bisect(every, lo, g_boundary + tol, tol)
    return g_boundary, min(g_always, g_boundary)


def default_workers():
    env = os.environ.get("ENTX_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
