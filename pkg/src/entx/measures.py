"""Two-qubit concurrence plus fidelity and trace distance between states."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import SY, ZERO_FLOOR, check_density, clamp_psd, hermitian_eig, sqrtm_psd
from .states import CorrelationPair

_YY = np.kron(SY, SY)


@dataclass(frozen=True)
class ConcurrenceReport:
    value: float
    eigenvalue_roots: tuple

    @property
    def signed(self):
        """``l1 - l2 - l3 - l4`` before clipping; negative inside the separable set."""
        r = self.eigenvalue_roots
        return r[0] - r[1] - r[2] - r[3]

    def __float__(self):
        return self.value


def spin_flip(rho):
    return _YY @ np.conj(rho) @ _YY


def _roots_from_factors(x):
    """Wootters roots for states ``rho = x x^dag``, with ``x`` of shape (..., 4, m).

    The roots are the singular values of the complex-symmetric
    ``x^T (sy sy) x``. A QR step ``x^dag = q r`` shrinks that to the 4x4
    ``conj(r) (sy sy) r^dag`` without changing the singular values, and no
    square root of a small eigenvalue is ever taken.
    """
    x = np.asarray(x, dtype=complex)
    r = np.linalg.qr(np.conj(np.swapaxes(x, -1, -2)), mode="r")
    a = np.conj(r) @ _YY @ np.conj(np.swapaxes(r, -1, -2))
    roots = np.linalg.svd(a, compute_uv=False)
    if roots.shape[-1] < 4:
        pad = np.zeros(roots.shape[:-1] + (4 - roots.shape[-1],))
        roots = np.concatenate([roots, pad], axis=-1)
    return roots[..., :4]


def _report(roots):
    roots = tuple(float(v) for v in roots)
    return ConcurrenceReport(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]), roots)


def density_factor(rho):
    """``x`` with ``x x^dag = rho``, from the eigendecomposition (PSD-clamped, floored)."""
    w, v = hermitian_eig(rho)
    w = clamp_psd(w)
    w = np.where(w <= ZERO_FLOOR * max(w[0], 1.0), 0.0, w)
    return v * np.sqrt(w)


def concurrence(rho, validate=True):
    """Wootters concurrence of a two-qubit density matrix.

    The roots ``l_i`` (square roots of the eigenvalues of ``rho rho~``)
    are the singular values of ``sqrt(rho) sqrt(rho~)``, whose Gram matrix
    is the Hermitian ``sqrt(rho) rho~ sqrt(rho)``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"concurrence needs a 2-qubit state, got shape {rho.shape}")
    if validate:
        check_density(rho)
    return _report(_roots_from_factors(density_factor(rho)))


def concurrence_from_factor(x):
    """Concurrence of ``x x^dag`` for a 4 x m factor, e.g. a reshaped pure state
    or a stack of Kraus images. Avoids forming the density matrix at all."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != 4:
        raise ValueError(f"factor must have shape (4, m), got {x.shape}")
    norm = np.vdot(x, x).real
    if abs(norm - 1) > 1e-10:
        raise ValueError(f"factor describes a state of trace {norm}")
    return _report(_roots_from_factors(x))


def signed_from_factors(xs):
    """Signed ``l1 - l2 - l3 - l4`` for a stack of factors (no validation)."""
    r = _roots_from_factors(xs)
    return r[..., 0] - r[..., 1] - r[..., 2] - r[..., 3]


def concurrence_batch(rhos):
    """Signed ``l1 - l2 - l3 - l4`` for a stack of 4x4 states (no validation)."""
    rhos = np.asarray(rhos, dtype=complex)
    rhos = 0.5 * (rhos + np.conj(np.swapaxes(rhos, -1, -2)))
    w, v = np.linalg.eigh(rhos)
    w = np.where(w <= ZERO_FLOOR * np.maximum(w[..., -1:], 1.0), 0.0, w)
    return signed_from_factors(v * np.sqrt(w)[..., None, :])


def concurrence_closed_form(c):
    """``max(0, -1/2 + 4|g_xx| - 2 g_zz)``, valid when ``|g_xx| >= g_zz``."""
    if not isinstance(c, CorrelationPair):
        c = CorrelationPair(*c)
    if abs(c.g_xx) < c.g_zz:
        raise ValueError(f"closed form requires |g_xx| >= g_zz, got g_xx={c.g_xx}, g_zz={c.g_zz}")
    return max(0.0, -0.5 + 4 * abs(c.g_xx) - 2 * c.g_zz)


def _same_shape(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def fidelity(a, b):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))**2``.

    The trace is the nuclear norm of ``sqrt(a) sqrt(b)``.
    """
    a, b = _same_shape(a, b)
    sv = np.linalg.svd(sqrtm_psd(a) @ sqrtm_psd(b), compute_uv=False)
    return float(min(1.0, np.sum(sv) ** 2))


def trace_distance(a, b):
    a, b = _same_shape(a, b)
    d = a - b
    w = hermitian_eig(0.5 * (d + d.conj().T))[0]
    return float(0.5 * np.sum(np.abs(w)))
