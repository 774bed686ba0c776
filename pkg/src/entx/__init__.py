"""Simulate extraction of entanglement from spin chains onto colliding probe qubits."""

from .gates import (
    CollisionConfig,
    Geometry,
    global_partial_swap,
    global_swap_generator,
    iswap,
    partial_swap,
    spin_star_hamiltonian,
    total_hamiltonian,
    xxz_hamiltonian,
)
from .measures import concurrence, concurrence_closed_form, fidelity, trace_distance
from .protocol import (
    channel_fixed_point,
    collide_once,
    concurrence_surface,
    fit_exponential,
    homogenize_global,
    optimize_probes,
    repeated_collisions,
    spin_star_extraction,
    threshold_scan,
    w_extraction,
)
from .qcore import hermitian_eig, kron, partial_trace, unitary_from_hamiltonian
from .states import (
    CorrelationPair,
    ProbeAngles,
    ground_state_correlations,
    pair_state,
    probe_product_state,
    w_state,
)

__version__ = "0.1.0"
